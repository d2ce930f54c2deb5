// Message catalog. Every user-visible string goes through t() so the UI can
// switch between English and Arabic chrome.

export type Lang = "en" | "ar";

const CATALOG = {
  en: {
    app_title: "Term review",
    occurrences: "Occurrences",
    unreviewed: "Unreviewed",
    reviewed: "Reviewed",
    all: "All",
    book: "Book",
    all_books: "All books",
    progress: "Reviewed {reviewed} of {total}",
    candidates: "Candidates",
    confirm: "Confirm (Enter)",
    skip: "Skip (N)",
    custom_term: "Custom term (E)",
    custom_placeholder: "Type the correct Arabic term",
    custom_confirm: "Save custom term",
    custom_cancel: "Cancel (Esc)",
    select_first: "Select a candidate before confirming",
    custom_empty: "The custom term is empty",
    saving: "Saving…",
    saved: "Saved",
    retry: "Retry",
    network_error: "Could not reach the server. Nothing was lost.",
    queue_empty: "No occurrences match the current filter.",
    queue_done: "All occurrences in this filter are done.",
    score: "score",
    words: "words",
    variant: "variant",
    draft: "draft",
    expert: "expert",
    language: "العربية",
  },
  ar: {
    app_title: "مراجعة المصطلحات",
    occurrences: "المواضع",
    unreviewed: "غير مراجع",
    reviewed: "مراجع",
    all: "الكل",
    book: "الكتاب",
    all_books: "كل الكتب",
    progress: "تمت مراجعة {reviewed} من {total}",
    candidates: "المرشحات",
    confirm: "تأكيد (Enter)",
    skip: "تخطي (N)",
    custom_term: "مصطلح آخر (E)",
    custom_placeholder: "اكتب المصطلح العربي الصحيح",
    custom_confirm: "حفظ المصطلح",
    custom_cancel: "إلغاء (Esc)",
    select_first: "اختر مرشحا قبل التأكيد",
    custom_empty: "حقل المصطلح فارغ",
    saving: "جارٍ الحفظ…",
    saved: "تم الحفظ",
    retry: "إعادة المحاولة",
    network_error: "تعذر الوصول إلى الخادم. لم يفقد شيء.",
    queue_empty: "لا مواضع مطابقة للمرشح الحالي.",
    queue_done: "اكتملت مراجعة مواضع هذا المرشح.",
    score: "النتيجة",
    words: "كلمات",
    variant: "صيغة",
    draft: "مسودة",
    expert: "خبير",
    language: "English",
  },
} as const;

export type MessageKey = keyof typeof CATALOG.en;

let current: Lang = "en";

export function setLang(lang: Lang): void {
  current = lang;
}

export function getLang(): Lang {
  return current;
}

export function t(key: MessageKey, vars?: Record<string, string | number>): string {
  let text: string = CATALOG[current][key] ?? CATALOG.en[key];
  if (vars) {
    for (const [k, v] of Object.entries(vars)) {
      text = text.replace(`{${k}}`, String(v));
    }
  }
  return text;
}
