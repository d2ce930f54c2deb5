// Controller and DOM rendering for the review loop. The controller owns a
// ReviewState, talks to the API, and notifies the view after every change;
// the view is rebuilt from state (small pages, no virtual DOM needed).

import { ApiClient, ApiError } from "./api.js";
import type { CandidateRow, ReviewItem } from "./api.js";
import { renderContext } from "./highlight.js";
import { mapKey } from "./keyboard.js";
import { getLang, setLang, t } from "./messages.js";
import {
  Filters,
  ReviewState,
  advance,
  cancelCustom,
  currentSummary,
  initialState,
  loadFilters,
  saveFilters,
  selectCandidate,
  setCustomText,
  skip,
  startCustom,
} from "./state.js";

export class ReviewController {
  state: ReviewState;
  private listeners: Array<(s: ReviewState) => void> = [];

  constructor(public api: ApiClient, private reviewer = "reviewer",
              filters?: Filters) {
    this.state = initialState(filters ?? loadFilters());
  }

  onChange(fn: (s: ReviewState) => void): void {
    this.listeners.push(fn);
  }

  private update(next: ReviewState): void {
    this.state = next;
    for (const fn of this.listeners) fn(next);
  }

  async start(): Promise<void> {
    await this.refreshQueue();
  }

  async refreshQueue(): Promise<void> {
    const { status, book } = this.state.filters;
    try {
      const [stats, items] = await Promise.all([
        this.api.stats(),
        this.api.listAllOccurrences({
          status: status ?? undefined,
          book: book ?? undefined,
        }),
      ]);
      this.update({
        ...this.state, stats, queue: items, index: 0, item: null,
        selectedIndex: null, errorBanner: null, done: items.length === 0,
      });
      if (items.length > 0) {
        await this.openCurrent();
      }
    } catch (e) {
      this.update({ ...this.state, errorBanner: t("network_error") });
    }
  }

  async openCurrent(): Promise<void> {
    const summary = currentSummary(this.state);
    if (!summary) {
      this.update({ ...this.state, item: null, done: this.state.queue.length === 0 });
      return;
    }
    try {
      const item = await this.api.getOccurrence(summary.occurrence_id);
      this.update({ ...this.state, item, selectedIndex: null, customMode: false,
                    customText: "", validation: null, errorBanner: null });
    } catch (e) {
      this.update({ ...this.state, errorBanner: t("network_error") });
    }
  }

  async setFilters(filters: Filters): Promise<void> {
    saveFilters(filters);
    this.update({ ...this.state, filters });
    await this.refreshQueue();
  }

  select(index: number): void {
    this.update(selectCandidate(this.state, index));
  }

  enterCustom(): void {
    if (this.state.item) this.update(startCustom(this.state));
  }

  cancelCustom(): void {
    this.update(cancelCustom(this.state));
  }

  typeCustom(text: string): void {
    this.update(setCustomText(this.state, text));
  }

  async skipCurrent(): Promise<void> {
    this.update(skip(this.state));
    await this.openCurrent();
  }

  async confirm(): Promise<void> {
    const { item } = this.state;
    if (!item || this.state.pendingWrite) return;
    let body;
    if (this.state.customMode) {
      const term = this.state.customText.trim();
      if (!term) {
        this.update({ ...this.state, validation: t("custom_empty") });
        return;
      }
      body = { custom_arabic_term: term, reviewer: this.reviewer };
    } else {
      if (this.state.selectedIndex === null) {
        this.update({ ...this.state, validation: t("select_first") });
        return;
      }
      const chosen = item.candidates[this.state.selectedIndex];
      body = { candidate_id: chosen.candidate_id, reviewer: this.reviewer };
    }
    // optimistic: mark the choice locally, roll back if the POST fails
    const before = item;
    const optimistic: ReviewItem = {
      ...item,
      candidates: item.candidates.map((c): CandidateRow => ({
        ...c,
        label: body.candidate_id ? c.candidate_id === body.candidate_id : false,
      })),
    };
    this.update({ ...this.state, item: optimistic, pendingWrite: true,
                  validation: null, errorBanner: null });
    try {
      await this.api.postLabel(item.occurrence.occurrence_id, body);
    } catch (e) {
      const message = e instanceof ApiError && e.status === 422
        ? e.message : t("network_error");
      this.update({
        ...this.state, item: before, pendingWrite: false,
        validation: e instanceof ApiError && e.status === 422 ? message : null,
        errorBanner: e instanceof ApiError && e.status === 422 ? null : message,
      });
      return;
    }
    let stats = this.state.stats;
    try {
      stats = await this.api.stats();
    } catch {
      // non-fatal; keep the stale counter
    }
    this.update({ ...advance({ ...this.state, pendingWrite: false, stats }) });
    await this.openCurrent();
  }

  async handleKey(key: string, inInput: boolean): Promise<boolean> {
    const action = mapKey(key, { customMode: this.state.customMode, inInput });
    switch (action.kind) {
      case "select":
        this.select(action.index);
        return true;
      case "confirm":
        await this.confirm();
        return true;
      case "skip":
        await this.skipCurrent();
        return true;
      case "custom":
        this.enterCustom();
        return true;
      case "cancel-custom":
        this.cancelCustom();
        return true;
      default:
        return false;
    }
  }
}

// --- DOM view -----------------------------------------------------------------

function el<K extends keyof HTMLElementTagNameMap>(
    doc: Document, tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderProgress(doc: Document, state: ReviewState): HTMLElement {
  const wrap = el(doc, "div", "progress");
  const stats = state.stats;
  if (stats) {
    const bar = el(doc, "div", "progress-bar");
    const fill = el(doc, "div", "progress-fill");
    const pct = stats.occurrences ? (100 * stats.reviewed) / stats.occurrences : 0;
    fill.style.width = `${pct.toFixed(1)}%`;
    bar.appendChild(fill);
    wrap.appendChild(bar);
    wrap.appendChild(el(doc, "span", "progress-text",
                        t("progress", { reviewed: stats.reviewed,
                                        total: stats.occurrences })));
  }
  if (state.pendingWrite) {
    wrap.appendChild(el(doc, "span", "pending", t("saving")));
  }
  return wrap;
}

function renderCandidates(doc: Document, state: ReviewState,
                          ctl: ReviewController): HTMLElement {
  const item = state.item!;
  const list = el(doc, "ol", "candidates");
  item.candidates.forEach((cand, i) => {
    const li = el(doc, "li", `candidate nest-${Math.min(cand.word_count, 6)}`);
    li.dataset.candidateId = cand.candidate_id;
    if (state.selectedIndex === i) li.classList.add("selected");
    const key = el(doc, "span", "key", i < 9 ? String(i + 1) : "·");
    const surface = el(doc, "bdi", "surface", cand.surface);
    surface.dir = "rtl";
    li.appendChild(key);
    li.appendChild(surface);
    const meta = el(doc, "span", "meta");
    meta.appendChild(el(doc, "span", "words", `${cand.word_count} ${t("words")}`));
    if (cand.score !== null) {
      meta.appendChild(el(doc, "span", "score",
                          `${t("score")} ${cand.score.toFixed(3)}`));
    }
    if (cand.is_variant) meta.appendChild(el(doc, "span", "variant", t("variant")));
    if (cand.label === true) {
      meta.appendChild(el(doc, "span", "label-true",
                          cand.label_provenance === "expert" ? t("expert") : t("draft")));
    }
    li.appendChild(meta);
    if (cand.components) {
      const bars = el(doc, "span", "component-bars");
      for (const [name, value] of Object.entries(cand.components)) {
        const bar = el(doc, "span", "component-bar");
        bar.title = `${name} = ${value.toFixed(3)}`;
        const fill = el(doc, "span", "component-fill");
        fill.style.width = `${Math.min(100, Math.max(0, value * 50))}%`;
        bar.appendChild(fill);
        bars.appendChild(bar);
      }
      li.appendChild(bars);
    }
    li.addEventListener("click", () => ctl.select(i));
    list.appendChild(li);
  });
  return list;
}

export function render(root: HTMLElement, state: ReviewState,
                       ctl: ReviewController): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  const header = el(doc, "header");
  header.appendChild(el(doc, "h1", "", t("app_title")));
  const langBtn = el(doc, "button", "lang-toggle", t("language"));
  langBtn.addEventListener("click", () => {
    setLang(getLang() === "en" ? "ar" : "en");
    render(root, ctl.state, ctl);
  });
  header.appendChild(langBtn);
  header.appendChild(renderProgress(doc, state));

  // filters
  const filters = el(doc, "div", "filters");
  const statusSel = el(doc, "select", "filter-status") as HTMLSelectElement;
  for (const [value, label] of [["unreviewed", t("unreviewed")],
                                ["reviewed", t("reviewed")], ["", t("all")]]) {
    const opt = el(doc, "option", "", label) as HTMLOptionElement;
    opt.value = value;
    statusSel.appendChild(opt);
  }
  statusSel.value = state.filters.status ?? "";
  statusSel.addEventListener("change", () => {
    void ctl.setFilters({
      status: (statusSel.value || null) as Filters["status"],
      book: state.filters.book,
    });
  });
  const bookInput = el(doc, "input", "filter-book") as HTMLInputElement;
  bookInput.placeholder = t("all_books");
  bookInput.value = state.filters.book ?? "";
  bookInput.addEventListener("change", () => {
    void ctl.setFilters({ status: state.filters.status,
                          book: bookInput.value || null });
  });
  filters.appendChild(el(doc, "label", "", t("book")));
  filters.appendChild(bookInput);
  filters.appendChild(statusSel);
  header.appendChild(filters);
  root.appendChild(header);

  if (state.errorBanner) {
    const banner = el(doc, "div", "banner error");
    banner.appendChild(el(doc, "span", "", state.errorBanner));
    const retry = el(doc, "button", "retry", t("retry"));
    retry.addEventListener("click", () => void ctl.refreshQueue());
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  const main = el(doc, "main");
  if (state.done || state.queue.length === 0) {
    main.appendChild(el(doc, "p", "empty",
                        state.done ? t("queue_done") : t("queue_empty")));
    root.appendChild(main);
    return;
  }
  const item = state.item;
  if (!item) {
    root.appendChild(main);
    return;
  }

  const detail = el(doc, "section", "detail");
  const head = el(doc, "div", "occurrence-head");
  const term = el(doc, "bdi", "foreign-headline", item.occurrence.foreign_term);
  term.dir = "ltr";
  head.appendChild(term);
  head.appendChild(el(doc, "span", "book-badge", item.occurrence.book_id));
  detail.appendChild(head);
  const selectedId = state.selectedIndex !== null
    ? item.candidates[state.selectedIndex]?.candidate_id ?? null : null;
  detail.appendChild(renderContext(doc, item, selectedId));
  detail.appendChild(el(doc, "h2", "", t("candidates")));
  detail.appendChild(renderCandidates(doc, state, ctl));

  if (state.validation) {
    detail.appendChild(el(doc, "p", "validation", state.validation));
  }

  const actions = el(doc, "div", "actions");
  const confirmBtn = el(doc, "button", "confirm", t("confirm"));
  confirmBtn.addEventListener("click", () => void ctl.confirm());
  const skipBtn = el(doc, "button", "skip", t("skip"));
  skipBtn.addEventListener("click", () => void ctl.skipCurrent());
  const customBtn = el(doc, "button", "custom", t("custom_term"));
  customBtn.addEventListener("click", () => ctl.enterCustom());
  actions.appendChild(confirmBtn);
  actions.appendChild(skipBtn);
  actions.appendChild(customBtn);
  detail.appendChild(actions);

  if (state.customMode) {
    const custom = el(doc, "div", "custom-entry");
    const input = el(doc, "input", "custom-input") as HTMLInputElement;
    input.dir = "rtl";
    input.lang = "ar";
    input.placeholder = t("custom_placeholder");
    input.value = state.customText;
    input.addEventListener("input", () => ctl.typeCustom(input.value));
    const save = el(doc, "button", "custom-save", t("custom_confirm"));
    save.addEventListener("click", () => void ctl.confirm());
    const cancel = el(doc, "button", "custom-cancel", t("custom_cancel"));
    cancel.addEventListener("click", () => ctl.cancelCustom());
    custom.appendChild(input);
    custom.appendChild(save);
    custom.appendChild(cancel);
    detail.appendChild(custom);
    input.focus();
  }
  main.appendChild(detail);
  root.appendChild(main);
}

export function mountApp(root: HTMLElement, apiBase: string,
                         token?: string): ReviewController {
  const ctl = new ReviewController(new ApiClient(apiBase, token));
  ctl.onChange(() => render(root, ctl.state, ctl));
  const doc = root.ownerDocument;
  doc.addEventListener("keydown", (ev: KeyboardEvent) => {
    const target = ev.target as HTMLElement | null;
    const inInput = !!target && (target.tagName === "INPUT" ||
                                 target.tagName === "TEXTAREA" ||
                                 target.tagName === "SELECT");
    void ctl.handleKey(ev.key, inInput).then((handled) => {
      if (handled) ev.preventDefault();
    });
  });
  void ctl.start();
  return ctl;
}
