"""Synthetic demo corpus with planted term pairs.

Generates Arabic-looking paragraphs where each paragraph introduces one
foreign term in parentheses directly after its planted Arabic translation,
padded with filler prose. The filler and planted lexicons are disjoint, so
the correct candidate for every occurrence is exactly the planted string.
Useful for demos and for end-to-end pipeline verification; the matching
translator/transliterator tables make the lexical features decisive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .textnorm import GROUPING_PROFILE, normalize_arabic

# Arabic words used ONLY inside planted translations.
_PLANTED_HEADS = [
    "المفاعل", "الحكومة", "الجامعة", "المنظمة", "الشركة", "المجلس",
    "البرلمان", "الوكالة", "المحكمة", "المصرف", "الجمعية", "المرصد",
    "المعهد", "الاتحاد", "الهيئة", "المختبر", "الصندوق", "المكتبة",
    "المتحف", "المرفأ",
]
_PLANTED_MODS = [
    "النووي", "الفيدرالية", "التقنية", "الدولية", "الصناعية", "الأعلى",
    "الأوروبي", "الفضائية", "الدستورية", "المركزي", "الملكية", "الفلكي",
    "التطبيقي", "الجمركي", "الرقابية", "البحري", "السيادي", "الوطنية",
    "الحديث", "الشمالي",
]

# Filler prose vocabulary, disjoint from the planted lexicons.
_FILLER = [
    "قال", "كتب", "ذكر", "أشار", "المؤلف", "الباحث", "كتابه", "أن",
    "هذا", "المفهوم", "يعتبر", "من", "أهم", "القضايا", "التي", "ناقشها",
    "العلماء", "خلال", "القرن", "الماضي", "حيث", "تناول", "الموضوع",
    "بشكل", "مفصل", "وأوضح", "الفكرة", "الرئيسية", "للنص", "عند",
    "دراسة", "تاريخ", "المنطقة", "نجد", "إشارات", "كثيرة", "إلى",
]

_FOREIGN_STEMS = ["Bar", "Den", "Fol", "Gam", "Hor", "Kin", "Lem", "Mon",
                  "Nor", "Pel", "Ser", "Tor", "Vin", "Wes", "Zan", "Cal",
                  "Dor", "Fen", "Gri", "Hul"]
_FOREIGN_SUFFIXES = ["a", "en", "ia", "or", "us", "ette", "ine", "o"]


@dataclass(frozen=True)
class PlantedTerm:
    foreign: str
    arabic: str


@dataclass
class PlantedCorpus:
    books: dict[str, str]  # book_id -> text
    terms: list[PlantedTerm]
    occurrences_per_term: dict[str, int] = field(default_factory=dict)

    @property
    def truth(self) -> dict[str, str]:
        """foreign term -> planted Arabic translation."""
        return {t.foreign: t.arabic for t in self.terms}


def arabic_truth_key(text: str) -> str:
    return " ".join(normalize_arabic(text, GROUPING_PROFILE).split())


def generate_planted_corpus(n_paragraphs: int = 200, n_books: int = 10,
                            n_terms: int = 40, seed: int = 7) -> PlantedCorpus:
    rng = random.Random(seed)
    pairs = [(h, m) for h in _PLANTED_HEADS for m in _PLANTED_MODS]
    rng.shuffle(pairs)
    foreigners: list[str] = []
    while len(foreigners) < n_terms:
        name = rng.choice(_FOREIGN_STEMS) + rng.choice(_FOREIGN_SUFFIXES)
        if rng.random() < 0.4:
            name += " " + rng.choice(_FOREIGN_STEMS) + rng.choice(_FOREIGN_SUFFIXES)
        if name not in foreigners:
            foreigners.append(name)
    terms = []
    for i, foreign in enumerate(foreigners):
        head, mod = pairs[i]
        arabic = head if i % 5 == 0 else f"{head} {mod}"
        terms.append(PlantedTerm(foreign=foreign, arabic=arabic))

    books: dict[str, list[str]] = {f"book{b:02d}": [] for b in range(n_books)}
    book_ids = sorted(books)
    per_term: dict[str, int] = {t.foreign: 0 for t in terms}
    for p in range(n_paragraphs):
        term = terms[p % len(terms)]
        per_term[term.foreign] += 1
        lead = " ".join(rng.choice(_FILLER) for _ in range(rng.randint(3, 8)))
        n_before = rng.randint(0, 4)
        before = " ".join(rng.choice(_FILLER) for _ in range(n_before))
        tail = " ".join(rng.choice(_FILLER) for _ in range(rng.randint(2, 6)))
        mid = f"{before} {term.arabic}".strip()
        # sentence break after the lead so the candidate window stays small
        paragraph = f"{lead}. {mid} ({term.foreign}) {tail}."
        books[book_ids[p % n_books]].append(paragraph)
    return PlantedCorpus(
        books={b: "\n\n".join(ps) + "\n" for b, ps in books.items()},
        terms=terms,
        occurrences_per_term=per_term,
    )


def write_corpus(corpus: PlantedCorpus, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for book_id, text in sorted(corpus.books.items()):
        (out / f"{book_id}.txt").write_text(text, encoding="utf-8")
    return out


def write_provider_tables(corpus: PlantedCorpus, out_dir: str | Path) -> dict[str, Path]:
    """translations.tsv and transliterations.tsv mapping each planted foreign
    term to its Arabic translation."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = "".join(f"{t.foreign}\t{t.arabic}\n" for t in sorted(
        corpus.terms, key=lambda t: t.foreign))
    paths = {}
    for name in ("translations", "transliterations"):
        path = out / f"{name}.tsv"
        path.write_text(rows, encoding="utf-8")
        paths[name] = path
    return paths


def write_glossary_csv(corpus: PlantedCorpus, path: str | Path) -> Path:
    """Glossary over the planted terms (english column carries the foreign term)."""
    path = Path(path)
    lines = ["english,french,arabic"]
    for t in sorted(corpus.terms, key=lambda t: t.foreign):
        lines.append(f"{t.foreign},,{t.arabic}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
