"""Per-candidate features: three similarities, entity pair, POS, phonetic
match, plus the per-occurrence rank/difference augmentation.

Lengths in the lexical ratio count Unicode scalar values INCLUDING spaces;
both published worked examples reproduce to two decimals under that
convention and break under the alternative. Similarity inputs are
pre-normalized with the matching profile (tatweel/diacritics removed, alef
variants left alone so hamza-seated vs bare alef stays one edit apart).
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candgen import Candidate
from .extract import Occurrence
from .providers import (
    ENTITY_LABELS,
    ENTITY_NONE,
    POS_FALLBACK,
    POS_TAGS,
    ProviderSet,
    ProviderUnavailable,
)
from .textnorm import MATCHING_PROFILE, NormalizationProfile, normalize_arabic, tokenize


class BothEmpty(ValueError):
    """lexical_ratio over two empty strings is undefined."""


class NoLetters(ValueError):
    """soundex needs at least one letter."""


class EmptyGroup(ValueError):
    """An occurrence group operation got an empty list."""


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode scalar values."""
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return len(b)
    prev = list(range(len(a) + 1))
    for i, cb in enumerate(b, start=1):
        cur = [i] + [0] * len(a)
        for j, ca in enumerate(a, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def lexical_ratio(t: str, s: str) -> float:
    """(len(t)+len(s)-distance) / (len(t)+len(s)), lengths space-inclusive."""
    total = len(t) + len(s)
    if total == 0:
        raise BothEmpty("lexical_ratio needs at least one nonempty string")
    return (total - levenshtein(t, s)) / total


# --- phonetic ----------------------------------------------------------------

# Fixed Arabic-to-Latin romanization used before soundex coding. Changing
# any entry changes phonetic feature values (breaking change).
ARABIC_ROMANIZATION = {
    "ا": "a", "أ": "a", "إ": "a", "آ": "a", "ٱ": "a",
    "ب": "b", "ت": "t", "ث": "th", "ج": "j", "ح": "h", "خ": "kh",
    "د": "d", "ذ": "dh", "ر": "r", "ز": "z", "س": "s", "ش": "sh",
    "ص": "s", "ض": "d", "ط": "t", "ظ": "z", "ع": "", "غ": "gh",
    "ف": "f", "ق": "q", "ك": "k", "ل": "l", "م": "m", "ن": "n",
    "ه": "h", "ة": "h", "و": "w", "ؤ": "w", "ي": "y", "ئ": "y",
    "ى": "a", "ء": "",
}

_SOUNDEX_DIGITS = {}
for _letters, _d in (("BFPV", "1"), ("CGJKQSXZ", "2"), ("DT", "3"),
                     ("L", "4"), ("MN", "5"), ("R", "6")):
    for _c in _letters:
        _SOUNDEX_DIGITS[_c] = _d


def romanize_arabic(text: str) -> str:
    """Romanize Arabic letters via the fixed table; ASCII passes through."""
    out = []
    for c in text:
        if c in ARABIC_ROMANIZATION:
            out.append(ARABIC_ROMANIZATION[c])
        elif c.isascii():
            out.append(c)
    return "".join(out)


def soundex(token: str) -> str:
    """Standard Russell soundex code (letter + 3 digits).

    Arabic tokens are romanized first. Vowels separate duplicate codes;
    H and W do not.
    """
    latin = romanize_arabic(token).upper()
    letters = [c for c in latin if "A" <= c <= "Z"]
    if not letters:
        raise NoLetters(f"no letters to encode in {token!r}")
    first = letters[0]
    code = [first]
    prev = _SOUNDEX_DIGITS.get(first, "0")
    for c in letters[1:]:
        if c in "HW":
            continue
        d = _SOUNDEX_DIGITS.get(c, "0")
        if d == "0":
            prev = "0"
            continue
        if d != prev:
            code.append(d)
            prev = d
        if len(code) == 4:
            break
    return "".join(code).ljust(4, "0")


def _word_codes(text: str) -> list[str | None]:
    codes: list[str | None] = []
    for tok in tokenize(text):
        if not tok.is_word():
            continue
        try:
            codes.append(soundex(tok.text))
        except NoLetters:
            codes.append(None)
    return codes


def phonetic_similar(candidate: str, foreign: str) -> bool:
    """True iff both sides have the same word count and every aligned word
    pair shares a soundex code."""
    a, b = _word_codes(candidate), _word_codes(foreign)
    return len(a) == len(b) and len(a) > 0 and all(x == y and x is not None
                                                   for x, y in zip(a, b))


# --- provider-backed features -------------------------------------------------

def semantic_similarity(cand: Candidate, f: str, p: ProviderSet) -> float:
    """Cosine of the two embeddings, clamped into [0, 1]."""
    cos = float(np.dot(p.embed(f.strip()), p.embed(cand.surface)))
    return min(1.0, max(0.0, cos))


def translation_similarity(cand: Candidate, f: str, p: ProviderSet,
                           profile: NormalizationProfile = MATCHING_PROFILE) -> float:
    t = normalize_arabic(p.translate(f.strip()), profile)
    if not t and not cand.normalized:
        return 0.0
    return lexical_ratio(t, cand.normalized)


def transliteration_similarity(cand: Candidate, f: str, p: ProviderSet,
                               profile: NormalizationProfile = MATCHING_PROFILE) -> float:
    t = normalize_arabic(p.transliterate(f.strip()), profile)
    if not t and not cand.normalized:
        return 0.0
    return lexical_ratio(t, cand.normalized)


def entity_feature(cand: Candidate, f: str, p: ProviderSet,
                   context: str | None = None) -> tuple[str, str]:
    """(candidate entity, source-term entity); absence maps to "none"."""
    return p.entity(cand.surface, context), p.entity(f.strip(), None)


def pos_first_word(cand: Candidate, p: ProviderSet) -> str:
    first = cand.surface.split(" ", 1)[0]
    return p.pos(first, cand.surface)


# --- feature vectors ----------------------------------------------------------

@dataclass(frozen=True)
class FeatureVector:
    candidate_id: str
    occurrence_id: str
    semantic: float
    trans_lex: float
    translit_lex: float
    entity: str
    source_entity: str
    pos_first: str
    phonetic: bool
    semantic_rank: int = 0
    trans_lex_rank: int = 0
    translit_lex_rank: int = 0
    semantic_diff: float = 0.0
    trans_lex_diff: float = 0.0
    translit_lex_diff: float = 0.0
    label: bool | None = None
    flags: tuple[str, ...] = ()
    book_id: str = ""
    word_count: int = 0


def compute_base_features(cand: Candidate, occ: Occurrence, p: ProviderSet,
                          ner_on_context: bool = True,
                          profile: NormalizationProfile = MATCHING_PROFILE) -> FeatureVector:
    """The six base features for one candidate; augmentation comes later.

    A provider failure records the neutral value for that feature plus a
    flag naming the failed provider.
    """
    f = occ.foreign_term
    flags: list[str] = []

    def guarded(name, fn, default):
        try:
            return fn()
        except ProviderUnavailable:
            flags.append(name)
            return default

    sem = guarded("embedder", lambda: semantic_similarity(cand, f, p), 0.0)
    l1 = guarded("translator", lambda: translation_similarity(cand, f, p, profile), 0.0)
    l2 = guarded("transliterator",
                 lambda: transliteration_similarity(cand, f, p, profile), 0.0)
    ctx = occ.context_text if ner_on_context else None
    ent, src_ent = guarded("ner", lambda: entity_feature(cand, f, p, ctx),
                           (ENTITY_NONE, ENTITY_NONE))
    pos = guarded("pos", lambda: pos_first_word(cand, p), POS_FALLBACK)
    return FeatureVector(
        candidate_id=cand.candidate_id,
        occurrence_id=cand.occurrence_id,
        semantic=sem,
        trans_lex=l1,
        translit_lex=l2,
        entity=ent,
        source_entity=src_ent,
        pos_first=pos,
        phonetic=phonetic_similar(cand.surface, f),
        flags=tuple(flags),
        book_id=cand.book_id,
        word_count=cand.word_count,
    )


def augment(occ_vectors: list[FeatureVector]) -> list[FeatureVector]:
    """Fill the rank and difference features within one occurrence group.

    rank(j) is the index of the first equal value in the descending-sorted
    array (ties share the smaller rank); diff(j) is max - value(j).
    """
    if not occ_vectors:
        raise EmptyGroup("augment needs at least one vector")
    occ_ids = {v.occurrence_id for v in occ_vectors}
    if len(occ_ids) != 1:
        raise ValueError(f"augment got vectors from several occurrences: {sorted(occ_ids)}")
    out = []
    columns = {}
    for feat in ("semantic", "trans_lex", "translit_lex"):
        values = [getattr(v, feat) for v in occ_vectors]
        top = max(values)
        columns[feat] = [(sum(1 for u in values if u > x), top - x) for x in values]
    for i, v in enumerate(occ_vectors):
        out.append(dataclasses.replace(
            v,
            semantic_rank=columns["semantic"][i][0],
            semantic_diff=columns["semantic"][i][1],
            trans_lex_rank=columns["trans_lex"][i][0],
            trans_lex_diff=columns["trans_lex"][i][1],
            translit_lex_rank=columns["translit_lex"][i][0],
            translit_lex_diff=columns["translit_lex"][i][1],
        ))
    return out


def compute_occurrence_features(occ: Occurrence, candidates: list[Candidate],
                                p: ProviderSet, ner_on_context: bool = True,
                                profile: NormalizationProfile = MATCHING_PROFILE,
                                ) -> list[FeatureVector]:
    vectors = [compute_base_features(c, occ, p, ner_on_context, profile)
               for c in candidates]
    return augment(vectors) if vectors else []


# Training-data column order. This is the schema contract for the CSV file;
# the model's encoder and loaders depend on it.
FEATURE_CSV_COLUMNS = [
    "candidate_id", "occurrence_id", "book_id", "word_count",
    "semantic", "trans_lex", "translit_lex",
    "entity", "source_entity", "pos_first", "phonetic",
    "semantic_rank", "semantic_diff",
    "trans_lex_rank", "trans_lex_diff",
    "translit_lex_rank", "translit_lex_diff",
    "label", "flags",
]


def _vector_row(v: FeatureVector) -> list[str]:
    return [
        v.candidate_id, v.occurrence_id, v.book_id, str(v.word_count),
        repr(v.semantic), repr(v.trans_lex), repr(v.translit_lex),
        v.entity, v.source_entity, v.pos_first, "true" if v.phonetic else "false",
        str(v.semantic_rank), repr(v.semantic_diff),
        str(v.trans_lex_rank), repr(v.trans_lex_diff),
        str(v.translit_lex_rank), repr(v.translit_lex_diff),
        "" if v.label is None else ("true" if v.label else "false"),
        ";".join(v.flags),
    ]


def write_features_csv(vectors: list[FeatureVector], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_CSV_COLUMNS)
        for v in vectors:
            w.writerow(_vector_row(v))


def read_features_csv(path: str | Path) -> list[FeatureVector]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(FeatureVector(
                candidate_id=row["candidate_id"],
                occurrence_id=row["occurrence_id"],
                book_id=row["book_id"],
                word_count=int(row["word_count"]),
                semantic=float(row["semantic"]),
                trans_lex=float(row["trans_lex"]),
                translit_lex=float(row["translit_lex"]),
                entity=row["entity"] if row["entity"] in ENTITY_LABELS else ENTITY_NONE,
                source_entity=(row["source_entity"]
                               if row["source_entity"] in ENTITY_LABELS else ENTITY_NONE),
                pos_first=row["pos_first"] if row["pos_first"] in POS_TAGS else POS_FALLBACK,
                phonetic=row["phonetic"] == "true",
                semantic_rank=int(row["semantic_rank"]),
                semantic_diff=float(row["semantic_diff"]),
                trans_lex_rank=int(row["trans_lex_rank"]),
                trans_lex_diff=float(row["trans_lex_diff"]),
                translit_lex_rank=int(row["translit_lex_rank"]),
                translit_lex_diff=float(row["translit_lex_diff"]),
                label=None if row["label"] == "" else row["label"] == "true",
                flags=tuple(f for f in row["flags"].split(";") if f),
            ))
    return out


def write_features_jsonl(vectors: list[FeatureVector], path: str | Path) -> None:
    """JSON-lines mirror of the CSV, same fields."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in vectors:
            d = dataclasses.asdict(v)
            d["flags"] = list(v.flags)
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")
