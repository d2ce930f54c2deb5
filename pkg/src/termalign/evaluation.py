"""Metrics, book-level splitting, suggestion aggregation, glossary top-k
accuracy, and the translation-consistency report."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .textnorm import GROUPING_PROFILE, normalize_arabic, normalize_foreign_loose

log = logging.getLogger(__name__)


class LengthMismatch(ValueError):
    pass


class OverlappingSets(ValueError):
    pass


class EmptyGlossary(ValueError):
    pass


# --- precision / recall / F1 ---------------------------------------------------

@dataclass
class EvaluationReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    mode: str = "classification"  # or "selection"
    degenerate: bool = False  # no predicted positives or no true positives
    per_book: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "degenerate": self.degenerate,
            "per_book": self.per_book,
        }

    def render(self) -> str:
        lines = [
            f"mode       {self.mode}",
            f"precision  {self.precision:.4f}",
            f"recall     {self.recall:.4f}",
            f"f1         {self.f1:.4f}",
            f"counts     tp={self.tp} fp={self.fp} fn={self.fn} tn={self.tn}",
        ]
        for book in sorted(self.per_book):
            b = self.per_book[book]
            lines.append(f"  {book}: P={b['precision']:.4f} R={b['recall']:.4f} F1={b['f1']:.4f}")
        return "\n".join(lines)


def prf(predictions: list[bool], labels: list[bool], mode: str = "classification") -> EvaluationReport:
    """Precision/recall/F1 on the True class."""
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(labels)} labels")
    if not predictions:
        raise LengthMismatch("empty inputs")
    tp = fp = fn = tn = 0
    for p, l in zip(predictions, labels):
        if p and l:
            tp += 1
        elif p and not l:
            fp += 1
        elif not p and l:
            fn += 1
        else:
            tn += 1
    degenerate = (tp + fp == 0) or (tp + fn == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvaluationReport(precision=precision, recall=recall, f1=f1,
                            tp=tp, fp=fp, fn=fn, tn=tn, mode=mode, degenerate=degenerate)


def prf_by_book(predictions: list[bool], labels: list[bool], book_ids: list[str],
                mode: str = "classification") -> EvaluationReport:
    report = prf(predictions, labels, mode)
    for book in sorted(set(book_ids)):
        rows = [(p, l) for p, l, b in zip(predictions, labels, book_ids) if b == book]
        sub = prf([p for p, _ in rows], [l for _, l in rows], mode)
        report.per_book[book] = {"precision": sub.precision, "recall": sub.recall,
                                 "f1": sub.f1, "n": len(rows)}
    return report


# --- book-level split -----------------------------------------------------------

@dataclass
class SplitResult:
    train: list
    test: list
    excluded: list

    @property
    def excluded_count(self) -> int:
        return len(self.excluded)


def book_split(instances: list, train_books: set[str], test_books: set[str]) -> SplitResult:
    """Partition labeled instances by their book_id; unknown books are
    excluded (and counted), never silently mixed in."""
    overlap = set(train_books) & set(test_books)
    if overlap:
        raise OverlappingSets(f"books in both sets: {sorted(overlap)}")
    if not test_books:
        log.warning("book_split: empty test book set")
    train, test, excluded = [], [], []
    for inst in instances:
        if inst.book_id in train_books:
            train.append(inst)
        elif inst.book_id in test_books:
            test.append(inst)
        else:
            excluded.append(inst)
    if excluded:
        log.info("book_split: excluded %d instances from unlisted books", len(excluded))
    return SplitResult(train=train, test=test, excluded=excluded)


# --- suggestion aggregation ------------------------------------------------------

@dataclass(frozen=True)
class Suggestion:
    """One scored candidate surface from one occurrence of a term."""
    occurrence_id: str
    surface: str
    score: float


@dataclass
class AggregatedTranslation:
    arabic_term: str
    aggregate_score: float
    occurrence_count: int
    occurrence_ids: list[str] = field(default_factory=list)


def _arabic_key(text: str) -> str:
    return " ".join(normalize_arabic(text, GROUPING_PROFILE).split())


def aggregate_suggestions(term: str, suggestions: list[Suggestion]) -> list[AggregatedTranslation]:
    """Group scored surfaces by normalized Arabic text and sum their scores
    across occurrences; highest aggregate first, ties broken by surface."""
    groups: dict[str, dict] = {}
    for s in suggestions:
        key = _arabic_key(s.surface)
        g = groups.setdefault(key, {"surfaces": set(), "score": 0.0, "occ": set()})
        g["surfaces"].add(s.surface)
        g["score"] += s.score
        g["occ"].add(s.occurrence_id)
    out = [
        AggregatedTranslation(
            arabic_term=min(g["surfaces"]),
            aggregate_score=g["score"],
            occurrence_count=len(g["occ"]),
            occurrence_ids=sorted(g["occ"]),
        )
        for g in groups.values()
    ]
    out.sort(key=lambda a: (-a.aggregate_score, a.arabic_term))
    return out


# --- glossary evaluation ----------------------------------------------------------

@dataclass(frozen=True)
class GlossaryConcept:
    english: str
    french: str
    arabic: str


def read_glossary_csv(path: str | Path) -> list[GlossaryConcept]:
    """CSV with header english,french,arabic. Rows missing the Arabic term or
    both foreign terms are skipped with a warning."""
    concepts = []
    skipped = 0
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            english = (row.get("english") or "").strip()
            french = (row.get("french") or "").strip()
            arabic = (row.get("arabic") or "").strip()
            if not arabic or not (english or french):
                skipped += 1
                continue
            concepts.append(GlossaryConcept(english, french, arabic))
    if skipped:
        log.warning("glossary: skipped %d invalid rows", skipped)
    return concepts


def topk_accuracy(glossary: list[GlossaryConcept],
                  suggestions: dict[str, list[AggregatedTranslation]],
                  k: int) -> float:
    """Over concepts whose english or french term matches an extracted
    foreign term, the fraction whose expert Arabic term appears in the
    top-k aggregated suggestions."""
    if not glossary:
        raise EmptyGlossary("no glossary concepts")
    if k < 1:
        raise ValueError("k must be >= 1")
    by_foreign = {normalize_foreign_loose(term): entry
                  for term, entry in suggestions.items()}
    matched = hits = 0
    for concept in glossary:
        entry = None
        for side in (concept.english, concept.french):
            if side and normalize_foreign_loose(side) in by_foreign:
                entry = by_foreign[normalize_foreign_loose(side)]
                break
        if entry is None:
            continue
        matched += 1
        want = _arabic_key(concept.arabic)
        if any(_arabic_key(agg.arabic_term) == want for agg in entry[:k]):
            hits += 1
    return hits / matched if matched else 0.0


def glossary_report(glossary: list[GlossaryConcept],
                    suggestions: dict[str, list[AggregatedTranslation]],
                    ks: tuple[int, ...] = (1, 2, 3)) -> dict:
    by_foreign = {normalize_foreign_loose(t) for t in suggestions}
    matched = sum(
        1 for c in glossary
        if any(s and normalize_foreign_loose(s) in by_foreign for s in (c.english, c.french))
    )
    return {
        "glossary_concepts": len(glossary),
        "extracted_terms": len(suggestions),
        "matched_concepts": matched,
        "topk_accuracy": {str(k): topk_accuracy(glossary, suggestions, k) for k in ks},
    }


# --- consistency report -------------------------------------------------------------

@dataclass
class ConsistencyFinding:
    foreign_term: str
    translations: list[tuple[str, int]]  # (arabic term, occurrence count)
    occurrence_ids: list[str]


def consistency_report(entries) -> list[ConsistencyFinding]:
    """Foreign terms carrying two or more distinct normalized Arabic
    translations, with counts and source occurrence ids."""
    findings = []
    for entry in entries:
        groups: dict[str, dict] = {}
        for tr in entry.translations:
            key = _arabic_key(tr.arabic_term)
            g = groups.setdefault(key, {"term": tr.arabic_term, "count": 0})
            g["count"] += tr.occurrence_count
        if len(groups) < 2:
            continue
        translations = sorted(((g["term"], g["count"]) for g in groups.values()),
                              key=lambda p: (-p[1], p[0]))
        findings.append(ConsistencyFinding(
            foreign_term=entry.foreign_term,
            translations=translations,
            occurrence_ids=sorted(entry.evidence),
        ))
    findings.sort(key=lambda f: f.foreign_term)
    return findings


def render_consistency_tsv(findings: list[ConsistencyFinding]) -> str:
    lines = ["foreign_term\tarabic_term\toccurrences\tsources"]
    for f in findings:
        for arabic, count in f.translations:
            lines.append(f"{f.foreign_term}\t{arabic}\t{count}\t{';'.join(f.occurrence_ids)}")
    return "\n".join(lines) + "\n"
