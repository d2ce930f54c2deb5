"""File-backed store and termbase assembly.

The store is a directory of JSON-lines files plus an append-only annotation
log; no database. Layout under the store root:

    occurrences.jsonl      candidates.jsonl      features.csv
    scores.jsonl           annotations.log.jsonl termbase.tsv

Annotations are append-only; the current-label view is the latest expert
record per candidate, else the latest draft. Writing True flips any prior
True of the same occurrence to False, and the flip itself is appended to
the log, so replaying the log reproduces the view.
"""

from __future__ import annotations

import datetime as _dt
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .candgen import Candidate, read_candidates_jsonl, write_candidates_jsonl
from .evaluation import Suggestion, aggregate_suggestions
from .extract import Occurrence, read_occurrences_jsonl, write_occurrences_jsonl
from .features import FeatureVector, read_features_csv, write_features_csv
from .textnorm import normalize_foreign

PROVENANCE_DRAFT = "heuristic-draft"
PROVENANCE_EXPERT = "expert"

STATUS_AUTO = "auto"
STATUS_CONFIRMED = "expert-confirmed"
STATUS_CORRECTED = "expert-corrected"

# Draft records written by the batch pipeline use this fixed timestamp so
# repeated runs stay byte-identical; expert records carry real time.
DRAFT_TIMESTAMP = "1970-01-01T00:00:00Z"


class DanglingReference(ValueError):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class AnnotationRecord:
    candidate_id: str
    label: bool
    provenance: str  # heuristic-draft | expert
    reviewer: str
    timestamp: str
    occurrence_id: str = ""
    custom_arabic_term: str | None = None  # expert-only synthesized candidate

    def to_dict(self) -> dict:
        d = {
            "candidate_id": self.candidate_id,
            "label": self.label,
            "provenance": self.provenance,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
            "occurrence_id": self.occurrence_id,
        }
        if self.custom_arabic_term is not None:
            d["custom_arabic_term"] = self.custom_arabic_term
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            candidate_id=d["candidate_id"],
            label=bool(d["label"]),
            provenance=d["provenance"],
            reviewer=d.get("reviewer", ""),
            timestamp=d.get("timestamp", ""),
            occurrence_id=d.get("occurrence_id", ""),
            custom_arabic_term=d.get("custom_arabic_term"),
        )


@dataclass(frozen=True)
class ScoreRecord:
    """Per-candidate score from the active scorer (heuristic or model)."""
    candidate_id: str
    occurrence_id: str
    score: float
    selected: bool
    scorer: str
    components: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "candidate_id": self.candidate_id,
            "occurrence_id": self.occurrence_id,
            "score": self.score,
            "selected": self.selected,
            "scorer": self.scorer,
        }
        if self.components is not None:
            d["components"] = self.components
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreRecord":
        return cls(
            candidate_id=d["candidate_id"],
            occurrence_id=d["occurrence_id"],
            score=float(d["score"]),
            selected=bool(d["selected"]),
            scorer=d.get("scorer", ""),
            components=d.get("components"),
        )


def _provenance_rank(p: str) -> int:
    return 1 if p == PROVENANCE_EXPERT else 0


class Store:
    """Single-writer, multi-reader directory store."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.occurrences_path = self.root / "occurrences.jsonl"
        self.candidates_path = self.root / "candidates.jsonl"
        self.features_path = self.root / "features.csv"
        self.scores_path = self.root / "scores.jsonl"
        self.annotations_path = self.root / "annotations.log.jsonl"
        self.termbase_path = self.root / "termbase.tsv"
        self.model_path = self.root / "model.json"
        self._write_lock = threading.Lock()

    # -- bulk artifacts (write-then-rename) --

    def _atomic_write(self, path: Path, writer) -> None:
        tmp = path.with_name(path.name + ".tmp")
        writer(tmp)
        tmp.replace(path)

    def save_occurrences(self, occurrences: list[Occurrence]) -> None:
        self._atomic_write(self.occurrences_path,
                           lambda p: write_occurrences_jsonl(occurrences, p))

    def load_occurrences(self) -> list[Occurrence]:
        return read_occurrences_jsonl(self.occurrences_path)

    def save_candidates(self, candidates: list[Candidate]) -> None:
        self._atomic_write(self.candidates_path,
                           lambda p: write_candidates_jsonl(candidates, p))

    def load_candidates(self) -> list[Candidate]:
        return read_candidates_jsonl(self.candidates_path)

    def save_features(self, vectors: list[FeatureVector]) -> None:
        self._atomic_write(self.features_path,
                           lambda p: write_features_csv(vectors, p))

    def load_features(self) -> list[FeatureVector]:
        return read_features_csv(self.features_path)

    def save_scores(self, records: list[ScoreRecord]) -> None:
        def write(p):
            with open(p, "w", encoding="utf-8", newline="\n") as fh:
                for r in records:
                    fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
        self._atomic_write(self.scores_path, write)

    def load_scores(self) -> list[ScoreRecord]:
        if not self.scores_path.exists():
            return []
        out = []
        with open(self.scores_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(ScoreRecord.from_dict(json.loads(line)))
        return out

    # -- annotations (append-only) --

    def load_annotations(self) -> list[AnnotationRecord]:
        if not self.annotations_path.exists():
            return []
        out = []
        with open(self.annotations_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(AnnotationRecord.from_dict(json.loads(line)))
        return out

    def _append_records(self, records: list[AnnotationRecord]) -> None:
        with open(self.annotations_path, "a", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
            fh.flush()

    def label_view(self, annotations: list[AnnotationRecord] | None = None
                   ) -> dict[str, AnnotationRecord]:
        """candidate_id -> effective record (latest expert, else latest draft)."""
        view: dict[str, AnnotationRecord] = {}
        for rec in annotations if annotations is not None else self.load_annotations():
            cur = view.get(rec.candidate_id)
            if cur is None or _provenance_rank(rec.provenance) >= _provenance_rank(cur.provenance):
                view[rec.candidate_id] = rec
        return view

    def current_true(self, occurrence_id: str,
                     view: dict[str, AnnotationRecord] | None = None) -> AnnotationRecord | None:
        view = view if view is not None else self.label_view()
        for rec in view.values():
            if rec.occurrence_id == occurrence_id and rec.label:
                return rec
        return None

    def append_annotation(self, candidate_id: str, label: bool, provenance: str,
                          reviewer: str = "", occurrence_id: str = "",
                          custom_arabic_term: str | None = None,
                          timestamp: str | None = None) -> list[AnnotationRecord]:
        """Append one label, flipping a conflicting True if needed.

        Returns the records actually appended (empty when a draft True is
        refused because an expert already holds the occurrence).
        """
        with self._write_lock:
            if not occurrence_id:
                occurrence_id = candidate_id.rsplit("#", 1)[0]
            ts = timestamp if timestamp is not None else (
                DRAFT_TIMESTAMP if provenance == PROVENANCE_DRAFT else _now())
            rec = AnnotationRecord(
                candidate_id=candidate_id, label=label, provenance=provenance,
                reviewer=reviewer, timestamp=ts, occurrence_id=occurrence_id,
                custom_arabic_term=custom_arabic_term,
            )
            to_append = [rec]
            if label:
                holder = self.current_true(occurrence_id)
                if holder is not None and holder.candidate_id != candidate_id:
                    if _provenance_rank(provenance) < _provenance_rank(holder.provenance):
                        return []  # a draft never displaces an expert label
                    to_append.append(AnnotationRecord(
                        candidate_id=holder.candidate_id, label=False,
                        provenance=provenance, reviewer=reviewer, timestamp=ts,
                        occurrence_id=occurrence_id,
                        custom_arabic_term=holder.custom_arabic_term,
                    ))
            self._append_records(to_append)
            return to_append

    def compact_annotations(self) -> int:
        """Rewrite the log to just the materialized view; returns row count."""
        with self._write_lock:
            view = self.label_view()
            records = [view[k] for k in sorted(view)]

            def write(p):
                with open(p, "w", encoding="utf-8", newline="\n") as fh:
                    for rec in records:
                        fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
            self._atomic_write(self.annotations_path, write)
            return len(records)

    def check_integrity(self) -> list[str]:
        """Referential integrity: every annotated candidate id must exist in
        the candidate store (expert-synthesized custom terms are exempt)."""
        known = {c.candidate_id for c in self.load_candidates()}
        problems = []
        for rec in self.load_annotations():
            if rec.custom_arabic_term is not None:
                continue
            if rec.candidate_id not in known:
                problems.append(rec.candidate_id)
        return problems


# --- termbase assembly ---------------------------------------------------------

@dataclass
class Translation:
    arabic_term: str
    aggregate_score: float
    occurrence_count: int
    status: str  # auto | expert-confirmed | expert-corrected

    def to_dict(self) -> dict:
        return {
            "arabic_term": self.arabic_term,
            "score": self.aggregate_score,
            "occurrences": self.occurrence_count,
            "status": self.status,
        }


@dataclass
class TermbaseEntry:
    foreign_term: str  # normalized (case-folded, whitespace-collapsed)
    translations: list[Translation]
    evidence: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "foreign_term": self.foreign_term,
            "translations": [t.to_dict() for t in self.translations],
            "evidence": self.evidence,
        }


_STATUS_RANK = {STATUS_AUTO: 0, STATUS_CONFIRMED: 1, STATUS_CORRECTED: 2}


def build_termbase(occurrences: list[Occurrence], candidates: list[Candidate],
                   scores: list[ScoreRecord],
                   annotations: list[AnnotationRecord]) -> list[TermbaseEntry]:
    """One entry per normalized foreign term; expert labels override the
    automatic selections, and scores aggregate across occurrences."""
    occ_by_id = {o.occurrence_id: o for o in occurrences}
    cand_by_id = {c.candidate_id: c for c in candidates}
    for rec in scores:
        if rec.occurrence_id not in occ_by_id:
            raise DanglingReference(f"score references unknown occurrence {rec.occurrence_id}")
        if rec.candidate_id not in cand_by_id:
            raise DanglingReference(f"score references unknown candidate {rec.candidate_id}")

    # effective expert/draft view
    store_view: dict[str, AnnotationRecord] = {}
    for rec in annotations:
        cur = store_view.get(rec.candidate_id)
        if cur is None or _provenance_rank(rec.provenance) >= _provenance_rank(cur.provenance):
            store_view[rec.candidate_id] = rec
    expert_true: dict[str, AnnotationRecord] = {}
    for rec in store_view.values():
        if rec.label and rec.provenance == PROVENANCE_EXPERT:
            occ_id = rec.occurrence_id or rec.candidate_id.rsplit("#", 1)[0]
            expert_true[occ_id] = rec

    # selected (surface, score, status) per occurrence
    heads: dict[str, ScoreRecord] = {}
    for rec in scores:
        if rec.selected:
            heads[rec.occurrence_id] = rec
    score_by_cand = {rec.candidate_id: rec for rec in scores}

    selections: dict[str, tuple[str, float, str]] = {}
    for occ_id in sorted(set(list(heads) + list(expert_true))):
        if occ_id not in occ_by_id:
            raise DanglingReference(f"annotation references unknown occurrence {occ_id}")
        auto = heads.get(occ_id)
        expert = expert_true.get(occ_id)
        if expert is None:
            if auto is None:
                continue
            surface = cand_by_id[auto.candidate_id].surface
            selections[occ_id] = (surface, auto.score, STATUS_AUTO)
        elif expert.custom_arabic_term is not None:
            selections[occ_id] = (expert.custom_arabic_term, 0.0, STATUS_CORRECTED)
        else:
            cand = cand_by_id.get(expert.candidate_id)
            if cand is None:
                raise DanglingReference(
                    f"annotation references unknown candidate {expert.candidate_id}")
            agrees = auto is not None and auto.candidate_id == expert.candidate_id
            rec = score_by_cand.get(expert.candidate_id)
            selections[occ_id] = (cand.surface, rec.score if rec else 0.0,
                                  STATUS_CONFIRMED if agrees else STATUS_CORRECTED)

    # group by normalized foreign term
    by_term: dict[str, list[str]] = {}
    for occ_id in selections:
        term = normalize_foreign(occ_by_id[occ_id].foreign_term)
        by_term.setdefault(term, []).append(occ_id)

    entries = []
    for term in sorted(by_term):
        occ_ids = sorted(by_term[term])
        suggestions = [Suggestion(occurrence_id=o, surface=selections[o][0],
                                  score=selections[o][1]) for o in occ_ids]
        aggregated = aggregate_suggestions(term, suggestions)
        status_by_occ = {o: selections[o][2] for o in occ_ids}
        translations = []
        for agg in aggregated:
            status = STATUS_AUTO
            for o in agg.occurrence_ids:
                if _STATUS_RANK[status_by_occ[o]] > _STATUS_RANK[status]:
                    status = status_by_occ[o]
            translations.append(Translation(
                arabic_term=agg.arabic_term,
                aggregate_score=agg.aggregate_score,
                occurrence_count=agg.occurrence_count,
                status=status,
            ))
        # preferred (expert-backed, else best-scoring) translation first
        translations.sort(key=lambda t: (-_STATUS_RANK[t.status] if t.status != STATUS_AUTO else 0,
                                         -t.aggregate_score, t.arabic_term))
        entries.append(TermbaseEntry(foreign_term=term, translations=translations,
                                     evidence=occ_ids))
    return entries


# --- export / import -------------------------------------------------------------

TSV_HEADER = "foreign_term\tarabic_term\tscore\toccurrences\tstatus"


def export_termbase(entries: list[TermbaseEntry], fmt: str = "tsv") -> bytes:
    """Serialize entries (sorted by foreign term; preferred translation first)."""
    ordered = sorted(entries, key=lambda e: e.foreign_term)
    if fmt == "tsv":
        lines = [TSV_HEADER]
        for e in ordered:
            for t in e.translations:
                lines.append(f"{e.foreign_term}\t{t.arabic_term}\t{t.aggregate_score:.6f}"
                             f"\t{t.occurrence_count}\t{t.status}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "jsonl":
        return "".join(json.dumps(e.to_dict(), ensure_ascii=False) + "\n"
                       for e in ordered).encode("utf-8")
    raise ValueError(f"unknown termbase format {fmt!r}")


def import_termbase(data: bytes, fmt: str = "tsv") -> list[TermbaseEntry]:
    text = data.decode("utf-8")
    entries: list[TermbaseEntry] = []
    if fmt == "tsv":
        by_term: dict[str, TermbaseEntry] = {}
        lines = [ln for ln in text.split("\n") if ln]
        for ln in lines[1:]:
            term, arabic, score, count, status = ln.split("\t")
            entry = by_term.get(term)
            if entry is None:
                entry = TermbaseEntry(foreign_term=term, translations=[])
                by_term[term] = entry
                entries.append(entry)
            entry.translations.append(Translation(
                arabic_term=arabic, aggregate_score=float(score),
                occurrence_count=int(count), status=status))
        return entries
    if fmt == "jsonl":
        for ln in text.split("\n"):
            if not ln:
                continue
            d = json.loads(ln)
            entries.append(TermbaseEntry(
                foreign_term=d["foreign_term"],
                translations=[Translation(
                    arabic_term=t["arabic_term"], aggregate_score=float(t["score"]),
                    occurrence_count=int(t["occurrences"]), status=t["status"],
                ) for t in d["translations"]],
                evidence=list(d.get("evidence", [])),
            ))
        return entries
    raise ValueError(f"unknown termbase format {fmt!r}")
