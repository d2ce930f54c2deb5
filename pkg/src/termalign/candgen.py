"""Generate the nested prefix candidates for each occurrence.

Candidate i is the string of the i Arabic words nearest the parenthesis, in
natural reading order. Interior dashes ride along in the surface but never
count as words, so the shorter of any two candidates is always a reading-
order suffix of the longer one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .extract import Occurrence
from .textnorm import MATCHING_PROFILE, PUNCT, NormalizationProfile, normalize_arabic, tokenize

# Single-letter proclitics that attach to the front of an Arabic word.
PROCLITICS = ("و", "ف", "ب", "ل", "ك")


@dataclass
class CandGenConfig:
    alpha: int = 2
    beta: int = 5
    emit_variants: bool = False  # clitic-stripped twins, off by default
    profile: NormalizationProfile = MATCHING_PROFILE  # for the normalized field


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    occurrence_id: str
    word_count: int
    surface: str
    normalized: str
    is_variant: bool = False
    book_id: str = ""

    def to_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "occurrence_id": self.occurrence_id,
            "word_count": self.word_count,
            "surface": self.surface,
            "normalized": self.normalized,
            "is_variant": self.is_variant,
            "book_id": self.book_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        return cls(
            candidate_id=d["candidate_id"],
            occurrence_id=d["occurrence_id"],
            word_count=d["word_count"],
            surface=d["surface"],
            normalized=d["normalized"],
            is_variant=d.get("is_variant", False),
            book_id=d.get("book_id", ""),
        )


def foreign_word_count(foreign_term: str) -> int:
    return max(1, sum(1 for t in tokenize(foreign_term) if t.script != PUNCT))


def generate_candidates(occ: Occurrence, cfg: CandGenConfig | None = None) -> list[Candidate]:
    """Candidates for i = 1 .. min(n, foreign_words * alpha + beta)."""
    cfg = cfg or CandGenConfig()
    cap = foreign_word_count(occ.foreign_term) * cfg.alpha + cfg.beta
    candidates: list[Candidate] = []
    taken: list[str] = []  # token texts, nearest-first
    pending: list[str] = []
    words = 0
    for tok in occ.preceding_words:
        if tok.script == PUNCT:
            pending.append(tok.text)
            continue
        if words >= cap:
            break
        taken.extend(pending)
        pending.clear()
        taken.append(tok.text)
        words += 1
        surface = " ".join(reversed(taken))
        candidates.append(Candidate(
            candidate_id=f"{occ.occurrence_id}#{words}",
            occurrence_id=occ.occurrence_id,
            word_count=words,
            surface=surface,
            normalized=normalize_arabic(surface, cfg.profile),
            book_id=occ.book_id,
        ))
    return candidates


def clitic_variants(cand: Candidate,
                    profile: NormalizationProfile = MATCHING_PROFILE) -> list[Candidate]:
    """Clitic-stripped twin of a candidate whose first word starts with a
    proclitic letter. At most one stripping level; never touches the
    definite article."""
    first, _, rest = cand.surface.partition(" ")
    if len(first) < 2 or first[0] not in PROCLITICS:
        return []
    stripped = first[1:]
    surface = stripped + (" " + rest if rest else "")
    return [Candidate(
        candidate_id=cand.candidate_id + "v",
        occurrence_id=cand.occurrence_id,
        word_count=cand.word_count,
        surface=surface,
        normalized=normalize_arabic(surface, profile),
        is_variant=True,
        book_id=cand.book_id,
    )]


def candidates_for_occurrence(occ: Occurrence, cfg: CandGenConfig | None = None) -> list[Candidate]:
    """generate_candidates plus, when configured, each candidate's clitic variant."""
    cfg = cfg or CandGenConfig()
    out = []
    for cand in generate_candidates(occ, cfg):
        out.append(cand)
        if cfg.emit_variants:
            out.extend(clitic_variants(cand, cfg.profile))
    return out


def write_candidates_jsonl(candidates: list[Candidate], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cand in candidates:
            fh.write(json.dumps(cand.to_dict(), ensure_ascii=False) + "\n")


def read_candidates_jsonl(path: str | Path) -> list[Candidate]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Candidate.from_dict(json.loads(line)))
    return out
