"""Hand-tuned candidate scoring and per-occurrence argmax selection.

The weights are published constants, exposed read-only for experiments but
never silently changed: lexical similarities gate at tau = 0.7 (inclusive),
translation similarity weighs 1.2, semantic similarity 1.45, matching
entities 0.7 (mismatched but present 0.3), phonetic match 1, and the POS of
the first word contributes -1/0/+1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .features import FeatureVector
from .providers import ENTITY_NONE

TAU = 0.7
TRANS_WEIGHT = 1.2
SEMANTIC_WEIGHT = 1.45
ENTITY_MATCH = 0.7
ENTITY_MISMATCH = 0.3
NEGATIVE_POS = ("verb", "prep", "conj")
POSITIVE_POS = ("noun", "noun_prop")

# Component-wise extremes give the total's reachable range.
SCORE_MIN = -1.0
SCORE_MAX = TRANS_WEIGHT + 1.0 + SEMANTIC_WEIGHT + ENTITY_MATCH + 1.0 + 1.0  # 6.35


class EmptyGroup(ValueError):
    pass


@dataclass(frozen=True)
class HeuristicScore:
    candidate_id: str
    s_l: float
    s_s: float
    s_e: float
    s_p: float
    s_pos: float
    total: float
    word_count: int = 0
    occurrence_id: str = ""

    def to_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "occurrence_id": self.occurrence_id,
            "word_count": self.word_count,
            "s_l": self.s_l,
            "s_s": self.s_s,
            "s_e": self.s_e,
            "s_p": self.s_p,
            "s_pos": self.s_pos,
            "total": self.total,
        }


def heuristic_score(fv: FeatureVector) -> HeuristicScore:
    """Score one candidate; flagged features contribute their recorded value."""
    s_l = 0.0
    if fv.trans_lex >= TAU:
        s_l += TRANS_WEIGHT * fv.trans_lex
    if fv.translit_lex >= TAU:
        s_l += fv.translit_lex
    s_s = SEMANTIC_WEIGHT * fv.semantic
    if fv.entity != ENTITY_NONE:
        s_e = ENTITY_MATCH if fv.entity == fv.source_entity else ENTITY_MISMATCH
    else:
        s_e = 0.0
    s_p = 1.0 if fv.phonetic else 0.0
    if fv.pos_first in NEGATIVE_POS:
        s_pos = -1.0
    elif fv.pos_first in POSITIVE_POS:
        s_pos = 1.0
    else:
        s_pos = 0.0
    return HeuristicScore(
        candidate_id=fv.candidate_id,
        occurrence_id=fv.occurrence_id,
        word_count=fv.word_count,
        s_l=s_l, s_s=s_s, s_e=s_e, s_p=s_p, s_pos=s_pos,
        total=s_l + s_s + s_e + s_p + s_pos,
    )


def select_by_heuristic(occ_scores: list[HeuristicScore]) -> str:
    """Candidate id with the maximum total; ties go to the shorter candidate,
    then the smaller candidate id."""
    if not occ_scores:
        raise EmptyGroup("select_by_heuristic needs at least one score")
    best = min(occ_scores, key=lambda s: (-s.total, s.word_count, s.candidate_id))
    return best.candidate_id


def score_occurrence(vectors: list[FeatureVector]) -> list[HeuristicScore]:
    if not vectors:
        raise EmptyGroup("score_occurrence needs at least one vector")
    return [heuristic_score(v) for v in vectors]


def write_scores_jsonl(scores: list[HeuristicScore], path: str | Path) -> None:
    """All five components are kept in the file for audit, not just totals."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in scores:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")
