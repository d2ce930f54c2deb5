"""Binary candidate classifier: a deterministic random forest built in-repo.

The default configuration mirrors the reference setup: 252 trees, unlimited
depth, Gini splits, bootstrap samples the size of the training set, and
features-per-split = floor(log2(d)) + 1. Keeping the forest in-repo makes
training bit-reproducible from a single 64-bit seed and the model file
self-describing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureVector
from .providers import ENTITY_LABELS, POS_TAGS

SCHEMA_VERSION = "fv-1"
DEFAULT_SEED = 1729


class UnknownCategory(ValueError):
    pass


class SchemaMismatch(ValueError):
    pass


class EmptyData(ValueError):
    pass


class SingleClass(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


def feature_names() -> list[str]:
    names = ["semantic", "trans_lex", "translit_lex",
             "semantic_rank", "trans_lex_rank", "translit_lex_rank",
             "semantic_diff", "trans_lex_diff", "translit_lex_diff"]
    names += [f"entity={e}" for e in ENTITY_LABELS]
    names += [f"source_entity={e}" for e in ENTITY_LABELS]
    names += [f"pos={p}" for p in POS_TAGS]
    names.append("phonetic")
    return names


N_FEATURES = len(feature_names())  # 9 + 5 + 5 + 10 + 1 = 30


@dataclass(frozen=True)
class EncodedInstance:
    x: tuple[float, ...]
    label: bool | None
    occurrence_id: str
    candidate_id: str
    book_id: str = ""
    word_count: int = 0
    schema_version: str = SCHEMA_VERSION


def _one_hot(value: str, domain: tuple[str, ...], what: str) -> list[float]:
    if value not in domain:
        raise UnknownCategory(f"unknown {what} {value!r}, expected one of {domain}")
    return [1.0 if value == d else 0.0 for d in domain]


def encode(fv: FeatureVector) -> EncodedInstance:
    """Numeric encoding in the documented column order (see feature_names)."""
    x = [fv.semantic, fv.trans_lex, fv.translit_lex,
         float(fv.semantic_rank), float(fv.trans_lex_rank), float(fv.translit_lex_rank),
         fv.semantic_diff, fv.trans_lex_diff, fv.translit_lex_diff]
    x += _one_hot(fv.entity, ENTITY_LABELS, "entity")
    x += _one_hot(fv.source_entity, ENTITY_LABELS, "source_entity")
    x += _one_hot(fv.pos_first, POS_TAGS, "pos")
    x.append(1.0 if fv.phonetic else 0.0)
    return EncodedInstance(
        x=tuple(x),
        label=fv.label,
        occurrence_id=fv.occurrence_id,
        candidate_id=fv.candidate_id,
        book_id=fv.book_id,
        word_count=fv.word_count,
    )


@dataclass
class ForestParams:
    n_trees: int = 252
    mtry: int | None = None  # None: floor(log2(d)) + 1
    min_leaf: int = 1
    seed: int = DEFAULT_SEED


@dataclass
class _Tree:
    """Flat-array tree; feature == -1 marks a leaf with its vote in value."""
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[int] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0)
        return len(self.feature) - 1

    def predict_one(self, x) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return self.value[node]

    def to_dict(self) -> dict:
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left, "right": self.right, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "_Tree":
        return cls(feature=list(d["feature"]), threshold=list(d["threshold"]),
                   left=list(d["left"]), right=list(d["right"]), value=list(d["value"]))


def _best_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray, feats) -> tuple[int, float] | None:
    """Lowest weighted-Gini split over the given features, or None."""
    n = len(idx)
    total_true = int(y[idx].sum())
    best = None
    best_cost = np.inf
    for f in feats:
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        sc = col[order]
        sy = y[idx][order]
        boundary = np.nonzero(sc[:-1] < sc[1:])[0]
        if boundary.size == 0:
            continue
        n_l = boundary + 1
        n_r = n - n_l
        t_l = np.cumsum(sy)[boundary]
        t_r = total_true - t_l
        g_l = 1.0 - (t_l / n_l) ** 2 - ((n_l - t_l) / n_l) ** 2
        g_r = 1.0 - (t_r / n_r) ** 2 - ((n_r - t_r) / n_r) ** 2
        cost = (n_l * g_l + n_r * g_r) / n
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best_cost = float(cost[k])
            b = boundary[k]
            best = (int(f), float((sc[b] + sc[b + 1]) / 2.0))
    return best


def _grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator,
               mtry: int, min_leaf: int) -> _Tree:
    d = X.shape[1]
    tree = _Tree()
    root = tree.add_node()
    stack = [(np.arange(len(y)), root)]
    while stack:
        idx, node = stack.pop()
        n_true = int(y[idx].sum())
        if n_true == 0 or n_true == len(idx) or len(idx) <= min_leaf:
            tree.value[node] = 1 if 2 * n_true > len(idx) else 0
            continue
        feats = rng.choice(d, size=min(mtry, d), replace=False)
        split = _best_split(X, y, idx, feats)
        if split is None:
            # sampled features constant here; fall back to the full set
            split = _best_split(X, y, idx, range(d))
        if split is None:
            tree.value[node] = 1 if 2 * n_true > len(idx) else 0
            continue
        f, t = split
        mask = X[idx, f] <= t
        left = tree.add_node()
        right = tree.add_node()
        tree.feature[node] = f
        tree.threshold[node] = t
        tree.left[node] = left
        tree.right[node] = right
        stack.append((idx[mask], left))
        stack.append((idx[~mask], right))
    return tree


@dataclass
class Forest:
    trees: list[_Tree]
    n_trees: int
    mtry: int
    seed: int
    schema_version: str = SCHEMA_VERSION
    n_features: int = N_FEATURES
    train_report: dict = field(default_factory=dict)


def train_forest(data: list[EncodedInstance], params: ForestParams | None = None) -> Forest:
    """Train the ensemble on labeled instances; deterministic given the seed."""
    params = params or ForestParams()
    if not data:
        raise EmptyData("no training instances")
    if any(inst.label is None for inst in data):
        raise EmptyData("training instances must all carry labels")
    X = np.asarray([inst.x for inst in data], dtype=np.float64)
    y = np.asarray([1 if inst.label else 0 for inst in data], dtype=np.int64)
    if len(set(y.tolist())) < 2:
        raise SingleClass("training data contains a single class")
    d = X.shape[1]
    mtry = params.mtry if params.mtry is not None else int(np.floor(np.log2(d))) + 1
    n = len(y)
    trees = []
    oob_votes = np.zeros(n, dtype=np.int64)
    oob_counts = np.zeros(n, dtype=np.int64)
    for t in range(params.n_trees):
        rng = np.random.default_rng([params.seed, t])
        bag = rng.integers(0, n, size=n)
        tree = _grow_tree(X[bag], y[bag], rng, mtry, params.min_leaf)
        trees.append(tree)
        oob = np.setdiff1d(np.arange(n), bag, assume_unique=False)
        for i in oob:
            oob_votes[i] += tree.predict_one(X[i])
            oob_counts[i] += 1
    forest = Forest(trees=trees, n_trees=params.n_trees, mtry=mtry, seed=params.seed)
    in_bag_pred = np.array([_score(forest, x) >= 0.5 for x in X])
    seen = oob_counts > 0
    oob_pred = (2 * oob_votes[seen]) > oob_counts[seen]
    forest.train_report = {
        "train_accuracy": float((in_bag_pred == (y == 1)).mean()),
        "oob_accuracy": float((oob_pred == (y[seen] == 1)).mean()) if seen.any() else None,
        "n_instances": n,
    }
    return forest


def _score(forest: Forest, x) -> float:
    votes = sum(tree.predict_one(x) for tree in forest.trees)
    return votes / len(forest.trees)


def _check_schema(forest: Forest, inst: EncodedInstance) -> None:
    if inst.schema_version != forest.schema_version or len(inst.x) != forest.n_features:
        raise SchemaMismatch(
            f"instance schema {inst.schema_version}/{len(inst.x)} does not match "
            f"forest {forest.schema_version}/{forest.n_features}")


def predict_score(forest: Forest, inst: EncodedInstance) -> float:
    """Fraction of trees voting True; in [0, 1]."""
    _check_schema(forest, inst)
    return _score(forest, inst.x)


def classify(forest: Forest, inst: EncodedInstance, threshold: float = 0.5) -> bool:
    return predict_score(forest, inst) >= threshold


def rank_occurrence(forest: Forest, occ_instances: list[EncodedInstance]) -> list[tuple[str, float]]:
    """Candidates of one occurrence sorted by score; the head is the selected
    target. Ties go to the shorter candidate, then the smaller id."""
    if not occ_instances:
        raise EmptyGroup("rank_occurrence needs at least one instance")
    occ_ids = {inst.occurrence_id for inst in occ_instances}
    if len(occ_ids) != 1:
        raise ValueError(f"rank_occurrence got several occurrences: {sorted(occ_ids)}")
    scored = [(inst, predict_score(forest, inst)) for inst in occ_instances]
    scored.sort(key=lambda p: (-p[1], p[0].word_count, p[0].candidate_id))
    return [(inst.candidate_id, score) for inst, score in scored]


def save_forest(forest: Forest, path: str | Path) -> None:
    doc = {
        "format": "termalign-forest",
        "schema_version": forest.schema_version,
        "n_features": forest.n_features,
        "feature_names": feature_names(),
        "params": {"n_trees": forest.n_trees, "mtry": forest.mtry, "seed": forest.seed},
        "train_report": forest.train_report,
        "trees": [t.to_dict() for t in forest.trees],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, ensure_ascii=False)
        fh.write("\n")


def load_forest(path: str | Path) -> Forest:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "termalign-forest":
        raise SchemaMismatch(f"not a forest file: {path}")
    return Forest(
        trees=[_Tree.from_dict(t) for t in doc["trees"]],
        n_trees=doc["params"]["n_trees"],
        mtry=doc["params"]["mtry"],
        seed=doc["params"]["seed"],
        schema_version=doc["schema_version"],
        n_features=doc["n_features"],
        train_report=doc.get("train_report", {}),
    )
