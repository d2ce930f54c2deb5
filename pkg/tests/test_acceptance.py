"""Acceptance suite: each test is one exit criterion, run at its stated
tolerance. A summary line per criterion is printed at the end of the run
(see conftest.pytest_terminal_summary)."""

import filecmp
import itertools
import json
import os
import random
import time

import pytest

from termalign.candgen import generate_candidates
from termalign.cli import main
from termalign.evaluation import (
    AggregatedTranslation,
    GlossaryConcept,
    consistency_report,
    prf,
    topk_accuracy,
)
from termalign.extract import corpus_stats
from termalign.features import FeatureVector, augment, levenshtein, lexical_ratio, phonetic_similar
from termalign.heuristic import SCORE_MAX, SCORE_MIN, heuristic_score
from termalign.model import ForestParams, classify, load_forest, predict_score, save_forest, train_forest
from termalign.synthetic import arabic_truth_key
from termalign.termstore import Store, build_termbase, export_termbase, import_termbase

from .conftest import CONTEXT_1_CANDIDATES, CONTEXT_2_CANDIDATES
from .test_cli import build_planted_workspace, label_store_with_truth
from .test_evaluation import oracle_confusion
from .test_features import make_vector, oracle_levenshtein
from .test_model import synthetic_instances

ENTITIES = ("PER", "LOC", "ORG", "MISC", "none")
POSES = ("adj", "adv", "conj", "misc", "noun", "noun_prop", "part", "prep",
         "pron", "verb")


def test_criterion_01_lexical_ratio_worked_examples():
    start = time.monotonic()
    t1, s1 = "ايهود براور", "إيهود براور"
    assert (len(t1), len(s1)) == (11, 11)
    assert round(lexical_ratio(t1, s1), 2) == 0.95
    t2 = "كلية لندن للاقتصاد والعلوم السياسية"
    s2 = "كلية لندن للعلوم الاقتصادية والسياسية"
    assert (len(t2), len(s2)) == (35, 37)
    assert round(lexical_ratio(t2, s2), 2) == 0.79
    assert time.monotonic() - start < 1.0


def test_criterion_02_phonetic_table():
    assert phonetic_similar("ريغافيم", "Regavim") is True
    assert phonetic_similar("لوكهيد مارتن", "Lockheed Martin") is True
    assert phonetic_similar("مثل لوكهيد مارتن", "Lockheed Martin") is False


def test_criterion_03_candidate_generation_fixture(fixture_occurrences):
    cands1 = generate_candidates(fixture_occurrences[0])
    cands2 = generate_candidates(fixture_occurrences[1])
    assert [c.surface for c in cands1] == CONTEXT_1_CANDIDATES
    assert [c.surface for c in cands2] == CONTEXT_2_CANDIDATES
    report = corpus_stats(fixture_occurrences, cands1 + cands2)
    assert report.avg_candidates_per_occurrence == 5.5
    for cands in (cands1, cands2):
        for a in cands:
            for b in cands:
                if a.word_count < b.word_count:
                    assert b.surface.endswith(a.surface)


def test_criterion_04_heuristic_formula():
    s = heuristic_score(make_vector(pos="verb"))
    assert abs(s.total - (-1.0)) < 1e-9
    s = heuristic_score(make_vector(l1=0.8, l2=0.6, sem=0.5, entity="PER",
                                    source_entity="PER", pos="noun_prop",
                                    phonetic=True))
    assert abs(s.total - 4.385) < 1e-9
    s = heuristic_score(make_vector(l1=0.7, l2=0.7))
    assert abs(s.total - 1.54) < 1e-9
    # threshold step at tau
    assert heuristic_score(make_vector(l1=0.699)).s_l == 0.0
    assert abs(heuristic_score(make_vector(l1=0.700)).s_l - 0.84) < 1e-9
    # bounds over 1e5 random vectors
    rng = random.Random(20240)
    for _ in range(100_000):
        s = heuristic_score(make_vector(
            sem=rng.random(), l1=rng.random(), l2=rng.random(),
            entity=rng.choice(ENTITIES), source_entity=rng.choice(ENTITIES),
            pos=rng.choice(POSES), phonetic=rng.random() < 0.5))
        assert SCORE_MIN <= s.total <= SCORE_MAX


def test_criterion_05_augmentation_oracle():
    rng = random.Random(512)

    def draw():
        # mix continuous values with a tie-prone discrete grid
        return rng.choice((0.0, 0.25, 0.5, 0.75, 1.0)) if rng.random() < 0.5 \
            else rng.random()

    for _ in range(10_000):
        n = rng.randint(1, 8)
        vs = [make_vector(cid=f"c{i}", sem=draw(), l1=draw(), l2=draw())
              for i in range(n)]
        out = augment(vs)
        for feat, rank_attr, diff_attr in (
                ("semantic", "semantic_rank", "semantic_diff"),
                ("trans_lex", "trans_lex_rank", "trans_lex_diff"),
                ("translit_lex", "translit_lex_rank", "translit_lex_diff")):
            desc = sorted((getattr(v, feat) for v in vs), reverse=True)
            for v_in, v_out in zip(vs, out):
                assert getattr(v_out, rank_attr) == desc.index(getattr(v_in, feat))
                assert getattr(v_out, diff_attr) == desc[0] - getattr(v_in, feat)


def test_criterion_06_levenshtein_oracle():
    strings = [""]
    for n in range(1, 7):
        strings += ["".join(p) for p in itertools.product("ab", repeat=n)]
    assert len(strings) == 127
    for a in strings:
        for b in strings:
            assert levenshtein(a, b) == oracle_levenshtein(a, b)
    rng = random.Random(99)
    alphabet = "abcdefgh ابتثج"
    pool = ["".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
            for _ in range(400)]
    for _ in range(10_000):
        a, b = rng.choice(pool), rng.choice(pool)
        assert levenshtein(a, b) == oracle_levenshtein(a, b)
    # metric spot checks on random triples
    for _ in range(2_000):
        a, b, c = (rng.choice(pool) for _ in range(3))
        assert levenshtein(a, a) == 0
        assert levenshtein(a, b) == levenshtein(b, a)
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_criterion_07_forest(tmp_path):
    train = synthetic_instances(300, seed=11)
    test = synthetic_instances(100, seed=77, start=5000)
    forest = train_forest(train, ForestParams(n_trees=252, seed=5))
    accuracy = sum(classify(forest, i) == i.label for i in test) / len(test)
    assert accuracy >= 0.95
    # retraining with the same seed is bit-identical
    again = train_forest(train, ForestParams(n_trees=252, seed=5))
    for inst in test:
        assert predict_score(forest, inst) == predict_score(again, inst)
    # save/load round-trip preserves predictions
    path = tmp_path / "model.json"
    save_forest(forest, path)
    loaded = load_forest(path)
    for inst in test:
        assert predict_score(forest, inst) == predict_score(loaded, inst)
    # noise-free duplicate-free training set: 100% training accuracy
    assert forest.train_report["train_accuracy"] == 1.0
    assert all(classify(forest, inst) == inst.label for inst in train)


@pytest.fixture(scope="module")
def planted_e2e(tmp_path_factory):
    """The same full pipeline run twice (same corpus, config, and seed;
    different store roots)."""
    t0 = time.monotonic()
    base = tmp_path_factory.mktemp("acceptance-e2e")
    corpus, corpus_dir, config_path, _ = build_planted_workspace(
        base, n_paragraphs=200, n_books=10, n_terms=40, seed=7)
    runs = []
    for run_id in ("run1", "run2"):
        store_root = base / f"store-{run_id}"
        cfg = ["--config", str(config_path), "--store", str(store_root)]
        assert main(cfg + ["extract", str(corpus_dir)]) == 0
        assert main(cfg + ["features"]) == 0
        assert main(cfg + ["score-heuristic"]) == 0
        store = Store(store_root)
        heuristic_scores = store.load_scores()
        labeled = label_store_with_truth(store, corpus.truth)
        assert labeled == 200
        books = sorted({o.book_id for o in store.load_occurrences()})
        assert main(cfg + ["train", "--train-books", ",".join(books[:5]),
                           "--test-books", ",".join(books[5:])]) == 0
        assert main(cfg + ["predict"]) == 0
        assert main(cfg + ["export", "--format", "tsv"]) == 0
        assert main(cfg + ["export", "--format", "jsonl"]) == 0
        runs.append({
            "corpus": corpus,
            "store": store,
            "heuristic_scores": heuristic_scores,
            "test_books": set(books[5:]),
        })
    elapsed = time.monotonic() - t0
    return runs, elapsed


def _selection_accuracy(store, corpus, scores, book_filter=None):
    occ_by_id = {o.occurrence_id: o for o in store.load_occurrences()}
    cand_by_id = {c.candidate_id: c for c in store.load_candidates()}
    total = correct = 0
    for rec in scores:
        if not rec.selected:
            continue
        occ = occ_by_id[rec.occurrence_id]
        if book_filter and occ.book_id not in book_filter:
            continue
        total += 1
        want = arabic_truth_key(corpus.truth[occ.foreign_term])
        if arabic_truth_key(cand_by_id[rec.candidate_id].surface) == want:
            correct += 1
    return total, correct


def test_criterion_08_end_to_end_planted_corpus(planted_e2e):
    runs, elapsed = planted_e2e
    run = runs[0]
    store, corpus = run["store"], run["corpus"]
    # heuristic pipeline selects the planted candidate in >= 95% of occurrences
    total, correct = _selection_accuracy(store, corpus, run["heuristic_scores"])
    assert total == 200
    assert correct / total >= 0.95
    # model pipeline on held-out books
    model_scores = store.load_scores()
    total, correct = _selection_accuracy(store, corpus, model_scores,
                                         run["test_books"])
    assert total == 100
    assert correct / total >= 0.95
    # selection mode emits exactly one True per occurrence
    heads = {}
    for rec in model_scores:
        heads[rec.occurrence_id] = heads.get(rec.occurrence_id, 0) + (
            1 if rec.selected else 0)
    assert set(heads.values()) == {1}
    assert elapsed < 60.0, f"end-to-end pipeline took {elapsed:.1f}s"


def test_criterion_09_evaluation_harness(fixture_occurrences):
    rng = random.Random(31337)
    for _ in range(10_000):
        n = rng.randint(1, 30)
        preds = [rng.random() < 0.5 for _ in range(n)]
        labels = [rng.random() < 0.5 for _ in range(n)]
        r = prf(preds, labels)
        tp, fp, fn, tn, p, rc, f1 = oracle_confusion(preds, labels)
        assert (r.tp, r.fp, r.fn, r.tn, r.precision, r.recall, r.f1) == \
            (tp, fp, fn, tn, p, rc, f1)
    # top-k: monotone in k and matching hand-counted fixtures
    suggs = {
        "Alpha": [AggregatedTranslation("صحيح", 2.0, 2),
                  AggregatedTranslation("آخر", 1.0, 1)],
        "Beta": [AggregatedTranslation("أول", 3.0, 2),
                 AggregatedTranslation("ثان", 2.0, 1),
                 AggregatedTranslation("ثالث", 1.0, 1)],
    }
    glossary = [GlossaryConcept("Alpha", "", "صحيح"),
                GlossaryConcept("Beta", "", "ثالث"),
                GlossaryConcept("Gamma", "", "غائب")]
    assert topk_accuracy(glossary, suggs, 1) == pytest.approx(1 / 2)
    assert topk_accuracy(glossary, suggs, 2) == pytest.approx(1 / 2)
    assert topk_accuracy(glossary, suggs, 3) == pytest.approx(1.0)
    ks = [topk_accuracy(glossary, suggs, k) for k in range(1, 6)]
    assert ks == sorted(ks)
    # consistency report on the motivating fixture: exactly one term, two translations
    occs = fixture_occurrences
    cands = [c for o in occs for c in generate_candidates(o)]
    from termalign.termstore import ScoreRecord

    scores = []
    winners = {f"{occs[0].occurrence_id}#2", f"{occs[1].occurrence_id}#2"}
    for c in cands:
        scores.append(ScoreRecord(c.candidate_id, c.occurrence_id,
                                  0.9 if c.candidate_id in winners else 0.1,
                                  c.candidate_id in winners, "heuristic"))
    entries = build_termbase(occs, cands, scores, [])
    findings = consistency_report(entries)
    assert len(findings) == 1
    assert findings[0].foreign_term == "l’ethnocentrisme"
    assert len(findings[0].translations) == 2


def test_criterion_10_determinism_and_formats(planted_e2e):
    runs, _ = planted_e2e
    a, b = runs[0]["store"].root, runs[1]["store"].root
    artifacts = ["occurrences.jsonl", "candidates.jsonl", "features.csv",
                 "features.jsonl", "scores.jsonl", "annotations.log.jsonl",
                 "model.json", "termbase.tsv", "termbase.jsonl",
                 "manifests/extract.json", "manifests/features.json",
                 "manifests/score-heuristic.json", "manifests/train.json",
                 "manifests/predict.json", "manifests/export.json"]
    for name in artifacts:
        fa, fb = a / name, b / name
        assert fa.exists() and fb.exists(), name
        assert fa.read_bytes() == fb.read_bytes(), f"{name} differs between runs"
    # termbase export -> import -> export round-trips byte-identically
    store = runs[0]["store"]
    entries = build_termbase(store.load_occurrences(), store.load_candidates(),
                             store.load_scores(), store.load_annotations())
    for fmt in ("tsv", "jsonl"):
        data = export_termbase(entries, fmt)
        assert export_termbase(import_termbase(data, fmt), fmt) == data


@pytest.mark.skipif(not os.environ.get("MASRAD_DATASET"),
                    reason="released annotation set not available; set "
                           "MASRAD_DATASET to its features.csv to enable")
def test_criterion_11_released_annotation_set():
    """With the released annotation set and the same provider models, the
    heuristic test F1 must land within 3 points of 82.9%."""
    from termalign.features import read_features_csv
    from termalign.heuristic import score_occurrence, select_by_heuristic

    vectors = read_features_csv(os.environ["MASRAD_DATASET"])
    by_occ = {}
    for v in vectors:
        if v.label is not None:
            by_occ.setdefault(v.occurrence_id, []).append(v)
    preds, labels = [], []
    for occ_id, occ_vectors in sorted(by_occ.items()):
        winner = select_by_heuristic(score_occurrence(occ_vectors))
        for v in occ_vectors:
            preds.append(v.candidate_id == winner)
            labels.append(bool(v.label))
    report = prf(preds, labels, mode="selection")
    assert abs(report.f1 - 0.829) <= 0.03
