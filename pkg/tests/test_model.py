import numpy as np
import pytest

from termalign.model import (
    EmptyData,
    EmptyGroup,
    EncodedInstance,
    ForestParams,
    SchemaMismatch,
    SingleClass,
    UnknownCategory,
    classify,
    encode,
    feature_names,
    load_forest,
    predict_score,
    rank_occurrence,
    save_forest,
    train_forest,
)

from .test_features import make_vector


def synthetic_instances(n, seed, start=0):
    """2 informative features padded to the 30-dim schema; class = x0 > 0.5."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        x0, x1 = rng.random(), rng.random()
        vec = [x0, x1] + [0.0] * 28
        out.append(EncodedInstance(
            x=tuple(vec), label=bool(x0 > 0.5),
            occurrence_id=f"occ{(start + i) // 4}", candidate_id=f"cand{start + i}",
            book_id=f"book{(start + i) % 5}", word_count=(start + i) % 4 + 1))
    return out


@pytest.fixture(scope="module")
def trained():
    train = synthetic_instances(300, seed=11)
    forest = train_forest(train, ForestParams(n_trees=60, seed=5))
    return train, forest


class TestEncode:
    def test_dimension_and_one_hots(self):
        inst = encode(make_vector(entity="none", source_entity="PER", pos="noun",
                                  phonetic=True))
        assert len(inst.x) == 30
        names = feature_names()
        assert inst.x[names.index("entity=none")] == 1.0
        assert sum(inst.x[names.index(f"entity={e}")]
                   for e in ("PER", "LOC", "ORG", "MISC", "none")) == 1.0
        assert inst.x[names.index("source_entity=PER")] == 1.0
        assert inst.x[names.index("pos=noun")] == 1.0
        assert inst.x[names.index("phonetic")] == 1.0

    def test_phonetic_false_is_zero(self):
        inst = encode(make_vector(phonetic=False))
        assert inst.x[feature_names().index("phonetic")] == 0.0

    def test_worked_heuristic_example_vector(self):
        fv = make_vector(l1=0.8, l2=0.6, sem=0.5, entity="PER", source_entity="PER",
                         pos="noun_prop", phonetic=True)
        inst = encode(fv)
        assert inst.x[:3] == (0.5, 0.8, 0.6)
        assert inst.x[3:9] == (0.0,) * 6  # ranks and diffs default to 0
        assert inst.x[-1] == 1.0

    def test_unknown_category(self):
        with pytest.raises(UnknownCategory):
            encode(make_vector(entity="WAT"))


class TestTrainForest:
    def test_single_class_refused(self):
        data = synthetic_instances(50, seed=3)
        true_only = [i for i in data if i.label][:10]
        with pytest.raises(SingleClass):
            train_forest(true_only)

    def test_empty_refused(self):
        with pytest.raises(EmptyData):
            train_forest([])

    def test_missing_labels_refused(self):
        inst = synthetic_instances(4, seed=3)
        unlabeled = [EncodedInstance(x=i.x, label=None, occurrence_id=i.occurrence_id,
                                     candidate_id=i.candidate_id) for i in inst]
        with pytest.raises(EmptyData):
            train_forest(unlabeled)

    def test_separable_accuracy(self, trained):
        _, forest = trained
        test = synthetic_instances(100, seed=77, start=1000)
        correct = sum(classify(forest, i) == i.label for i in test)
        assert correct >= 95

    def test_deterministic_retrain(self, trained):
        train, forest = trained
        again = train_forest(train, ForestParams(n_trees=60, seed=5))
        test = synthetic_instances(64, seed=123, start=5000)
        for inst in test:
            assert predict_score(forest, inst) == predict_score(again, inst)

    def test_training_accuracy_100_on_clean_data(self, trained):
        train, forest = trained
        assert all(classify(forest, inst) == inst.label for inst in train)
        assert forest.train_report["train_accuracy"] == 1.0

    def test_oob_reported(self, trained):
        _, forest = trained
        assert 0.9 <= forest.train_report["oob_accuracy"] <= 1.0


class TestPredict:
    def test_single_tree_scores_are_votes(self):
        data = synthetic_instances(80, seed=2)
        forest = train_forest(data, ForestParams(n_trees=1, seed=9))
        for inst in synthetic_instances(20, seed=8, start=300):
            assert predict_score(forest, inst) in (0.0, 1.0)

    def test_deep_true_region(self, trained):
        _, forest = trained
        deep = EncodedInstance(x=tuple([0.95, 0.5] + [0.0] * 28), label=None,
                               occurrence_id="o", candidate_id="c")
        assert predict_score(forest, deep) >= 0.9

    def test_all_trees_agree_gives_one(self, trained):
        _, forest = trained
        deep = EncodedInstance(x=tuple([0.99, 0.9] + [0.0] * 28), label=None,
                               occurrence_id="o", candidate_id="c")
        score = predict_score(forest, deep)
        votes = score * forest.n_trees
        assert votes == pytest.approx(round(votes))

    def test_tree_permutation_invariance(self, trained):
        _, forest = trained
        import copy

        shuffled = copy.deepcopy(forest)
        shuffled.trees = shuffled.trees[::-1]
        inst = synthetic_instances(10, seed=42, start=900)[0]
        assert predict_score(forest, inst) == predict_score(shuffled, inst)

    def test_schema_mismatch(self, trained):
        _, forest = trained
        bad = EncodedInstance(x=(0.1, 0.2), label=None, occurrence_id="o",
                              candidate_id="c")
        with pytest.raises(SchemaMismatch):
            predict_score(forest, bad)

    def test_classify_threshold_inclusive(self, trained):
        _, forest = trained

        class Stub:
            pass

        # direct check of the documented convention on the boundary
        from termalign import model as m

        inst = synthetic_instances(1, seed=1)[0]
        score = predict_score(forest, inst)
        assert classify(forest, inst, threshold=score) is True
        assert classify(forest, inst, threshold=score + 1e-9) is False


class TestRankOccurrence:
    def test_tie_breaks(self, trained):
        _, forest = trained
        x_hi = tuple([0.9, 0.5] + [0.0] * 28)
        instances = [
            EncodedInstance(x=x_hi, label=None, occurrence_id="o", candidate_id="o#4",
                            word_count=4),
            EncodedInstance(x=x_hi, label=None, occurrence_id="o", candidate_id="o#2",
                            word_count=2),
            EncodedInstance(x=tuple([0.1, 0.5] + [0.0] * 28), label=None,
                            occurrence_id="o", candidate_id="o#1", word_count=1),
        ]
        ranked = rank_occurrence(forest, instances)
        assert ranked[0][0] == "o#2"  # equal scores: shorter candidate wins
        assert {cid for cid, _ in ranked} == {"o#1", "o#2", "o#4"}

    def test_single_candidate_wins(self, trained):
        _, forest = trained
        inst = EncodedInstance(x=tuple([0.1, 0.1] + [0.0] * 28), label=None,
                               occurrence_id="o", candidate_id="only", word_count=1)
        assert rank_occurrence(forest, [inst])[0][0] == "only"

    def test_selection_vs_classification_divergence(self, trained):
        # an occurrence where no candidate clears 0.5 still gets a head
        _, forest = trained
        lows = [EncodedInstance(x=tuple([0.1 + 0.05 * i, 0.2] + [0.0] * 28),
                                label=None, occurrence_id="o",
                                candidate_id=f"o#{i}", word_count=i + 1)
                for i in range(3)]
        ranked = rank_occurrence(forest, lows)
        assert len(ranked) == 3
        assert all(not classify(forest, inst) for inst in lows)

    def test_empty_group(self, trained):
        _, forest = trained
        with pytest.raises(EmptyGroup):
            rank_occurrence(forest, [])

    def test_mixed_occurrences_rejected(self, trained):
        _, forest = trained
        a, b = synthetic_instances(8, seed=6)[:2]
        bad = [a, EncodedInstance(x=b.x, label=None, occurrence_id="other",
                                  candidate_id="c")]
        with pytest.raises(ValueError):
            rank_occurrence(forest, bad)


class TestPersistence:
    def test_save_load_round_trip(self, trained, tmp_path):
        _, forest = trained
        path = tmp_path / "model.json"
        save_forest(forest, path)
        loaded = load_forest(path)
        for inst in synthetic_instances(50, seed=31, start=700):
            assert predict_score(forest, inst) == predict_score(loaded, inst)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "not-model.json"
        path.write_text("{}")
        with pytest.raises(SchemaMismatch):
            load_forest(path)
