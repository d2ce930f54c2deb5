import hypothesis.strategies as st
from hypothesis import given

from termalign.candgen import (
    CandGenConfig,
    Candidate,
    candidates_for_occurrence,
    clitic_variants,
    generate_candidates,
)
from termalign.extract import Document, extract_occurrences
from termalign.textnorm import MATCHING_PROFILE, normalize_arabic

from .conftest import CONTEXT_1_CANDIDATES, CONTEXT_2_CANDIDATES


def _make_candidate(surface, word_count=1, cid="o#1"):
    return Candidate(candidate_id=cid, occurrence_id="o", word_count=word_count,
                     surface=surface,
                     normalized=normalize_arabic(surface, MATCHING_PROFILE))


class TestGenerateCandidates:
    def test_context1_six_listed(self, fixture_occurrences):
        cands = generate_candidates(fixture_occurrences[0])
        assert [c.surface for c in cands] == CONTEXT_1_CANDIDATES
        # hyphen retained but not counted: the hyphenated candidate is 2 words
        assert cands[1].surface == "للمركزية - الإثنية"
        assert cands[1].word_count == 2

    def test_context2_five_listed(self, fixture_occurrences):
        cands = generate_candidates(fixture_occurrences[1])
        assert [c.surface for c in cands] == CONTEXT_2_CANDIDATES
        assert [c.word_count for c in cands] == [1, 2, 3, 4, 5]

    def test_single_word_occurrence(self):
        doc = Document("d", "b", "كلمة (Foo) نهاية")
        occ = extract_occurrences(doc)[0]
        cands = generate_candidates(occ)
        assert len(cands) == 1
        assert cands[0].surface == "كلمة"

    def test_cap_formula(self):
        words = " ".join(["كلمة"] * 12)
        doc = Document("d", "b", f"{words} (Foo) نهاية")
        occ = extract_occurrences(doc)[0]
        # 1-word foreign term, alpha=2 beta=5: cap = 7
        assert len(generate_candidates(occ)) == 7
        assert len(generate_candidates(occ, CandGenConfig(alpha=1, beta=1))) == 2
        # 2-word foreign term raises the cap to 9
        doc2 = Document("d", "b", f"{words} (Foo Bar) نهاية")
        occ2 = extract_occurrences(doc2)[0]
        assert len(generate_candidates(occ2)) == 9

    def test_count_is_min_n_cap(self, fixture_occurrences):
        assert len(generate_candidates(fixture_occurrences[0])) == 6
        assert len(generate_candidates(fixture_occurrences[1])) == 5

    def test_ids_and_linkage(self, fixture_occurrences):
        occ = fixture_occurrences[1]
        for i, cand in enumerate(generate_candidates(occ), start=1):
            assert cand.candidate_id == f"{occ.occurrence_id}#{i}"
            assert cand.occurrence_id == occ.occurrence_id

    def test_nesting_invariant_fixture(self, fixture_occurrences):
        for occ in fixture_occurrences:
            cands = generate_candidates(occ)
            for shorter, longer in zip(cands, cands[1:]):
                assert longer.surface.endswith(" " + shorter.surface) or \
                    longer.surface.endswith(" - " + shorter.surface)

    def test_surfaces_never_contain_parens_or_term(self, fixture_occurrences):
        for occ in fixture_occurrences:
            for cand in generate_candidates(occ):
                assert "(" not in cand.surface and ")" not in cand.surface
                assert occ.foreign_term not in cand.surface

    @given(st.lists(st.sampled_from(["كلمة", "قال", "الحكومة", "النووي", "مفيد"]),
                    min_size=1, max_size=10),
           st.integers(min_value=1, max_value=3))
    def test_nesting_invariant_random(self, words, fwords):
        text = " ".join(words) + " (" + " ".join(["Foo"] * fwords) + ") نهاية"
        occs = extract_occurrences(Document("d", "b", text))
        assert len(occs) == 1
        cands = generate_candidates(occs[0])
        for a in cands:
            for b in cands:
                if a.word_count < b.word_count:
                    assert b.surface.endswith(a.surface)


class TestCliticVariants:
    def test_preposition_stripped(self):
        cand = _make_candidate("بهيئات التوزيع", word_count=2)
        variants = clitic_variants(cand)
        assert [v.surface for v in variants] == ["هيئات التوزيع"]
        assert variants[0].word_count == 2
        assert variants[0].is_variant
        assert variants[0].candidate_id == cand.candidate_id + "v"

    def test_definite_article_not_stripped(self):
        assert clitic_variants(_make_candidate("التوزيع")) == []

    def test_waw_conjunction_stripped(self):
        variants = clitic_variants(_make_candidate("والعلوم السياسية", word_count=2))
        assert [v.surface for v in variants] == ["العلوم السياسية"]

    def test_single_letter_word_untouched(self):
        assert clitic_variants(_make_candidate("و")) == []

    def test_pipeline_emits_variants_only_when_configured(self, fixture_occurrences):
        occ = fixture_occurrences[0]  # longest candidate starts with waw
        plain = candidates_for_occurrence(occ)
        assert all(not c.is_variant for c in plain)
        with_variants = candidates_for_occurrence(
            occ, CandGenConfig(emit_variants=True))
        assert any(c.is_variant for c in with_variants)
        assert [c for c in with_variants if not c.is_variant] == plain
