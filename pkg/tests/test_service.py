import hashlib
import json
import random

import pytest
from fastapi.testclient import TestClient

from termalign.cli import main
from termalign.service import create_app
from termalign.termstore import Store

from .test_cli import build_planted_workspace


@pytest.fixture()
def store(tmp_path):
    _, corpus_dir, config_path, store_root = build_planted_workspace(
        tmp_path, n_paragraphs=12, n_books=3, n_terms=6, seed=21)
    cfg = ["--config", str(config_path)]
    assert main(cfg + ["extract", str(corpus_dir)]) == 0
    assert main(cfg + ["features"]) == 0
    assert main(cfg + ["score-heuristic"]) == 0
    return Store(store_root)


@pytest.fixture()
def client(store):
    return TestClient(create_app(store))


def first_occurrence(client, status=None):
    params = {"page_size": 1}
    if status:
        params["status"] = status
    page = client.get("/api/occurrences", params=params).json()
    return page["items"][0] if page["items"] else None


class TestListing:
    def test_pagination(self, client):
        page = client.get("/api/occurrences", params={"page_size": 5}).json()
        assert page["total"] == 12
        assert page["total_pages"] == 3
        assert len(page["items"]) == 5
        last = client.get("/api/occurrences",
                          params={"page_size": 5, "page": 3}).json()
        assert len(last["items"]) == 2

    def test_book_filter(self, client, store):
        book = store.load_occurrences()[0].book_id
        page = client.get("/api/occurrences", params={"book": book}).json()
        assert page["total"] == 4
        assert all(i["book_id"] == book for i in page["items"])

    def test_all_unreviewed_initially(self, client):
        page = client.get("/api/occurrences", params={"status": "reviewed"}).json()
        assert page["total"] == 0

    def test_invalid_filters(self, client):
        assert client.get("/api/occurrences", params={"status": "bogus"}).status_code == 422
        assert client.get("/api/occurrences", params={"page": 0}).status_code == 422


class TestDetail:
    def test_ordered_by_score_with_components(self, client, store):
        occ = store.load_occurrences()[0]
        detail = client.get(f"/api/occurrences/{occ.occurrence_id}").json()
        rows = detail["candidates"]
        scores = [r["score"] for r in rows]
        assert scores == sorted(scores, reverse=True)
        assert all(set(r["components"]) == {"s_l", "s_s", "s_e", "s_p", "s_pos"}
                   for r in rows)
        assert detail["occurrence"]["context_text"]
        fs, fe = detail["occurrence"]["foreign_span"]
        assert detail["occurrence"]["context_text"][fs:fe] == \
            f"({detail['occurrence']['foreign_term']})"

    def test_candidate_spans_point_into_context(self, client, store):
        occ = store.load_occurrences()[0]
        detail = client.get(f"/api/occurrences/{occ.occurrence_id}").json()
        ctx = detail["occurrence"]["context_text"]
        for row in detail["candidates"]:
            if row["span"] is None:
                continue
            start, end = row["span"]
            assert ctx[start:end] == row["surface"]

    def test_unknown_404_shape(self, client):
        resp = client.get("/api/occurrences/nope@1")
        assert resp.status_code == 404
        body = resp.json()
        assert set(body) == {"error", "message"}


class TestLabeling:
    def test_post_then_get(self, client, store):
        occ = store.load_occurrences()[0]
        detail = client.get(f"/api/occurrences/{occ.occurrence_id}").json()
        target = detail["candidates"][1]["candidate_id"]
        resp = client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                           json={"candidate_id": target, "reviewer": "tester"})
        assert resp.status_code == 200
        after = client.get(f"/api/occurrences/{occ.occurrence_id}").json()
        labels = {r["candidate_id"]: r["label"] for r in after["candidates"]}
        assert labels[target] is True
        assert sum(1 for v in labels.values() if v) == 1
        assert after["status"] == "reviewed"

    def test_custom_term_creates_expert_record(self, client, store):
        occ = store.load_occurrences()[1]
        resp = client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                           json={"custom_arabic_term": "كتيبة العاصفة",
                                 "reviewer": "tester"})
        assert resp.status_code == 200
        records = [r for r in store.load_annotations()
                   if r.custom_arabic_term == "كتيبة العاصفة"]
        assert len(records) == 1
        assert records[0].provenance == "expert"
        detail = client.get(f"/api/occurrences/{occ.occurrence_id}").json()
        custom_rows = [r for r in detail["candidates"] if r.get("custom")]
        assert len(custom_rows) == 1 and custom_rows[0]["label"] is True

    def test_invalid_bodies(self, client, store):
        occ_id = store.load_occurrences()[0].occurrence_id
        assert client.post(f"/api/occurrences/{occ_id}/label",
                           json={}).status_code == 422
        assert client.post(f"/api/occurrences/{occ_id}/label",
                           json={"candidate_id": "x", "custom_arabic_term": "y"}
                           ).status_code == 422
        assert client.post(f"/api/occurrences/{occ_id}/label",
                           json={"custom_arabic_term": "  "}).status_code == 422

    def test_unknown_ids(self, client, store):
        occ_id = store.load_occurrences()[0].occurrence_id
        assert client.post("/api/occurrences/ghost@1/label",
                           json={"candidate_id": "x"}).status_code == 404
        assert client.post(f"/api/occurrences/{occ_id}/label",
                           json={"candidate_id": "ghost#1"}).status_code == 404

    def test_candidate_of_other_occurrence_rejected(self, client, store):
        occs = store.load_occurrences()
        other_cand = next(c for c in store.load_candidates()
                          if c.occurrence_id == occs[1].occurrence_id)
        resp = client.post(f"/api/occurrences/{occs[0].occurrence_id}/label",
                           json={"candidate_id": other_cand.candidate_id})
        assert resp.status_code == 422

    def test_double_click_deduplicated(self, client, store):
        occ = store.load_occurrences()[2]
        cand = next(c for c in store.load_candidates()
                    if c.occurrence_id == occ.occurrence_id)
        body = {"candidate_id": cand.candidate_id}
        first = client.post(f"/api/occurrences/{occ.occurrence_id}/label", json=body)
        second = client.post(f"/api/occurrences/{occ.occurrence_id}/label", json=body)
        assert first.json()["deduplicated"] is False
        assert second.json()["deduplicated"] is True

    def test_labeling_all_empties_unreviewed(self, client, store):
        for occ in store.load_occurrences():
            cand = next(c for c in store.load_candidates()
                        if c.occurrence_id == occ.occurrence_id)
            client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                        json={"candidate_id": cand.candidate_id})
        page = client.get("/api/occurrences", params={"status": "unreviewed"}).json()
        assert page["total"] == 0
        stats = client.get("/api/stats").json()
        assert stats["reviewed"] == stats["occurrences"] == 12

    def test_one_true_invariant_random_posts(self, client, store):
        rng = random.Random(5)
        occs = store.load_occurrences()
        cands_by_occ = {}
        for c in store.load_candidates():
            cands_by_occ.setdefault(c.occurrence_id, []).append(c.candidate_id)
        for _ in range(60):
            occ = rng.choice(occs)
            if rng.random() < 0.1:
                body = {"custom_arabic_term": f"مصطلح {rng.randint(1, 3)}"}
            else:
                body = {"candidate_id": rng.choice(cands_by_occ[occ.occurrence_id])}
            client.post(f"/api/occurrences/{occ.occurrence_id}/label", json=body)
            view = store.label_view()
            for occ_id in {o.occurrence_id for o in occs}:
                trues = [r for r in view.values()
                         if r.occurrence_id == occ_id and r.label]
                assert len(trues) <= 1

    def test_api_never_mutates_primary_artifacts(self, client, store):
        def digest(path):
            return hashlib.sha256(path.read_bytes()).hexdigest()

        before = {p: digest(p) for p in (store.occurrences_path,
                                         store.candidates_path,
                                         store.features_path, store.scores_path)}
        occ = store.load_occurrences()[0]
        cand = next(c for c in store.load_candidates()
                    if c.occurrence_id == occ.occurrence_id)
        client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                    json={"candidate_id": cand.candidate_id})
        client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                    json={"custom_arabic_term": "آخر"})
        client.get("/api/export/termbase", params={"format": "tsv"})
        client.get("/api/export/annotations")
        after = {p: digest(p) for p in before}
        assert after == before


class TestExports:
    def test_annotations_csv(self, client, store):
        occ = store.load_occurrences()[0]
        cand = next(c for c in store.load_candidates()
                    if c.occurrence_id == occ.occurrence_id)
        client.post(f"/api/occurrences/{occ.occurrence_id}/label",
                    json={"candidate_id": cand.candidate_id, "reviewer": "r1"})
        resp = client.get("/api/export/annotations")
        assert resp.status_code == 200
        lines = resp.text.strip().split("\n")
        assert lines[0].startswith("candidate_id,occurrence_id,label")
        assert any(",expert," in line for line in lines[1:])

    def test_termbase_formats(self, client):
        tsv = client.get("/api/export/termbase", params={"format": "tsv"})
        assert tsv.status_code == 200
        assert tsv.text.startswith("foreign_term\t")
        jsonl = client.get("/api/export/termbase", params={"format": "jsonl"})
        assert jsonl.status_code == 200
        for line in jsonl.text.strip().split("\n"):
            json.loads(line)
        assert client.get("/api/export/termbase",
                          params={"format": "xml"}).status_code == 422


class TestAuth:
    def test_token_enforced(self, store):
        client = TestClient(create_app(store, token="sekrit"))
        assert client.get("/api/stats").status_code == 401
        ok = client.get("/api/stats", headers={"X-Review-Token": "sekrit"})
        assert ok.status_code == 200
