"""HTTP review service over the store.

Serves the expert correction loop: list occurrences, inspect ranked
candidates with score breakdowns, and post labels. Reads are snapshots of
the store files; the only writes are appended annotation records, funneled
through the store's single-writer lock. Optionally serves the built review
UI bundle so deployment is a single process.
"""

from __future__ import annotations

import csv
import io
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .extract import Occurrence
from .termstore import PROVENANCE_EXPERT, Store, build_termbase, export_termbase


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class LabelBody(BaseModel):
    candidate_id: str | None = None
    custom_arabic_term: str | None = None
    reviewer: str = ""


def _candidate_span(occ: Occurrence, word_count: int) -> list[int] | None:
    """[start, end) of the i-word candidate within context_text."""
    words = [t for t in occ.preceding_words if t.script != "punct"]
    if word_count < 1 or word_count > len(words):
        return None
    start = words[word_count - 1].char_start - occ.context_char_start
    end = words[0].char_end - occ.context_char_start
    return [start, end]


def create_app(store: Store, ui_dir: str | None = None, token: str | None = None) -> FastAPI:
    app = FastAPI(title="termalign review service", version="1.0.0")
    write_gate = threading.Lock()
    recent_posts: dict[tuple, float] = {}  # (occ, cand-or-term, label) -> monotonic time

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"error": "invalid-body", "message": str(exc.errors())})

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.url.path.startswith("/api/"):
            if request.headers.get("X-Review-Token") != token:
                return JSONResponse(status_code=401,
                                    content={"error": "unauthorized",
                                             "message": "missing or wrong X-Review-Token"})
        return await call_next(request)

    def snapshot():
        occurrences = store.load_occurrences()
        candidates = store.load_candidates()
        scores = {r.candidate_id: r for r in store.load_scores()}
        view = store.label_view()
        return occurrences, candidates, scores, view

    def occurrence_status(occ_id: str, cand_ids: list[str], view) -> str:
        for cid in cand_ids:
            rec = view.get(cid)
            if rec is not None and rec.provenance == PROVENANCE_EXPERT:
                return "reviewed"
        return "unreviewed"

    @app.get("/api/occurrences")
    def list_occurrences(status: str | None = None, book: str | None = None,
                         page: int = 1, page_size: int = 20):
        if status not in (None, "unreviewed", "reviewed"):
            raise ApiError(422, "invalid-filter", f"unknown status {status!r}")
        if page < 1 or page_size < 1 or page_size > 500:
            raise ApiError(422, "invalid-page", "page >= 1 and 1 <= page_size <= 500")
        occurrences, candidates, scores, view = snapshot()
        cands_by_occ: dict[str, list] = {}
        for c in candidates:
            cands_by_occ.setdefault(c.occurrence_id, []).append(c)
        items = []
        for occ in occurrences:
            if book and occ.book_id != book:
                continue
            cand_ids = [c.candidate_id for c in cands_by_occ.get(occ.occurrence_id, [])]
            occ_status = occurrence_status(occ.occurrence_id, cand_ids, view)
            if status and occ_status != status:
                continue
            items.append({
                "occurrence_id": occ.occurrence_id,
                "book_id": occ.book_id,
                "foreign_term": occ.foreign_term,
                "n_candidates": len(cand_ids),
                "status": occ_status,
            })
        total = len(items)
        start = (page - 1) * page_size
        return {
            "items": items[start:start + page_size],
            "page": page,
            "page_size": page_size,
            "total": total,
            "total_pages": (total + page_size - 1) // page_size,
        }

    @app.get("/api/occurrences/{occ_id}")
    def get_occurrence(occ_id: str):
        occurrences, candidates, scores, view = snapshot()
        occ = next((o for o in occurrences if o.occurrence_id == occ_id), None)
        if occ is None:
            raise ApiError(404, "unknown-occurrence", f"no occurrence {occ_id}")
        cands = [c for c in candidates if c.occurrence_id == occ_id]
        rows = []
        for c in cands:
            rec = scores.get(c.candidate_id)
            label_rec = view.get(c.candidate_id)
            rows.append({
                "candidate_id": c.candidate_id,
                "surface": c.surface,
                "word_count": c.word_count,
                "is_variant": c.is_variant,
                "span": None if c.is_variant else _candidate_span(occ, c.word_count),
                "score": rec.score if rec else None,
                "components": rec.components if rec else None,
                "selected": rec.selected if rec else False,
                "label": None if label_rec is None else label_rec.label,
                "label_provenance": None if label_rec is None else label_rec.provenance,
            })
        rows.sort(key=lambda r: (-(r["score"] if r["score"] is not None else -1.0),
                                 r["word_count"], r["candidate_id"]))
        for rec in view.values():
            if rec.occurrence_id == occ_id and rec.custom_arabic_term is not None:
                rows.append({
                    "candidate_id": rec.candidate_id,
                    "surface": rec.custom_arabic_term,
                    "word_count": len(rec.custom_arabic_term.split()),
                    "is_variant": False,
                    "custom": True,
                    "span": None,
                    "score": None,
                    "components": None,
                    "selected": False,
                    "label": rec.label,
                    "label_provenance": rec.provenance,
                })
        cand_ids = [c.candidate_id for c in cands]
        return {
            "occurrence": {
                "occurrence_id": occ.occurrence_id,
                "doc_id": occ.doc_id,
                "book_id": occ.book_id,
                "foreign_term": occ.foreign_term,
                "context_text": occ.context_text,
                "foreign_span": [occ.foreign_char_span[0] - occ.context_char_start,
                                 occ.foreign_char_span[1] - occ.context_char_start],
            },
            "candidates": rows,
            "status": occurrence_status(occ_id, cand_ids, view),
        }

    @app.post("/api/occurrences/{occ_id}/label")
    def post_label(occ_id: str, body: LabelBody):
        if bool(body.candidate_id) == bool(body.custom_arabic_term):
            raise ApiError(422, "invalid-body",
                           "provide exactly one of candidate_id or custom_arabic_term")
        occurrences, candidates, scores, view = snapshot()
        occ = next((o for o in occurrences if o.occurrence_id == occ_id), None)
        if occ is None:
            raise ApiError(404, "unknown-occurrence", f"no occurrence {occ_id}")
        if body.candidate_id:
            cand = next((c for c in candidates if c.candidate_id == body.candidate_id), None)
            if cand is None:
                raise ApiError(404, "unknown-candidate", f"no candidate {body.candidate_id}")
            if cand.occurrence_id != occ_id:
                raise ApiError(422, "wrong-occurrence",
                               f"candidate {body.candidate_id} belongs to {cand.occurrence_id}")
            target_id = body.candidate_id
            custom = None
        else:
            term = body.custom_arabic_term.strip()
            if not term:
                raise ApiError(422, "invalid-body", "custom_arabic_term is empty")
            target_id = f"{occ_id}#expert"
            custom = term
        key = (occ_id, custom or target_id, True)
        now = time.monotonic()
        if now - recent_posts.get(key, -10.0) < 1.0:
            return {"ok": True, "deduplicated": True, "appended": 0}
        if not write_gate.acquire(timeout=2.0):
            raise ApiError(409, "store-busy", "another write is in progress")
        try:
            appended = store.append_annotation(
                target_id, True, PROVENANCE_EXPERT, reviewer=body.reviewer,
                occurrence_id=occ_id, custom_arabic_term=custom)
            recent_posts[key] = now
        finally:
            write_gate.release()
        return {"ok": True, "deduplicated": False, "appended": len(appended)}

    @app.get("/api/stats")
    def stats():
        occurrences, candidates, scores, view = snapshot()
        cands_by_occ: dict[str, list] = {}
        for c in candidates:
            cands_by_occ.setdefault(c.occurrence_id, []).append(c.candidate_id)
        reviewed = 0
        for occ in occurrences:
            if occurrence_status(occ.occurrence_id,
                                 cands_by_occ.get(occ.occurrence_id, []), view) == "reviewed":
                reviewed += 1
        expert_records = sum(1 for r in store.load_annotations()
                             if r.provenance == PROVENANCE_EXPERT)
        return {
            "occurrences": len(occurrences),
            "reviewed": reviewed,
            "unreviewed": len(occurrences) - reviewed,
            "expert_records": expert_records,
        }

    @app.get("/api/export/annotations")
    def export_annotations():
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["candidate_id", "occurrence_id", "label", "provenance",
                         "reviewer", "timestamp", "custom_arabic_term"])
        for rec in store.load_annotations():
            writer.writerow([rec.candidate_id, rec.occurrence_id,
                             "true" if rec.label else "false", rec.provenance,
                             rec.reviewer, rec.timestamp, rec.custom_arabic_term or ""])
        return Response(content=buf.getvalue(), media_type="text/csv; charset=utf-8")

    @app.get("/api/export/termbase")
    def export_termbase_endpoint(format: str = "tsv"):
        if format not in ("tsv", "jsonl"):
            raise ApiError(422, "invalid-format", f"unknown format {format!r}")
        entries = build_termbase(store.load_occurrences(), store.load_candidates(),
                                 store.load_scores(), store.load_annotations())
        media = "text/tab-separated-values" if format == "tsv" else "application/x-ndjson"
        return Response(content=export_termbase(entries, format),
                        media_type=f"{media}; charset=utf-8")

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def dump_openapi(path: str | Path) -> None:
    """Write the OpenAPI description of the API to a JSON file."""
    import json

    app = create_app(Store(Path("/tmp/termalign-openapi-store")))
    Path(path).write_text(json.dumps(app.openapi(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
