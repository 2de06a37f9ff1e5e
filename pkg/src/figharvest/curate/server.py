"""HTTP API over curation sessions; this is what the box editor talks to.

Edits are server-authoritative: every mutation returns the replayed
label state for the touched page, and clients are expected to render
exactly that. Stale sequence numbers and locked sessions answer 409.
"""

import threading
from pathlib import Path
from typing import Any, Optional, Union

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from figharvest.curate.diff import diff_labels, session_stats
from figharvest.curate.session import (
    CurationSession,
    EditError,
    EditOp,
    SessionStatus,
    SessionStore,
)
from figharvest.evaluation import EvalConfig

PathLike = Union[str, Path]


def _http_error(exc: EditError) -> HTTPException:
    message = str(exc)
    if "stale sequence" in message or "locked" in message:
        return HTTPException(status_code=409, detail=message)
    if "unknown" in message:
        return HTTPException(status_code=404, detail=message)
    return HTTPException(status_code=400, detail=message)


def _page_payload(session: CurationSession, page_id: str) -> dict[str, Any]:
    return {
        "doc_id": session.doc_id,
        "page_id": page_id,
        "sequence": session.sequence,
        "status": session.status.value,
        "labels": [lab.to_record() for lab in session.labels_for(page_id)],
    }


def create_app(store_dir: PathLike) -> FastAPI:
    store = SessionStore(store_dir)
    app = FastAPI(title="curation API")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, CurationSession] = {}
    write_lock = threading.Lock()

    def get_session(doc_id: str) -> CurationSession:
        session = sessions.get(doc_id)
        if session is None:
            try:
                session = store.load(doc_id)
            except FileNotFoundError:
                raise HTTPException(status_code=404, detail=f"unknown session '{doc_id}'")
            sessions[doc_id] = session
        return session

    @app.get("/api/sessions")
    def list_sessions() -> list[dict[str, Any]]:
        out = []
        for doc_id in store.list_ids():
            session = get_session(doc_id)
            out.append({
                "doc_id": doc_id,
                "status": session.status.value,
                "sequence": session.sequence,
                "n_pages": len(session.page_ids),
                "year": session.year,
            })
        return out

    @app.get("/api/session/{doc_id}")
    def session_detail(doc_id: str) -> dict[str, Any]:
        session = get_session(doc_id)
        return {
            "doc_id": session.doc_id,
            "status": session.status.value,
            "sequence": session.sequence,
            "page_size": list(session.page_size),
            "pages": session.page_ids,
            "year": session.year,
        }

    @app.get("/api/session/{doc_id}/page/{page_id}/labels")
    def page_labels(doc_id: str, page_id: str) -> dict[str, Any]:
        session = get_session(doc_id)
        try:
            return _page_payload(session, page_id)
        except EditError as exc:
            raise _http_error(exc)

    @app.get("/api/session/{doc_id}/page/{page_id}/raster")
    def page_raster(doc_id: str, page_id: str) -> FileResponse:
        session = get_session(doc_id)
        if session.raster_dir is None:
            raise HTTPException(status_code=404, detail="session has no raster directory")
        path = Path(session.raster_dir) / f"{page_id}.png"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"no raster for page '{page_id}'")
        return FileResponse(path, media_type="image/png")

    @app.post("/api/session/{doc_id}/edit")
    def post_edit(doc_id: str, payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = get_session(doc_id)
        try:
            op = EditOp.from_record(payload)
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"malformed edit op: {exc}")
        with write_lock:
            try:
                store.append_op(session, op)
            except EditError as exc:
                raise _http_error(exc)
        return _page_payload(session, op.page_id)

    @app.post("/api/session/{doc_id}/undo")
    def post_undo(doc_id: str, payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = get_session(doc_id)
        actor = payload.get("actor")
        if not actor:
            raise HTTPException(status_code=400, detail="undo requires an actor")
        with write_lock:
            try:
                inverse = session.invert_last(str(actor))
                store.append_op(session, inverse)
            except EditError as exc:
                raise _http_error(exc)
        out = _page_payload(session, inverse.page_id)
        out["undone"] = inverse.kind.value
        return out

    @app.post("/api/session/{doc_id}/status")
    def post_status(doc_id: str, payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        session = get_session(doc_id)
        actor = payload.get("actor")
        raw_status = payload.get("status")
        if not actor or not raw_status:
            raise HTTPException(status_code=400, detail="status change requires actor and status")
        try:
            target = SessionStatus(raw_status)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown status {raw_status!r}")
        with write_lock:
            try:
                store.append_status(session, target, str(actor))
            except EditError as exc:
                raise _http_error(exc)
        return {"doc_id": doc_id, "status": session.status.value,
                "sequence": session.sequence}

    @app.get("/api/session/{doc_id}/diff")
    def session_diff(doc_id: str) -> dict[str, Any]:
        session = get_session(doc_id)
        cfg = EvalConfig()
        current = session.current_labels()
        pages = {pid: diff_labels(session.base[pid], current.get(pid, []), cfg).to_json_dict()
                 for pid in session.page_ids}
        totals: dict[str, int] = {}
        for page in pages.values():
            for bucket, count in page["counts"].items():
                totals[bucket] = totals.get(bucket, 0) + count
        return {"doc_id": doc_id, "totals": totals, "pages": pages}

    @app.get("/api/overview")
    def overview() -> dict[str, Any]:
        """Machine vs. curated label counts, grouped by session year."""
        by_year: dict[str, dict[str, Any]] = {}
        all_sessions = [get_session(doc_id) for doc_id in store.list_ids()]
        for session in all_sessions:
            key = str(session.year) if session.year is not None else "unknown"
            slot = by_year.setdefault(key, {
                "sessions": 0, "pages": 0,
                "machine_labels": 0, "curated_labels": 0,
                "statuses": {s.value: 0 for s in SessionStatus},
            })
            slot["sessions"] += 1
            slot["pages"] += len(session.page_ids)
            slot["machine_labels"] += sum(len(v) for v in session.base.values())
            slot["curated_labels"] += sum(len(v) for v in session.current_labels().values())
            slot["statuses"][session.status.value] += 1
        stats = session_stats(all_sessions)
        return {"by_year": by_year, "stats": stats.to_json_dict()}

    return app


def serve(store_dir: PathLike, port: int, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(store_dir), host=host, port=port, log_level="warning")
