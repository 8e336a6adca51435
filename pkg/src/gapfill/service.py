"""HTTP annotation service over a SessionStore.

Endpoints (JSON payloads, CSV for exports):
  GET  /api/session/{informant}/next
  POST /api/session/{informant}/response
  GET  /api/admin/progress
  GET  /api/export/gf.csv
  GET  /api/export/rcq.csv

Informants are identified by opaque tokens in the URL; the service never
sends answer keys, system identities, or configuration details to them.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .errors import GapfillError, NotAssigned, UnknownInformant, ValidationError
from .store import SessionStore

DEFAULT_INSTRUCTIONS = (
    "Fill every blank in the problem sentence at the bottom of the page. "
    "When a hint text is shown, use it to work out the missing words; "
    "answer with a single word per blank.  Leave a blank empty if you "
    "cannot make a guess."
)


def create_app(store: SessionStore, instructions: str = DEFAULT_INSTRUCTIONS) -> FastAPI:
    app = FastAPI(title="gapfill annotation service", docs_url=None, redoc_url=None)

    @app.exception_handler(GapfillError)
    async def _gapfill_error(request: Request, exc: GapfillError):
        status = 400
        if isinstance(exc, UnknownInformant):
            status = 404
        elif isinstance(exc, NotAssigned):
            status = 403
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/api/session/{informant_id}/next")
    def next_problem(informant_id: str):
        return store.next_problem(informant_id, instructions=instructions)

    @app.post("/api/session/{informant_id}/response")
    async def submit_response(informant_id: str, request: Request):
        body = await request.json()
        problem_id = body.get("problem_id")
        if not isinstance(problem_id, str):
            raise ValidationError("problem_id must be a string")
        raw_fills = body.get("fills", {})
        if not isinstance(raw_fills, dict):
            raise ValidationError("fills must be an object")
        fills: dict[int, str] = {}
        for key, value in raw_fills.items():
            try:
                pos = int(key)
            except (TypeError, ValueError):
                raise ValidationError(f"bad gap position {key!r}") from None
            fills[pos] = "" if value is None else str(value)
        elapsed = body.get("elapsed_ms")
        elapsed_ms = int(elapsed) if isinstance(elapsed, (int, float)) else None
        receipt = store.submit(informant_id, problem_id, fills, elapsed_ms=elapsed_ms)
        return receipt.to_dict()

    @app.get("/api/admin/progress")
    def progress():
        return store.progress()

    @app.get("/api/export/gf.csv")
    def export_gf():
        return PlainTextResponse(store.export_gf_csv(), media_type="text/csv")

    @app.get("/api/export/rcq.csv")
    def export_rcq():
        return PlainTextResponse(store.export_rcq_csv(), media_type="text/csv")

    return app
