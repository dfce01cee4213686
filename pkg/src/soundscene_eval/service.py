"""HTTP face of the listening test.

JSON over HTTP, errors as 4xx with ``{code, message}`` bodies:

    POST /session {rater_id, affiliation}      -> {sid, n_trials}
    GET  /session/{sid}                        -> {sid, cursor, n_trials, complete}
    GET  /session/{sid}/trial/{i}              -> trial payload (prompt only in fit phase)
    GET  /session/{sid}/trial/{i}/audio        -> WAV bytes
    POST /session/{sid}/trial/{i}/rating       -> {accepted, cursor}
    GET  /export/ratings.csv                   -> ratings CSV (bearer token)

Audio URLs are anonymized; no payload ever names the system behind a
trial.
"""

from __future__ import annotations

import argparse
import io
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .listening import ListeningService, ServiceError
from .prompts import load_manifest
from .ratings import write_ratings_csv

__all__ = ["create_app", "main"]


class SessionRequest(BaseModel):
    rater_id: str
    affiliation: str


class RatingRequest(BaseModel):
    scores: dict[str, Any]
    played: bool = False


def create_app(service: ListeningService, export_token: str | None = None) -> FastAPI:
    app = FastAPI(title="soundscene listening test")

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.post("/session")
    def create_session(body: SessionRequest):
        session = service.create_session(body.rater_id, body.affiliation)
        return {"sid": session.sid, "n_trials": session.plan.n_trials}

    @app.get("/session/{sid}")
    def session_status(sid: str):
        return service.session_status(sid)

    @app.get("/session/{sid}/trial/{index}")
    def get_trial(sid: str, index: int):
        return service.get_trial(sid, index)

    @app.get("/session/{sid}/trial/{index}/audio")
    def get_audio(sid: str, index: int):
        return Response(content=service.trial_audio(sid, index), media_type="audio/wav")

    @app.post("/session/{sid}/trial/{index}/rating")
    def submit_rating(sid: str, index: int, body: RatingRequest):
        return service.submit_rating(sid, index, body.scores, body.played)

    @app.get("/export/ratings.csv")
    def export_ratings(
        include_partial: bool = False, authorization: str | None = Header(default=None)
    ):
        if export_token is not None and authorization != f"Bearer {export_token}":
            raise ServiceError("unauthorized", "missing or wrong bearer token", status=401)
        buffer = io.StringIO()
        write_ratings_csv(service.export_records(include_partial=include_partial), buffer)
        return Response(content=buffer.getvalue(), media_type="text/csv")

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="soundscene-listen", description="Run the listening-test service"
    )
    parser.add_argument("--manifest", required=True, help="dataset manifest CSV")
    parser.add_argument(
        "--systems-root", required=True,
        help="directory of per-system subdirectories holding <prompt_id>.wav files",
    )
    parser.add_argument("--log", required=True, help="append-only rating log path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--token", default=None, help="bearer token for the export endpoint")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)

    manifest = load_manifest(args.manifest)
    systems_root = Path(args.systems_root)
    systems = {p.name: p for p in sorted(systems_root.iterdir()) if p.is_dir()}
    service = ListeningService(manifest, systems, seed=args.seed, log_path=args.log)
    app = create_app(service, export_token=args.token)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
