"""HTTP API over an annotation store.

Bearer-token JSON API: annotators register, walk the tutorial, then loop
GET /api/assignments/next -> GET /api/passages/{id} -> POST
/api/annotations until no assignment is left. Admin report endpoints
recompute (or serve cached) aggregation and scoring documents. Errors are
``{"code", "message", "details"}``; sync handlers run in a threadpool and
every store mutation serializes on the store's writer lock.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import (
    AuthorizationError, CorefkitError, LeaseError, PartitionError, StoreError,
)
from .model import Clustering
from .scoring import ScreeningResult
from .store import AnnotationStore


class RegisterRequest(BaseModel):
    name: str | None = None


class StepSubmission(BaseModel):
    clusters: list[list[str]]


class AnnotationSubmission(BaseModel):
    passage_id: str
    clusters: list[list[str]] = Field(default_factory=list)


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or {}},
    )


def create_app(store: AnnotationStore,
               frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="corefkit", docs_url=None, redoc_url=None)

    def get_annotator(authorization: str = Header(default="")) -> dict:
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise HTTPException(401, "missing bearer token")
        try:
            return store.annotator_by_token(token.strip())
        except AuthorizationError:
            raise HTTPException(401, "unknown token") from None

    @app.exception_handler(PartitionError)
    async def partition_error(request: Request, exc: PartitionError):
        return _error(422, "partition_violation", str(exc),
                      {"missing": exc.missing, "extra": exc.extra})

    @app.exception_handler(LeaseError)
    async def lease_error(request: Request, exc: LeaseError):
        return _error(409, "lease_conflict", str(exc))

    @app.exception_handler(AuthorizationError)
    async def authorization_error(request: Request, exc: AuthorizationError):
        return _error(403, "not_authorized", str(exc))

    @app.exception_handler(StoreError)
    async def store_error(request: Request, exc: StoreError):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(CorefkitError)
    async def corefkit_error(request: Request, exc: CorefkitError):
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        return _error(exc.status_code, "http_error", str(exc.detail))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/api/annotators", status_code=201)
    def register(body: RegisterRequest):
        record = store.register_annotator(body.name)
        return {
            "annotator_id": record["annotator_id"],
            "token": record["token"],
            "tutorial_steps": len(store.tutorial.steps) if store.tutorial else 0,
        }

    @app.get("/api/tutorial")
    def tutorial(annotator: dict = Depends(get_annotator)):
        if store.tutorial is None:
            raise StoreError("store has no tutorial script")
        return {
            "steps": [s.public_dict() for s in store.tutorial.steps],
            "next_step": annotator.get("next_tutorial_step", 0),
            "screening": annotator.get("screening"),
        }

    @app.post("/api/tutorial/steps/{step_index}")
    def tutorial_step(step_index: int, body: StepSubmission,
                      annotator: dict = Depends(get_annotator)):
        result = store.run_tutorial_step(annotator["annotator_id"],
                                         step_index, body.clusters)
        if isinstance(result, ScreeningResult):
            return {
                "kind": "screening",
                "b3_f1": result.b3_f1,
                "passed": result.passed,
                "threshold": result.threshold,
            }
        out = result.to_json_dict()
        out["kind"] = "feedback"
        return out

    @app.get("/api/assignments/next")
    def next_assignment(annotator: dict = Depends(get_annotator)):
        assignment = store.assign_next(annotator["annotator_id"])
        return {"assignment": assignment}

    @app.get("/api/passages/{passage_id}")
    def passage(passage_id: str, annotator: dict = Depends(get_annotator)):
        try:
            p = store.corpus.passage(passage_id)
        except KeyError:
            raise StoreError(f"unknown passage {passage_id}") from None
        doc = store.corpus.document(p.doc_id)
        first, last = p.sentence_range
        draft = store.annotation(passage_id, annotator["annotator_id"])
        return {
            "passage_id": p.passage_id,
            "doc_id": p.doc_id,
            "domain": doc.domain,
            "sentences": [
                {"sent_id": s.sent_id,
                 "tokens": [{"doc_offset": t.doc_offset, "surface": t.surface}
                            for t in s.tokens]}
                for s in doc.sentences[first:last + 1]
            ],
            "mentions": [
                {"mention_id": m.mention_id, "span": list(m.span),
                 "head": m.head}
                for m in p.mentions
            ],
            "draft": draft.to_json_dict() if draft else None,
        }

    @app.post("/api/annotations")
    def submit(body: AnnotationSubmission,
               annotator: dict = Depends(get_annotator)):
        clustering = Clustering(
            passage_id=body.passage_id,
            annotator_id=annotator["annotator_id"],
            clusters=[set(c) for c in body.clusters],
        )
        return store.submit_annotation(clustering)

    @app.get("/api/admin/reports")
    def reports(kind: str, tau: int | None = None,
                singletons: str | None = None, gold: str | None = None,
                gold_mentions: str | None = None,
                group_by: str | None = None):
        params = {}
        if kind == "aggregate":
            params["tau"] = tau if tau is not None else 3
        elif kind == "iaa":
            params["singletons"] = singletons or "exclude"
            params["group_by"] = group_by or "domain"
        elif kind == "scores":
            if not gold:
                raise StoreError("scores report requires gold=<path>")
            params.update(gold=gold, tau=tau,
                          singletons=singletons or "include")
        elif kind == "detector-eval":
            if not gold_mentions:
                raise StoreError(
                    "detector-eval report requires gold_mentions=<path>")
            params["gold_mentions"] = gold_mentions
        return store.report(kind, **params)

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="frontend")

    return app
