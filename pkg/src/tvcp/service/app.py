"""HTTP surface of the annotation service.

Status codes: 200 success, 400 validation failure, 404 unknown id,
409 state conflict (closed HIT, duplicate vote, blocked annotator,
already-reviewed submission).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from tvcp.errors import (
    ContractError,
    NotFoundError,
    RequestValidationError,
    StateConflictError,
)
from tvcp.service.core import AnnotationService


class StatementIn(BaseModel):
    statement_id: str
    text: str
    created_at: int | None = None


class StatementsPayload(BaseModel):
    statements: list[StatementIn]


class VotesPayload(BaseModel):
    annotator_id: str
    votes: dict[str, str]


class FollowupEntry(BaseModel):
    label: str
    text: str
    updated: str


class FollowupsPayload(BaseModel):
    annotator_id: str
    entries: list[FollowupEntry]


class ReviewPayload(BaseModel):
    reviewer_id: str
    decision: str
    feedback: str = ""
    entries: list[FollowupEntry] | None = None


class BlockPayload(BaseModel):
    reviewer_id: str = Field(default="")


def create_app(service: AnnotationService) -> FastAPI:
    app = FastAPI(title="tvcp annotation service")
    app.state.service = service

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors})

    @app.exception_handler(ContractError)
    async def _contract(request: Request, exc: ContractError):
        return JSONResponse(status_code=400, content={"detail": [str(exc)]})

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(StateConflictError)
    async def _conflict(request: Request, exc: StateConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "events": len(service.log)}

    @app.post("/statements")
    def add_statements(payload: StatementsPayload):
        hit_ids = service.add_statements([s.model_dump() for s in payload.statements])
        return {"hits_created": hit_ids}

    @app.get("/hits/next")
    def next_hit(task: str, annotator: str):
        view = service.next_hit(task, annotator)
        if view is None:
            return JSONResponse(status_code=404, content={"detail": "no open HITs"})
        return view

    @app.post("/hits/{hit_id}/votes")
    def submit_votes(hit_id: str, payload: VotesPayload):
        return service.submit_votes(hit_id, payload.annotator_id, payload.votes)

    @app.post("/hits/{hit_id}/followups")
    def submit_followups(hit_id: str, payload: FollowupsPayload):
        return service.submit_followups(
            hit_id, payload.annotator_id, [e.model_dump() for e in payload.entries]
        )

    @app.get("/review/queue")
    def review_queue():
        return {"queue": service.review_queue()}

    @app.post("/review/{submission_id}")
    def review(submission_id: str, payload: ReviewPayload):
        return service.review_submission(
            reviewer_id=payload.reviewer_id,
            submission_id=submission_id,
            decision=payload.decision,
            feedback=payload.feedback,
            entries=[e.model_dump() for e in payload.entries] if payload.entries else None,
        )

    @app.post("/annotators/{annotator_id}/block")
    def block(annotator_id: str, payload: BlockPayload | None = None):
        return service.block_annotator(annotator_id)

    @app.post("/annotators/{annotator_id}/qualify")
    def qualify(annotator_id: str):
        return service.qualify_annotator(annotator_id)

    @app.get("/annotators/{annotator_id}")
    def annotator(annotator_id: str):
        return service.annotator_view(annotator_id)

    @app.get("/export")
    def export():
        samples, manifest = service.export_samples()
        return {"manifest": manifest, "records": [s.to_record() for s in samples]}

    return app
