"""Derived annotation state: a deterministic fold over the event log."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable

from tvcp.service.events import Event

#: Reviewer approvals after which an annotator becomes trusted.
TRUST_THRESHOLD = 20
#: Post-trust cadence: every Nth submission still enters the review queue.
SPOT_CHECK_EVERY = 5


@dataclass
class StatementRecord:
    statement_id: str
    text: str
    created_at: int | None = None
    votes: list[list] = field(default_factory=list)  # [annotator_id, value]
    status: str = "pending"  # pending | accepted | discarded
    resolved: str | None = None  # duration token when accepted
    discard_reason: str | None = None
    third_vote_requested: bool = False
    resolved_after_third: bool = False


@dataclass
class HitRecord:
    hit_id: str
    kind: str  # duration | followup
    statement_ids: list[str]
    assignments_needed: int = 1
    status: str = "open"  # open | submitted | reviewed
    submitted_by: list[str] = field(default_factory=list)
    third_vote: bool = False


@dataclass
class SubmissionRecord:
    submission_id: str
    hit_id: str
    annotator_id: str
    target_id: str
    entries: list[dict]  # {"label": ..., "text": ..., "updated": ...}
    review_state: str = "pending"  # pending | approved | rejected | edited
    auto_approved: bool = False
    feedback: str = ""
    reviewer_id: str | None = None


@dataclass
class AnnotatorProfile:
    annotator_id: str
    approved: int = 0
    rejected: int = 0
    blocked: bool = False
    qualified: bool = False
    post_trust_submissions: int = 0

    @property
    def trusted(self) -> bool:
        return not self.blocked and self.approved >= TRUST_THRESHOLD


class ServiceState:
    """In-memory projection of the event log."""

    def __init__(self) -> None:
        self.statements: dict[str, StatementRecord] = {}
        self.hits: dict[str, HitRecord] = {}
        self.submissions: dict[str, SubmissionRecord] = {}
        self.annotators: dict[str, AnnotatorProfile] = {}
        self.hit_seq = 0
        self.submission_seq = 0
        self.applied = 0

    def profile(self, annotator_id: str) -> AnnotatorProfile:
        if annotator_id not in self.annotators:
            self.annotators[annotator_id] = AnnotatorProfile(annotator_id=annotator_id)
        return self.annotators[annotator_id]

    # -- fold -------------------------------------------------------------

    def apply(self, event: Event) -> None:
        handler = getattr(self, f"_apply_{event.kind}", None)
        if handler is None:
            raise ValueError(f"unknown event kind: {event.kind!r}")
        handler(event.payload)
        self.applied = event.seq

    @classmethod
    def fold(cls, events: Iterable[Event]) -> "ServiceState":
        state = cls()
        for event in events:
            state.apply(event)
        return state

    def snapshot(self) -> dict:
        """Canonical dict of the full state, used by replay checks."""
        return {
            "statements": {k: asdict(v) for k, v in sorted(self.statements.items())},
            "hits": {k: asdict(v) for k, v in sorted(self.hits.items())},
            "submissions": {k: asdict(v) for k, v in sorted(self.submissions.items())},
            "annotators": {k: asdict(v) for k, v in sorted(self.annotators.items())},
            "hit_seq": self.hit_seq,
            "submission_seq": self.submission_seq,
        }

    # -- handlers ----------------------------------------------------------

    def _apply_statement_added(self, p: dict) -> None:
        self.statements[p["statement_id"]] = StatementRecord(
            statement_id=p["statement_id"],
            text=p["text"],
            created_at=p.get("created_at"),
        )

    def _apply_hit_created(self, p: dict) -> None:
        self.hits[p["hit_id"]] = HitRecord(
            hit_id=p["hit_id"],
            kind=p["kind"],
            statement_ids=list(p["statement_ids"]),
            assignments_needed=p["assignments_needed"],
            third_vote=p.get("third_vote", False),
        )
        self.hit_seq += 1

    def _apply_votes_submitted(self, p: dict) -> None:
        hit = self.hits[p["hit_id"]]
        annotator_id = p["annotator_id"]
        self.profile(annotator_id)
        for statement_id, value in p["votes"].items():
            self.statements[statement_id].votes.append([annotator_id, value])
        hit.submitted_by.append(annotator_id)
        if len(hit.submitted_by) >= hit.assignments_needed:
            hit.status = "submitted"

    def _apply_statement_resolved(self, p: dict) -> None:
        statement = self.statements[p["statement_id"]]
        outcome = p["outcome"]
        if outcome == "needs_third_vote":
            statement.third_vote_requested = True
            return
        statement.status = outcome  # accepted | discarded
        statement.resolved = p.get("duration")
        statement.discard_reason = p.get("reason")
        statement.resolved_after_third = bool(p.get("after_third", False))

    def _apply_followups_submitted(self, p: dict) -> None:
        annotator_id = p["annotator_id"]
        profile = self.profile(annotator_id)
        if profile.trusted:
            profile.post_trust_submissions += 1
        self.submissions[p["submission_id"]] = SubmissionRecord(
            submission_id=p["submission_id"],
            hit_id=p["hit_id"],
            annotator_id=annotator_id,
            target_id=p["target_id"],
            entries=[dict(e) for e in p["entries"]],
        )
        hit = self.hits[p["hit_id"]]
        hit.submitted_by.append(annotator_id)
        hit.status = "submitted"
        self.submission_seq += 1

    def _apply_submission_auto_approved(self, p: dict) -> None:
        submission = self.submissions[p["submission_id"]]
        submission.review_state = "approved"
        submission.auto_approved = True
        self.profile(submission.annotator_id).approved += 1
        self.hits[submission.hit_id].status = "reviewed"

    def _apply_submission_reviewed(self, p: dict) -> None:
        submission = self.submissions[p["submission_id"]]
        decision = p["decision"]
        submission.reviewer_id = p["reviewer_id"]
        submission.feedback = p.get("feedback", "")
        profile = self.profile(submission.annotator_id)
        hit = self.hits[submission.hit_id]
        if decision == "approve":
            submission.review_state = "approved"
            profile.approved += 1
            hit.status = "reviewed"
        elif decision == "edit":
            submission.review_state = "edited"
            submission.entries = [dict(e) for e in p["entries"]]
            profile.approved += 1
            hit.status = "reviewed"
        elif decision == "reject":
            submission.review_state = "rejected"
            profile.rejected += 1
            # the target still needs follow-ups; reopen for other annotators
            hit.status = "open"
        else:
            raise ValueError(f"unknown review decision: {decision!r}")

    def _apply_annotator_blocked(self, p: dict) -> None:
        self.profile(p["annotator_id"]).blocked = True

    def _apply_annotator_qualified(self, p: dict) -> None:
        self.profile(p["annotator_id"]).qualified = True
