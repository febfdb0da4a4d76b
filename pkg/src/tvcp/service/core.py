"""Annotation workflow commands over the event log.

Writes are serialized through one lock; every state change is an event,
so replaying the log reproduces the service exactly. Quality control
follows the trust workflow: every submission of an untrusted annotator is
reviewed; once 20 submissions are approved, only every 5th is spot-checked
and the rest auto-approve.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Sequence

from tvcp.dataset import (
    STATIONARY,
    VOTE_VALUES,
    Sample,
    aggregate_votes,
)
from tvcp.errors import (
    ContractError,
    NotFoundError,
    RequestValidationError,
    StateConflictError,
)
from tvcp.schema import (
    DurationClass,
    TvcpLabel,
    class_of_token,
    derive_tvcp_label,
    parse_label,
)
from tvcp.service.events import EventLog
from tvcp.service.state import (
    SPOT_CHECK_EVERY,
    TRUST_THRESHOLD,
    HitRecord,
    ServiceState,
    SubmissionRecord,
)

DURATION_BATCH_SIZE = 10


def create_hit_batches(statement_ids: Sequence[str], kind: str) -> list[list[str]]:
    """Chunk statements into HIT-sized groups.

    Duration tasks take consecutive batches of up to 10 statements;
    follow-up tasks get exactly one statement each.
    """
    ids = list(statement_ids)
    if kind == "duration":
        return [ids[i : i + DURATION_BATCH_SIZE] for i in range(0, len(ids), DURATION_BATCH_SIZE)]
    if kind == "followup":
        return [[sid] for sid in ids]
    raise ContractError(f"unknown task kind: {kind!r}")


class AnnotationService:
    """Event-sourced backend for the two crowdsourcing tasks."""

    def __init__(self, log_path: str | Path | None = None, require_qualification: bool = False):
        self._lock = threading.RLock()
        self.log = EventLog(log_path)
        self.state = ServiceState.fold(self.log)
        self.require_qualification = require_qualification

    def _emit(self, kind: str, payload: dict) -> None:
        event = self.log.append(kind, payload)
        self.state.apply(event)

    def _next_hit_id(self) -> str:
        return f"hit-{self.state.hit_seq + 1:05d}"

    def _next_submission_id(self) -> str:
        return f"sub-{self.state.submission_seq + 1:05d}"

    # -- intake -------------------------------------------------------------

    def add_statements(self, statements: Sequence[dict]) -> list[str]:
        """Register statements and open duration HITs over them."""
        with self._lock:
            added = []
            for item in statements:
                statement_id = item["statement_id"]
                text = item.get("text", "")
                if not statement_id or not text.strip():
                    raise RequestValidationError(
                        [f"statement {statement_id!r}: id and non-empty text required"]
                    )
                if statement_id in self.state.statements:
                    raise StateConflictError(f"statement {statement_id!r} already exists")
                self._emit(
                    "statement_added",
                    {
                        "statement_id": statement_id,
                        "text": text,
                        "created_at": item.get("created_at"),
                    },
                )
                added.append(statement_id)
            hit_ids = []
            for batch in create_hit_batches(added, "duration"):
                hit_id = self._next_hit_id()
                self._emit(
                    "hit_created",
                    {
                        "hit_id": hit_id,
                        "kind": "duration",
                        "statement_ids": batch,
                        "assignments_needed": 2,
                    },
                )
                hit_ids.append(hit_id)
            return hit_ids

    def create_followup_hits(self, statement_ids: Sequence[str]) -> list[str]:
        """Open follow-up HITs; every target must be an accepted statement."""
        with self._lock:
            for sid in statement_ids:
                statement = self.state.statements.get(sid)
                if statement is None:
                    raise NotFoundError(f"unknown statement: {sid!r}")
                if statement.status != "accepted" or statement.resolved is None:
                    raise ContractError(
                        f"statement {sid!r} is {statement.status}, not accepted; "
                        "follow-up tasks need a resolved duration"
                    )
            hit_ids = []
            for batch in create_hit_batches(list(statement_ids), "followup"):
                hit_id = self._next_hit_id()
                self._emit(
                    "hit_created",
                    {
                        "hit_id": hit_id,
                        "kind": "followup",
                        "statement_ids": batch,
                        "assignments_needed": 1,
                    },
                )
                hit_ids.append(hit_id)
            return hit_ids

    # -- HIT assignment -------------------------------------------------------

    def _check_annotator(self, annotator_id: str) -> None:
        if not annotator_id:
            raise RequestValidationError(["annotator id is required"])
        profile = self.state.annotators.get(annotator_id)
        if profile is not None and profile.blocked:
            raise StateConflictError(f"annotator {annotator_id!r} is blocked")
        if self.require_qualification and (profile is None or not profile.qualified):
            raise StateConflictError(f"annotator {annotator_id!r} is not qualified")

    def _eligible(self, hit: HitRecord, annotator_id: str) -> bool:
        if hit.status != "open" or annotator_id in hit.submitted_by:
            return False
        if hit.kind == "duration":
            for sid in hit.statement_ids:
                statement = self.state.statements[sid]
                if any(voter == annotator_id for voter, _ in statement.votes):
                    return False
        return True

    def next_hit(self, task: str, annotator_id: str) -> dict | None:
        """The next open HIT of the given kind this annotator may work on."""
        if task not in ("duration", "followup"):
            raise RequestValidationError([f"unknown task kind: {task!r}"])
        with self._lock:
            self._check_annotator(annotator_id)
            for hit_id in sorted(self.state.hits):
                hit = self.state.hits[hit_id]
                if hit.kind == task and self._eligible(hit, annotator_id):
                    return self.hit_view(hit)
            return None

    def hit_view(self, hit: HitRecord) -> dict:
        if hit.kind == "duration":
            return {
                "hit_id": hit.hit_id,
                "kind": "duration",
                "third_vote": hit.third_vote,
                "statements": [
                    {"statement_id": sid, "text": self.state.statements[sid].text}
                    for sid in hit.statement_ids
                ],
                "options": [
                    {"token": c.token, "display": c.display} for c in DurationClass
                ]
                + [{"token": STATIONARY, "display": "no time-sensitive information"}],
            }
        target = self.state.statements[hit.statement_ids[0]]
        resolved = class_of_token(target.resolved) if target.resolved else None
        return {
            "hit_id": hit.hit_id,
            "kind": "followup",
            "target": {
                "statement_id": target.statement_id,
                "text": target.text,
                "duration_token": target.resolved,
                "duration_display": resolved.display if resolved else None,
            },
            "options": [{"token": c.token, "display": c.display} for c in DurationClass],
            "classes": [label.value for label in TvcpLabel],
        }

    # -- duration votes -------------------------------------------------------

    def submit_votes(self, hit_id: str, annotator_id: str, votes: dict) -> dict:
        with self._lock:
            hit = self.state.hits.get(hit_id)
            if hit is None:
                raise NotFoundError(f"unknown HIT: {hit_id!r}")
            if hit.kind != "duration":
                raise RequestValidationError([f"HIT {hit_id!r} is not a duration task"])
            self._check_annotator(annotator_id)
            if hit.status != "open":
                raise StateConflictError(f"HIT {hit_id!r} is no longer open")
            if annotator_id in hit.submitted_by:
                raise StateConflictError(
                    f"annotator {annotator_id!r} already submitted HIT {hit_id!r}"
                )
            errors = []
            if set(votes) != set(hit.statement_ids):
                errors.append("exactly one vote per statement in the batch is required")
            for sid, value in votes.items():
                if value not in VOTE_VALUES:
                    errors.append(f"statement {sid}: unknown vote value {value!r}")
            if errors:
                raise RequestValidationError(errors)
            for sid in votes:
                statement = self.state.statements[sid]
                if any(voter == annotator_id for voter, _ in statement.votes):
                    raise StateConflictError(
                        f"annotator {annotator_id!r} already voted on statement {sid!r}"
                    )

            self._emit(
                "votes_submitted",
                {"hit_id": hit_id, "annotator_id": annotator_id, "votes": dict(votes)},
            )
            resolutions = {}
            for sid in hit.statement_ids:
                statement = self.state.statements[sid]
                if statement.status != "pending":
                    continue
                values = [value for _, value in statement.votes]
                if len(values) < 2:
                    continue
                outcome = aggregate_votes(values)
                after_third = len(values) >= 3
                if outcome.outcome == "needs_third_vote":
                    if not statement.third_vote_requested:
                        self._emit(
                            "statement_resolved",
                            {"statement_id": sid, "outcome": "needs_third_vote"},
                        )
                        third_id = self._next_hit_id()
                        self._emit(
                            "hit_created",
                            {
                                "hit_id": third_id,
                                "kind": "duration",
                                "statement_ids": [sid],
                                "assignments_needed": 1,
                                "third_vote": True,
                            },
                        )
                    resolutions[sid] = "needs_third_vote"
                    continue
                self._emit(
                    "statement_resolved",
                    {
                        "statement_id": sid,
                        "outcome": outcome.outcome,
                        "duration": outcome.duration.token if outcome.duration else None,
                        "reason": outcome.reason,
                        "after_third": after_third,
                    },
                )
                resolutions[sid] = outcome.outcome
                if outcome.outcome == "accepted":
                    self.create_followup_hits([sid])
            return {"hit_id": hit_id, "recorded": len(votes), "resolutions": resolutions}

    # -- follow-up submissions ----------------------------------------------

    @staticmethod
    def validate_entries(entries: Sequence[dict], original: DurationClass) -> list[str]:
        """Server-side checks mirrored by the client form validation."""
        errors = []
        if len(entries) != 3:
            errors.append(f"incomplete submission: expected 3 entries, got {len(entries)}")
        labels = []
        for i, entry in enumerate(entries):
            prefix = f"entry {i + 1}"
            try:
                label = parse_label(str(entry.get("label", "")))
            except Exception:
                errors.append(f"{prefix}: unknown class {entry.get('label')!r}")
                continue
            labels.append(label)
            text = str(entry.get("text", ""))
            if not text.strip():
                errors.append(f"{prefix} ({label.value}): follow-up text is empty")
            try:
                updated = class_of_token(str(entry.get("updated", "")))
            except Exception:
                errors.append(
                    f"{prefix} ({label.value}): unknown duration {entry.get('updated')!r}"
                )
                continue
            if derive_tvcp_label(original, updated) is not label:
                errors.append(
                    f"{prefix} ({label.value}): label/duration mismatch "
                    f"(original {original.token}, updated {updated.token})"
                )
        seen = set()
        for label in labels:
            if label in seen:
                errors.append(f"duplicate class: {label.value}")
            seen.add(label)
        return errors

    def submit_followups(self, hit_id: str, annotator_id: str, entries: Sequence[dict]) -> dict:
        with self._lock:
            hit = self.state.hits.get(hit_id)
            if hit is None:
                raise NotFoundError(f"unknown HIT: {hit_id!r}")
            if hit.kind != "followup":
                raise RequestValidationError([f"HIT {hit_id!r} is not a follow-up task"])
            self._check_annotator(annotator_id)
            if hit.status != "open":
                raise StateConflictError(f"HIT {hit_id!r} is no longer open")
            if annotator_id in hit.submitted_by:
                raise StateConflictError(
                    f"annotator {annotator_id!r} already submitted HIT {hit_id!r}"
                )
            target = self.state.statements[hit.statement_ids[0]]
            if target.status != "accepted" or target.resolved is None:
                raise StateConflictError(f"target {target.statement_id!r} is not accepted")
            errors = self.validate_entries(entries, class_of_token(target.resolved))
            if errors:
                raise RequestValidationError(errors)

            submission_id = self._next_submission_id()
            self._emit(
                "followups_submitted",
                {
                    "submission_id": submission_id,
                    "hit_id": hit_id,
                    "annotator_id": annotator_id,
                    "target_id": target.statement_id,
                    "entries": [
                        {
                            "label": str(e["label"]),
                            "text": str(e["text"]),
                            "updated": str(e["updated"]),
                        }
                        for e in entries
                    ],
                },
            )
            profile = self.state.annotators[annotator_id]
            queued = True
            if profile.trusted and profile.post_trust_submissions % SPOT_CHECK_EVERY != 0:
                self._emit("submission_auto_approved", {"submission_id": submission_id})
                queued = False
            return {
                "submission_id": submission_id,
                "queued_for_review": queued,
                "auto_approved": not queued,
            }

    # -- review ----------------------------------------------------------------

    def review_queue(self) -> list[dict]:
        with self._lock:
            queue = []
            for submission_id in sorted(self.state.submissions):
                submission = self.state.submissions[submission_id]
                if submission.review_state != "pending":
                    continue
                queue.append(self.submission_view(submission))
            return queue

    def submission_view(self, submission: SubmissionRecord) -> dict:
        target = self.state.statements[submission.target_id]
        profile = self.state.annotators[submission.annotator_id]
        return {
            "submission_id": submission.submission_id,
            "hit_id": submission.hit_id,
            "target": {
                "statement_id": target.statement_id,
                "text": target.text,
                "duration_token": target.resolved,
            },
            "entries": [dict(e) for e in submission.entries],
            "review_state": submission.review_state,
            "annotator": {
                "annotator_id": profile.annotator_id,
                "approved": profile.approved,
                "rejected": profile.rejected,
                "trusted": profile.trusted,
                "approvals_to_trust": max(0, TRUST_THRESHOLD - profile.approved),
            },
        }

    def review_submission(
        self,
        reviewer_id: str,
        submission_id: str,
        decision: str,
        feedback: str = "",
        entries: Sequence[dict] | None = None,
    ) -> dict:
        with self._lock:
            submission = self.state.submissions.get(submission_id)
            if submission is None:
                raise NotFoundError(f"unknown submission: {submission_id!r}")
            if submission.review_state != "pending":
                raise StateConflictError(
                    f"submission {submission_id!r} is already {submission.review_state}"
                )
            if decision not in ("approve", "reject", "edit"):
                raise RequestValidationError([f"unknown decision: {decision!r}"])
            payload = {
                "submission_id": submission_id,
                "reviewer_id": reviewer_id,
                "decision": decision,
                "feedback": feedback,
            }
            if decision == "edit":
                if entries is None:
                    raise RequestValidationError(["edit decision requires corrected entries"])
                target = self.state.statements[submission.target_id]
                errors = self.validate_entries(entries, class_of_token(target.resolved))
                if errors:
                    raise RequestValidationError(errors)
                payload["entries"] = [
                    {
                        "label": str(e["label"]),
                        "text": str(e["text"]),
                        "updated": str(e["updated"]),
                    }
                    for e in entries
                ]
            self._emit("submission_reviewed", payload)
            return self.submission_view(self.state.submissions[submission_id])

    # -- annotator administration -------------------------------------------

    def block_annotator(self, annotator_id: str) -> dict:
        with self._lock:
            self.state.profile(annotator_id)  # ensure exists
            self._emit("annotator_blocked", {"annotator_id": annotator_id})
            return self.annotator_view(annotator_id)

    def qualify_annotator(self, annotator_id: str) -> dict:
        with self._lock:
            self.state.profile(annotator_id)
            self._emit("annotator_qualified", {"annotator_id": annotator_id})
            return self.annotator_view(annotator_id)

    def annotator_view(self, annotator_id: str) -> dict:
        profile = self.state.annotators.get(annotator_id)
        if profile is None:
            raise NotFoundError(f"unknown annotator: {annotator_id!r}")
        return {
            "annotator_id": profile.annotator_id,
            "approved": profile.approved,
            "rejected": profile.rejected,
            "trusted": profile.trusted,
            "blocked": profile.blocked,
            "qualified": profile.qualified,
        }

    # -- export -----------------------------------------------------------------

    def export_samples(self) -> tuple[list[Sample], dict]:
        """All approved/edited submissions joined with their accepted targets."""
        with self._lock:
            samples: list[Sample] = []
            targets_exported = set()
            for submission_id in sorted(self.state.submissions):
                submission = self.state.submissions[submission_id]
                if submission.review_state not in ("approved", "edited"):
                    continue
                target = self.state.statements[submission.target_id]
                if target.status != "accepted" or target.resolved is None:
                    continue
                targets_exported.add(target.statement_id)
                original = class_of_token(target.resolved)
                for entry in submission.entries:
                    label = parse_label(entry["label"])
                    samples.append(
                        Sample(
                            sample_id=f"{target.statement_id}-{label.value.lower()}",
                            target_id=target.statement_id,
                            target_text=target.text,
                            followup_text=entry["text"],
                            original=original,
                            updated=class_of_token(entry["updated"]),
                            label=label,
                        )
                    )

            counts = {"accepted": 0, "discarded": 0, "pending": 0}
            bookkeeping = {
                "accepted_without_third_vote": 0,
                "accepted_after_third_vote": 0,
                "discarded_without_third_vote": 0,
                "discarded_after_third_vote": 0,
            }
            reasons: dict[str, int] = {}
            for statement in self.state.statements.values():
                counts[statement.status] = counts.get(statement.status, 0) + 1
                if statement.status in ("accepted", "discarded"):
                    suffix = (
                        "after_third_vote"
                        if statement.resolved_after_third
                        else "without_third_vote"
                    )
                    bookkeeping[f"{statement.status}_{suffix}"] += 1
                if statement.status == "discarded" and statement.discard_reason:
                    reasons[statement.discard_reason] = (
                        reasons.get(statement.discard_reason, 0) + 1
                    )
            review_counts: dict[str, int] = {}
            for submission in self.state.submissions.values():
                review_counts[submission.review_state] = (
                    review_counts.get(submission.review_state, 0) + 1
                )
            manifest = {
                "statements_total": len(self.state.statements),
                "statements": counts,
                "vote_bookkeeping": bookkeeping,
                "discard_reasons": reasons,
                "submissions": review_counts,
                "targets_exported": len(targets_exported),
                "samples_exported": len(samples),
            }
            return samples, manifest

    # -- invariants ----------------------------------------------------------

    def replay_state(self) -> ServiceState:
        """Fold the persisted log from scratch (replay determinism checks)."""
        return ServiceState.fold(self.log)
