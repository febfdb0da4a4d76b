"""Self-hosted annotation backend: event log, workflow commands, HTTP app."""

from tvcp.service.app import create_app
from tvcp.service.core import AnnotationService, create_hit_batches
from tvcp.service.events import Event, EventLog
from tvcp.service.state import (
    SPOT_CHECK_EVERY,
    TRUST_THRESHOLD,
    AnnotatorProfile,
    HitRecord,
    ServiceState,
    StatementRecord,
    SubmissionRecord,
)

__all__ = [
    "AnnotationService",
    "AnnotatorProfile",
    "Event",
    "EventLog",
    "HitRecord",
    "SPOT_CHECK_EVERY",
    "ServiceState",
    "StatementRecord",
    "SubmissionRecord",
    "TRUST_THRESHOLD",
    "create_app",
    "create_hit_batches",
]
