"""Human curation of machine labels: event-sourced edit sessions, a
machine-vs-curated diff, and the HTTP API the box editor talks to."""

from figharvest.curate.diff import ErrorBreakdown, diff_labels, diff_pages, session_stats
from figharvest.curate.session import (
    CurationSession,
    EditError,
    EditKind,
    EditOp,
    SessionStatus,
    SessionStore,
)

__all__ = [
    "CurationSession",
    "EditError",
    "EditKind",
    "EditOp",
    "ErrorBreakdown",
    "SessionStatus",
    "SessionStore",
    "diff_labels",
    "diff_pages",
    "session_stats",
]
