"""Personal databases and the batch job scheduler."""

from .mydb import (
    DEFAULT_QUOTA_BYTES,
    AccessError,
    MyDbQuotaError,
    MyDbStore,
    PersonalDb,
    StoredTable,
    WorkspaceError,
    table_bytes,
)
from .jobs import (
    CANCELLED,
    FAILED,
    LEGAL_TRANSITIONS,
    MAX_DOUBLINGS,
    QUEUED,
    QUOTA_EXCEEDED,
    RUNNING,
    SUCCEEDED,
    TERMINAL_STATES,
    IllegalTransition,
    JobError,
    JobRecord,
    Scheduler,
    make_runner,
)

__all__ = [
    "AccessError",
    "CANCELLED",
    "DEFAULT_QUOTA_BYTES",
    "FAILED",
    "IllegalTransition",
    "JobError",
    "JobRecord",
    "LEGAL_TRANSITIONS",
    "MAX_DOUBLINGS",
    "MyDbQuotaError",
    "MyDbStore",
    "PersonalDb",
    "QUEUED",
    "QUOTA_EXCEEDED",
    "RUNNING",
    "SUCCEEDED",
    "Scheduler",
    "StoredTable",
    "TERMINAL_STATES",
    "WorkspaceError",
    "make_runner",
    "table_bytes",
]
