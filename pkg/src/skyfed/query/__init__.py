from .ast import (
    ColumnRef,
    Comparison,
    ConePredicate,
    QueryAst,
    QueryError,
    SourceRef,
    print_query,
)
from .executor import ExecError, ExecLimits, QuotaExceededError, TableResult, execute
from .parser import QuerySyntaxError, parse
from .planner import (
    DepositStep,
    FetchStep,
    PlanError,
    QueryPlan,
    RegistryView,
    TruncateStep,
    XMatchStep,
    plan,
)

__all__ = [
    "ColumnRef",
    "Comparison",
    "ConePredicate",
    "DepositStep",
    "ExecError",
    "ExecLimits",
    "FetchStep",
    "PlanError",
    "QueryAst",
    "QueryError",
    "QueryPlan",
    "QuerySyntaxError",
    "QuotaExceededError",
    "RegistryView",
    "SourceRef",
    "TableResult",
    "TruncateStep",
    "XMatchStep",
    "execute",
    "parse",
    "plan",
    "print_query",
]
