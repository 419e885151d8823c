"""Role-based access control engine with simulated syscall enforcement.

Subsystems: the role model and attribute store, the decision engine with
its data-encoded check matrix, role-derived capability vectors, a trace
replay simulator, and an administration surface (CLI + HTTP service).
"""

from .bits import BitVector
from .engine import AccessRequest, AdfEngine, Decision, StubPolicyModule, combine_meta
from .errors import OsrError
from .matrix import CheckSpec, DecisionMatrix, default_matrix, parse_matrix
from .model import EffectivePermissions, ProcessAci, RoleRecord, UserAci
from .persist import PeriodicFlusher, flush_store, load_store, save
from .registry import RightsRegistry, default_registry
from .sim import (
    AuditRecord,
    Simulator,
    SyscallEvent,
    bootstrap_default_state,
    parse_trace,
    render_audit_log,
)
from .store import AciStore, ObjectAci, StoreImage

__version__ = "0.1.0"

__all__ = [
    "AccessRequest",
    "AciStore",
    "AdfEngine",
    "AuditRecord",
    "BitVector",
    "CheckSpec",
    "Decision",
    "DecisionMatrix",
    "EffectivePermissions",
    "ObjectAci",
    "OsrError",
    "PeriodicFlusher",
    "ProcessAci",
    "RightsRegistry",
    "RoleRecord",
    "Simulator",
    "StoreImage",
    "StubPolicyModule",
    "SyscallEvent",
    "UserAci",
    "bootstrap_default_state",
    "combine_meta",
    "default_matrix",
    "default_registry",
    "flush_store",
    "load_store",
    "parse_matrix",
    "parse_trace",
    "render_audit_log",
    "save",
]
