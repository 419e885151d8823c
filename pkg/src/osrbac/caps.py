"""Per-process capability vectors, derived entirely from active roles.

The effective capability vector is the union of the system-admin privilege
vectors over a process's active roles — nothing else. There are no
transition rules: fork and exec only change the vector through the role
derivation, and every store operation that touches an active set reinstalls
the vector in the same mutation, so callers can never observe a stale one.

``has_capability`` and the engine's CP_sys check read the same installed
vector and therefore agree by construction.
"""

from __future__ import annotations

from .bits import BitVector
from .store import AciStore

CAPABILITY_CATEGORY = "sysadm"


def capability_names(store: AciStore) -> tuple[str, ...]:
    """The ordered capability name list (the sysadm rights registry)."""
    return store.registry.names(CAPABILITY_CATEGORY)


def recompute_effective_caps(store: AciStore, process_id: str) -> BitVector:
    """Re-derive the vector from the active roles and reinstall it."""
    return store.recompute_caps(process_id)


def fresh_caps_union(store: AciStore, process_id: str) -> BitVector:
    """Union computed from the role records, bypassing the installed cache.

    Test oracle for cache coherence; production paths read the cache.
    """
    proc = store.process(process_id)
    registry = store.registry
    vec = registry.zeros(CAPABILITY_CATEGORY)
    for rid in proc.active_roles:
        vec = vec | store.role(rid).privilege_vector(
            CAPABILITY_CATEGORY, registry)
    return vec


def has_capability(store: AciStore, process_id: str, cap_name: str) -> bool:
    """True iff the installed effective vector carries the named bit."""
    bit = store.registry.index(CAPABILITY_CATEGORY, cap_name)
    return store.process(process_id).effective_caps.get(bit)
