"""Role model: records, hierarchy, separation-of-duty and permission merging.

Everything here is pure: functions take the role table (a mapping from
role id to :class:`RoleRecord`) and never mutate it. The store module owns
state and calls these validators around every mutation.

Hierarchy direction: a ``child_roles`` edge points parent -> child, and the
child inherits (therefore must contain) every permission of the parent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .bits import BitVector
from .errors import (
    ConflictAsymmetry,
    ContainmentViolated,
    CycleDetected,
    DanglingReference,
    DynamicConflict,
    NotFound,
    StaticConflict,
)
from .registry import ORDINARY_CATEGORIES, PRIVILEGE_CATEGORIES, RightsRegistry

#: attribute names of the four built-in privileged roles' ids
TRUSTED_SYSADM = "trusted_sysadm"
SYSADM = "sysadm"
SECADM = "secadm"
AUDADM = "audadm"
GENERAL_ROLE = "general"

BUILTIN_ROLES = (TRUSTED_SYSADM, SYSADM, SECADM, AUDADM)


@dataclass
class RoleRecord:
    """A role: nine permission lists, hierarchy edges and conflict sets."""

    role_id: str
    name: str = ""
    child_roles: set[str] = field(default_factory=set)
    static_conflicts: set[str] = field(default_factory=set)
    dynamic_conflicts: set[str] = field(default_factory=set)
    # ordinary rights: category -> object type -> vector
    ordinary: dict[str, dict[str, BitVector]] = field(default_factory=dict)
    # privilege vectors: secadm / sysadm / audadm / app
    privileges: dict[str, BitVector] = field(default_factory=dict)
    mutable_permissions: bool = True
    user_assignable: bool = True

    def copy(self) -> "RoleRecord":
        return replace(
            self,
            child_roles=set(self.child_roles),
            static_conflicts=set(self.static_conflicts),
            dynamic_conflicts=set(self.dynamic_conflicts),
            ordinary={c: dict(m) for c, m in self.ordinary.items()},
            privileges=dict(self.privileges),
        )

    def ordinary_vector(self, category: str, obj_type: str,
                        registry: RightsRegistry) -> BitVector:
        vec = self.ordinary.get(category, {}).get(obj_type)
        return vec if vec is not None else registry.zeros(category)

    def privilege_vector(self, category: str, registry: RightsRegistry) -> BitVector:
        vec = self.privileges.get(category)
        return vec if vec is not None else registry.zeros(category)


@dataclass
class EffectivePermissions:
    """Bitwise union of the nine permission lists over a role set.

    All-zero vectors are dropped so the merge result is canonical: two
    merges over the same role set compare equal regardless of which roles
    happened to mention which object types.
    """

    ordinary: dict[str, dict[str, BitVector]] = field(default_factory=dict)
    privileges: dict[str, BitVector] = field(default_factory=dict)

    def ordinary_vector(self, category: str, obj_type: str,
                        registry: RightsRegistry) -> BitVector:
        vec = self.ordinary.get(category, {}).get(obj_type)
        return vec if vec is not None else registry.zeros(category)

    def privilege_vector(self, category: str, registry: RightsRegistry) -> BitVector:
        vec = self.privileges.get(category)
        return vec if vec is not None else registry.zeros(category)

    def copy(self) -> "EffectivePermissions":
        return EffectivePermissions(
            ordinary={c: dict(m) for c, m in self.ordinary.items()},
            privileges=dict(self.privileges),
        )


@dataclass
class UserAci:
    user_id: str
    max_roles: set[str] = field(default_factory=set)
    active_roles: set[str] = field(default_factory=set)
    default_object_type: str = ""
    proc_type_override: set[str] | None = None

    def copy(self) -> "UserAci":
        return replace(
            self,
            max_roles=set(self.max_roles),
            active_roles=set(self.active_roles),
            proc_type_override=(
                set(self.proc_type_override)
                if self.proc_type_override is not None else None),
        )


@dataclass
class ProcessAci:
    process_id: str
    owner_user: str
    rac_types: set[str] = field(default_factory=set)
    max_roles: set[str] = field(default_factory=set)
    active_roles: set[str] = field(default_factory=set)
    effective: EffectivePermissions = field(default_factory=EffectivePermissions)
    effective_caps: BitVector = BitVector(0)
    # bookkeeping for NOTE_1 / SR / ST derivations
    exec_file: str | None = None
    parent: str | None = None

    def copy(self) -> "ProcessAci":
        return replace(
            self,
            rac_types=set(self.rac_types),
            max_roles=set(self.max_roles),
            active_roles=set(self.active_roles),
            effective=self.effective.copy(),
        )


def _require(roles: Mapping[str, RoleRecord], role_ids: Iterable[str]) -> None:
    for rid in role_ids:
        if rid not in roles:
            raise NotFound(f"unknown role {rid!r}")


def merge_effective_permissions(
        roles: Mapping[str, RoleRecord], role_ids: Iterable[str],
        registry: RightsRegistry) -> EffectivePermissions:
    """Bitwise union of every permission field across ``role_ids``."""
    ids = sorted(set(role_ids))
    _require(roles, ids)
    ordinary: dict[str, dict[str, BitVector]] = {}
    privileges: dict[str, BitVector] = {}
    for rid in ids:
        rec = roles[rid]
        for cat, per_type in rec.ordinary.items():
            merged = ordinary.setdefault(cat, {})
            for obj_type, vec in per_type.items():
                prev = merged.get(obj_type)
                merged[obj_type] = vec if prev is None else prev | vec
        for cat, vec in rec.privileges.items():
            prev = privileges.get(cat)
            privileges[cat] = vec if prev is None else prev | vec
    # canonical form: no explicit zero entries
    ordinary = {
        cat: {t: v for t, v in per_type.items() if v.any()}
        for cat, per_type in ordinary.items()
    }
    ordinary = {cat: per_type for cat, per_type in ordinary.items() if per_type}
    privileges = {cat: v for cat, v in privileges.items() if v.any()}
    return EffectivePermissions(ordinary=ordinary, privileges=privileges)


def parents_map(roles: Mapping[str, RoleRecord]) -> dict[str, set[str]]:
    parents: dict[str, set[str]] = {rid: set() for rid in roles}
    for rid, rec in roles.items():
        for child in rec.child_roles:
            if child in parents:
                parents[child].add(rid)
    return parents


def inherited_closure(roles: Mapping[str, RoleRecord],
                      role_ids: Iterable[str]) -> set[str]:
    """``role_ids`` plus every ancestor reachable over reverse child edges."""
    seed = set(role_ids)
    _require(roles, seed)
    parents = parents_map(roles)
    closure = set(seed)
    stack = list(seed)
    while stack:
        rid = stack.pop()
        for parent in parents[rid]:
            if parent not in closure:
                closure.add(parent)
                stack.append(parent)
    return closure


def find_cycle(roles: Mapping[str, RoleRecord]) -> list[str] | None:
    """Return one cycle over child edges as a role-id path, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {rid: WHITE for rid in roles}
    parent_of: dict[str, str] = {}

    for start in roles:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(roles[start].child_roles)))]
        color[start] = GREY
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if child not in roles:
                    continue
                if color[child] == GREY:
                    # unwind the grey path into an explicit cycle
                    cycle = [child, node]
                    cur = node
                    while cur != child:
                        cur = parent_of[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle
                if color[child] == WHITE:
                    color[child] = GREY
                    parent_of[child] = node
                    stack.append((child, iter(sorted(roles[child].child_roles))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def containment_gap(parent: RoleRecord, child: RoleRecord,
                    registry: RightsRegistry) -> str | None:
    """Describe the first permission of ``parent`` missing from ``child``."""
    for cat in ORDINARY_CATEGORIES:
        for obj_type, vec in parent.ordinary.get(cat, {}).items():
            if not child.ordinary_vector(cat, obj_type, registry).contains(vec):
                return f"{cat} rights on type {obj_type!r}"
    for cat in PRIVILEGE_CATEGORIES:
        vec = parent.privileges.get(cat)
        if vec is not None and not child.privilege_vector(cat, registry).contains(vec):
            return f"{cat} privileges"
    return None


def static_conflict_pair(roles: Mapping[str, RoleRecord],
                         role_ids: Iterable[str]) -> tuple[str, str] | None:
    for a, b in itertools.combinations(sorted(set(role_ids)), 2):
        if b in roles[a].static_conflicts:
            return (a, b)
    return None


def dynamic_conflict_pair(roles: Mapping[str, RoleRecord],
                          role_ids: Iterable[str]) -> tuple[str, str] | None:
    for a, b in itertools.combinations(sorted(set(role_ids)), 2):
        if b in roles[a].dynamic_conflicts:
            return (a, b)
    return None


def cross_static_conflict(roles: Mapping[str, RoleRecord],
                          left: Iterable[str],
                          right: Iterable[str]) -> tuple[str, str] | None:
    """First statically-conflicting pair with one member from each set."""
    right_set = set(right)
    for a in sorted(set(left)):
        rec = roles.get(a)
        if rec is None:
            continue
        hits = rec.static_conflicts & right_set
        if hits:
            return (a, sorted(hits)[0])
    return None


def drop_redundant_parents(roles: Mapping[str, RoleRecord],
                           role_ids: Iterable[str]) -> set[str]:
    """Remove every member that is an ancestor of another member.

    The child already contains all of its ancestors' permissions, so
    keeping the parent in an assignment is pure redundancy.
    """
    members = set(role_ids)
    redundant: set[str] = set()
    for rid in members:
        ancestors = inherited_closure(roles, {rid}) - {rid}
        redundant |= ancestors & members
    return members - redundant


def validate_role_table(roles: Mapping[str, RoleRecord],
                        registry: RightsRegistry) -> None:
    """Full structural validation: references, widths, symmetry, graph."""
    for rid, rec in roles.items():
        if rid != rec.role_id:
            raise DanglingReference(f"role keyed {rid!r} carries id {rec.role_id!r}")
        for child in rec.child_roles:
            if child == rid:
                raise CycleDetected(f"role {rid!r} lists itself as a child")
            if child not in roles:
                raise DanglingReference(f"role {rid!r}: unknown child {child!r}")
        for kind, conflicts in (("static", rec.static_conflicts),
                                ("dynamic", rec.dynamic_conflicts)):
            for other in conflicts:
                if other == rid:
                    raise ConflictAsymmetry(
                        f"role {rid!r} declares a {kind} conflict with itself")
                if other not in roles:
                    raise DanglingReference(
                        f"role {rid!r}: unknown {kind}-conflict role {other!r}")
                peer = (roles[other].static_conflicts if kind == "static"
                        else roles[other].dynamic_conflicts)
                if rid not in peer:
                    raise ConflictAsymmetry(
                        f"{kind} conflict {rid!r} -> {other!r} is not mutual")
        for cat, per_type in rec.ordinary.items():
            width = registry.width(cat)
            valid_types = registry.scd_types if cat == "scd" else registry.types
            for obj_type, vec in per_type.items():
                if obj_type not in valid_types:
                    raise DanglingReference(
                        f"role {rid!r}: {cat} rights name unknown type {obj_type!r}")
                if vec.width != width:
                    raise ContainmentViolated(
                        f"role {rid!r}: {cat} vector for {obj_type!r} has width "
                        f"{vec.width}, registry says {width}")
        for cat, vec in rec.privileges.items():
            if vec.width != registry.width(cat):
                raise ContainmentViolated(
                    f"role {rid!r}: {cat} vector has width {vec.width}, "
                    f"registry says {registry.width(cat)}")

    cycle = find_cycle(roles)
    if cycle is not None:
        raise CycleDetected("cyclic inheritance: " + " -> ".join(cycle))

    for rid, rec in roles.items():
        for child in rec.child_roles:
            gap = containment_gap(rec, roles[child], registry)
            if gap is not None:
                raise ContainmentViolated(
                    f"child {child!r} does not contain parent {rid!r}'s {gap}")


def check_assignment(roles: Mapping[str, RoleRecord],
                     role_ids: Iterable[str], who: str) -> None:
    """Static-SoD check for a prospective max_roles set."""
    pair = static_conflict_pair(roles, role_ids)
    if pair is not None:
        raise StaticConflict(
            f"{who}: roles {pair[0]!r} and {pair[1]!r} are in static conflict",
            pair=pair)


def check_activation(roles: Mapping[str, RoleRecord],
                     role_ids: Iterable[str], who: str) -> None:
    """Dynamic-SoD check for a prospective active_roles set."""
    pair = dynamic_conflict_pair(roles, role_ids)
    if pair is not None:
        raise DynamicConflict(
            f"{who}: roles {pair[0]!r} and {pair[1]!r} are in dynamic conflict",
            pair=pair)
