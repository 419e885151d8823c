"""Attribute store: sole custodian of role, principal and object ACI.

Every mutation goes through a validated operation here; nothing else in the
package writes attributes. Successful mutations bump the image generation
by exactly one, which is what the dirty flag, the flusher and the audit
counters key off.

Concurrency contract: single writer, multiple readers. Mutations serialize
on an internal lock; reads copy under the lock and hand out snapshots.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Iterable

from .bits import BitVector
from .errors import (
    BuiltinRoleImmutable,
    ConflictAsymmetry,
    DuplicateId,
    InvariantViolation,
    NotFound,
    NotInMaxRoles,
    RoleNotUserAssignable,
    TypeMismatch,
    UnknownAttribute,
)
from .model import (
    EffectivePermissions,
    ProcessAci,
    RoleRecord,
    UserAci,
    check_activation,
    check_assignment,
    drop_redundant_parents,
    merge_effective_permissions,
    validate_role_table,
)
from .registry import (
    DEFAULT_TYPE,
    ORDINARY_CATEGORIES,
    PRIVILEGE_CATEGORIES,
    RightsRegistry,
)

OBJECT_KINDS = ("file", "dir", "device", "ipc")

_UNSET = object()


@dataclass
class ObjectAci:
    """Per-object security attributes (files, dirs, devices, IPC)."""

    object_id: str
    kind: str
    rac_types: set[str] = field(default_factory=set)
    exec_file_roles: set[str] = field(default_factory=set)
    device_id: str = "dev0"
    executable: bool = False

    def copy(self) -> "ObjectAci":
        return replace(self, rac_types=set(self.rac_types),
                       exec_file_roles=set(self.exec_file_roles))


@dataclass
class StoreImage:
    """In-memory picture of the whole store plus its flush bookkeeping."""

    registry: RightsRegistry = field(default_factory=RightsRegistry)
    roles: dict[str, RoleRecord] = field(default_factory=dict)
    users: dict[str, UserAci] = field(default_factory=dict)
    processes: dict[str, ProcessAci] = field(default_factory=dict)
    objects: dict[str, ObjectAci] = field(default_factory=dict)
    generation: int = 0
    last_flushed_generation: int = 0

    @property
    def dirty(self) -> bool:
        return self.generation > self.last_flushed_generation

    def objects_by_device(self) -> dict[str, list[ObjectAci]]:
        grouped: dict[str, list[ObjectAci]] = {}
        for obj in sorted(self.objects.values(), key=lambda o: o.object_id):
            grouped.setdefault(obj.device_id, []).append(obj)
        return grouped

    def copy(self) -> "StoreImage":
        return StoreImage(
            registry=self.registry,
            roles={k: v.copy() for k, v in self.roles.items()},
            users={k: v.copy() for k, v in self.users.items()},
            processes={k: v.copy() for k, v in self.processes.items()},
            objects={k: v.copy() for k, v in self.objects.items()},
            generation=self.generation,
            last_flushed_generation=self.last_flushed_generation,
        )


# Canonical attribute names (Table 2 spelling) per entity class, with the
# extension names documented in docs/store-format.md. Lookup is
# case-insensitive; these are the canonical forms.
ROLE_ATTRS = (
    "name", "child_roles", "static_conflict_roles", "dynamic_conflict_roles",
    "Fd_right_vectors_array", "Dev_right_vectors_array",
    "proc_right_vectors_array", "Ipc_right_vectors_array",
    "scd_right_vectors_array", "secadm_privileges", "sysadm_privileges",
    "audadm_privileges", "app_privileges",
)
USER_ATTRS = ("Max_roles", "Active_roles", "Default_object_type",
              "Proc_type_override")
PROCESS_ATTRS = ("Rac_types", "Max_roles", "Active_roles",
                 "Owner_user", "Exec_file", "Effective_caps")
OBJECT_ATTRS = ("Rac_types", "Exec_file_roles", "Kind", "Device", "Executable")

_RIGHTS_ATTR_CATEGORY = {
    "fd_right_vectors_array": "fd",
    "dev_right_vectors_array": "dev",
    "proc_right_vectors_array": "proc",
    "ipc_right_vectors_array": "ipc",
    "scd_right_vectors_array": "scd",
}
_PRIV_ATTR_CATEGORY = {
    "secadm_privileges": "secadm",
    "sysadm_privileges": "sysadm",
    "audadm_privileges": "audadm",
    "app_privileges": "app",
}


class AciStore:
    """Validated mutation gateway over a :class:`StoreImage`."""

    def __init__(self, image: StoreImage | None = None):
        self._image = image if image is not None else StoreImage()
        self._lock = threading.RLock()
        #: optional DecisionLog; gets a line whenever a capability vector
        #: actually changes (old vector, new vector, triggering operation)
        self.audit = None

    # -- snapshots / reads -------------------------------------------------

    @property
    def registry(self) -> RightsRegistry:
        return self._image.registry

    @property
    def generation(self) -> int:
        with self._lock:
            return self._image.generation

    @property
    def dirty(self) -> bool:
        with self._lock:
            return self._image.dirty

    def snapshot(self) -> StoreImage:
        with self._lock:
            return self._image.copy()

    def mark_flushed(self, generation: int) -> None:
        with self._lock:
            self._image.last_flushed_generation = generation

    def role(self, role_id: str) -> RoleRecord:
        with self._lock:
            return self._role(role_id).copy()

    def user(self, user_id: str) -> UserAci:
        with self._lock:
            return self._user(user_id).copy()

    def process(self, process_id: str) -> ProcessAci:
        with self._lock:
            return self._process(process_id).copy()

    def object(self, object_id: str) -> ObjectAci:
        with self._lock:
            return self._object(object_id).copy()

    def has_role(self, role_id: str) -> bool:
        with self._lock:
            return role_id in self._image.roles

    def has_user(self, user_id: str) -> bool:
        with self._lock:
            return user_id in self._image.users

    def has_process(self, process_id: str) -> bool:
        with self._lock:
            return process_id in self._image.processes

    def has_object(self, object_id: str) -> bool:
        with self._lock:
            return object_id in self._image.objects

    def role_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._image.roles)

    def user_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._image.users)

    def process_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._image.processes)

    def object_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._image.objects)

    def merge_effective(self, role_ids: Iterable[str]) -> EffectivePermissions:
        with self._lock:
            return merge_effective_permissions(
                self._image.roles, role_ids, self.registry)

    def recompute_caps(self, process_id: str) -> BitVector:
        """Re-derive and reinstall one process's caches from its active
        roles. Cache repair, not an attribute mutation: no generation bump.
        """
        with self._lock:
            proc = self._process(process_id)
            self._refresh_process(proc, "recompute")
            return proc.effective_caps

    # -- internal helpers ----------------------------------------------------

    def _role(self, role_id: str) -> RoleRecord:
        try:
            return self._image.roles[role_id]
        except KeyError:
            raise NotFound(f"unknown role {role_id!r}") from None

    def _user(self, user_id: str) -> UserAci:
        try:
            return self._image.users[user_id]
        except KeyError:
            raise NotFound(f"unknown user {user_id!r}") from None

    def _process(self, process_id: str) -> ProcessAci:
        try:
            return self._image.processes[process_id]
        except KeyError:
            raise NotFound(f"unknown process {process_id!r}") from None

    def _object(self, object_id: str) -> ObjectAci:
        try:
            return self._image.objects[object_id]
        except KeyError:
            raise NotFound(f"unknown object {object_id!r}") from None

    def _commit(self) -> None:
        self._image.generation += 1

    def _refresh_process(self, proc: ProcessAci, trigger: str = "") -> None:
        old_caps = proc.effective_caps
        proc.effective = merge_effective_permissions(
            self._image.roles, proc.active_roles, self.registry)
        proc.effective_caps = proc.effective.privilege_vector(
            "sysadm", self.registry)
        if (self.audit is not None and trigger
                and old_caps != proc.effective_caps):
            self.audit.note(
                f"caps process={proc.process_id} old={old_caps.dump()}"
                f" new={proc.effective_caps.dump()} trigger={trigger}")

    def _refresh_all_processes(self, trigger: str = "") -> None:
        for proc in self._image.processes.values():
            self._refresh_process(proc, trigger)

    def _check_types(self, types: Iterable[str], who: str,
                     allow_empty: bool = False) -> set[str]:
        out = set(types)
        if not out and not allow_empty:
            raise InvariantViolation(f"{who}: type list must not be empty")
        for t in out:
            if not self.registry.is_object_type(t):
                raise TypeMismatch(f"{who}: unknown object type {t!r}")
        return out

    def _validate_principals(self) -> None:
        roles = self._image.roles
        principals = (
            [("user", u.user_id, u.max_roles, u.active_roles)
             for u in self._image.users.values()]
            + [("process", p.process_id, p.max_roles, p.active_roles)
               for p in self._image.processes.values()])
        for kind, pid, max_roles, active_roles in principals:
            who = f"{kind} {pid}"
            check_assignment(roles, max_roles, who)
            check_activation(roles, active_roles, who)
            if not active_roles <= max_roles:
                raise NotInMaxRoles(f"{who}: active roles exceed max roles")
            reduced = drop_redundant_parents(roles, max_roles)
            if reduced != max_roles:
                extra = sorted(max_roles - reduced)
                raise InvariantViolation(
                    f"{who}: assignment would hold redundant parents {extra}")

    # -- role operations ----------------------------------------------------

    def add_role(self, record: RoleRecord) -> str:
        """Register a new role. The record may declare children (this role
        becomes their parent) but not conflicts: a conflict with a
        pre-existing role cannot be mutual yet, and one-sided relations are
        rejected rather than silently symmetrized.
        """
        with self._lock:
            if record.role_id in self._image.roles:
                raise DuplicateId(f"role {record.role_id!r} already exists")
            if record.static_conflicts or record.dynamic_conflicts:
                raise ConflictAsymmetry(
                    f"role {record.role_id!r} declares conflicts at creation; "
                    f"conflict pairs are established afterwards via the "
                    f"conflict attributes so both sides stay mutual")
            trial = {rid: rec for rid, rec in self._image.roles.items()}
            trial[record.role_id] = record.copy()
            validate_role_table(trial, self.registry)
            self._image.roles[record.role_id] = record.copy()
            self._commit()
            return record.role_id

    def delete_role(self, role_id: str) -> None:
        with self._lock:
            rec = self._role(role_id)
            if not rec.mutable_permissions:
                raise BuiltinRoleImmutable(
                    f"role {role_id!r} is a built-in privileged role")
            del self._image.roles[role_id]
            for other in self._image.roles.values():
                other.child_roles.discard(role_id)
                other.static_conflicts.discard(role_id)
                other.dynamic_conflicts.discard(role_id)
            for user in self._image.users.values():
                user.max_roles.discard(role_id)
                user.active_roles.discard(role_id)
            for proc in self._image.processes.values():
                proc.max_roles.discard(role_id)
                proc.active_roles.discard(role_id)
            for obj in self._image.objects.values():
                obj.exec_file_roles.discard(role_id)
            self._refresh_all_processes("delete_role")
            self._commit()

    def set_child_roles(self, role_id: str, children: Iterable[str]) -> None:
        """Replace a role's child edges. Rejected if the result is cyclic,
        breaks containment, or makes an existing assignment hold both a
        role and one of its (new) ancestors."""
        with self._lock:
            rec = self._role(role_id)
            new_children = set(children)
            for child in new_children:
                self._role(child)
            trial = {rid: (r.copy() if rid == role_id else r)
                     for rid, r in self._image.roles.items()}
            trial[role_id].child_roles = set(new_children)
            validate_role_table(trial, self.registry)
            saved = self._image.roles
            self._image.roles = trial
            try:
                self._validate_principals()
            except Exception:
                self._image.roles = saved
                raise
            saved[role_id].child_roles = new_children
            self._image.roles = saved
            self._commit()

    def set_conflicts(self, role_id: str, kind: str,
                      conflicts: Iterable[str]) -> None:
        """Replace a role's static or dynamic conflict set.

        Pair-level semantics: the partners' lists are updated in the same
        mutation so the store stays symmetric. Rejected outright if the
        resulting state breaks any principal's SoD invariant.
        """
        if kind not in ("static", "dynamic"):
            raise TypeMismatch(f"conflict kind must be static or dynamic, got {kind!r}")
        with self._lock:
            rec = self._role(role_id)
            new_set = set(conflicts)
            if role_id in new_set:
                raise InvariantViolation(
                    f"role {role_id!r} cannot conflict with itself")
            for other in new_set:
                self._role(other)
            attr = "static_conflicts" if kind == "static" else "dynamic_conflicts"
            trial = {rid: r.copy() for rid, r in self._image.roles.items()}
            old_set = getattr(trial[role_id], attr)
            for dropped in old_set - new_set:
                getattr(trial[dropped], attr).discard(role_id)
            for added in new_set - old_set:
                getattr(trial[added], attr).add(role_id)
            setattr(trial[role_id], attr, set(new_set))
            validate_role_table(trial, self.registry)
            saved = self._image.roles
            self._image.roles = trial
            try:
                self._validate_principals()
            except Exception:
                self._image.roles = saved
                raise
            self._commit()

    def set_role_rights(self, role_id: str, *, ordinary=None,
                        privileges=None, name: str | None = None) -> None:
        """Replace permission fields (and/or the display name) of a role."""
        with self._lock:
            rec = self._role(role_id)
            if not rec.mutable_permissions:
                raise BuiltinRoleImmutable(
                    f"role {role_id!r} is a built-in privileged role")
            trial = {rid: r.copy() for rid, r in self._image.roles.items()}
            t = trial[role_id]
            if name is not None:
                t.name = name
            if ordinary is not None:
                for cat, per_type in ordinary.items():
                    if cat not in ORDINARY_CATEGORIES:
                        raise TypeMismatch(f"unknown ordinary category {cat!r}")
                    t.ordinary[cat] = dict(per_type)
            if privileges is not None:
                for cat, vec in privileges.items():
                    if cat not in PRIVILEGE_CATEGORIES:
                        raise TypeMismatch(f"unknown privilege category {cat!r}")
                    t.privileges[cat] = vec
            validate_role_table(trial, self.registry)
            self._image.roles = trial
            self._refresh_all_processes("role-rights-edit")
            self._commit()

    # -- principals ----------------------------------------------------------

    def add_user(self, user_id: str, max_roles: Iterable[str] = (),
                 active_roles: Iterable[str] | None = None,
                 default_object_type: str | None = None,
                 proc_type_override: Iterable[str] | None = None) -> None:
        with self._lock:
            if user_id in self._image.users:
                raise DuplicateId(f"user {user_id!r} already exists")
            default_type = default_object_type or DEFAULT_TYPE
            if not self.registry.is_object_type(default_type):
                raise TypeMismatch(f"unknown object type {default_type!r}")
            reduced = self._reduce_assignment(set(max_roles), f"user {user_id}",
                                              for_user=True)
            active = set(active_roles) if active_roles is not None else set(reduced)
            if not active <= reduced:
                raise NotInMaxRoles(f"user {user_id}: active roles exceed max roles")
            check_activation(self._image.roles, active, f"user {user_id}")
            override = (self._check_types(proc_type_override, f"user {user_id}")
                        if proc_type_override is not None else None)
            self._image.users[user_id] = UserAci(
                user_id=user_id, max_roles=reduced, active_roles=active,
                default_object_type=default_type, proc_type_override=override)
            self._commit()

    def add_process(self, process_id: str, owner_user: str,
                    rac_types: Iterable[str],
                    max_roles: Iterable[str] = (),
                    active_roles: Iterable[str] | None = None,
                    exec_file: str | None = None,
                    parent: str | None = None,
                    system_grant: bool = False) -> None:
        with self._lock:
            if process_id in self._image.processes:
                raise DuplicateId(f"process {process_id!r} already exists")
            self._user(owner_user)
            if exec_file is not None:
                self._object(exec_file)
            types = self._check_types(rac_types, f"process {process_id}")
            reduced = self._reduce_assignment(
                set(max_roles), f"process {process_id}",
                for_user=not system_grant)
            active = set(active_roles) if active_roles is not None else set(reduced)
            if not active <= reduced:
                raise NotInMaxRoles(
                    f"process {process_id}: active roles exceed max roles")
            check_activation(self._image.roles, active, f"process {process_id}")
            proc = ProcessAci(
                process_id=process_id, owner_user=owner_user, rac_types=types,
                max_roles=reduced, active_roles=active, exec_file=exec_file,
                parent=parent)
            self._refresh_process(proc, "process-created")
            self._image.processes[process_id] = proc
            self._commit()

    def remove_process(self, process_id: str) -> None:
        with self._lock:
            self._process(process_id)
            del self._image.processes[process_id]
            self._commit()

    def _reduce_assignment(self, role_ids: set[str], who: str,
                           for_user: bool) -> set[str]:
        roles = self._image.roles
        for rid in role_ids:
            rec = self._role(rid)
            if for_user and not rec.user_assignable:
                raise RoleNotUserAssignable(
                    f"{who}: role {rid!r} can only be granted to system processes")
        check_assignment(roles, role_ids, who)
        return drop_redundant_parents(roles, role_ids)

    def assign_max_roles(self, kind: str, principal_id: str,
                         role_ids: Iterable[str],
                         system_grant: bool = False) -> None:
        """Set a principal's max role set (redundant parents dropped)."""
        with self._lock:
            principal = self._principal(kind, principal_id)
            for_user = (kind == "user") or (kind == "process" and not system_grant)
            reduced = self._reduce_assignment(
                set(role_ids), f"{kind} {principal_id}", for_user=for_user)
            principal.max_roles = reduced
            principal.active_roles &= reduced
            if kind == "process":
                self._refresh_process(principal, "assign_max_roles")
            self._commit()

    def activate_roles(self, kind: str, principal_id: str,
                       role_ids: Iterable[str]) -> None:
        with self._lock:
            principal = self._principal(kind, principal_id)
            wanted = set(role_ids)
            for rid in wanted:
                self._role(rid)
            outside = wanted - principal.max_roles
            if outside:
                raise NotInMaxRoles(
                    f"{kind} {principal_id}: roles {sorted(outside)} not in max set")
            check_activation(self._image.roles, wanted, f"{kind} {principal_id}")
            principal.active_roles = wanted
            if kind == "process":
                self._refresh_process(principal, "activate_roles")
            self._commit()

    def _principal(self, kind: str, principal_id: str):
        if kind == "user":
            return self._user(principal_id)
        if kind == "process":
            return self._process(principal_id)
        raise TypeMismatch(f"principal kind must be user or process, got {kind!r}")

    def update_process(self, process_id: str, *, owner_user=_UNSET,
                       rac_types=_UNSET, max_roles=_UNSET, active_roles=_UNSET,
                       exec_file=_UNSET, system_grant: bool = False) -> None:
        """Composite validated update used by the enforcement simulator
        (fork/exec/chown effects and SR/ST directives); one generation bump.
        """
        with self._lock:
            proc = self._process(process_id)
            new = proc.copy()
            if owner_user is not _UNSET:
                self._user(owner_user)
                new.owner_user = owner_user
            if exec_file is not _UNSET:
                if exec_file is not None:
                    self._object(exec_file)
                new.exec_file = exec_file
            if rac_types is not _UNSET:
                new.rac_types = self._check_types(
                    rac_types, f"process {process_id}")
            if max_roles is not _UNSET:
                new.max_roles = self._reduce_assignment(
                    set(max_roles), f"process {process_id}",
                    for_user=not system_grant)
                new.active_roles &= new.max_roles
            if active_roles is not _UNSET:
                wanted = set(active_roles)
                outside = wanted - new.max_roles
                if outside:
                    raise NotInMaxRoles(
                        f"process {process_id}: roles {sorted(outside)} not in max set")
                check_activation(self._image.roles, wanted,
                                 f"process {process_id}")
                new.active_roles = wanted
            self._refresh_process(new, "process-update")
            self._image.processes[process_id] = new
            self._commit()

    # -- objects --------------------------------------------------------------

    def add_object(self, object_id: str, kind: str, rac_types: Iterable[str],
                   device_id: str = "dev0", executable: bool = False,
                   exec_file_roles: Iterable[str] = ()) -> None:
        with self._lock:
            if object_id in self._image.objects:
                raise DuplicateId(f"object {object_id!r} already exists")
            if kind not in OBJECT_KINDS:
                raise TypeMismatch(f"unknown object kind {kind!r}")
            types = self._check_types(rac_types, f"object {object_id}")
            roles = set(exec_file_roles)
            if roles or executable:
                if kind != "file":
                    raise TypeMismatch(
                        f"object {object_id!r}: only files can be executable")
            if roles and not executable:
                raise TypeMismatch(
                    f"object {object_id!r}: exec roles require an executable file")
            for rid in roles:
                self._role(rid)
            self._image.objects[object_id] = ObjectAci(
                object_id=object_id, kind=kind, rac_types=types,
                exec_file_roles=roles, device_id=device_id,
                executable=executable)
            self._commit()

    def remove_object(self, object_id: str) -> None:
        with self._lock:
            self._object(object_id)
            del self._image.objects[object_id]
            self._commit()

    def set_object_types(self, object_id: str, rac_types: Iterable[str]) -> None:
        with self._lock:
            obj = self._object(object_id)
            obj.rac_types = self._check_types(rac_types, f"object {object_id}")
            self._commit()

    def set_exec_file_roles(self, object_id: str,
                            role_ids: Iterable[str]) -> None:
        with self._lock:
            obj = self._object(object_id)
            if obj.kind != "file" or not obj.executable:
                raise UnknownAttribute(
                    f"Exec_file_roles is only valid for executable files, "
                    f"object {object_id!r} is a {obj.kind}")
            roles = set(role_ids)
            for rid in roles:
                rec = self._role(rid)
                # exec installs these roles on user processes; a role the
                # kernel reserves for system processes must not ride along
                if not rec.user_assignable:
                    raise RoleNotUserAssignable(
                        f"object {object_id!r}: role {rid!r} cannot be "
                        f"carried by an executable file")
            obj.exec_file_roles = roles
            self._commit()

    def rename_object(self, old_id: str, new_id: str) -> None:
        with self._lock:
            obj = self._object(old_id)
            if new_id in self._image.objects:
                raise DuplicateId(f"object {new_id!r} already exists")
            del self._image.objects[old_id]
            obj.object_id = new_id
            self._image.objects[new_id] = obj
            for proc in self._image.processes.values():
                if proc.exec_file == old_id:
                    proc.exec_file = new_id
            self._commit()

    def set_executable(self, object_id: str, executable: bool) -> None:
        with self._lock:
            obj = self._object(object_id)
            if obj.kind != "file":
                raise UnknownAttribute(
                    f"Executable is only valid for files, object "
                    f"{object_id!r} is a {obj.kind}")
            if not executable and obj.exec_file_roles:
                raise TypeMismatch(
                    f"object {object_id!r} still carries exec roles")
            obj.executable = executable
            self._commit()

    # -- attribute gateway -----------------------------------------------------

    def get_attr(self, entity_class: str, entity_id: str, attr_name: str):
        """Read one named attribute as a JSON-friendly immutable snapshot."""
        with self._lock:
            getter, _ = self._attr_ops(entity_class, entity_id, attr_name)
            return getter()

    def set_attr(self, entity_class: str, entity_id: str, attr_name: str,
                 value) -> None:
        """Write one named attribute through its validated mutation."""
        with self._lock:
            _, setter = self._attr_ops(entity_class, entity_id, attr_name)
            if setter is None:
                raise UnknownAttribute(
                    f"attribute {attr_name!r} of {entity_class} is read-only")
            setter(value)

    def _attr_ops(self, entity_class: str, entity_id: str, attr_name: str):
        key = attr_name.lower()
        if entity_class == "role":
            return self._role_attr_ops(entity_id, key, attr_name)
        if entity_class == "user":
            return self._user_attr_ops(entity_id, key, attr_name)
        if entity_class == "process":
            return self._process_attr_ops(entity_id, key, attr_name)
        if entity_class == "object":
            return self._object_attr_ops(entity_id, key, attr_name)
        raise TypeMismatch(f"unknown entity class {entity_class!r}")

    def _role_attr_ops(self, role_id: str, key: str, attr_name: str):
        rec = self._role(role_id)
        reg = self.registry
        if key == "name":
            return (lambda: rec.name,
                    lambda v: self.set_role_rights(role_id, name=_text(v, attr_name)))
        if key == "child_roles":
            return (lambda: sorted(rec.child_roles),
                    lambda v: self.set_child_roles(role_id, _ids(v, attr_name)))
        if key == "static_conflict_roles":
            return (lambda: sorted(rec.static_conflicts),
                    lambda v: self.set_conflicts(role_id, "static", _ids(v, attr_name)))
        if key == "dynamic_conflict_roles":
            return (lambda: sorted(rec.dynamic_conflicts),
                    lambda v: self.set_conflicts(role_id, "dynamic", _ids(v, attr_name)))
        if key in _RIGHTS_ATTR_CATEGORY:
            cat = _RIGHTS_ATTR_CATEGORY[key]
            def get_rights():
                return {t: reg.set_names(cat, v)
                        for t, v in sorted(rec.ordinary.get(cat, {}).items())
                        if v.any()}
            def set_rights(value):
                if not isinstance(value, dict):
                    raise TypeMismatch(
                        f"{attr_name} expects a mapping of type -> right names")
                per_type = {t: reg.vector(cat, names)
                            for t, names in value.items()}
                self.set_role_rights(role_id, ordinary={cat: per_type})
            return (get_rights, set_rights)
        if key in _PRIV_ATTR_CATEGORY:
            cat = _PRIV_ATTR_CATEGORY[key]
            def get_priv():
                return reg.set_names(cat, rec.privilege_vector(cat, reg))
            def set_priv(value):
                vec = reg.vector(cat, _ids(value, attr_name))
                self.set_role_rights(role_id, privileges={cat: vec})
            return (get_priv, set_priv)
        raise UnknownAttribute(f"unknown role attribute {attr_name!r}")

    def _user_attr_ops(self, user_id: str, key: str, attr_name: str):
        user = self._user(user_id)
        if key == "max_roles":
            return (lambda: sorted(user.max_roles),
                    lambda v: self.assign_max_roles("user", user_id, _ids(v, attr_name)))
        if key == "active_roles":
            return (lambda: sorted(user.active_roles),
                    lambda v: self.activate_roles("user", user_id, _ids(v, attr_name)))
        if key == "default_object_type":
            def set_default(value):
                text = _text(value, attr_name)
                if not self.registry.is_object_type(text):
                    raise TypeMismatch(f"unknown object type {text!r}")
                user.default_object_type = text
                self._commit()
            return (lambda: user.default_object_type, set_default)
        if key == "proc_type_override":
            def set_override(value):
                if value is None or value == []:
                    user.proc_type_override = None
                else:
                    user.proc_type_override = self._check_types(
                        _ids(value, attr_name), f"user {user_id}")
                self._commit()
            return (lambda: sorted(user.proc_type_override)
                    if user.proc_type_override is not None else None,
                    set_override)
        raise UnknownAttribute(f"unknown user attribute {attr_name!r}")

    def _process_attr_ops(self, process_id: str, key: str, attr_name: str):
        proc = self._process(process_id)
        if key == "rac_types":
            def set_types(value):
                proc.rac_types = self._check_types(
                    _ids(value, attr_name), f"process {process_id}")
                self._commit()
            return (lambda: sorted(proc.rac_types), set_types)
        if key == "max_roles":
            return (lambda: sorted(proc.max_roles),
                    lambda v: self.assign_max_roles("process", process_id,
                                                    _ids(v, attr_name)))
        if key == "active_roles":
            return (lambda: sorted(proc.active_roles),
                    lambda v: self.activate_roles("process", process_id,
                                                  _ids(v, attr_name)))
        if key == "owner_user":
            return (lambda: proc.owner_user, None)
        if key == "exec_file":
            return (lambda: proc.exec_file, None)
        if key == "effective_caps":
            return (lambda: self.registry.set_names("sysadm", proc.effective_caps)
                    if proc.effective_caps.width else [], None)
        raise UnknownAttribute(f"unknown process attribute {attr_name!r}")

    def _object_attr_ops(self, object_id: str, key: str, attr_name: str):
        obj = self._object(object_id)
        if key == "rac_types":
            return (lambda: sorted(obj.rac_types),
                    lambda v: self.set_object_types(object_id, _ids(v, attr_name)))
        if key == "exec_file_roles":
            if obj.kind != "file":
                raise UnknownAttribute(
                    f"Exec_file_roles is only valid for files, object "
                    f"{object_id!r} is a {obj.kind}")
            return (lambda: sorted(obj.exec_file_roles),
                    lambda v: self.set_exec_file_roles(object_id, _ids(v, attr_name)))
        if key == "kind":
            return (lambda: obj.kind, None)
        if key == "device":
            return (lambda: obj.device_id, None)
        if key == "executable":
            if obj.kind != "file":
                raise UnknownAttribute(
                    f"Executable is only valid for files, object "
                    f"{object_id!r} is a {obj.kind}")
            return (lambda: obj.executable,
                    lambda v: self.set_executable(object_id, _flag(v, attr_name)))
        raise UnknownAttribute(f"unknown object attribute {attr_name!r}")


def _ids(value, attr_name: str) -> list[str]:
    if isinstance(value, (list, tuple, set, frozenset)):
        if all(isinstance(v, str) for v in value):
            return list(value)
    raise TypeMismatch(f"{attr_name} expects a list of tokens")


def _text(value, attr_name: str) -> str:
    if not isinstance(value, str):
        raise TypeMismatch(f"{attr_name} expects a string")
    return value


def _flag(value, attr_name: str) -> bool:
    if isinstance(value, bool):
        return value
    raise TypeMismatch(f"{attr_name} expects a boolean")
