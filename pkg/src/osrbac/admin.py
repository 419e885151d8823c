"""Administration surface: gated commands shared by the CLI and the service.

Every verb performs exactly one gating decision before touching anything:
attribute reads gate through R_READ_ATTRIBUTE and every mutation through
R_MODIFY_ATTRIBUTE (both CP_sec cells); role activation targets the
principal, so activating the caller's own process hits a blank matrix cell
and stays available to ordinary processes. ``what_if`` is the one ungated
verb: a dry-run probe that is never audited and never mutates.

The caller is always an explicit simulated process id; no OS identity is
ever consulted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .engine import AccessRequest, AdfEngine, Decision
from .errors import (
    MissingParams,
    NotFound,
    PermissionDenied,
    TypeMismatch,
    UnknownRequest,
)
from .model import GENERAL_ROLE, RoleRecord
from .store import AciStore

#: attribute verbs and the object kinds they may address
_OBJECT_VERB_KINDS = {
    "file_dir": ("file", "dir"),
    "ipc": ("ipc",),
    "dev": ("device",),
}

GET_GATE = "R_READ_ATTRIBUTE"
SET_GATE = "R_MODIFY_ATTRIBUTE"


@dataclass(frozen=True)
class AdminCommand:
    verb: str
    caller: str
    payload: dict[str, Any] = field(default_factory=dict)


class AdminApi:
    def __init__(self, store: AciStore, engine: AdfEngine | None = None):
        self.store = store
        self.engine = engine if engine is not None else AdfEngine(store)
        if self.engine.log is not None and store.audit is None:
            store.audit = self.engine.log
        self._verbs: dict[str, tuple[str, Callable[[AdminCommand], Any]]] = {
            # §-style attribute commands, one per entity class
            "rfsos_get_user_attr": (GET_GATE, self._get_user_attr),
            "rfsos_get_proc_attr": (GET_GATE, self._get_proc_attr),
            "rfsos_get_file_dir_attr": (GET_GATE, self._get_object_attr),
            "rfsos_get_ipc_attr": (GET_GATE, self._get_object_attr),
            "rfsos_get_dev_attr": (GET_GATE, self._get_object_attr),
            "rfsos_set_user_attr": (SET_GATE, self._set_user_attr),
            "rfsos_set_proc_attr": (SET_GATE, self._set_proc_attr),
            "rfsos_set_file_dir_attr": (SET_GATE, self._set_object_attr),
            "rfsos_set_ipc_attr": (SET_GATE, self._set_object_attr),
            "rfsos_set_dev_attr": (SET_GATE, self._set_object_attr),
            # role management
            "rfsos_osr_add_role": (SET_GATE, self._add_role),
            "rfsos_osr_del_role": (SET_GATE, self._del_role),
            "rfsos_osr_get_role_attr": (GET_GATE, self._get_role_attr),
            "rfsos_osr_set_role_attr": (SET_GATE, self._set_role_attr),
            "rfsos_osr_activate_role": (SET_GATE, self._activate_role),
            "rfsos_osr_check_app_right": ("R_CHECK_APP_RIGHT", self._noop),
            # entity management and module/log switches
            "rfsos_add_user": (SET_GATE, self._add_user),
            "rfsos_add_object": (SET_GATE, self._add_object),
            "rfsos_switch_module": ("R_SWITCH_MODULE", self._switch_module),
            "rfsos_switch_log": ("R_SWITCH_LOG", self._switch_log),
            "rfsos_get_state": (GET_GATE, self._state_view),
        }

    def verbs(self) -> list[str]:
        return sorted(self._verbs)

    def gate_request_type(self, verb: str) -> str:
        try:
            return self._verbs[verb][0]
        except KeyError:
            raise UnknownRequest(f"unknown admin verb {verb!r}") from None

    # -- dispatch ---------------------------------------------------------

    def admin_command(self, cmd: AdminCommand) -> Any:
        """Gate, then execute. Denials surface as PermissionDenied carrying
        the full Decision so callers can display the failing check."""
        if cmd.verb not in self._verbs:
            raise UnknownRequest(f"unknown admin verb {cmd.verb!r}")
        gate_type, executor = self._verbs[cmd.verb]
        request = self._gate_request(gate_type, cmd)
        decision = self.engine.decide(request)
        if cmd.verb == "rfsos_osr_check_app_right":
            # the gate IS the answer here: deny is a result, not an error
            return {"right": cmd.payload.get("right"),
                    "verdict": decision.verdict,
                    "decision": decision.to_dict()}
        if not decision.allowed:
            raise PermissionDenied(
                f"verb {cmd.verb} denied: {decision.reason}", decision=decision)
        return executor(cmd)

    def _gate_request(self, gate_type: str, cmd: AdminCommand) -> AccessRequest:
        if gate_type == "R_CHECK_APP_RIGHT":
            right = cmd.payload.get("right")
            if not right:
                raise MissingParams("check_app_right needs a right name")
            return AccessRequest(gate_type, cmd.caller, None, None,
                                 {"app_bit": right})
        if gate_type in ("R_SWITCH_MODULE", "R_SWITCH_LOG"):
            return AccessRequest(gate_type, cmd.caller, "system_state", "T_SCD")
        if cmd.verb == "rfsos_osr_activate_role":
            kind = cmd.payload.get("kind", "process")
            principal = cmd.payload.get("principal")
            if kind == "process" and principal == cmd.caller:
                # self-activation: the caller's own process is the target
                return AccessRequest(gate_type, cmd.caller, principal, "T_PROCESS")
            return AccessRequest(gate_type, cmd.caller, None, "T_FILE")
        # attribute reads/writes conceptually target the protected ACI files
        return AccessRequest(gate_type, cmd.caller, None, "T_FILE")

    def what_if(self, subject: str, request_type: str,
                target: str | None = None, target_kind: str | None = None,
                params: dict | None = None) -> Decision:
        """Dry-run decide: no post-actions applied, no audit, no mutation."""
        request = AccessRequest(request_type, subject, target, target_kind,
                                params or {})
        return self.engine.decide(request, log=False)

    def check_app_right(self, subject: str, right: str) -> Decision:
        request = AccessRequest("R_CHECK_APP_RIGHT", subject, None, None,
                                {"app_bit": right})
        return self.engine.decide(request)

    # -- executors -----------------------------------------------------------

    def _noop(self, cmd: AdminCommand) -> Any:
        return None

    def _require(self, cmd: AdminCommand, *keys: str) -> list[Any]:
        out = []
        for key in keys:
            if key not in cmd.payload:
                raise MissingParams(f"{cmd.verb} needs {key!r}")
            out.append(cmd.payload[key])
        return out

    def _get_user_attr(self, cmd: AdminCommand):
        user_id, attr = self._require(cmd, "user", "attr")
        return {"entity": user_id, "attr": attr,
                "value": self.store.get_attr("user", user_id, attr)}

    def _set_user_attr(self, cmd: AdminCommand):
        user_id, attr, value = self._require(cmd, "user", "attr", "value")
        self.store.set_attr("user", user_id, attr, value)
        return {"ok": True, "generation": self.store.generation}

    def _get_proc_attr(self, cmd: AdminCommand):
        pid, attr = self._require(cmd, "process", "attr")
        return {"entity": pid, "attr": attr,
                "value": self.store.get_attr("process", pid, attr)}

    def _set_proc_attr(self, cmd: AdminCommand):
        pid, attr, value = self._require(cmd, "process", "attr", "value")
        self.store.set_attr("process", pid, attr, value)
        return {"ok": True, "generation": self.store.generation}

    def _object_for_verb(self, cmd: AdminCommand, object_id: str):
        kinds = _OBJECT_VERB_KINDS[cmd.verb.split("_attr")[0]
                                   .removeprefix("rfsos_get_")
                                   .removeprefix("rfsos_set_")]
        obj = self.store.object(object_id)
        if obj.kind not in kinds:
            raise NotFound(
                f"object {object_id!r} is a {obj.kind}, not addressable via "
                f"{cmd.verb}")
        return obj

    def _get_object_attr(self, cmd: AdminCommand):
        object_id, attr = self._require(cmd, "object", "attr")
        self._object_for_verb(cmd, object_id)
        return {"entity": object_id, "attr": attr,
                "value": self.store.get_attr("object", object_id, attr)}

    def _set_object_attr(self, cmd: AdminCommand):
        object_id, attr, value = self._require(cmd, "object", "attr", "value")
        self._object_for_verb(cmd, object_id)
        self.store.set_attr("object", object_id, attr, value)
        return {"ok": True, "generation": self.store.generation}

    def _add_role(self, cmd: AdminCommand):
        (record,) = self._require(cmd, "record")
        role = self._record_from_payload(record)
        self.store.add_role(role)
        return {"role_id": role.role_id, "generation": self.store.generation}

    def _del_role(self, cmd: AdminCommand):
        (role_id,) = self._require(cmd, "role")
        self.store.delete_role(role_id)
        return {"ok": True, "generation": self.store.generation}

    def _get_role_attr(self, cmd: AdminCommand):
        role_id, attr = self._require(cmd, "role", "attr")
        return {"entity": role_id, "attr": attr,
                "value": self.store.get_attr("role", role_id, attr)}

    def _set_role_attr(self, cmd: AdminCommand):
        role_id, attr, value = self._require(cmd, "role", "attr", "value")
        self.store.set_attr("role", role_id, attr, value)
        return {"ok": True, "generation": self.store.generation}

    def _activate_role(self, cmd: AdminCommand):
        principal, roles = self._require(cmd, "principal", "roles")
        kind = cmd.payload.get("kind", "process")
        self.store.activate_roles(kind, principal, roles)
        return {"ok": True, "principal": principal,
                "active_roles": sorted(self.store.get_attr(
                    kind, principal, "Active_roles"))}

    def _add_user(self, cmd: AdminCommand):
        (user_id,) = self._require(cmd, "user")
        # new users start with the general role unless told otherwise
        roles = cmd.payload.get("max_roles", [GENERAL_ROLE])
        self.store.add_user(
            user_id, max_roles=roles,
            default_object_type=cmd.payload.get("default_type"))
        return {"ok": True, "user": user_id,
                "generation": self.store.generation}

    def _add_object(self, cmd: AdminCommand):
        object_id, kind, types = self._require(cmd, "object", "kind", "types")
        self.store.add_object(
            object_id, kind, types,
            device_id=cmd.payload.get("device", "dev0"),
            executable=bool(cmd.payload.get("executable", False)),
            exec_file_roles=cmd.payload.get("exec_roles", ()))
        return {"ok": True, "object": object_id,
                "generation": self.store.generation}

    def _switch_module(self, cmd: AdminCommand):
        module_name, enabled = self._require(cmd, "module", "enabled")
        for module in self.engine.modules:
            if module.name == module_name:
                module.enabled = bool(enabled)
                return {"module": module_name, "enabled": module.enabled}
        raise NotFound(f"no policy module named {module_name!r}")

    def _switch_log(self, cmd: AdminCommand):
        (enabled,) = self._require(cmd, "enabled")
        if self.engine.log is None:
            raise NotFound("no decision log attached to the engine")
        self.engine.log.enabled = bool(enabled)
        return {"enabled": self.engine.log.enabled}

    def store_is_empty(self) -> bool:
        return not (self.store.role_ids() or self.store.user_ids()
                    or self.store.process_ids() or self.store.object_ids())

    def _state_view(self, cmd: AdminCommand | None = None):
        """One coherent snapshot for the console."""
        store = self.store
        snap = store.snapshot()
        reg = snap.registry
        roles = []
        for rid in sorted(snap.roles):
            rec = snap.roles[rid]
            roles.append({
                "role_id": rid,
                "name": rec.name,
                "children": sorted(rec.child_roles),
                "static_conflicts": sorted(rec.static_conflicts),
                "dynamic_conflicts": sorted(rec.dynamic_conflicts),
                "mutable": rec.mutable_permissions,
                "user_assignable": rec.user_assignable,
                "ordinary": {
                    cat: {t: reg.set_names(cat, vec)
                          for t, vec in sorted(per_type.items()) if vec.any()}
                    for cat, per_type in sorted(rec.ordinary.items())
                },
                "privileges": {
                    cat: reg.set_names(cat, vec)
                    for cat, vec in sorted(rec.privileges.items()) if vec.any()
                },
            })
        users = [{
            "user_id": uid,
            "max_roles": sorted(u.max_roles),
            "active_roles": sorted(u.active_roles),
            "default_type": u.default_object_type,
        } for uid, u in sorted(snap.users.items())]
        processes = [{
            "process_id": pid,
            "owner_user": p.owner_user,
            "rac_types": sorted(p.rac_types),
            "max_roles": sorted(p.max_roles),
            "active_roles": sorted(p.active_roles),
            "exec_file": p.exec_file,
            "caps": reg.set_names("sysadm", p.effective_caps)
            if p.effective_caps.width else [],
        } for pid, p in sorted(snap.processes.items())]
        objects = [{
            "object_id": oid,
            "kind": o.kind,
            "device": o.device_id,
            "rac_types": sorted(o.rac_types),
            "executable": o.executable,
            "exec_file_roles": sorted(o.exec_file_roles),
        } for oid, o in sorted(snap.objects.items())]
        log_lines = list(self.engine.log.lines[-200:]) if self.engine.log else []
        return {
            "generation": snap.generation,
            "types": list(reg.types),
            "scd_types": list(reg.scd_types),
            "rights": {cat: list(reg.names(cat)) for cat in reg.rights},
            "roles": roles,
            "users": users,
            "processes": processes,
            "objects": objects,
            "modules": [{"name": m.name, "enabled": m.enabled}
                        for m in self.engine.modules],
            "decision_log": log_lines,
        }

    # -- payload helpers ---------------------------------------------------------

    def _record_from_payload(self, payload: dict) -> RoleRecord:
        if not isinstance(payload, dict) or "role_id" not in payload:
            raise TypeMismatch("role record payload needs at least a role_id")
        reg = self.store.registry
        ordinary = {}
        for cat, per_type in (payload.get("ordinary") or {}).items():
            ordinary[cat] = {t: reg.vector(cat, names)
                             for t, names in per_type.items()}
        privileges = {cat: reg.vector(cat, names)
                      for cat, names in (payload.get("privileges") or {}).items()}
        return RoleRecord(
            role_id=payload["role_id"],
            name=payload.get("name", ""),
            child_roles=set(payload.get("children", ())),
            static_conflicts=set(payload.get("static_conflicts", ())),
            dynamic_conflicts=set(payload.get("dynamic_conflicts", ())),
            ordinary=ordinary,
            privileges=privileges,
        )
