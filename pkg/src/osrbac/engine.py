"""Access decision facility: the matrix checks plus the meta-policy.

``decide`` is a pure read over the store and the request: it never mutates
anything. Post-access directives (SR/ST) are returned for the enforcement
side to apply. Additional policy modules (the MAC/IAC/audit stubs) vote on
every request; the meta-policy is deny-overrides, so the final verdict is
the conjunction of all module verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .audit import DecisionLog
from .errors import (
    MissingParams,
    SubjectNotFound,
    TargetNotFound,
    UnregisteredRight,
)
from .matrix import KIND_TO_TARGET, DecisionMatrix, default_matrix
from .model import ProcessAci, cross_static_conflict
from .registry import KIND_CATEGORY
from .store import AciStore

ALLOW = "allow"
DENY = "deny"

#: matrix target kind -> object kind (inverse of KIND_TO_TARGET)
_TARGET_TO_KIND = {v: k for k, v in KIND_TO_TARGET.items()}


@dataclass(frozen=True)
class AccessRequest:
    request_type: str
    subject: str
    target: str | None = None
    target_kind: str | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Decision:
    verdict: str
    reason: str | None = None
    detail: str | None = None
    post_actions: tuple[str, ...] = ()
    module_verdicts: tuple[tuple[str, str], ...] = ()

    @property
    def allowed(self) -> bool:
        return self.verdict == ALLOW

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "detail": self.detail,
            "post_actions": list(self.post_actions),
            "module_verdicts": [list(mv) for mv in self.module_verdicts],
        }


@dataclass
class StubPolicyModule:
    """Configured-verdict stand-in for a real policy module."""

    name: str
    enabled: bool = True
    decide_fn: Callable[[AccessRequest], str] | None = None
    verdict: str = ALLOW

    def decide(self, request: AccessRequest) -> str:
        if self.decide_fn is not None:
            return self.decide_fn(request)
        return self.verdict


def combine_meta(verdicts: list[tuple[str, str]]) -> str:
    """Deny-overrides: allow only when every module allows."""
    if not verdicts:
        raise ValueError("meta-policy needs at least one module verdict")
    return ALLOW if all(v == ALLOW for _, v in verdicts) else DENY


class AdfEngine:
    def __init__(self, store: AciStore, matrix: DecisionMatrix | None = None,
                 strict: bool = False,
                 modules: list[StubPolicyModule] | None = None,
                 log: DecisionLog | None = None):
        self.store = store
        self.matrix = matrix if matrix is not None else default_matrix()
        self.strict = strict
        self.modules = modules if modules is not None else [
            StubPolicyModule("mac"), StubPolicyModule("iac"),
            StubPolicyModule("audit"),
        ]
        self.log = log

    # -- public checks ------------------------------------------------------

    def lookup_check_spec(self, request_type: str, target_kind: str | None):
        return self.matrix.lookup(request_type, target_kind)

    def check_ordinary(self, subject: ProcessAci, target_types: set[str],
                       category: str, request_type: str) -> tuple[bool, str | None]:
        """Conjunctive ordinary check: the request's right bit must be held
        on every type the target carries. An untyped target is a
        misconfiguration and fails closed.
        """
        bit_name = request_type.removeprefix("R_")
        registry = self.store.registry
        bit = registry.index(category, bit_name)  # raises UnregisteredRight
        if not target_types:
            return False, "target-untyped"
        for obj_type in target_types:
            vec = subject.effective.ordinary_vector(category, obj_type, registry)
            if not vec.get(bit):
                return False, "CR"
        return True, None

    def check_privilege(self, subject: ProcessAci, privilege_class: str,
                        bit_name: str) -> bool:
        """True iff the union of the subject's active roles holds the bit.

        ``privilege_class`` is one of sec/sys/aud/app; the sys class reads
        the installed capability vector, which the store keeps equal to the
        fresh union at all times.
        """
        try:
            category = {"sec": "secadm", "sys": "sysadm", "aud": "audadm",
                        "app": "app"}[privilege_class]
        except KeyError:
            raise UnregisteredRight(
                f"unknown privilege class {privilege_class!r}") from None
        registry = self.store.registry
        bit = registry.index(category, bit_name)
        if privilege_class == "sys":
            return subject.effective_caps.get(bit)
        return subject.effective.privilege_vector(category, registry).get(bit)

    # -- target resolution ----------------------------------------------------

    def _target_types(self, request: AccessRequest) -> set[str]:
        kind = _TARGET_TO_KIND[request.target_kind]
        if request.target is None:
            prospective = request.params.get("prospective_types")
            if prospective:
                return set(prospective)
            raise TargetNotFound(
                f"request {request.request_type} needs a target")
        if kind == "process":
            if not self.store.has_process(request.target):
                raise TargetNotFound(f"unknown process {request.target!r}")
            return set(self.store.process(request.target).rac_types)
        if kind == "scd":
            if not self.store.registry.is_scd(request.target):
                raise TargetNotFound(f"unknown SCD token {request.target!r}")
            # every SCD has its own fixed type: the token itself
            return {request.target}
        if self.store.has_object(request.target):
            return set(self.store.object(request.target).rac_types)
        prospective = request.params.get("prospective_types")
        if prospective:
            return set(prospective)
        raise TargetNotFound(f"unknown object {request.target!r}")

    # -- notes ------------------------------------------------------------------

    def evaluate_note(self, note: str, request: AccessRequest) -> tuple[bool, str | None]:
        handler = {
            "NOTE_1": self._note_owner_change,
            "NOTE_2": self._note_new_process,
            "NOTE_3": self._note_create_in_dir,
            "NOTE_4": self._note_create_ipc,
            "NOTE_5": self._note_exec_conflict,
        }.get(note)
        if handler is None:
            raise UnregisteredRight(f"unknown note {note!r}")
        return handler(request)

    def _subject(self, request: AccessRequest) -> ProcessAci:
        if not self.store.has_process(request.subject):
            raise SubjectNotFound(f"unknown process {request.subject!r}")
        return self.store.process(request.subject)

    def _note_owner_change(self, request: AccessRequest):
        # static role conflict between the two users, or between the new
        # user and the process's executable file, blocks the owner change
        new_owner = request.params.get("new_owner")
        if new_owner is None:
            raise MissingParams("NOTE_1 needs a new_owner param")
        if not self.store.has_user(new_owner):
            raise TargetNotFound(f"unknown user {new_owner!r}")
        if request.target is None or not self.store.has_process(request.target):
            raise TargetNotFound(f"unknown process {request.target!r}")
        target_proc = self.store.process(request.target)
        new_user = self.store.user(new_owner)
        roles = {rid: self.store.role(rid) for rid in self.store.role_ids()}
        if self.store.has_user(target_proc.owner_user):
            old_user = self.store.user(target_proc.owner_user)
            if cross_static_conflict(roles, old_user.max_roles,
                                     new_user.max_roles):
                return False, "NOTE_1"
        if target_proc.exec_file and self.store.has_object(target_proc.exec_file):
            exec_roles = self.store.object(target_proc.exec_file).exec_file_roles
            if cross_static_conflict(roles, new_user.max_roles, exec_roles):
                return False, "NOTE_1"
        return True, None

    def _note_new_process(self, request: AccessRequest):
        # CREATE right on the type the new process will carry
        new_types = request.params.get("new_types")
        if not new_types:
            raise MissingParams("NOTE_2 needs the new process's new_types")
        subject = self._subject(request)
        ok, _ = self.check_ordinary(subject, set(new_types), "proc", "R_CREATE")
        return (True, None) if ok else (False, "NOTE_2")

    def _note_create_in_dir(self, request: AccessRequest):
        # first CREATE in the directory, then the right to create the type
        # the object will carry (explicit, else the user's default type)
        subject = self._subject(request)
        dir_types = self._target_types(request)
        ok, reason = self.check_ordinary(subject, dir_types, "fd", "R_CREATE")
        if not ok:
            return False, "NOTE_3" if reason == "CR" else reason
        new_types = request.params.get("new_types")
        if not new_types:
            owner = self._note_owner(subject)
            new_types = [owner.default_object_type]
        ok, _ = self.check_ordinary(subject, set(new_types), "fd", "R_CREATE")
        return (True, None) if ok else (False, "NOTE_3")

    def _note_create_ipc(self, request: AccessRequest):
        subject = self._subject(request)
        new_types = request.params.get("new_types")
        if not new_types:
            owner = self._note_owner(subject)
            new_types = [owner.default_object_type]
        ok, _ = self.check_ordinary(subject, set(new_types), "ipc", "R_CREATE")
        return (True, None) if ok else (False, "NOTE_4")

    def _note_owner(self, subject: ProcessAci):
        if not self.store.has_user(subject.owner_user):
            raise TargetNotFound(f"unknown user {subject.owner_user!r}")
        return self.store.user(subject.owner_user)

    def _note_exec_conflict(self, request: AccessRequest):
        # static conflict between the executable's roles and the user's
        exec_file = request.params.get("exec_file")
        if exec_file is None:
            raise MissingParams("NOTE_5 needs an exec_file param")
        if not self.store.has_object(exec_file):
            raise TargetNotFound(f"unknown object {exec_file!r}")
        subject = self._subject(request)
        owner = self._note_owner(subject)
        exec_roles = self.store.object(exec_file).exec_file_roles
        roles = {rid: self.store.role(rid) for rid in self.store.role_ids()}
        if cross_static_conflict(roles, exec_roles, owner.active_roles):
            return False, "NOTE_5"
        return True, None

    # -- the decision pipeline ----------------------------------------------

    def decide(self, request: AccessRequest, log: bool = True) -> Decision:
        subject = self._subject(request)
        spec = self.matrix.lookup(request.request_type, request.target_kind)

        reason: str | None = None
        detail: str | None = None
        if not spec.defined:
            if self.strict:
                osr_verdict, reason = DENY, "undefined-cell"
                detail = (f"no matrix cell for {request.request_type} / "
                          f"{request.target_kind} in strict mode")
            else:
                osr_verdict = ALLOW
        else:
            osr_verdict = ALLOW
            for check in spec.checks:
                ok, why, what = self._run_check(check, request, subject)
                if not ok:
                    osr_verdict, reason, detail = DENY, why, what
                    break

        verdicts: list[tuple[str, str]] = [("osr", osr_verdict)]
        for module in self.modules:
            if module.enabled:
                verdicts.append((module.name, module.decide(request)))
        final = combine_meta(verdicts)
        if final == DENY and reason is None:
            culprit = next(name for name, v in verdicts if v == DENY)
            reason = f"module:{culprit}"
            detail = f"policy module {culprit} denied the request"

        decision = Decision(
            verdict=final,
            reason=None if final == ALLOW else reason,
            detail=None if final == ALLOW else detail,
            post_actions=spec.post_actions if final == ALLOW else (),
            module_verdicts=tuple(verdicts),
        )
        if log and self.log is not None:
            self.log.record(request, decision)
        return decision

    def _run_check(self, check: str, request: AccessRequest,
                   subject: ProcessAci) -> tuple[bool, str | None, str | None]:
        if check == "CR":
            category = KIND_CATEGORY[_TARGET_TO_KIND[request.target_kind]]
            types = self._target_types(request)
            ok, reason = self.check_ordinary(
                subject, types, category, self.matrix.normalize(request.request_type))
            if ok:
                return True, None, None
            bit = self.matrix.normalize(request.request_type).removeprefix("R_")
            return False, reason, (
                f"subject {subject.process_id} lacks {bit} on every type of "
                f"{request.target!r}" if reason == "CR"
                else f"target {request.target!r} carries no type labels")
        if check in ("CP_sec", "CP_sys", "CP_aud"):
            klass = {"CP_sec": "sec", "CP_sys": "sys", "CP_aud": "aud"}[check]
            normalized = self.matrix.normalize(request.request_type)
            _, bit_name = self.store.registry.binding_for(normalized)
            ok = self.check_privilege(subject, klass, bit_name)
            return (True, None, None) if ok else (
                False, check,
                f"subject {subject.process_id} lacks {klass} privilege {bit_name!r}")
        if check == "CP_app":
            bit_name = request.params.get("app_bit")
            if not bit_name:
                raise MissingParams("application right checks need an app_bit param")
            ok = self.check_privilege(subject, "app", bit_name)
            return (True, None, None) if ok else (
                False, "CP_app",
                f"subject {subject.process_id} lacks application right {bit_name!r}")
        if check.startswith("NOTE_"):
            ok, reason = self.evaluate_note(check, request)
            if ok:
                return True, None, None
            return False, reason, f"{check} rejected the request"
        raise UnregisteredRight(f"unknown check token {check!r}")
