"""Enforcement simulation: bootstrap state, lifecycle rules, trace replay."""

import random

import pytest

from osrbac.audit import DecisionLog
from osrbac.engine import AdfEngine
from osrbac.errors import (
    MissingContext,
    NotExecutable,
    RoleNotUserAssignable,
    StoreNotEmpty,
    TraceParseError,
)
from osrbac.model import AUDADM, GENERAL_ROLE, SECADM, SYSADM, TRUSTED_SYSADM, RoleRecord
from osrbac.registry import DEFAULT_TYPE, SECURITY_TYPE
from osrbac.sim import (
    Simulator,
    SyscallEvent,
    bootstrap_default_state,
    derive_exec_roles,
    derive_new_object_types,
    parse_trace,
    render_audit_log,
)
from osrbac.store import AciStore

from conftest import boot_trace_text


class TestBootstrap:
    def test_counts(self, boot_store):
        assert len(boot_store.role_ids()) == 5
        assert len(boot_store.registry.types) == 3

    def test_twice_rejected(self, boot_store):
        with pytest.raises(StoreNotEmpty):
            bootstrap_default_state(boot_store)

    def test_trusted_unassignable_to_users(self, boot_store):
        with pytest.raises(RoleNotUserAssignable):
            boot_store.assign_max_roles("user", "alice", {TRUSTED_SYSADM})

    def test_admin_roles_pairwise_conflicting(self, boot_store):
        for a, b in ((SYSADM, SECADM), (SYSADM, AUDADM), (SECADM, AUDADM)):
            assert b in boot_store.role(a).static_conflicts
            assert a in boot_store.role(b).static_conflicts

    def test_general_role_covers_default_type_only(self, boot_store):
        rec = boot_store.role(GENERAL_ROLE)
        assert set(rec.ordinary["fd"]) == {DEFAULT_TYPE}
        assert not rec.privileges

    def test_init_process_holds_trusted_role(self, boot_store):
        proc = boot_store.process("1")
        assert proc.active_roles == {TRUSTED_SYSADM}


class TestDerivations:
    def test_file_inherits_parent_dir_types(self, boot_store):
        types = derive_new_object_types(boot_store, "file",
                                        {"parent_dir": "/etc/aci"})
        assert types == {SECURITY_TYPE}

    def test_ipc_inherits_process_types(self, boot_store):
        assert derive_new_object_types(boot_store, "ipc",
                                       {"process": "1"}) == {DEFAULT_TYPE}

    def test_explicit_types_win(self, boot_store):
        types = derive_new_object_types(
            boot_store, "file",
            {"parent_dir": "/home", "types": [SECURITY_TYPE]})
        assert types == {SECURITY_TYPE}

    def test_missing_context(self, boot_store):
        with pytest.raises(MissingContext):
            derive_new_object_types(boot_store, "file", {})

    def test_owner_override_beats_parent_for_processes(self, boot_store):
        boot_store.set_attr("user", "alice", "Proc_type_override",
                            [SECURITY_TYPE])
        types = derive_new_object_types(
            boot_store, "process", {"parent": "1", "owner": "alice"})
        assert types == {SECURITY_TYPE}

    def test_exec_roles_union(self, boot_store):
        boot_store.add_role(RoleRecord(role_id="extra", name="extra"))
        boot_store.set_exec_file_roles("/bin/edit", {"extra"})
        roles = derive_exec_roles(boot_store, "alice", "/bin/edit")
        assert roles == {"extra", GENERAL_ROLE}

    def test_exec_roles_empty_file_gives_user_active(self, boot_store):
        assert derive_exec_roles(boot_store, "alice", "/bin/sh") == \
            {GENERAL_ROLE}

    def test_exec_roles_parent_eliminated(self, boot_store):
        # file carries a parent of the user's active role: union drops it
        reg = boot_store.registry
        boot_store.add_role(RoleRecord(role_id="reader", name="reader"))
        boot_store.set_child_roles("reader", {GENERAL_ROLE})
        boot_store.set_exec_file_roles("/bin/edit", {"reader"})
        assert derive_exec_roles(boot_store, "alice", "/bin/edit") == \
            {GENERAL_ROLE}

    def test_non_executable_rejected(self, boot_store):
        boot_store.add_object("/plain", "file", {DEFAULT_TYPE})
        with pytest.raises(NotExecutable):
            derive_exec_roles(boot_store, "alice", "/plain")


class TestLifecycle:
    @pytest.fixture
    def sim(self, boot_store, boot_engine):
        return Simulator(boot_store, boot_engine)

    def test_fork_inherits_role_sets(self, sim, boot_store):
        record = sim.apply_event(SyscallEvent(1, "1", "fork",
                                              {"new_pid": "30"}))
        assert record.verdict == "allow"
        parent, child = boot_store.process("1"), boot_store.process("30")
        assert child.max_roles == parent.max_roles
        assert child.active_roles == parent.active_roles
        assert child.rac_types == parent.rac_types
        assert child.parent == "1"
        assert child.effective_caps == parent.effective_caps

    def test_exec_installs_union_and_types(self, sim, boot_store):
        sim.apply_event(SyscallEvent(1, "1", "fork", {"new_pid": "30"}))
        sim.apply_event(SyscallEvent(2, "30", "setuid",
                                     {"new_owner": "alice"}))
        record = sim.apply_event(SyscallEvent(3, "30", "exec_ve",
                                              {"file": "/bin/sh"}))
        assert record.verdict == "allow"
        proc = boot_store.process("30")
        assert proc.active_roles == {GENERAL_ROLE}
        assert proc.max_roles == {GENERAL_ROLE}
        assert proc.exec_file == "/bin/sh"
        assert proc.rac_types == {DEFAULT_TYPE}

    def test_exec_conflict_denied_and_roles_unchanged(self, sim, boot_store):
        boot_store.add_role(RoleRecord(role_id="ops", name="ops"))
        boot_store.set_conflicts("ops", "static", {GENERAL_ROLE})
        boot_store.set_exec_file_roles("/bin/edit", {"ops"})
        boot_store.add_process("40", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        before = boot_store.process("40")
        record = sim.apply_event(SyscallEvent(1, "40", "exec_ve",
                                              {"file": "/bin/edit"}))
        assert record.verdict == "deny" and record.reason == "NOTE_5"
        after = boot_store.process("40")
        assert after.max_roles == before.max_roles
        assert after.active_roles == before.active_roles
        assert after.exec_file == before.exec_file

    def test_denied_event_is_generation_pure(self, sim, boot_store):
        boot_store.add_process("41", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        generation = boot_store.generation
        record = sim.apply_event(SyscallEvent(
            1, "41", "open", {"path": "/etc/aci/policy", "flags": "create,write"}))
        assert record.verdict == "deny"
        assert boot_store.generation == generation
        assert not boot_store.has_object("/etc/aci/policy")

    def test_chown_process_rederives_roles(self, sim, boot_store):
        sim.apply_event(SyscallEvent(1, "1", "fork", {"new_pid": "42"}))
        record = sim.apply_event(SyscallEvent(2, "42", "setuid",
                                              {"new_owner": "alice"}))
        assert record.verdict == "allow"
        proc = boot_store.process("42")
        assert proc.owner_user == "alice"
        # no exec yet: roles re-derived from the new owner's active set
        assert proc.active_roles == {GENERAL_ROLE}

    def test_chown_conflict_denied(self, sim, boot_store):
        boot_store.add_user("sue", max_roles={SECADM})
        boot_store.add_user("sam", max_roles={SYSADM})
        boot_store.add_process("43", "sue", {DEFAULT_TYPE})
        record = sim.apply_event(SyscallEvent(1, "43", "setuid",
                                              {"new_owner": "sam"}))
        assert record.verdict == "deny" and record.reason == "NOTE_1"
        assert boot_store.process("43").owner_user == "sue"

    def test_exit_removes_process(self, sim, boot_store):
        boot_store.add_process("44", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        record = sim.apply_event(SyscallEvent(1, "44", "exit", {}))
        assert record.verdict == "allow"
        assert not boot_store.has_process("44")

    def test_created_ipc_inherits_process_types(self, sim, boot_store):
        boot_store.add_process("45", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        record = sim.apply_event(SyscallEvent(1, "45", "msgget",
                                              {"ipc": "q:7"}))
        assert record.verdict == "allow"
        assert boot_store.object("q:7").rac_types == {DEFAULT_TYPE}
        assert boot_store.object("q:7").kind == "ipc"

    def test_unknown_subject_becomes_error_record(self, sim):
        record = sim.apply_event(SyscallEvent(1, "999", "exit", {}))
        assert record.verdict == "error"
        assert record.reason == "SubjectNotFound"

    def test_fork_lifecycle_invariants_hold(self, sim, boot_store):
        from randpol import assert_invariants
        sim.apply_event(SyscallEvent(1, "1", "fork", {"new_pid": "46"}))
        assert_invariants(boot_store)


class TestReplay:
    def test_empty_trace(self, boot_store, boot_engine):
        sim = Simulator(boot_store, boot_engine)
        generation = boot_store.generation
        assert sim.replay_trace([]) == []
        assert boot_store.generation == generation

    def test_boot_trace_zero_denials(self):
        store = bootstrap_default_state()
        sim = Simulator(store, AdfEngine(store, log=DecisionLog()))
        records = sim.replay_trace(parse_trace(boot_trace_text()))
        assert records, "trace must not be empty"
        bad = [r for r in records if r.verdict in ("deny", "error")]
        assert bad == []

    def test_replay_deterministic_byte_identical(self):
        logs = []
        for _ in range(2):
            store = bootstrap_default_state()
            engine = AdfEngine(store, log=DecisionLog())
            sim = Simulator(store, engine)
            records = sim.replay_trace(parse_trace(boot_trace_text()))
            logs.append((render_audit_log(records),
                         "\n".join(engine.log.lines)))
        assert logs[0] == logs[1]

    def test_trace_parse_errors(self):
        with pytest.raises(TraceParseError) as err:
            parse_trace("1 50 open path=/f\nnot a line\n", "t")
        assert err.value.line == 2
        with pytest.raises(TraceParseError):
            parse_trace("2 50 exit\n1 50 exit\n")  # non-increasing seq
        with pytest.raises(TraceParseError):
            parse_trace("1 50 open path\n")  # bad arg

    def test_complete_mediation(self, boot_store, boot_engine):
        """Every event either yields requests or is declared unmediated."""
        sim = Simulator(boot_store, boot_engine)
        records = sim.replay_trace(parse_trace(boot_trace_text()))
        for record in records:
            if record.verdict == "pass":
                from osrbac.sim import UNMEDIATED_SYSCALLS
                assert record.syscall in UNMEDIATED_SYSCALLS
            else:
                assert len(record.requests) >= 1

    def test_raw_request_injection(self, boot_store, boot_engine):
        sim = Simulator(boot_store, boot_engine)
        record = sim.apply_event(SyscallEvent(
            1, "1", "adf_request", {"request": "R_MAC_MOUNT"}))
        assert record.verdict == "allow"  # init holds every sysadm bit
        boot_store.add_process("47", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        record = sim.apply_event(SyscallEvent(
            2, "47", "adf_request", {"request": "R_MAC_MOUNT"}))
        assert record.verdict == "deny" and record.reason == "CP_sys"
