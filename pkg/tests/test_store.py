"""Attribute gateway, generation counter and store invariants."""

import pytest

from osrbac.errors import (
    BuiltinRoleImmutable,
    InvariantViolation,
    NotFound,
    RoleNotUserAssignable,
    StaticConflict,
    TypeMismatch,
    UnknownAttribute,
)
from osrbac.model import GENERAL_ROLE, SECADM, SYSADM, TRUSTED_SYSADM, RoleRecord
from osrbac.registry import DEFAULT_TYPE
from osrbac.sim import bootstrap_default_state
from osrbac.store import AciStore


class TestAttrGateway:
    def test_leaf_role_children_empty(self, boot_store):
        assert boot_store.get_attr("role", GENERAL_ROLE, "child_roles") == []

    def test_exec_roles_of_directory_is_unknown_attribute(self, boot_store):
        with pytest.raises(UnknownAttribute):
            boot_store.get_attr("object", "/home", "Exec_file_roles")

    def test_active_roles_echoes_activation(self, boot_store):
        boot_store.add_process("7", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE}, active_roles=set())
        boot_store.activate_roles("process", "7", {GENERAL_ROLE})
        assert boot_store.get_attr("process", "7", "Active_roles") == [GENERAL_ROLE]

    def test_attr_names_case_insensitive(self, boot_store):
        a = boot_store.get_attr("user", "alice", "Max_roles")
        b = boot_store.get_attr("user", "alice", "max_roles")
        assert a == b == [GENERAL_ROLE]

    def test_set_then_get_round_trip(self, boot_store):
        boot_store.set_attr("user", "alice", "Default_object_type", DEFAULT_TYPE)
        assert boot_store.get_attr("user", "alice",
                                   "Default_object_type") == DEFAULT_TYPE

    def test_set_builtin_privileges_rejected(self, boot_store):
        with pytest.raises(BuiltinRoleImmutable):
            boot_store.set_attr("role", SYSADM, "sysadm_privileges", ["reboot"])

    def test_set_rights_value_type_checked(self, boot_store):
        with pytest.raises(TypeMismatch):
            boot_store.set_attr("role", GENERAL_ROLE,
                                "Fd_right_vectors_array", ["not-a-mapping"])

    def test_read_only_attr_rejected_on_set(self, boot_store):
        with pytest.raises(UnknownAttribute):
            boot_store.set_attr("process", "1", "Effective_caps", [])

    def test_unknown_attribute(self, boot_store):
        with pytest.raises(UnknownAttribute):
            boot_store.get_attr("user", "alice", "Shoe_size")

    def test_unknown_entity(self, boot_store):
        with pytest.raises(NotFound):
            boot_store.get_attr("user", "nobody", "Max_roles")


class TestGenerationCounter:
    def test_failed_mutation_leaves_generation(self, boot_store):
        generation = boot_store.generation
        with pytest.raises(StaticConflict):
            boot_store.set_attr("user", "alice", "Max_roles", [SYSADM, SECADM])
        assert boot_store.generation == generation

    def test_each_successful_mutation_bumps_once(self, boot_store):
        generation = boot_store.generation
        boot_store.add_user("bob", max_roles={GENERAL_ROLE})
        assert boot_store.generation == generation + 1
        boot_store.set_attr("user", "bob", "Active_roles", [])
        assert boot_store.generation == generation + 2
        boot_store.add_object("/tmp", "dir", {DEFAULT_TYPE})
        assert boot_store.generation == generation + 3

    def test_reads_do_not_bump(self, boot_store):
        generation = boot_store.generation
        boot_store.get_attr("user", "alice", "Max_roles")
        boot_store.snapshot()
        boot_store.merge_effective({GENERAL_ROLE})
        assert boot_store.generation == generation

    def test_recompute_caps_is_not_a_mutation(self, boot_store):
        generation = boot_store.generation
        boot_store.recompute_caps("1")
        assert boot_store.generation == generation


class TestBuiltinProtection:
    def test_builtin_role_not_deletable(self, boot_store):
        with pytest.raises(BuiltinRoleImmutable):
            boot_store.delete_role(SYSADM)

    def test_general_role_is_deletable(self, boot_store):
        boot_store.delete_role(GENERAL_ROLE)
        assert GENERAL_ROLE not in boot_store.role_ids()

    def test_trusted_role_never_assignable_to_users(self, boot_store):
        with pytest.raises(RoleNotUserAssignable):
            boot_store.assign_max_roles("user", "alice", {TRUSTED_SYSADM})

    def test_trusted_role_not_assignable_to_ordinary_process(self, boot_store):
        boot_store.add_process("9", "alice", {DEFAULT_TYPE})
        with pytest.raises(RoleNotUserAssignable):
            boot_store.assign_max_roles("process", "9", {TRUSTED_SYSADM})

    def test_trusted_role_rejected_on_exec_files(self, boot_store):
        with pytest.raises(RoleNotUserAssignable):
            boot_store.set_exec_file_roles("/bin/sh", {TRUSTED_SYSADM})


class TestObjects:
    def test_empty_type_list_rejected(self, boot_store):
        with pytest.raises(InvariantViolation):
            boot_store.add_object("/x", "file", set())

    def test_unknown_type_rejected(self, boot_store):
        with pytest.raises(TypeMismatch):
            boot_store.add_object("/x", "file", {"no-such-type"})

    def test_exec_roles_only_on_executables(self, boot_store):
        boot_store.add_object("/data.txt", "file", {DEFAULT_TYPE})
        with pytest.raises(UnknownAttribute):
            boot_store.set_exec_file_roles("/data.txt", {GENERAL_ROLE})

    def test_exec_roles_round_trip(self, boot_store):
        boot_store.set_exec_file_roles("/bin/sh", {GENERAL_ROLE})
        assert boot_store.get_attr("object", "/bin/sh",
                                   "Exec_file_roles") == [GENERAL_ROLE]

    def test_rename_preserves_aci_and_references(self, boot_store):
        boot_store.add_process("5", "alice", {DEFAULT_TYPE},
                               exec_file="/bin/sh")
        boot_store.set_exec_file_roles("/bin/sh", {GENERAL_ROLE})
        boot_store.rename_object("/bin/sh", "/bin/dash")
        assert boot_store.object("/bin/dash").exec_file_roles == {GENERAL_ROLE}
        assert boot_store.process("5").exec_file == "/bin/dash"
        assert not boot_store.has_object("/bin/sh")


class TestRoleRightsEditing:
    def test_shrinking_child_below_parent_rejected(self):
        store = AciStore()
        reg = store.registry
        store.add_role(RoleRecord(
            role_id="kid", ordinary={"fd": {DEFAULT_TYPE: reg.vector(
                "fd", ["READ_OPEN", "WRITE_OPEN"])}}))
        store.add_role(RoleRecord(
            role_id="dad", child_roles={"kid"},
            ordinary={"fd": {DEFAULT_TYPE: reg.vector("fd", ["READ_OPEN"])}}))
        from osrbac.errors import ContainmentViolated
        with pytest.raises(ContainmentViolated):
            store.set_attr("role", "kid", "Fd_right_vectors_array",
                           {DEFAULT_TYPE: ["WRITE_OPEN"]})

    def test_rights_edit_refreshes_process_caches(self, boot_store):
        boot_store.add_process("8", "alice", {DEFAULT_TYPE},
                               max_roles={GENERAL_ROLE})
        boot_store.set_attr("role", GENERAL_ROLE, "app_privileges",
                            ["approve-invoice"])
        proc = boot_store.process("8")
        reg = boot_store.registry
        assert reg.set_names(
            "app", proc.effective.privilege_vector("app", reg)) == ["approve-invoice"]


def test_concurrent_readers_never_observe_torn_state(boot_store):
    """Single-writer/multi-reader contract: snapshots and reads race a
    stream of mutations without errors."""
    import threading

    stop = threading.Event()
    errors = []

    def reader():
        while not stop.is_set():
            try:
                snap = boot_store.snapshot()
                assert snap.generation >= 0
                boot_store.get_attr("user", "alice", "Max_roles")
                boot_store.merge_effective({GENERAL_ROLE})
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)
                return

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    try:
        for i in range(300):
            boot_store.add_object(f"/race{i}", "file", {DEFAULT_TYPE})
    finally:
        stop.set()
        for t in threads:
            t.join()
    assert errors == []


def test_bootstrap_counts(boot_store):
    assert len(boot_store.role_ids()) == 5
    assert len(boot_store.registry.types) == 3


def test_bootstrap_requires_empty_store(boot_store):
    from osrbac.errors import StoreNotEmpty
    with pytest.raises(StoreNotEmpty):
        bootstrap_default_state(boot_store)


def test_bootstrap_three_way_conflict(boot_store):
    from osrbac.model import AUDADM
    for a in (SYSADM, SECADM, AUDADM):
        for b in (SYSADM, SECADM, AUDADM):
            if a != b:
                assert b in boot_store.role(a).static_conflicts
