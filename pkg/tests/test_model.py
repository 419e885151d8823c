"""Role graph semantics: hierarchy, containment, SoD, permission merging."""

import random

import pytest

from osrbac.bits import BitVector
from osrbac.errors import (
    ConflictAsymmetry,
    ContainmentViolated,
    CycleDetected,
    DanglingReference,
    DuplicateId,
    DynamicConflict,
    NotFound,
    NotInMaxRoles,
    StaticConflict,
)
from osrbac.model import (
    RoleRecord,
    drop_redundant_parents,
    inherited_closure,
    merge_effective_permissions,
)
from osrbac.registry import DEFAULT_TYPE, ORDINARY_CATEGORIES, PRIVILEGE_CATEGORIES
from osrbac.store import AciStore

from randpol import brute_closure, random_policy


def simple_role(store, rid, fd_bits=(), children=(), sysadm_bits=()):
    reg = store.registry
    ordinary = {}
    if fd_bits:
        ordinary["fd"] = {DEFAULT_TYPE: reg.vector("fd", fd_bits)}
    privileges = {}
    if sysadm_bits:
        privileges["sysadm"] = reg.vector("sysadm", sysadm_bits)
    return RoleRecord(role_id=rid, name=rid, child_roles=set(children),
                      ordinary=ordinary, privileges=privileges)


class TestAddRole:
    def test_plain_add(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        assert store.role_ids() == ["a"]

    def test_duplicate_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        with pytest.raises(DuplicateId):
            store.add_role(simple_role(store, "a"))

    def test_self_edge_is_a_cycle(self):
        store = AciStore()
        with pytest.raises(CycleDetected):
            store.add_role(simple_role(store, "r", children=("r",)))

    def test_unknown_child_rejected(self):
        store = AciStore()
        with pytest.raises(DanglingReference):
            store.add_role(simple_role(store, "r", children=("ghost",)))

    def test_parent_with_extra_right_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "child", fd_bits=("READ_OPEN",)))
        parent = simple_role(store, "parent",
                             fd_bits=("READ_OPEN", "WRITE_OPEN"),
                             children=("child",))
        with pytest.raises(ContainmentViolated):
            store.add_role(parent)

    def test_contained_parent_accepted(self):
        store = AciStore()
        store.add_role(simple_role(store, "child",
                                   fd_bits=("READ_OPEN", "WRITE_OPEN")))
        store.add_role(simple_role(store, "parent", fd_bits=("READ_OPEN",),
                                   children=("child",)))
        assert "child" in store.role("parent").child_roles

    def test_declared_conflicts_rejected_at_creation(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        rec = simple_role(store, "b")
        rec.static_conflicts = {"a"}
        with pytest.raises(ConflictAsymmetry):
            store.add_role(rec)


class TestChildEdges:
    def test_cycle_through_chain_rejected(self):
        store = AciStore()
        for rid in ("c", "b", "a"):
            store.add_role(simple_role(store, rid))
        store.set_child_roles("a", {"b"})
        store.set_child_roles("b", {"c"})
        with pytest.raises(CycleDetected):
            store.set_child_roles("c", {"a"})
        # oracle agrees the edge would close a loop: a already reaches c
        roles = {rid: store.role(rid) for rid in store.role_ids()}
        assert "a" in brute_closure(roles, {"c"})

    def test_clearing_children_always_succeeds(self):
        store = AciStore()
        store.add_role(simple_role(store, "b"))
        store.add_role(simple_role(store, "a", children=("b",)))
        store.set_child_roles("a", set())
        assert store.role("a").child_roles == set()

    def test_containment_enforced_on_edge_set(self):
        store = AciStore()
        store.add_role(simple_role(store, "kid", fd_bits=("READ_OPEN",)))
        store.add_role(simple_role(store, "big",
                                   fd_bits=("READ_OPEN", "WRITE_OPEN")))
        with pytest.raises(ContainmentViolated):
            store.set_child_roles("big", {"kid"})


class TestClosure:
    def test_empty(self):
        assert inherited_closure({}, set()) == set()

    def test_single_edge(self):
        store = AciStore()
        store.add_role(simple_role(store, "b"))
        store.add_role(simple_role(store, "a", children=("b",)))
        roles = {rid: store.role(rid) for rid in store.role_ids()}
        assert inherited_closure(roles, {"b"}) == {"a", "b"}
        assert inherited_closure(roles, {"a"}) == {"a"}

    def test_unknown_role(self):
        with pytest.raises(NotFound):
            inherited_closure({}, {"ghost"})

    def test_matches_brute_force_on_random_dags(self):
        rng = random.Random(11)
        for _ in range(25):
            store = random_policy(rng, max_roles=10, users=1, processes=1,
                                  objects=0)
            roles = {rid: store.role(rid) for rid in store.role_ids()}
            ids = sorted(roles)
            for _ in range(10):
                seed = set(rng.sample(ids, rng.randint(1, min(3, len(ids)))))
                assert inherited_closure(roles, seed) == brute_closure(roles, seed)


class TestAssignment:
    def _store_with_conflict(self):
        store = AciStore()
        store.add_role(simple_role(store, "x"))
        store.add_role(simple_role(store, "y"))
        store.set_conflicts("x", "static", {"y"})
        return store

    def test_static_conflict_names_the_pair(self):
        store = self._store_with_conflict()
        with pytest.raises(StaticConflict) as err:
            store.add_user("u", max_roles={"x", "y"})
        assert err.value.pair == ("x", "y")

    def test_redundant_parent_dropped(self):
        store = AciStore()
        store.add_role(simple_role(store, "child", fd_bits=("READ_OPEN",)))
        store.add_role(simple_role(store, "parent", children=("child",)))
        store.add_user("u", max_roles={"parent", "child"})
        assert store.get_attr("user", "u", "Max_roles") == ["child"]

    def test_grandparent_dropped_too(self):
        store = AciStore()
        store.add_role(simple_role(store, "c"))
        store.add_role(simple_role(store, "b", children=("c",)))
        store.add_role(simple_role(store, "a", children=("b",)))
        store.add_user("u", max_roles={"a", "c"})
        assert store.get_attr("user", "u", "Max_roles") == ["c"]

    def test_empty_assignment(self):
        store = AciStore()
        store.add_role(simple_role(store, "r"))
        store.add_user("u", max_roles={"r"})
        store.assign_max_roles("user", "u", set())
        assert store.get_attr("user", "u", "Max_roles") == []
        assert store.get_attr("user", "u", "Active_roles") == []

    def test_assignment_shrinks_active(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        store.add_role(simple_role(store, "b"))
        store.add_user("u", max_roles={"a", "b"})
        store.activate_roles("user", "u", {"a", "b"})
        store.assign_max_roles("user", "u", {"a"})
        assert store.get_attr("user", "u", "Active_roles") == ["a"]


class TestActivation:
    def test_outside_max_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        store.add_role(simple_role(store, "b"))
        store.add_user("u", max_roles={"a"})
        with pytest.raises(NotInMaxRoles):
            store.activate_roles("user", "u", {"b"})

    def test_dynamic_conflict_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        store.add_role(simple_role(store, "b"))
        store.set_conflicts("a", "dynamic", {"b"})
        store.add_user("u", max_roles={"a", "b"}, active_roles=set())
        with pytest.raises(DynamicConflict):
            store.activate_roles("user", "u", {"a", "b"})
        # one at a time is fine: the conflict is dynamic, not static
        store.activate_roles("user", "u", {"a"})
        store.activate_roles("user", "u", {"b"})

    def test_activation_refreshes_process_cache(self):
        store = AciStore()
        store.add_role(simple_role(store, "r", fd_bits=("READ_OPEN",),
                                   sysadm_bits=("reboot",)))
        store.add_user("u", max_roles={"r"})
        store.add_process("p", "u", {DEFAULT_TYPE}, max_roles={"r"},
                          active_roles=set())
        proc = store.process("p")
        assert not proc.effective_caps.any()
        store.activate_roles("process", "p", {"r"})
        proc = store.process("p")
        assert proc.effective == store.merge_effective({"r"})
        assert store.registry.set_names("sysadm", proc.effective_caps) == ["reboot"]


class TestDeleteRole:
    def test_delete_unreferenced(self):
        store = AciStore()
        store.add_role(simple_role(store, "r"))
        store.delete_role("r")
        assert store.role_ids() == []

    def test_cascade_and_cache_recompute(self):
        store = AciStore()
        store.add_role(simple_role(store, "a", fd_bits=("READ_OPEN",)))
        store.add_role(simple_role(store, "b", fd_bits=("WRITE_OPEN",)))
        store.add_user("u", max_roles={"a", "b"})
        store.add_process("p", "u", {DEFAULT_TYPE}, max_roles={"a", "b"},
                          active_roles={"a", "b"})
        store.delete_role("a")
        assert store.get_attr("process", "p", "Active_roles") == ["b"]
        proc = store.process("p")
        assert proc.effective == store.merge_effective({"b"})
        assert "a" not in store.role("b").child_roles

    def test_missing_role(self):
        with pytest.raises(NotFound):
            AciStore().delete_role("ghost")


class TestMerge:
    def test_merge_empty_is_all_zero(self):
        store = AciStore()
        merged = store.merge_effective(set())
        assert merged.ordinary == {} and merged.privileges == {}

    def test_disjoint_union(self):
        store = AciStore()
        store.add_role(simple_role(store, "r1", fd_bits=("ADD_TO_KERNEL",)))
        store.add_role(simple_role(store, "r2", fd_bits=("CHDIR",)))
        merged = store.merge_effective({"r1", "r2"})
        names = store.registry.set_names("fd", merged.ordinary["fd"][DEFAULT_TYPE])
        assert names == ["ADD_TO_KERNEL", "CHDIR"]

    def test_matches_exhaustive_bit_loop(self):
        rng = random.Random(3)
        store = random_policy(rng, max_roles=12, users=1, processes=1, objects=0)
        reg = store.registry
        roles = {rid: store.role(rid) for rid in store.role_ids()}
        ids = sorted(roles)
        for _ in range(50):
            chosen = set(rng.sample(ids, rng.randint(0, len(ids))))
            merged = merge_effective_permissions(roles, chosen, reg)
            for cat in ORDINARY_CATEGORIES:
                tokens = reg.scd_types if cat == "scd" else reg.types
                for t in tokens:
                    for bit in range(reg.width(cat)):
                        expect = any(
                            roles[r].ordinary.get(cat, {}).get(t) is not None
                            and roles[r].ordinary[cat][t].get(bit)
                            for r in chosen)
                        got = merged.ordinary_vector(cat, t, reg).get(bit)
                        assert got == expect
            for cat in PRIVILEGE_CATEGORIES:
                for bit in range(reg.width(cat)):
                    expect = any(
                        roles[r].privileges.get(cat) is not None
                        and roles[r].privileges[cat].get(bit)
                        for r in chosen)
                    assert merged.privilege_vector(cat, reg).get(bit) == expect


class TestConflictEditing:
    def test_pairwise_symmetric_update(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        store.add_role(simple_role(store, "b"))
        store.set_conflicts("a", "static", {"b"})
        assert store.role("b").static_conflicts == {"a"}
        store.set_conflicts("a", "static", set())
        assert store.role("b").static_conflicts == set()

    def test_self_conflict_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        with pytest.raises(Exception):
            store.set_conflicts("a", "static", {"a"})

    def test_edit_breaking_existing_assignment_rejected(self):
        store = AciStore()
        store.add_role(simple_role(store, "a"))
        store.add_role(simple_role(store, "b"))
        store.add_user("u", max_roles={"a", "b"})
        generation = store.generation
        with pytest.raises(StaticConflict):
            store.set_conflicts("a", "static", {"b"})
        assert store.generation == generation
        assert store.role("b").static_conflicts == set()


def test_drop_redundant_parents_pure():
    store = AciStore()
    store.add_role(simple_role(store, "c"))
    store.add_role(simple_role(store, "b", children=("c",)))
    store.add_role(simple_role(store, "a", children=("b",)))
    roles = {rid: store.role(rid) for rid in store.role_ids()}
    assert drop_redundant_parents(roles, {"a", "b", "c"}) == {"c"}
    assert drop_redundant_parents(roles, {"a"}) == {"a"}
