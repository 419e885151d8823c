"""Request/syscall table fidelity and event mapping."""

import pytest

from osrbac.engine import AdfEngine
from osrbac.errors import UnknownSyscall, UnmediatedSyscall
from osrbac.sim import (
    SYSCALL_TABLE,
    UNMEDIATED_SYSCALLS,
    Simulator,
    SyscallEvent,
    dump_syscall_table,
)

from conftest import golden

#: canonical args that make one syscall hit one specific table row
ROW_EVENT_ARGS = {
    ("R_ALTER", "ipc"): {"op": "alter", "ipc": "q:1"},
    ("R_ALTER", "msgctl"): {"op": "set", "ipc": "q:1"},
    ("R_ALTER", "shmctl"): {"op": "set", "ipc": "q:1"},
    ("R_APPEND_OPEN", "open"): {"path": "/f", "flags": "append"},
    ("R_APPEND_OPEN", "msgsnd"): {"ipc": "q:1"},
    ("R_CREATE", "ipc"): {"op": "create", "ipc": "q:9"},
    ("R_CREATE", "socketcall"): {"op": "create", "ipc": "sock:9"},
    ("R_CREATE", "open"): {"path": "/new", "flags": "create,write"},
    ("R_DELETE", "ipc"): {"op": "delete", "ipc": "q:1"},
    ("R_DELETE", "socketcall"): {"op": "delete", "ipc": "sock:1"},
    ("R_DELETE", "msgctl"): {"op": "rmid", "ipc": "q:1"},
    ("R_GET_STATUS_DATA", "msgctl"): {"op": "stat", "ipc": "q:1"},
    ("R_GET_STATUS_DATA", "shmctl"): {"op": "stat", "ipc": "q:1"},
    ("R_READ_OPEN", "ipc"): {"op": "read_open", "ipc": "q:1"},
    ("R_READ_OPEN", "open"): {"path": "/f", "flags": "read"},
    ("R_READ_OPEN", "msgrcv"): {"ipc": "q:1"},
    ("R_READ_OPEN", "shmatt"): {"ipc": "q:1", "flags": "ro"},
    ("R_READ_WRITE_OPEN", "ipc"): {"op": "read_write_open", "ipc": "q:1"},
    ("R_READ_WRITE_OPEN", "socketcall"): {"op": "read_write_open",
                                          "ipc": "sock:1"},
    ("R_READ_WRITE_OPEN", "open"): {"path": "/f", "flags": "rdwr"},
    ("R_READ_WRITE_OPEN", "shmatt"): {"ipc": "q:1", "flags": "rw"},
    ("R_TRUNCATE", "open"): {"path": "/f", "flags": "write,trunc"},
    ("R_WRITE_OPEN", "open"): {"path": "/f", "flags": "write"},
}

DEFAULT_EVENT_ARGS = {
    "chown": {"path": "/f", "new_owner": "alice"},
    "fchown": {"path": "/f", "new_owner": "alice"},
    "setuid": {"new_owner": "alice"},
    "setsuid": {"new_owner": "alice"},
    "setreuid": {"new_owner": "alice"},
    "setgid": {"new_group": "g"},
    "setfsuid": {"new_group": "g"},
    "setregid": {"new_group": "g"},
    "setgroups": {"new_group": "g"},
    "fork": {"new_pid": "200"},
    "clone": {"new_pid": "200"},
    "kill": {"pid": "200"},
    "ptrace": {"pid": "200"},
    "exec_ve": {"file": "/bin/sh"},
    "mount": {"dir": "/mnt", "dev": "/dev/sda"},
    "umount": {"dir": "/mnt", "dev": "/dev/sda"},
    "create": {"path": "/new"},
    "mkdir": {"path": "/newdir"},
    "mknod": {"path": "/newdev"},
    "symlink": {"path": "/newlink"},
    "msgget": {"ipc": "q:9"},
    "shmget": {"ipc": "q:9"},
    "rename": {"path": "/f", "newpath": "/g"},
    "rslx_rac_check_app_right": {"right": "approve-invoice"},
    "rslx_get_attr": {},
    "rslx_set_attr": {},
    "truncate": {"path": "/f"},
    "ftruncate": {"path": "/f"},
}
_PATH_ONLY = {"path": "/f"}


def event_for(syscall: str, request: str, seq: int = 1,
              pid: str = "50") -> SyscallEvent:
    args = ROW_EVENT_ARGS.get((request, syscall))
    if args is None:
        args = DEFAULT_EVENT_ARGS.get(syscall, dict(_PATH_ONLY))
    return SyscallEvent(seq=seq, process=pid, name=syscall, args=dict(args))


@pytest.fixture
def sim(boot_store):
    # a parent process so fork/exec/owner events resolve
    boot_store.add_process("50", "alice", {"缺省型"},
                           max_roles={"general"}, exec_file="/bin/sh")
    return Simulator(boot_store)


class TestTableFidelity:
    def test_dump_matches_golden(self):
        assert dump_syscall_table() == golden("syscall_table.golden")

    def test_every_row_reachable(self, sim):
        """For every (request, syscall) pair in the table there is an event
        whose mapping emits exactly that request (plus path-walk SEARCHes)."""
        for request, syscalls in SYSCALL_TABLE:
            if not syscalls:  # kernel-internal SEARCH row
                continue
            for syscall in syscalls:
                event = event_for(syscall, request)
                emitted = [r.request_type
                           for r in sim.map_syscall_event(event)
                           if r.request_type != "R_SEARCH"]
                assert request in emitted, (request, syscall, emitted)

    def test_emissions_stay_inside_the_rows(self, sim):
        """A syscall never emits a request whose table row does not list it
        (SEARCH during path walking and EXECUTE's process leg aside)."""
        rows_for = {}
        for request, syscalls in SYSCALL_TABLE:
            for syscall in syscalls:
                rows_for.setdefault(syscall, set()).add(request)
        for request, syscalls in SYSCALL_TABLE:
            for syscall in syscalls:
                event = event_for(syscall, request)
                for r in sim.map_syscall_event(event):
                    if r.request_type == "R_SEARCH":
                        continue
                    assert r.request_type in rows_for[syscall], \
                        (syscall, r.request_type)

    def test_single_row_syscalls_map_exactly(self, sim):
        """Syscalls appearing in exactly one row emit exactly that row."""
        counts = {}
        for request, syscalls in SYSCALL_TABLE:
            for syscall in syscalls:
                counts[syscall] = counts.get(syscall, 0) + 1
        singles = [s for s, c in counts.items() if c == 1]
        assert "link" in singles and "reboot" in singles
        for request, syscalls in SYSCALL_TABLE:
            for syscall in syscalls:
                if syscall not in singles or syscall == "exec_ve":
                    continue
                event = event_for(syscall, request)
                emitted = [r.request_type
                           for r in sim.map_syscall_event(event)
                           if r.request_type != "R_SEARCH"]
                assert emitted == [request] or (
                    syscall in ("mount", "umount")
                    and set(emitted) == {request}), (syscall, emitted)


class TestSpecificMappings:
    def test_link_maps_to_link_hard(self, sim):
        event = SyscallEvent(1, "50", "link", {"path": "/f"})
        emitted = [r.request_type for r in sim.map_syscall_event(event)
                   if r.request_type != "R_SEARCH"]
        assert emitted == ["R_LINK_HARD"]

    def test_reboot_maps_to_shutdown(self, sim):
        event = SyscallEvent(1, "50", "reboot", {})
        reqs = sim.map_syscall_event(event)
        assert [r.request_type for r in reqs] == ["R_SHUTDOWN"]
        assert reqs[0].target_kind == "T_SCD"

    def test_fork_maps_to_clone(self, sim):
        event = SyscallEvent(1, "50", "fork", {"new_pid": "77"})
        reqs = sim.map_syscall_event(event)
        assert [r.request_type for r in reqs] == ["R_CLONE"]
        assert reqs[0].target == "77"

    def test_rename_fires_both_rows(self, sim):
        event = SyscallEvent(1, "50", "rename",
                             {"path": "/bin/sh", "newpath": "/bin/shh"})
        emitted = [r.request_type for r in sim.map_syscall_event(event)
                   if r.request_type != "R_SEARCH"]
        assert emitted == ["R_RENAME", "R_WRITE"]

    def test_open_write_trunc_decomposition(self, sim):
        event = SyscallEvent(1, "50", "open",
                             {"path": "/bin/sh", "flags": "write,trunc"})
        emitted = [r.request_type for r in sim.map_syscall_event(event)
                   if r.request_type != "R_SEARCH"]
        assert emitted == ["R_WRITE_OPEN", "R_TRUNCATE"]

    def test_open_flag_decomposition_table(self, sim, boot_store):
        """Every flag combination maps to the expected request multiset,
        cross-checked against the table rows listing open()."""
        open_rows = {req for req, syscalls in SYSCALL_TABLE
                     if "open" in syscalls}
        mode_req = {"read": "R_READ_OPEN", "write": "R_WRITE_OPEN",
                    "append": "R_APPEND_OPEN", "rdwr": "R_READ_WRITE_OPEN"}
        for mode, expected_mode in mode_req.items():
            for create in (False, True):
                for trunc in (False, True):
                    flags = [mode] + (["create"] if create else []) \
                        + (["trunc"] if trunc else [])
                    path = "/probe-new" if create else "/bin/sh"
                    event = SyscallEvent(1, "50", "open",
                                         {"path": path,
                                          "flags": ",".join(flags)})
                    emitted = [r.request_type
                               for r in sim.map_syscall_event(event)
                               if r.request_type != "R_SEARCH"]
                    expected = ([("R_CREATE")] if create else []) \
                        + [expected_mode] + (["R_TRUNCATE"] if trunc else [])
                    assert emitted == expected, (flags, emitted)
                    assert set(emitted) <= open_rows

    def test_exec_emits_file_and_process_legs(self, sim):
        event = SyscallEvent(1, "50", "exec_ve", {"file": "/bin/sh"})
        reqs = [r for r in sim.map_syscall_event(event)
                if r.request_type != "R_SEARCH"]
        assert [(r.request_type, r.target_kind) for r in reqs] == \
            [("R_EXECUTE", "T_FILE"), ("R_EXECUTE", "T_PROCESS")]
        assert reqs[1].params["exec_file"] == "/bin/sh"

    def test_search_emitted_per_ancestor(self, sim):
        event = SyscallEvent(1, "50", "open",
                             {"path": "/home/alice/notes", "flags": "read"})
        searches = [r.target for r in sim.map_syscall_event(event)
                    if r.request_type == "R_SEARCH"]
        assert searches == ["/", "/home", "/home/alice"]

    def test_scd_targets(self, sim):
        for syscall, scd in (("stime", "system_clock"),
                             ("sethostname", "host_identity"),
                             ("setrlimit", "resource_limits"),
                             ("swapon", "swap_space"),
                             ("syslog", "kernel_log"),
                             ("ioperm", "io_ports")):
            event = SyscallEvent(1, "50", syscall, {})
            reqs = sim.map_syscall_event(event)
            assert reqs[0].target == scd and reqs[0].target_kind == "T_SCD"

    def test_unmediated_declared(self, sim):
        assert "read" in UNMEDIATED_SYSCALLS
        with pytest.raises(UnmediatedSyscall):
            sim.map_syscall_event(SyscallEvent(1, "50", "read", {"fd": "3"}))

    def test_unknown_syscall(self, sim):
        with pytest.raises(UnknownSyscall):
            sim.map_syscall_event(SyscallEvent(1, "50", "frobnicate", {}))
