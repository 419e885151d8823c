"""Simulated enforcement: syscall events in, decisions and state out.

No real syscalls are intercepted; traces are text files of syscall-shaped
events. Each event maps to zero or more access requests (the shipped
request/syscall table below), every request is decided, and only when all
of them allow does the event's state effect run, followed by the SR/ST
post-access directives. A denied event changes nothing.

Trace format: one event per line, ``seq pid syscall key=value ...``.
List-valued args use commas. ``#`` starts a comment.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass, field

from .engine import ALLOW, AccessRequest, AdfEngine, Decision
from .errors import (
    MissingContext,
    NotExecutable,
    OsrError,
    StoreNotEmpty,
    TraceParseError,
    UnknownSyscall,
    UnmediatedSyscall,
)
from .matrix import KIND_TO_TARGET
from .model import GENERAL_ROLE, SECADM, SYSADM, AUDADM, TRUSTED_SYSADM, RoleRecord, drop_redundant_parents
from .registry import (
    AUDIT_TYPE,
    DEFAULT_TYPE,
    ORDINARY_CATEGORIES,
    SECURITY_TYPE,
)
from .store import AciStore, ObjectAci

# --- the request/syscall table (one row per ADF request) -------------------

SYSCALL_TABLE: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("R_ADD_TO_KERNEL", ("create_module", "init_module")),
    ("R_ALTER", ("ipc", "msgctl", "shmctl")),
    ("R_APPEND_OPEN", ("open", "msgsnd")),
    ("R_CHANGE_GROUP", ("chgrp", "fchgrp", "setgid", "setfsuid",
                        "setregid", "setgroups")),
    ("R_CHANGE_OWNER", ("chown", "fchown", "setuid", "setsuid", "setreuid")),
    ("R_CHDIR", ("chdir", "fchdir")),
    ("R_CLONE", ("fork", "clone")),
    ("R_CREATE", ("create", "ipc", "socketcall", "mkdir", "mknod",
                  "symlink", "open", "msgget", "shmget")),
    ("R_DELETE", ("ipc", "socketcall", "rmdir", "unlink", "msgctl")),
    ("R_EXECUTE", ("exec_ve",)),
    ("R_GET_PERMISSIONS_DATA", ("access",)),
    ("R_GET_STATUS_DATA", ("stat", "fstat", "lstat", "new_stat", "new_fstat",
                           "new_lstat", "statfs", "fstatfs", "msgctl",
                           "shmctl")),
    ("R_LINK_HARD", ("link",)),
    ("R_MODIFY_ACCESS_DATA", ("utime",)),
    ("R_MODIFY_ATTRIBUTE", ("rslx_set_attr",)),
    ("R_MODIFY_PERMISSIONS_DATA", ("chmod", "fchmod", "ioperm", "iopl")),
    ("R_MODIFY_SYSTEM_DATA", ("adjtimes", "stime", "settimeofday",
                              "sethostname", "setdomainname", "setrlimit",
                              "swapon", "swapoff", "syslog")),
    ("R_MOUNT", ("mount",)),
    ("R_READ", ("readdir", "readlink", "getdent")),
    ("R_READ_ATTRIBUTE", ("rslx_get_attr",)),
    ("R_READ_OPEN", ("ipc", "open", "msgrcv", "shmatt")),
    ("R_READ_WRITE_OPEN", ("ipc", "socketcall", "open", "shmatt")),
    ("R_REMOVE_FROM_KERNEL", ("delete_module",)),
    ("R_RENAME", ("rename",)),
    ("R_SEARCH", ()),  # kernel-internal: emitted during path resolution
    ("R_SEND_SIGNAL", ("kill",)),
    ("R_SHUTDOWN", ("reboot",)),
    ("R_SWITCH_LOG", ("rslx_adf_log_switch",)),
    ("R_SWITCH_MODULE", ("rslx_switch",)),
    ("R_TERMINATE", ("exit",)),
    ("R_TRACE", ("ptrace",)),
    ("R_TRUNCATE", ("open", "truncate", "ftruncate")),
    ("R_UMOUNT", ("umount",)),
    ("R_WRITE", ("rename",)),
    ("R_WRITE_OPEN", ("open",)),
    ("R_CHECK_APP_RIGHT", ("rslx_rac_check_app_right",)),
)

#: declared pass-through: no mediation, by design
UNMEDIATED_SYSCALLS = frozenset({
    "read", "write", "close", "lseek", "dup", "dup2", "pipe", "brk", "mmap",
    "munmap", "getpid", "getppid", "getuid", "getgid", "wait", "wait4",
    "waitpid", "nanosleep", "pause", "time", "getcwd", "umask", "sync",
    "fsync", "select", "poll", "sigaction", "signal", "sigreturn",
})

#: artifact extension: inject a raw ADF request from a trace
RAW_REQUEST_EVENT = "adf_request"

_SCD_BY_SYSCALL = {
    "adjtimes": "system_clock",
    "stime": "system_clock",
    "settimeofday": "system_clock",
    "sethostname": "host_identity",
    "setdomainname": "host_identity",
    "setrlimit": "resource_limits",
    "swapon": "swap_space",
    "swapoff": "swap_space",
    "syslog": "kernel_log",
    "ioperm": "io_ports",
    "iopl": "io_ports",
    "reboot": "system_state",
}

KNOWN_SYSCALLS = frozenset(
    name for _, names in SYSCALL_TABLE for name in names) | {RAW_REQUEST_EVENT}


def dump_syscall_table() -> str:
    """Row-by-row text of the request/syscall table (golden-test food)."""
    lines = []
    for request, names in SYSCALL_TABLE:
        lines.append(f"{request} " + (" ".join(names) or "kernel-internal"))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SyscallEvent:
    seq: int
    process: str
    name: str
    args: dict[str, str] = field(default_factory=dict)

    def arg(self, key: str) -> str | None:
        return self.args.get(key)

    def arg_list(self, key: str) -> list[str]:
        raw = self.args.get(key)
        return raw.split(",") if raw else []


@dataclass
class AuditRecord:
    seq: int
    process: str
    syscall: str
    args: dict[str, str]
    requests: list[AccessRequest]
    decisions: list[Decision]
    verdict: str  # allow | deny | pass | error
    reason: str | None = None
    changes: list[str] = field(default_factory=list)

    def render(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in sorted(self.args.items())) or "-"
        reqs = ",".join(
            f"{r.request_type}@{r.target if r.target is not None else '-'}"
            f":{d.verdict}"
            for r, d in zip(self.requests, self.decisions)) or "-"
        changes = ";".join(self.changes) or "-"
        return (f"seq={self.seq} pid={self.process} syscall={self.syscall}"
                f" args={args} verdict={self.verdict}"
                f" reason={self.reason or '-'} requests={reqs}"
                f" changes={changes}")


def render_audit_log(records: list[AuditRecord]) -> str:
    return "\n".join(r.render() for r in records) + ("\n" if records else "")


# --- trace parsing ----------------------------------------------------------

def parse_trace(text: str, path: str = "<trace>") -> list[SyscallEvent]:
    events: list[SyscallEvent] = []
    last_seq = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 3:
            raise TraceParseError("event needs seq, pid and syscall",
                                  path=path, line=lineno)
        if not fields[0].isdigit():
            raise TraceParseError(f"bad seq {fields[0]!r}", path=path, line=lineno)
        seq = int(fields[0])
        if seq <= last_seq:
            raise TraceParseError(
                f"seq {seq} not strictly increasing", path=path, line=lineno)
        last_seq = seq
        args: dict[str, str] = {}
        for part in fields[3:]:
            if "=" not in part:
                raise TraceParseError(f"bad arg {part!r} (need key=value)",
                                      path=path, line=lineno)
            key, _, value = part.partition("=")
            if key in args:
                raise TraceParseError(f"duplicate arg {key!r}", path=path,
                                      line=lineno)
            args[key] = value
        events.append(SyscallEvent(seq=seq, process=fields[1],
                                   name=fields[2], args=args))
    return events


# --- default system state ----------------------------------------------------

#: display names of the built-in roles
BUILTIN_ROLE_NAMES = {
    TRUSTED_SYSADM: "可信系统管理员",
    SYSADM: "系统管理员",
    SECADM: "安全管理员",
    AUDADM: "安全审计员",
    GENERAL_ROLE: "通用角色",
}

INIT_PID = "1"
ROOT_USER = "root"
DEMO_USER = "alice"


def _full_ordinary(store: AciStore, types) -> dict:
    reg = store.registry
    out: dict[str, dict] = {}
    for cat in ORDINARY_CATEGORIES:
        tokens = reg.scd_types if cat == "scd" else types
        out[cat] = {t: reg.ones(cat) for t in tokens}
    return out


def bootstrap_default_state(store: AciStore | None = None) -> AciStore:
    """Create the default system state in an empty store.

    Three object types, the four privileged roles (permissions immutable),
    the general role with full ordinary rights on default-typed objects
    only, the three-way static conflict among the admin roles, plus the
    init process, two seed users and a small filesystem for the boot trace.
    """
    store = store if store is not None else AciStore()
    if (store.role_ids() or store.user_ids() or store.process_ids()
            or store.object_ids() or store.generation > 0):
        raise StoreNotEmpty("bootstrap requires an empty store")
    reg = store.registry

    store.add_role(RoleRecord(
        role_id=TRUSTED_SYSADM, name=BUILTIN_ROLE_NAMES[TRUSTED_SYSADM],
        ordinary=_full_ordinary(store, reg.types),
        privileges={c: reg.ones(c) for c in ("secadm", "sysadm", "audadm", "app")},
        mutable_permissions=False, user_assignable=False))
    store.add_role(RoleRecord(
        role_id=SYSADM, name=BUILTIN_ROLE_NAMES[SYSADM],
        privileges={"sysadm": reg.ones("sysadm")},
        mutable_permissions=False))
    store.add_role(RoleRecord(
        role_id=SECADM, name=BUILTIN_ROLE_NAMES[SECADM],
        ordinary=_full_ordinary(store, (SECURITY_TYPE,)),
        privileges={"secadm": reg.ones("secadm")},
        mutable_permissions=False))
    store.add_role(RoleRecord(
        role_id=AUDADM, name=BUILTIN_ROLE_NAMES[AUDADM],
        ordinary=_full_ordinary(store, (AUDIT_TYPE,)),
        privileges={"audadm": reg.ones("audadm")},
        mutable_permissions=False))
    store.add_role(RoleRecord(
        role_id=GENERAL_ROLE, name=BUILTIN_ROLE_NAMES[GENERAL_ROLE],
        ordinary=_full_ordinary(store, (DEFAULT_TYPE,))))

    # the three admin roles must never be co-assigned
    store.set_conflicts(SYSADM, "static", {SECADM, AUDADM})
    store.set_conflicts(SECADM, "static", {SYSADM, AUDADM})

    store.add_user(ROOT_USER, max_roles={SYSADM})
    store.add_user(DEMO_USER, max_roles={GENERAL_ROLE})

    for path in ("/", "/bin", "/etc", "/home", "/home/alice", "/var"):
        store.add_object(path, "dir", {DEFAULT_TYPE})
    store.add_object("/etc/aci", "dir", {SECURITY_TYPE})
    store.add_object("/var/audit", "dir", {AUDIT_TYPE})
    for path in ("/bin/login", "/bin/sh", "/bin/edit"):
        store.add_object(path, "file", {DEFAULT_TYPE}, executable=True)
    store.add_object("/dev/tty0", "device", {DEFAULT_TYPE})

    # the kernel grants the trusted role to the initial system process only
    store.add_process(INIT_PID, owner_user=ROOT_USER, rac_types={DEFAULT_TYPE},
                      max_roles={TRUSTED_SYSADM}, system_grant=True)
    return store


def ensure_init_process(store: AciStore) -> None:
    """Recreate the init process after a load.

    Processes are never persisted, so loading a store is a boot: the kernel
    hands the trusted role to the initial system process again. A store
    without users (or roles) stays as it is.
    """
    if store.has_process(INIT_PID):
        return
    if store.has_user(ROOT_USER):
        owner = ROOT_USER
    elif store.user_ids():
        owner = store.user_ids()[0]
    else:
        return
    roles = {TRUSTED_SYSADM} if store.has_role(TRUSTED_SYSADM) else set()
    types = {DEFAULT_TYPE} if store.registry.is_object_type(DEFAULT_TYPE) \
        else {store.registry.types[0]} if store.registry.types else set()
    if not types:
        return
    store.add_process(INIT_PID, owner_user=owner, rac_types=types,
                      max_roles=roles, system_grant=True)


def materialize_cli_caller(store: AciStore, spec: str) -> str:
    """Resolve a ``--as`` argument to a live process id.

    ``user:NAME`` creates an ephemeral process carrying NAME's active roles
    (what exec'ing an admin command from that user's session would derive);
    a plain token must name an existing process.
    """
    if not spec.startswith("user:"):
        return spec
    user_id = spec.removeprefix("user:")
    user = store.user(user_id)
    pid = f"cli:{user_id}"
    if not store.has_process(pid):
        store.add_process(pid, owner_user=user_id,
                          rac_types={user.default_object_type},
                          max_roles=user.active_roles)
    return pid


# --- derivations (§ new-object / new-role rules) ------------------------------

def derive_new_object_types(store: AciStore, kind: str, context: dict) -> set[str]:
    """Type list for a new object: an explicit request wins, else files,
    dirs and devices inherit the parent directory, IPC inherits the
    creating process, and processes take the owner's override or the
    parent's types.
    """
    explicit = context.get("types")
    if explicit:
        return set(explicit)
    if kind in ("file", "dir", "device"):
        parent = context.get("parent_dir")
        if parent is None or not store.has_object(parent):
            raise MissingContext(f"new {kind} needs its parent directory")
        return set(store.object(parent).rac_types)
    if kind == "ipc":
        pid = context.get("process")
        if pid is None or not store.has_process(pid):
            raise MissingContext("new ipc object needs its creating process")
        return set(store.process(pid).rac_types)
    if kind == "process":
        owner = context.get("owner")
        if owner is not None and store.has_user(owner):
            override = store.user(owner).proc_type_override
            if override:
                return set(override)
        parent = context.get("parent")
        if parent is None or not store.has_process(parent):
            raise MissingContext("new process needs its parent process")
        return set(store.process(parent).rac_types)
    raise MissingContext(f"unknown object kind {kind!r}")


def derive_exec_roles(store: AciStore, user_id: str, exec_file_id: str) -> set[str]:
    """Union of the executable's roles and the user's active roles, with
    redundant parents dropped."""
    obj = store.object(exec_file_id)
    if obj.kind != "file" or not obj.executable:
        raise NotExecutable(f"object {exec_file_id!r} is not an executable file")
    user = store.user(user_id)
    roles = {rid: store.role(rid) for rid in store.role_ids()}
    return drop_redundant_parents(roles, obj.exec_file_roles | user.active_roles)


# --- the simulator -------------------------------------------------------------

def _ancestors(path: str) -> list[str]:
    """Proper ancestor directories of an absolute path, root first."""
    if not path.startswith("/") or path == "/":
        return []
    parts = [p for p in path.split("/") if p]
    out = ["/"]
    cur = ""
    for part in parts[:-1]:
        cur += "/" + part
        out.append(cur)
    return out


class Simulator:
    """Folds syscall events over a store through the decision engine."""

    def __init__(self, store: AciStore, engine: AdfEngine | None = None):
        self.store = store
        self.engine = engine if engine is not None else AdfEngine(store)
        if self.engine.log is not None and store.audit is None:
            store.audit = self.engine.log

    # -- event -> requests -------------------------------------------------

    def map_syscall_event(self, event: SyscallEvent) -> list[AccessRequest]:
        """Deterministic event-to-requests mapping per the shipped table."""
        name = event.name
        if name in UNMEDIATED_SYSCALLS:
            raise UnmediatedSyscall(f"syscall {name!r} is declared pass-through")
        if name not in KNOWN_SYSCALLS:
            raise UnknownSyscall(f"unknown syscall {name!r}")
        handler = getattr(self, "_map_" + name, None)
        if handler is None:
            raise UnknownSyscall(f"no mapping for syscall {name!r}")
        requests: list[AccessRequest] = []
        for path_arg in ("path", "file", "newpath", "dir", "dev"):
            value = event.arg(path_arg)
            if value and value.startswith("/"):
                for ancestor in _ancestors(value):
                    requests.append(AccessRequest(
                        "R_SEARCH", event.process, ancestor, "T_DIR"))
        requests.extend(handler(event))
        return requests

    def _req(self, event: SyscallEvent, request_type: str, target: str | None,
             kind: str | None, **params) -> AccessRequest:
        return AccessRequest(request_type, event.process, target, kind,
                             {k: v for k, v in params.items() if v is not None})

    def _path_kind(self, path: str, default: str = "T_FILE") -> str:
        if self.store.has_object(path):
            return KIND_TO_TARGET[self.store.object(path).kind]
        return default

    def _path_req(self, event: SyscallEvent, request_type: str,
                  default_kind: str = "T_FILE") -> list[AccessRequest]:
        path = event.arg("path")
        if path is None:
            raise MissingContext(f"{event.name} needs a path argument")
        if event.arg("scd"):
            return [self._req(event, request_type, event.arg("scd"), "T_SCD")]
        return [self._req(event, request_type, path,
                          self._path_kind(path, default_kind))]

    # file/dir/device targets
    def _map_readdir(self, e):
        return self._path_req(e, "R_READ", "T_DIR")

    def _map_getdent(self, e):
        return self._path_req(e, "R_READ", "T_DIR")

    def _map_readlink(self, e):
        return self._path_req(e, "R_READ")

    def _map_access(self, e):
        return self._path_req(e, "R_GET_PERMISSIONS_DATA")

    def _map_stat(self, e):
        return self._path_req(e, "R_GET_STATUS_DATA")

    _map_fstat = _map_lstat = _map_new_stat = _map_new_fstat = _map_new_lstat = _map_stat
    _map_statfs = _map_fstatfs = _map_stat

    def _map_utime(self, e):
        return self._path_req(e, "R_MODIFY_ACCESS_DATA")

    def _map_chmod(self, e):
        return self._path_req(e, "R_MODIFY_PERMISSIONS_DATA")

    _map_fchmod = _map_chmod

    def _map_ioperm(self, e):
        return [self._req(e, "R_MODIFY_PERMISSIONS_DATA",
                          _SCD_BY_SYSCALL[e.name], "T_SCD")]

    _map_iopl = _map_ioperm

    def _map_chown(self, e):
        reqs = self._path_req(e, "R_CHANGE_OWNER")
        return [self._req(e, r.request_type, r.target, r.target_kind,
                          new_owner=e.arg("new_owner")) for r in reqs]

    _map_fchown = _map_chown

    def _map_chgrp(self, e):
        return self._path_req(e, "R_CHANGE_GROUP")

    _map_fchgrp = _map_chgrp

    def _map_setuid(self, e):
        return [self._req(e, "R_CHANGE_OWNER", e.process, "T_PROCESS",
                          new_owner=e.arg("new_owner"))]

    _map_setsuid = _map_setreuid = _map_setuid

    def _map_setgid(self, e):
        return [self._req(e, "R_CHANGE_GROUP", e.process, "T_PROCESS",
                          new_group=e.arg("new_group"))]

    _map_setfsuid = _map_setregid = _map_setgroups = _map_setgid

    def _map_chdir(self, e):
        return self._path_req(e, "R_CHDIR", "T_DIR")

    _map_fchdir = _map_chdir

    def _map_link(self, e):
        return self._path_req(e, "R_LINK_HARD")

    def _map_unlink(self, e):
        return self._path_req(e, "R_DELETE")

    def _map_rmdir(self, e):
        return self._path_req(e, "R_DELETE", "T_DIR")

    def _map_rename(self, e):
        # two table rows: RENAME and WRITE both fire for rename()
        return (self._path_req(e, "R_RENAME")
                + self._path_req(e, "R_WRITE"))

    def _map_truncate(self, e):
        return self._path_req(e, "R_TRUNCATE")

    _map_ftruncate = _map_truncate

    def _map_create_module(self, e):
        return self._path_req(e, "R_ADD_TO_KERNEL")

    _map_init_module = _map_create_module

    def _map_delete_module(self, e):
        return self._path_req(e, "R_REMOVE_FROM_KERNEL")

    def _map_mount(self, e):
        return self._mount_like(e, "R_MOUNT")

    def _map_umount(self, e):
        return self._mount_like(e, "R_UMOUNT")

    def _mount_like(self, e, request_type):
        reqs = []
        if e.arg("dir"):
            reqs.append(self._req(e, request_type, e.arg("dir"), "T_DIR"))
        if e.arg("dev"):
            reqs.append(self._req(e, request_type, e.arg("dev"), "T_DEV"))
        if not reqs:
            raise MissingContext(f"{e.name} needs a dir or dev argument")
        return reqs

    # open and friends
    _OPEN_MODES = ("rdwr", "append", "write", "read")
    _OPEN_REQUESTS = {"rdwr": "R_READ_WRITE_OPEN", "append": "R_APPEND_OPEN",
                      "write": "R_WRITE_OPEN", "read": "R_READ_OPEN"}

    def _map_open(self, e):
        path = e.arg("path")
        if path is None:
            raise MissingContext("open needs a path argument")
        flags = set(e.arg_list("flags")) or {"read"}
        unknown = flags - {"read", "write", "rdwr", "append", "create", "trunc"}
        if unknown:
            raise MissingContext(f"unknown open flags {sorted(unknown)}")
        reqs = []
        creating = "create" in flags and not self.store.has_object(path)
        prospective = None
        if creating:
            parent = posixpath.dirname(path) or "/"
            new_types = sorted(derive_new_object_types(
                self.store, "file",
                {"parent_dir": parent, "types": e.arg_list("types")}))
            prospective = new_types
            reqs.append(self._req(e, "R_CREATE", parent, "T_DIR",
                                  new_types=new_types))
        mode = next((m for m in self._OPEN_MODES if m in flags), None)
        kind = self._path_kind(path)
        if mode:
            reqs.append(self._req(e, self._OPEN_REQUESTS[mode], path, kind,
                                  prospective_types=prospective))
        if "trunc" in flags:
            reqs.append(self._req(e, "R_TRUNCATE", path, kind,
                                  prospective_types=prospective))
        return reqs

    def _map_create(self, e):
        path = e.arg("path")
        if path is None:
            raise MissingContext("create needs a path argument")
        parent = posixpath.dirname(path) or "/"
        new_types = sorted(derive_new_object_types(
            self.store, "file", {"parent_dir": parent, "types": e.arg_list("types")}))
        return [self._req(e, "R_CREATE", parent, "T_DIR", new_types=new_types)]

    def _map_mkdir(self, e):
        return self._create_fs(e, "dir")

    def _map_mknod(self, e):
        return self._create_fs(e, e.arg("kind") or "device")

    def _map_symlink(self, e):
        return self._create_fs(e, "file")

    def _create_fs(self, e, kind):
        path = e.arg("path")
        if path is None:
            raise MissingContext(f"{e.name} needs a path argument")
        parent = posixpath.dirname(path) or "/"
        new_types = sorted(derive_new_object_types(
            self.store, kind, {"parent_dir": parent, "types": e.arg_list("types")}))
        return [self._req(e, "R_CREATE", parent, "T_DIR", new_types=new_types)]

    # IPC
    def _ipc_target(self, e) -> str:
        ipc = e.arg("ipc")
        if ipc is None:
            raise MissingContext(f"{e.name} needs an ipc argument")
        return ipc

    def _ipc_create(self, e):
        new_types = sorted(derive_new_object_types(
            self.store, "ipc",
            {"process": e.process, "types": e.arg_list("types")}))
        return [self._req(e, "R_CREATE", self._ipc_target(e), "T_IPC",
                          new_types=new_types, prospective_types=new_types)]

    def _map_msgget(self, e):
        return self._ipc_create(e)

    _map_shmget = _map_msgget

    def _map_msgsnd(self, e):
        return [self._req(e, "R_APPEND_OPEN", self._ipc_target(e), "T_IPC")]

    def _map_msgrcv(self, e):
        return [self._req(e, "R_READ_OPEN", self._ipc_target(e), "T_IPC")]

    def _map_shmatt(self, e):
        request = ("R_READ_OPEN" if e.arg("flags") == "ro"
                   else "R_READ_WRITE_OPEN")
        return [self._req(e, request, self._ipc_target(e), "T_IPC")]

    _CTL_OPS = {"set": "R_ALTER", "rmid": "R_DELETE", "stat": "R_GET_STATUS_DATA"}

    def _map_msgctl(self, e):
        op = e.arg("op")
        if op not in self._CTL_OPS:
            raise MissingContext(f"{e.name} needs op=set|rmid|stat")
        return [self._req(e, self._CTL_OPS[op], self._ipc_target(e), "T_IPC")]

    def _map_shmctl(self, e):
        op = e.arg("op")
        if op not in ("set", "stat"):
            raise MissingContext("shmctl needs op=set|stat")
        return [self._req(e, self._CTL_OPS[op], self._ipc_target(e), "T_IPC")]

    _MUX_OPS = {"create": None, "delete": "R_DELETE", "alter": "R_ALTER",
                "read_open": "R_READ_OPEN", "read_write_open": "R_READ_WRITE_OPEN"}

    def _map_ipc(self, e):
        op = e.arg("op")
        if op not in self._MUX_OPS:
            raise MissingContext("ipc needs op=create|delete|alter|read_open|"
                                 "read_write_open")
        if op == "create":
            return self._ipc_create(e)
        return [self._req(e, self._MUX_OPS[op], self._ipc_target(e), "T_IPC")]

    def _map_socketcall(self, e):
        op = e.arg("op")
        if op not in ("create", "delete", "read_write_open"):
            raise MissingContext("socketcall needs op=create|delete|read_write_open")
        if op == "create":
            return self._ipc_create(e)
        return [self._req(e, self._MUX_OPS[op], self._ipc_target(e), "T_IPC")]

    # processes
    def _map_fork(self, e):
        child = e.arg("new_pid")
        if child is None:
            raise MissingContext("fork needs a new_pid argument")
        parent = self.store.process(e.process) if self.store.has_process(e.process) else None
        ctx = {"parent": e.process,
               "owner": parent.owner_user if parent else None,
               "types": e.arg_list("types")}
        try:
            new_types = sorted(derive_new_object_types(self.store, "process", ctx))
        except MissingContext:
            new_types = []
        return [self._req(e, "R_CLONE", child, "T_PROCESS",
                          new_types=new_types or None,
                          prospective_types=new_types or None)]

    _map_clone = _map_fork

    def _map_kill(self, e):
        pid = e.arg("pid")
        if pid is None:
            raise MissingContext("kill needs a pid argument")
        return [self._req(e, "R_SEND_SIGNAL", pid, "T_PROCESS")]

    def _map_ptrace(self, e):
        pid = e.arg("pid")
        if pid is None:
            raise MissingContext("ptrace needs a pid argument")
        return [self._req(e, "R_TRACE", pid, "T_PROCESS")]

    def _map_exit(self, e):
        return [self._req(e, "R_TERMINATE", e.process, "T_PROCESS")]

    def _map_exec_ve(self, e):
        exec_file = e.arg("file")
        if exec_file is None:
            raise MissingContext("exec_ve needs a file argument")
        return [
            self._req(e, "R_EXECUTE", exec_file, "T_FILE"),
            self._req(e, "R_EXECUTE", e.process, "T_PROCESS",
                      exec_file=exec_file),
        ]

    # SCD operations
    def _map_stime(self, e):
        return [self._req(e, "R_MODIFY_SYSTEM_DATA",
                          _SCD_BY_SYSCALL[e.name], "T_SCD")]

    _map_adjtimes = _map_settimeofday = _map_stime
    _map_sethostname = _map_setdomainname = _map_stime
    _map_setrlimit = _map_swapon = _map_swapoff = _map_syslog = _map_stime

    def _map_reboot(self, e):
        return [self._req(e, "R_SHUTDOWN", "system_state", "T_SCD")]

    # administration syscalls
    def _map_rslx_get_attr(self, e):
        return [self._req(e, "R_READ_ATTRIBUTE", e.arg("path"), "T_FILE")]

    def _map_rslx_set_attr(self, e):
        return [self._req(e, "R_MODIFY_ATTRIBUTE", e.arg("path"), "T_FILE")]

    def _map_rslx_adf_log_switch(self, e):
        return [self._req(e, "R_SWITCH_LOG", "system_state", "T_SCD")]

    def _map_rslx_switch(self, e):
        return [self._req(e, "R_SWITCH_MODULE", "system_state", "T_SCD")]

    def _map_rslx_rac_check_app_right(self, e):
        return [self._req(e, "R_CHECK_APP_RIGHT", None, None,
                          app_bit=e.arg("right"))]

    def _map_adf_request(self, e):
        request = e.arg("request")
        if request is None:
            raise MissingContext("adf_request needs a request argument")
        target = e.arg("path") or e.arg("pid") or e.arg("scd") or e.arg("ipc")
        kind = e.arg("kind")
        if kind is None and e.arg("scd"):
            kind = "T_SCD"
        elif kind is None and e.arg("pid"):
            kind = "T_PROCESS"
        elif kind is None and e.arg("ipc"):
            kind = "T_IPC"
        elif kind is None and e.arg("path"):
            kind = self._path_kind(e.arg("path"))
        return [self._req(e, request, target, kind, app_bit=e.arg("right"))]

    # -- applying events ------------------------------------------------------

    def apply_event(self, event: SyscallEvent) -> AuditRecord:
        """Decide an event's requests and, if all allow, apply its effect
        plus the SR/ST directives. Errors never escape: they become audit
        entries and leave the state untouched.
        """
        try:
            requests = self.map_syscall_event(event)
        except UnmediatedSyscall:
            return AuditRecord(event.seq, event.process, event.name,
                               dict(event.args), [], [], "pass")
        except OsrError as exc:
            return AuditRecord(event.seq, event.process, event.name,
                               dict(event.args), [], [], "error",
                               reason=exc.token)

        decisions: list[Decision] = []
        verdict = ALLOW
        reason = None
        for request in requests:
            try:
                decision = self.engine.decide(request)
            except OsrError as exc:
                return AuditRecord(event.seq, event.process, event.name,
                                   dict(event.args), requests, decisions,
                                   "error", reason=exc.token)
            decisions.append(decision)
            if not decision.allowed:
                verdict, reason = "deny", decision.reason
        if verdict != ALLOW:
            return AuditRecord(event.seq, event.process, event.name,
                               dict(event.args), requests, decisions,
                               "deny", reason=reason)

        try:
            changes = self._apply_effect(event, requests)
        except OsrError as exc:
            return AuditRecord(event.seq, event.process, event.name,
                               dict(event.args), requests, decisions,
                               "error", reason=exc.token)
        return AuditRecord(event.seq, event.process, event.name,
                           dict(event.args), requests, decisions,
                           ALLOW, changes=changes)

    def replay_trace(self, events: list[SyscallEvent]) -> list[AuditRecord]:
        return [self.apply_event(event) for event in events]

    # -- state effects -----------------------------------------------------------

    def _device_of(self, path: str) -> str:
        parent = posixpath.dirname(path) or "/"
        if self.store.has_object(parent):
            return self.store.object(parent).device_id
        return "dev0"

    def _sr_roles(self, pid: str, owner_id: str) -> set[str]:
        """SR: re-derive the process role sets from owner and exec file."""
        proc = self.store.process(pid)
        if proc.exec_file and self.store.has_object(proc.exec_file):
            obj = self.store.object(proc.exec_file)
            if obj.kind == "file" and obj.executable:
                return derive_exec_roles(self.store, owner_id, proc.exec_file)
        user = self.store.user(owner_id)
        roles = {rid: self.store.role(rid) for rid in self.store.role_ids()}
        return drop_redundant_parents(roles, set(user.active_roles))

    def _st_types(self, pid: str) -> set[str] | None:
        """ST: re-derive the process type list (exec image, else parent)."""
        proc = self.store.process(pid)
        if proc.exec_file and self.store.has_object(proc.exec_file):
            types = self.store.object(proc.exec_file).rac_types
            if types:
                return set(types)
        if proc.parent and self.store.has_process(proc.parent):
            return set(self.store.process(proc.parent).rac_types)
        return None

    def _apply_effect(self, event: SyscallEvent,
                      requests: list[AccessRequest]) -> list[str]:
        name = event.name
        changes: list[str] = []

        if name == "open":
            for request in requests:
                if request.request_type == "R_CREATE":
                    path = event.arg("path")
                    self.store.add_object(
                        path, "file", request.params["new_types"],
                        device_id=self._device_of(path))
                    changes.append(f"create:{path}")
        elif name in ("create", "symlink", "mkdir", "mknod"):
            path = event.arg("path")
            kind = {"create": "file", "symlink": "file", "mkdir": "dir"}.get(
                name, event.arg("kind") or "device")
            self.store.add_object(path, kind, requests[-1].params["new_types"],
                                  device_id=self._device_of(path))
            changes.append(f"create:{path}")
        elif name in ("msgget", "shmget") or (
                name in ("ipc", "socketcall") and event.arg("op") == "create"):
            ipc = event.arg("ipc")
            self.store.add_object(ipc, "ipc", requests[-1].params["new_types"],
                                  device_id="ipc")
            changes.append(f"create:{ipc}")
        elif name in ("unlink", "rmdir"):
            path = event.arg("path")
            self.store.remove_object(path)
            changes.append(f"delete:{path}")
        elif name == "msgctl" and event.arg("op") == "rmid":
            self.store.remove_object(event.arg("ipc"))
            changes.append(f"delete:{event.arg('ipc')}")
        elif name in ("ipc", "socketcall") and event.arg("op") == "delete":
            self.store.remove_object(event.arg("ipc"))
            changes.append(f"delete:{event.arg('ipc')}")
        elif name == "rename" and event.arg("newpath"):
            self.store.rename_object(event.arg("path"), event.arg("newpath"))
            changes.append(f"rename:{event.arg('path')}->{event.arg('newpath')}")
        elif name in ("fork", "clone"):
            child = event.arg("new_pid")
            parent = self.store.process(event.process)
            # the role sets are inherited from the parent at creation time;
            # SR/ST re-derive to the same values for a fresh child
            self.store.add_process(
                child, owner_user=parent.owner_user,
                rac_types=requests[-1].params.get("new_types")
                or parent.rac_types,
                max_roles=parent.max_roles, active_roles=parent.active_roles,
                exec_file=parent.exec_file, parent=event.process,
                system_grant=True)
            changes.append(f"fork:{child}")
        elif name == "exec_ve":
            exec_file = event.arg("file")
            proc = self.store.process(event.process)
            new_roles = derive_exec_roles(self.store, proc.owner_user, exec_file)
            new_types = self.store.object(exec_file).rac_types or proc.rac_types
            self.store.update_process(
                event.process, exec_file=exec_file, max_roles=new_roles,
                active_roles=new_roles, rac_types=new_types)
            changes.append(f"exec:{event.process}:roles={'+'.join(sorted(new_roles))}")
        elif name in ("setuid", "setsuid", "setreuid"):
            new_owner = event.arg("new_owner")
            pid = event.process
            new_roles = self._sr_roles(pid, new_owner)
            new_types = self._st_types(pid)
            kwargs = {"owner_user": new_owner, "max_roles": new_roles,
                      "active_roles": new_roles}
            if new_types is not None:
                kwargs["rac_types"] = new_types
            self.store.update_process(pid, **kwargs)
            changes.append(f"chown:{pid}:{new_owner}")
        elif name == "exit":
            self.store.remove_process(event.process)
            changes.append(f"terminate:{event.process}")
        elif name == "rslx_set_attr":
            entity = event.arg("entity") or ""
            klass, _, entity_id = entity.partition(":")
            attr = event.arg("attr")
            value = event.arg_list("value")
            if not klass or not entity_id or not attr:
                raise MissingContext(
                    "rslx_set_attr needs entity=<class>:<id> attr= value=")
            self.store.set_attr(klass, entity_id, attr, value)
            changes.append(f"set_attr:{entity}:{attr}")
        return changes
