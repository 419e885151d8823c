"""Decision matrix: which checks guard each (request, target-kind) pair.

The default matrix ships as data below and can be dumped to (or replaced
from) a structured-text file, one line per request row. Blank cells are
real: by default the engine abstains on them (treats them as no check);
strict mode turns them into denials.

Upper rows carry per-target-kind cells; the lower block is a set of
privilege-check groups that apply regardless of target kind (requests
arriving from the stub policy modules, the audit subsystem and the
application right-check call).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, UnknownRequest, UnknownTargetKind

TARGET_KINDS = ("T_FILE", "T_DIR", "T_DEV", "T_PROCESS", "T_IPC", "T_SCD")

#: object kind -> matrix target kind
KIND_TO_TARGET = {
    "file": "T_FILE",
    "dir": "T_DIR",
    "device": "T_DEV",
    "process": "T_PROCESS",
    "ipc": "T_IPC",
    "scd": "T_SCD",
}

CHECK_TOKENS = ("CR", "CP_sec", "CP_sys", "CP_aud", "CP_app",
                "NOTE_1", "NOTE_2", "NOTE_3", "NOTE_4", "NOTE_5")
POST_TOKENS = ("SR", "ST")

#: the application-level right check arrives under its syscall-table name
REQUEST_ALIASES = {"R_CHECK_APP_RIGHT": "R_APPLICATION"}


@dataclass(frozen=True)
class CheckSpec:
    """Checks and post-access directives for one matrix cell."""

    checks: tuple[str, ...] = ()
    post_actions: tuple[str, ...] = ()
    defined: bool = False

    def dump(self) -> str:
        return "+".join(self.checks + self.post_actions)


_BLANK = CheckSpec()


def _cell(text: str) -> CheckSpec:
    checks = []
    posts = []
    for token in text.split("+"):
        if token in CHECK_TOKENS:
            checks.append(token)
        elif token in POST_TOKENS:
            posts.append(token)
        else:
            raise ValueError(f"unknown cell token {token!r}")
    return CheckSpec(tuple(checks), tuple(posts), defined=True)


# Upper block, one entry per row in table order; missing kinds are blank.
_ROW_DATA: tuple[tuple[str, dict[str, str]], ...] = (
    ("R_ADD_TO_KERNEL", {"T_FILE": "CR"}),
    ("R_ALTER", {"T_IPC": "CR"}),
    ("R_APPEND_OPEN", {"T_FILE": "CR", "T_DEV": "CR", "T_IPC": "CR"}),
    ("R_READ_WRITE_OPEN", {}),
    ("R_CHANGE_GROUP", {"T_FILE": "CR", "T_DIR": "CR", "T_IPC": "CR"}),
    ("R_CHANGE_OWNER", {"T_FILE": "CR", "T_DIR": "CR",
                        "T_PROCESS": "NOTE_1+SR+ST", "T_IPC": "CR"}),
    ("R_CHDIR", {"T_DIR": "CR"}),
    ("R_READ", {}),
    ("R_SEARCH", {}),
    ("R_WRITE", {}),
    ("R_CLONE", {"T_PROCESS": "NOTE_2+SR+ST"}),
    ("R_CREATE", {"T_DIR": "NOTE_3+ST", "T_IPC": "NOTE_4+ST"}),
    ("R_DELETE", {"T_FILE": "CR", "T_DIR": "CR", "T_IPC": "CR"}),
    ("R_EXECUTE", {"T_FILE": "CR", "T_PROCESS": "NOTE_5+SR+ST"}),
    ("R_GET_PERMISSIONS_DATA", {}),
    ("R_GET_STATUS_DATA", {"T_SCD": "CR"}),
    ("R_LINK_HARD", {"T_FILE": "CR"}),
    ("R_TRUNCATE", {}),
    ("R_MODIFY_ACCESS_DATA", {"T_FILE": "CR", "T_DIR": "CR"}),
    ("R_RENAME", {}),
    ("R_MODIFY_ATTRIBUTE", {"T_FILE": "CP_sec"}),
    ("R_MODIFY_PERMISSIONS_DATA", {"T_FILE": "CR", "T_DIR": "CR",
                                   "T_IPC": "CR", "T_SCD": "CR"}),
    ("R_MODIFY_SYSTEM_DATA", {"T_SCD": "CR"}),
    ("R_MOUNT", {"T_DIR": "CR", "T_DEV": "CR"}),
    ("R_READ_ATTRIBUTE", {"T_FILE": "CP_sec"}),
    ("R_READ_OPEN", {"T_FILE": "CR", "T_DIR": "CR", "T_DEV": "CR",
                     "T_IPC": "CR"}),
    ("R_REMOVE_FROM_KERNEL", {}),
    ("R_SEND_SIGNAL", {"T_PROCESS": "CR"}),
    ("R_TRACE", {}),
    ("R_SHUTDOWN", {}),
    ("R_SWITCH_LOG", {}),
    ("R_SWITCH_MODULE", {}),
    ("R_TERMINATE", {"T_PROCESS": "CR"}),
    ("R_WRITE_OPEN", {"T_FILE": "CR", "T_DEV": "CR", "T_IPC": "CR"}),
    ("R_UMOUNT", {"T_DIR": "CR", "T_DEV": "CR"}),
)

# Lower block: privilege-check groups, target-kind independent.
_GROUP_DATA: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("CP_aud", ("R_AUDIT_STOP", "R_AUDIT_SAVE_CONFIG",
                "R_AUDIT_RELOAD_CONFIG", "R_AUDIT_WORK", "R_AUDIT_START")),
    ("CP_sys", ("R_MAC_ADD_TO_KERNEL", "R_MAC_MOUNT", "R_MAC_SHUTDOWN",
                "R_MAC_REMOVE_FROM_KERNEL", "R_MAC_UMOUNT")),
    ("CP_sec", ("R_IAC_MODIFY_ATTRIBUTE", "R_IAC_READ_ATTRIBUTE",
                "R_MAC_GET_STATUS_DATA", "R_MAC_MODIFY_ATTRIBUTE",
                "R_MAC_MODIFY_PERMISSIONS_DATA", "R_MAC_READ_ATTRIBUTE",
                "R_MAC_SWITCH_LOG", "R_MAC_SWITCH_MODULE")),
    ("CP_app", ("R_APPLICATION",)),
)


@dataclass
class DecisionMatrix:
    row_order: list[str] = field(default_factory=list)
    rows: dict[str, dict[str, CheckSpec]] = field(default_factory=dict)
    group_order: list[str] = field(default_factory=list)
    groups: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def group_of(self) -> dict[str, str]:
        return {req: check for check, reqs in self.groups.items() for req in reqs}

    def request_types(self) -> list[str]:
        return self.row_order + [r for g in self.group_order for r in self.groups[g]]

    def normalize(self, request_type: str) -> str:
        return REQUEST_ALIASES.get(request_type, request_type)

    def lookup(self, request_type: str, target_kind: str | None) -> CheckSpec:
        """Pure table lookup; blank cells come back with defined=False."""
        request_type = self.normalize(request_type)
        group_check = self.group_of.get(request_type)
        if group_check is not None:
            if target_kind is not None and target_kind not in TARGET_KINDS:
                raise UnknownTargetKind(f"unknown target kind {target_kind!r}")
            return CheckSpec((group_check,), (), defined=True)
        if request_type not in self.rows:
            raise UnknownRequest(f"request {request_type!r} is not in the matrix")
        if target_kind not in TARGET_KINDS:
            raise UnknownTargetKind(f"unknown target kind {target_kind!r}")
        return self.rows[request_type].get(target_kind, _BLANK)

    def dump(self) -> str:
        """Canonical row-by-row text; the golden transcription uses this."""
        lines = ["matrix"]
        for req in self.row_order:
            cells = self.rows[req]
            parts = [f"{kind}={cells[kind].dump()}"
                     for kind in TARGET_KINDS if kind in cells]
            lines.append(f"{req} " + (" ".join(parts) if parts else "-"))
        for check in self.group_order:
            lines.append(f"group {check} " + " ".join(self.groups[check]))
        return "\n".join(lines) + "\n"


def default_matrix() -> DecisionMatrix:
    matrix = DecisionMatrix()
    for request, cells in _ROW_DATA:
        matrix.row_order.append(request)
        matrix.rows[request] = {kind: _cell(text) for kind, text in cells.items()}
    for check, requests in _GROUP_DATA:
        matrix.group_order.append(check)
        matrix.groups[check] = tuple(requests)
    return matrix


def parse_matrix(text: str, path: str = "<matrix>") -> DecisionMatrix:
    """Parse an override matrix in the dump format above."""
    matrix = DecisionMatrix()
    lines = [(i + 1, raw.strip()) for i, raw in enumerate(text.splitlines())
             if raw.strip() and not raw.strip().startswith("#")]
    if not lines or lines[0][1] != "matrix":
        raise ParseError("matrix file must start with a 'matrix' line",
                         path=path, line=lines[0][0] if lines else 1)
    for lineno, line in lines[1:]:
        fields = line.split()
        if fields[0] == "group":
            if len(fields) < 3:
                raise ParseError("group line needs a check and requests",
                                 path=path, line=lineno)
            check = fields[1]
            if check not in CHECK_TOKENS:
                raise ParseError(f"unknown check {check!r}", path=path, line=lineno)
            if check in matrix.groups:
                raise ParseError(f"duplicate group {check!r}", path=path, line=lineno)
            for req in fields[2:]:
                if req in matrix.group_of or req in matrix.rows:
                    raise ParseError(f"request {req!r} appears twice",
                                     path=path, line=lineno)
            matrix.group_order.append(check)
            matrix.groups[check] = tuple(fields[2:])
            continue
        request = fields[0]
        if request in matrix.rows or request in matrix.group_of:
            raise ParseError(f"duplicate row {request!r}", path=path, line=lineno)
        cells: dict[str, CheckSpec] = {}
        if fields[1:] != ["-"]:
            for part in fields[1:]:
                if "=" not in part:
                    raise ParseError(f"bad cell {part!r}", path=path, line=lineno)
                kind, _, text_cell = part.partition("=")
                if kind not in TARGET_KINDS:
                    raise ParseError(f"unknown target kind {kind!r}",
                                     path=path, line=lineno)
                if kind in cells:
                    raise ParseError(f"duplicate cell {kind!r}", path=path,
                                     line=lineno)
                try:
                    cells[kind] = _cell(text_cell)
                except ValueError as exc:
                    raise ParseError(str(exc), path=path, line=lineno)
        matrix.row_order.append(request)
        matrix.rows[request] = cells
    return matrix
