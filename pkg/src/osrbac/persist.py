"""On-disk store: manifest plus one line-oriented file per entity class.

Layout (all UTF-8, field-by-field reference in docs/store-format.md):

    manifest       format version, generation, per-file sha256 checksums
    roles.aci      rights registry sections followed by role records
    users.aci      user records
    objects.aci    file/dir/device records grouped by storage device

Processes and IPC objects are never persisted. The manifest is the commit
point: a directory without one is an empty store. Flushing stages every
file, hard-links the current ones to ``*.bak``, then replaces; load falls
back to the backup set when checksums fail, so an interruption at any step
leaves a loadable store (either the old or the complete new state).
Kernel-grade directory protection is out of reach in userspace; 0700/0600
modes plus the verified checksums stand in for it.
"""

from __future__ import annotations

import hashlib
import os
import threading
from pathlib import Path
from typing import Callable, Iterable

from .bits import BitVector
from .errors import InvariantViolation, IoFailure, NotInMaxRoles, OsrError, ParseError
from .model import (
    ProcessAci,
    RoleRecord,
    UserAci,
    check_activation,
    check_assignment,
    validate_role_table,
)
from .registry import ALL_CATEGORIES, ORDINARY_CATEGORIES, RightsRegistry
from .store import OBJECT_KINDS, AciStore, ObjectAci, StoreImage

FORMAT_VERSION = 1
MANIFEST = "manifest"
DATA_FILES = ("roles.aci", "users.aci", "objects.aci")

FaultHook = Callable[[str], None] | None


# --- serialization -------------------------------------------------------

def _join(tokens: Iterable[str]) -> str:
    parts = list(tokens)
    for tok in parts:
        if not tok or any(ch.isspace() for ch in tok):
            raise IoFailure(f"token {tok!r} cannot be serialized")
    return " ".join(parts)


def dump_roles(image: StoreImage) -> str:
    reg = image.registry
    lines = [
        "registry types " + _join(reg.types),
        "registry scd_types " + _join(reg.scd_types),
    ]
    for cat in ALL_CATEGORIES:
        lines.append(f"registry rights {cat} " + _join(reg.names(cat)))
    for req in sorted(reg.bindings):
        cat, bit = reg.bindings[req]
        lines.append(f"registry binding {req} {cat} {bit}")
    for rid in sorted(image.roles):
        rec = image.roles[rid]
        lines.append(f"role {rid}")
        if rec.name:
            lines.append(f"name {rec.name}")
        lines.append(f"mutable {int(rec.mutable_permissions)}")
        lines.append(f"user_assignable {int(rec.user_assignable)}")
        lines.append(("children " + _join(sorted(rec.child_roles))).rstrip())
        lines.append(("static_conflicts "
                      + _join(sorted(rec.static_conflicts))).rstrip())
        lines.append(("dynamic_conflicts "
                      + _join(sorted(rec.dynamic_conflicts))).rstrip())
        for cat in ORDINARY_CATEGORIES:
            for obj_type in sorted(rec.ordinary.get(cat, {})):
                vec = rec.ordinary[cat][obj_type]
                if vec.any():
                    lines.append(f"ordinary {cat} {obj_type} {vec.dump()}")
        for cat in ("secadm", "sysadm", "audadm", "app"):
            vec = rec.privileges.get(cat)
            if vec is not None and vec.any():
                lines.append(f"privilege {cat} {vec.dump()}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def dump_users(image: StoreImage) -> str:
    lines = []
    for uid in sorted(image.users):
        user = image.users[uid]
        lines.append(f"user {uid}")
        lines.append(("max_roles " + _join(sorted(user.max_roles))).rstrip())
        lines.append(("active_roles "
                      + _join(sorted(user.active_roles))).rstrip())
        lines.append(f"default_type {user.default_object_type}")
        if user.proc_type_override is not None:
            lines.append(("proc_type_override "
                          + _join(sorted(user.proc_type_override))).rstrip())
        lines.append("end")
    return "\n".join(lines) + "\n" if lines else ""


def dump_objects(image: StoreImage) -> str:
    lines = []
    for device_id, objs in sorted(image.objects_by_device().items()):
        for obj in objs:
            if obj.kind == "ipc":
                continue
            lines.append(f"object {obj.object_id}")
            lines.append(f"kind {obj.kind}")
            lines.append(f"device {obj.device_id}")
            lines.append("types " + _join(sorted(obj.rac_types)))
            if obj.executable:
                lines.append("executable 1")
            if obj.exec_file_roles:
                lines.append("exec_roles " + _join(sorted(obj.exec_file_roles)))
            lines.append("end")
    return "\n".join(lines) + "\n" if lines else ""


# --- parsing -------------------------------------------------------------

class _Lines:
    def __init__(self, text: str, path: str):
        self.path = path
        self.items = [
            (i + 1, line.strip())
            for i, line in enumerate(text.splitlines())
            if line.strip() and not line.strip().startswith("#")
        ]
        self.pos = 0

    def __iter__(self):
        return self

    def __next__(self):
        if self.pos >= len(self.items):
            raise StopIteration
        item = self.items[self.pos]
        self.pos += 1
        return item

    def fail(self, lineno: int, message: str):
        raise ParseError(message, path=self.path, line=lineno)


def _parse_vector(lines: _Lines, lineno: int, text: str, width: int) -> BitVector:
    try:
        vec = BitVector.parse(text)
    except ValueError as exc:
        lines.fail(lineno, str(exc))
    if vec.width != width:
        lines.fail(lineno, f"vector width {vec.width}, expected {width}")
    return vec


def parse_roles(text: str, path: str) -> tuple[RightsRegistry, dict[str, RoleRecord], dict[str, int]]:
    """Parse registry sections and role records; returns record line map."""
    lines = _Lines(text, path)
    types: list[str] = []
    scd_types: list[str] = []
    rights: dict[str, tuple[str, ...]] = {}
    bindings: dict[str, tuple[str, str]] = {}
    roles: dict[str, RoleRecord] = {}
    role_lines: dict[str, int] = {}
    registry: RightsRegistry | None = None
    record: RoleRecord | None = None
    seen_fields: set[str] = set()

    for lineno, line in lines:
        fields = line.split()
        head = fields[0]
        if record is None:
            if head == "registry":
                if len(fields) < 2:
                    lines.fail(lineno, "bare registry line")
                section = fields[1]
                if section == "types":
                    types = fields[2:]
                elif section == "scd_types":
                    scd_types = fields[2:]
                elif section == "rights":
                    if len(fields) < 3:
                        lines.fail(lineno, "registry rights needs a category")
                    rights[fields[2]] = tuple(fields[3:])
                elif section == "binding":
                    if len(fields) != 5:
                        lines.fail(lineno, "registry binding needs request, category, bit")
                    bindings[fields[2]] = (fields[3], fields[4])
                else:
                    lines.fail(lineno, f"unknown registry section {section!r}")
                continue
            if head == "role":
                if registry is None:
                    try:
                        registry = RightsRegistry(
                            types=tuple(types), scd_types=tuple(scd_types),
                            rights=rights, bindings=bindings)
                    except ValueError as exc:
                        lines.fail(lineno, f"bad registry: {exc}")
                if len(fields) != 2:
                    lines.fail(lineno, "role record needs exactly one id")
                rid = fields[1]
                if rid in roles:
                    lines.fail(lineno, f"duplicate role {rid!r}")
                record = RoleRecord(role_id=rid)
                role_lines[rid] = lineno
                seen_fields = set()
                continue
            lines.fail(lineno, f"unexpected line {head!r} outside a record")

        # inside a role record
        if head == "end":
            roles[record.role_id] = record
            record = None
            continue
        if head in ("name",):
            record.name = line.split(None, 1)[1] if len(fields) > 1 else ""
        elif head == "mutable":
            record.mutable_permissions = _parse_flag(lines, lineno, fields)
        elif head == "user_assignable":
            record.user_assignable = _parse_flag(lines, lineno, fields)
        elif head == "children":
            record.child_roles = set(fields[1:])
        elif head == "static_conflicts":
            record.static_conflicts = set(fields[1:])
        elif head == "dynamic_conflicts":
            record.dynamic_conflicts = set(fields[1:])
        elif head == "ordinary":
            if len(fields) != 4:
                lines.fail(lineno, "ordinary line needs category, type, bits")
            cat, obj_type, bits = fields[1], fields[2], fields[3]
            if cat not in ORDINARY_CATEGORIES:
                lines.fail(lineno, f"unknown ordinary category {cat!r}")
            vec = _parse_vector(lines, lineno, bits, registry.width(cat))
            record.ordinary.setdefault(cat, {})[obj_type] = vec
        elif head == "privilege":
            if len(fields) != 3:
                lines.fail(lineno, "privilege line needs category and bits")
            cat, bits = fields[1], fields[2]
            if cat not in ("secadm", "sysadm", "audadm", "app"):
                lines.fail(lineno, f"unknown privilege category {cat!r}")
            record.privileges[cat] = _parse_vector(
                lines, lineno, bits, registry.width(cat))
        else:
            lines.fail(lineno, f"unknown role field {head!r}")
        if head in ("name", "mutable", "user_assignable", "children",
                    "static_conflicts", "dynamic_conflicts"):
            if head in seen_fields:
                lines.fail(lineno, f"duplicate field {head!r}")
            seen_fields.add(head)

    if record is not None:
        lines.fail(lines.items[-1][0] if lines.items else 0,
                   f"role {record.role_id!r} not terminated with end")
    if registry is None:
        try:
            registry = RightsRegistry(
                types=tuple(types), scd_types=tuple(scd_types),
                rights=rights or None, bindings=bindings)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad registry: {exc}", path=path, line=1)
    return registry, roles, role_lines


def _parse_flag(lines: _Lines, lineno: int, fields: list[str]) -> bool:
    if len(fields) != 2 or fields[1] not in ("0", "1"):
        lines.fail(lineno, f"{fields[0]} expects 0 or 1")
    return fields[1] == "1"


def parse_users(text: str, path: str) -> tuple[dict[str, UserAci], dict[str, int]]:
    lines = _Lines(text, path)
    users: dict[str, UserAci] = {}
    user_lines: dict[str, int] = {}
    record: UserAci | None = None
    seen: set[str] = set()
    for lineno, line in lines:
        fields = line.split()
        head = fields[0]
        if record is None:
            if head != "user" or len(fields) != 2:
                lines.fail(lineno, "expected a 'user <id>' record header")
            uid = fields[1]
            if uid in users:
                lines.fail(lineno, f"duplicate user {uid!r}")
            record = UserAci(user_id=uid)
            user_lines[uid] = lineno
            seen = set()
            continue
        if head == "end":
            users[record.user_id] = record
            record = None
            continue
        if head in seen:
            lines.fail(lineno, f"duplicate field {head!r}")
        seen.add(head)
        if head == "max_roles":
            record.max_roles = set(fields[1:])
        elif head == "active_roles":
            record.active_roles = set(fields[1:])
        elif head == "default_type":
            if len(fields) != 2:
                lines.fail(lineno, "default_type expects one token")
            record.default_object_type = fields[1]
        elif head == "proc_type_override":
            record.proc_type_override = set(fields[1:])
        else:
            lines.fail(lineno, f"unknown user field {head!r}")
    if record is not None:
        lines.fail(lines.items[-1][0], f"user {record.user_id!r} not terminated")
    return users, user_lines


def parse_objects(text: str, path: str) -> tuple[dict[str, ObjectAci], dict[str, int]]:
    lines = _Lines(text, path)
    objects: dict[str, ObjectAci] = {}
    object_lines: dict[str, int] = {}
    record: ObjectAci | None = None
    seen: set[str] = set()
    for lineno, line in lines:
        fields = line.split()
        head = fields[0]
        if record is None:
            if head != "object" or len(fields) != 2:
                lines.fail(lineno, "expected an 'object <id>' record header")
            oid = fields[1]
            if oid in objects:
                lines.fail(lineno, f"duplicate object {oid!r}")
            record = ObjectAci(object_id=oid, kind="file")
            object_lines[oid] = lineno
            seen = set()
            continue
        if head == "end":
            objects[record.object_id] = record
            record = None
            continue
        if head in seen:
            lines.fail(lineno, f"duplicate field {head!r}")
        seen.add(head)
        if head == "kind":
            if len(fields) != 2 or fields[1] not in OBJECT_KINDS:
                lines.fail(lineno, f"bad object kind {line!r}")
            if fields[1] == "ipc":
                lines.fail(lineno, "ipc objects are never persisted")
            record.kind = fields[1]
        elif head == "device":
            if len(fields) != 2:
                lines.fail(lineno, "device expects one token")
            record.device_id = fields[1]
        elif head == "types":
            record.rac_types = set(fields[1:])
        elif head == "executable":
            record.executable = _parse_flag(lines, lineno, fields)
        elif head == "exec_roles":
            record.exec_file_roles = set(fields[1:])
        else:
            lines.fail(lineno, f"unknown object field {head!r}")
    if record is not None:
        lines.fail(lines.items[-1][0], f"object {record.object_id!r} not terminated")
    return objects, object_lines


# --- manifest ------------------------------------------------------------

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dump_manifest(generation: int, checksums: dict[str, str]) -> str:
    lines = [f"format_version {FORMAT_VERSION}", f"generation {generation}"]
    for name in DATA_FILES:
        lines.append(f"checksum {name} {checksums[name]}")
    return "\n".join(lines) + "\n"


def parse_manifest(text: str, path: str) -> tuple[int, dict[str, str]]:
    generation: int | None = None
    version: int | None = None
    checksums: dict[str, str] = {}
    for lineno, line in _Lines(text, path):
        fields = line.split()
        head = fields[0]
        if head == "format_version" and len(fields) == 2:
            version = int(fields[1]) if fields[1].isdigit() else None
            if version != FORMAT_VERSION:
                raise ParseError(f"unsupported format version {fields[1]}",
                                 path=path, line=lineno)
        elif head == "generation" and len(fields) == 2 and fields[1].isdigit():
            generation = int(fields[1])
        elif head == "checksum" and len(fields) == 3 and fields[1] in DATA_FILES:
            checksums[fields[1]] = fields[2]
        else:
            raise ParseError(f"unknown manifest line {line!r}",
                             path=path, line=lineno)
    if version is None:
        raise ParseError("manifest missing format_version", path=path, line=1)
    if generation is None:
        raise ParseError("manifest missing generation", path=path, line=1)
    missing = set(DATA_FILES) - set(checksums)
    if missing:
        raise ParseError(f"manifest missing checksums for {sorted(missing)}",
                         path=path, line=1)
    return generation, checksums


# --- validated image assembly ---------------------------------------------

def _build_image(registry: RightsRegistry, roles, role_lines, users, user_lines,
                 objects, object_lines, generation: int,
                 store_dir: str) -> StoreImage:
    def where(path, lineno):
        return f"{os.path.join(store_dir, path)}:{lineno}"

    # reference errors are per-record, so they stay line-addressed
    for rid, rec in roles.items():
        for child in rec.child_roles:
            if child not in roles:
                raise ParseError(f"role {rid!r} references unknown child {child!r}",
                                 path="roles.aci", line=role_lines[rid])
        for other in rec.static_conflicts | rec.dynamic_conflicts:
            if other not in roles:
                raise ParseError(
                    f"role {rid!r} references unknown conflict role {other!r}",
                    path="roles.aci", line=role_lines[rid])
    for uid, user in users.items():
        for rid in user.max_roles | user.active_roles:
            if rid not in roles:
                raise ParseError(f"user {uid!r} references unknown role {rid!r}",
                                 path="users.aci", line=user_lines[uid])
        if not registry.is_object_type(user.default_object_type):
            raise ParseError(
                f"user {uid!r} has unknown default type "
                f"{user.default_object_type!r}",
                path="users.aci", line=user_lines[uid])
        for t in (user.proc_type_override or ()):
            if not registry.is_object_type(t):
                raise ParseError(f"user {uid!r} overrides with unknown type {t!r}",
                                 path="users.aci", line=user_lines[uid])
    for oid, obj in objects.items():
        if not obj.rac_types:
            raise ParseError(f"object {oid!r} has an empty type list",
                             path="objects.aci", line=object_lines[oid])
        for t in obj.rac_types:
            if not registry.is_object_type(t):
                raise ParseError(f"object {oid!r} has unknown type {t!r}",
                                 path="objects.aci", line=object_lines[oid])
        for rid in obj.exec_file_roles:
            if rid not in roles:
                raise ParseError(f"object {oid!r} references unknown role {rid!r}",
                                 path="objects.aci", line=object_lines[oid])
        if obj.exec_file_roles and (obj.kind != "file" or not obj.executable):
            raise ParseError(
                f"object {oid!r} carries exec roles but is not an executable file",
                path="objects.aci", line=object_lines[oid])

    try:
        validate_role_table(roles, registry)
    except OsrError as exc:
        raise InvariantViolation(f"{store_dir}/roles.aci: {exc}") from exc

    for uid, user in users.items():
        try:
            check_assignment(roles, user.max_roles, f"user {uid}")
            check_activation(roles, user.active_roles, f"user {uid}")
            if not user.active_roles <= user.max_roles:
                raise NotInMaxRoles(f"user {uid}: active roles exceed max roles")
            for rid in user.max_roles:
                if not roles[rid].user_assignable:
                    raise InvariantViolation(
                        f"user {uid}: role {rid!r} is not user-assignable")
        except OsrError as exc:
            raise InvariantViolation(f"{where('users.aci', user_lines[uid])}: {exc}") \
                from exc

    return StoreImage(registry=registry, roles=roles, users=users,
                      processes={}, objects=objects, generation=generation,
                      last_flushed_generation=generation)


# --- load / flush ----------------------------------------------------------

def load_store(path: str | os.PathLike) -> StoreImage:
    """Load and fully validate the store under ``path``.

    An existing directory without a manifest is an empty store. Checksum
    failures trigger a one-shot recovery from a complete backup set.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise IoFailure(f"store directory {directory} does not exist")
    if not (directory / MANIFEST).exists():
        if _has_complete_backup(directory):
            _restore_backup(directory)
        else:
            return StoreImage()
    try:
        return _load_once(directory)
    except InvariantViolation:
        if _has_complete_backup(directory):
            _restore_backup(directory)
            return _load_once(directory)
        raise


def _load_once(directory: Path) -> StoreImage:
    manifest_text = _read_text(directory / MANIFEST)
    generation, checksums = parse_manifest(manifest_text, MANIFEST)
    raw: dict[str, bytes] = {}
    for name in DATA_FILES:
        file_path = directory / name
        if not file_path.exists():
            raise InvariantViolation(f"{file_path} listed in manifest but missing")
        raw[name] = file_path.read_bytes()
        if _sha256(raw[name]) != checksums[name]:
            raise InvariantViolation(
                f"{file_path}: checksum mismatch (tampered or torn store)")
    registry, roles, role_lines = parse_roles(
        raw["roles.aci"].decode("utf-8"), "roles.aci")
    users, user_lines = parse_users(raw["users.aci"].decode("utf-8"), "users.aci")
    objects, object_lines = parse_objects(
        raw["objects.aci"].decode("utf-8"), "objects.aci")
    return _build_image(registry, roles, role_lines, users, user_lines,
                        objects, object_lines, generation, str(directory))


def _read_text(path: Path) -> str:
    try:
        return path.read_text("utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _has_complete_backup(directory: Path) -> bool:
    return all((directory / (name + ".bak")).exists()
               for name in (MANIFEST, *DATA_FILES))


def _restore_backup(directory: Path) -> None:
    for name in (*DATA_FILES, MANIFEST):
        os.replace(directory / (name + ".bak"), directory / name)


def flush_store(image: StoreImage, path: str | os.PathLike,
                fault_hook: FaultHook = None) -> None:
    """Atomically write ``image`` (minus processes and IPC) under ``path``.

    No-op when the image is clean. ``fault_hook`` is called before every
    filesystem step with a step label; tests raise from it to simulate
    failures at that point.
    """
    if not image.dirty:
        return
    directory = Path(path)
    hook = fault_hook or (lambda step: None)

    def step(label: str, fn):
        try:
            hook(label)
            return fn()
        except OSError as exc:
            raise IoFailure(f"{label}: {exc}") from exc

    step("mkdir", lambda: directory.mkdir(mode=0o700, parents=True, exist_ok=True))

    payloads = {
        "roles.aci": dump_roles(image).encode("utf-8"),
        "users.aci": dump_users(image).encode("utf-8"),
        "objects.aci": dump_objects(image).encode("utf-8"),
    }
    checksums = {name: _sha256(data) for name, data in payloads.items()}
    payloads[MANIFEST] = dump_manifest(image.generation, checksums).encode("utf-8")

    # stage everything first; nothing visible is touched yet
    for name in (*DATA_FILES, MANIFEST):
        tmp = directory / (name + ".tmp")
        data = payloads[name]
        def write_tmp(tmp=tmp, data=data):
            with open(tmp, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.chmod(tmp, 0o600)
        step(f"write {name}.tmp", write_tmp)

    # keep the previous state reachable while we swap files in
    have_previous = (directory / MANIFEST).exists()
    if have_previous:
        for name in (*DATA_FILES, MANIFEST):
            bak = directory / (name + ".bak")
            current = directory / name
            def link_bak(bak=bak, current=current):
                if bak.exists():
                    bak.unlink()
                os.link(current, bak)
            step(f"backup {name}", link_bak)

    # data files first, manifest last: the manifest commits the new state
    for name in (*DATA_FILES, MANIFEST):
        step(f"replace {name}",
             lambda name=name: os.replace(directory / (name + ".tmp"),
                                          directory / name))

    if have_previous:
        for name in (*DATA_FILES, MANIFEST):
            step(f"cleanup {name}.bak",
                 lambda name=name: (directory / (name + ".bak")).unlink())

    image.last_flushed_generation = image.generation


def save(store: AciStore, path: str | os.PathLike,
         fault_hook: FaultHook = None) -> None:
    """Snapshot the store and flush it; marks the store clean on success."""
    snap = store.snapshot()
    flush_store(snap, path, fault_hook=fault_hook)
    store.mark_flushed(snap.generation)


class PeriodicFlusher:
    """Background flusher: writes dirty snapshots every ``interval`` seconds.

    Acts as a reader: it snapshots under the store lock and writes outside
    it, so mutations are never blocked by disk I/O.
    """

    def __init__(self, store: AciStore, path: str | os.PathLike,
                 interval: float = 5.0):
        self.store = store
        self.path = path
        self.interval = interval
        self.last_error: Exception | None = None
        self.flush_count = 0
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("flusher already started")
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        """Clean shutdown: stop the loop and flush one last time."""
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        self._flush_if_dirty()

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            self._flush_if_dirty()

    def _flush_if_dirty(self) -> None:
        try:
            if self.store.dirty:
                save(self.store, self.path)
                self.flush_count += 1
        except Exception as exc:  # surfaced via last_error, never kills the loop
            self.last_error = exc
