"""Rights registry: the policy-declared name lists behind every bit vector.

Bit positions are never hard-coded anywhere else: each category carries an
ordered list of right names and bit i means the i-th name. The registry is
fixed at policy-load time; all vectors of a category share its width.

Categories
----------
ordinary (one vector per object type):
    fd    rights on files and directories
    dev   rights on device objects
    proc  rights on process objects
    ipc   rights on IPC objects
    scd   rights on system control data
privilege (one vector per role):
    secadm  security-administration privileges
    sysadm  system-administration privileges (the capability registry)
    audadm  audit privileges
    app     application-level rights, checked by applications themselves
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bits import BitVector
from .errors import UnregisteredRight

ORDINARY_CATEGORIES = ("fd", "dev", "proc", "ipc", "scd")
PRIVILEGE_CATEGORIES = ("secadm", "sysadm", "audadm", "app")
ALL_CATEGORIES = ORDINARY_CATEGORIES + PRIVILEGE_CATEGORIES

#: object kind -> ordinary rights category
KIND_CATEGORY = {
    "file": "fd",
    "dir": "fd",
    "device": "dev",
    "process": "proc",
    "ipc": "ipc",
    "scd": "scd",
}

# Built-in object type names of the default policy.
DEFAULT_TYPE = "缺省型"
SECURITY_TYPE = "安全型"
AUDIT_TYPE = "审计型"

_DEFAULT_RIGHTS: dict[str, tuple[str, ...]] = {
    # Request tokens with an ordinary (CR) check on this category, plus the
    # CREATE/SEARCH bits the creation and path-walk rules consume.
    "fd": (
        "ADD_TO_KERNEL", "APPEND_OPEN", "CHANGE_GROUP", "CHANGE_OWNER",
        "CHDIR", "CREATE", "DELETE", "EXECUTE", "LINK_HARD",
        "MODIFY_ACCESS_DATA", "MODIFY_PERMISSIONS_DATA", "MOUNT",
        "READ_OPEN", "SEARCH", "UMOUNT", "WRITE_OPEN",
    ),
    "dev": ("APPEND_OPEN", "MOUNT", "READ_OPEN", "UMOUNT", "WRITE_OPEN"),
    "proc": ("CREATE", "SEND_SIGNAL", "TERMINATE"),
    "ipc": (
        "ALTER", "APPEND_OPEN", "CHANGE_GROUP", "CHANGE_OWNER", "CREATE",
        "DELETE", "MODIFY_PERMISSIONS_DATA", "READ_OPEN", "WRITE_OPEN",
    ),
    "scd": ("GET_STATUS_DATA", "MODIFY_PERMISSIONS_DATA", "MODIFY_SYSTEM_DATA"),
    "secadm": (
        "get_status_data", "modify_attribute", "modify_permissions_data",
        "read_attribute", "switch_log", "switch_module",
    ),
    "sysadm": (
        "add_kernel_module", "change_any_group", "change_any_owner",
        "mount_fs", "network_admin", "reboot", "remove_kernel_module",
        "set_hostname", "set_rlimit", "set_system_time", "swap_control",
        "umount_fs",
    ),
    "audadm": (
        "audit_reload_config", "audit_save_config", "audit_start",
        "audit_stop", "audit_work",
    ),
    "app": ("approve-invoice", "close-ledger"),
}

# Privilege-checked request -> (privilege category, bit name).
_DEFAULT_BINDINGS: dict[str, tuple[str, str]] = {
    "R_MODIFY_ATTRIBUTE": ("secadm", "modify_attribute"),
    "R_READ_ATTRIBUTE": ("secadm", "read_attribute"),
    "R_IAC_MODIFY_ATTRIBUTE": ("secadm", "modify_attribute"),
    "R_IAC_READ_ATTRIBUTE": ("secadm", "read_attribute"),
    "R_MAC_GET_STATUS_DATA": ("secadm", "get_status_data"),
    "R_MAC_MODIFY_ATTRIBUTE": ("secadm", "modify_attribute"),
    "R_MAC_MODIFY_PERMISSIONS_DATA": ("secadm", "modify_permissions_data"),
    "R_MAC_READ_ATTRIBUTE": ("secadm", "read_attribute"),
    "R_MAC_SWITCH_LOG": ("secadm", "switch_log"),
    "R_MAC_SWITCH_MODULE": ("secadm", "switch_module"),
    "R_MAC_ADD_TO_KERNEL": ("sysadm", "add_kernel_module"),
    "R_MAC_MOUNT": ("sysadm", "mount_fs"),
    "R_MAC_SHUTDOWN": ("sysadm", "reboot"),
    "R_MAC_REMOVE_FROM_KERNEL": ("sysadm", "remove_kernel_module"),
    "R_MAC_UMOUNT": ("sysadm", "umount_fs"),
    "R_AUDIT_STOP": ("audadm", "audit_stop"),
    "R_AUDIT_SAVE_CONFIG": ("audadm", "audit_save_config"),
    "R_AUDIT_RELOAD_CONFIG": ("audadm", "audit_reload_config"),
    "R_AUDIT_WORK": ("audadm", "audit_work"),
    "R_AUDIT_START": ("audadm", "audit_start"),
}

_DEFAULT_SCD_TYPES = (
    "system_clock", "host_identity", "resource_limits", "swap_space",
    "kernel_log", "io_ports", "system_state",
)


@dataclass(frozen=True)
class RightsRegistry:
    """Ordered right-name lists, object types and request->bit bindings."""

    types: tuple[str, ...] = (DEFAULT_TYPE, SECURITY_TYPE, AUDIT_TYPE)
    scd_types: tuple[str, ...] = _DEFAULT_SCD_TYPES
    rights: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(_DEFAULT_RIGHTS))
    bindings: dict[str, tuple[str, str]] = field(
        default_factory=lambda: dict(_DEFAULT_BINDINGS))

    def __post_init__(self):
        missing = set(ALL_CATEGORIES) - set(self.rights)
        if missing:
            raise ValueError(f"registry missing categories: {sorted(missing)}")
        for cat, names in self.rights.items():
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate right names in category {cat}")
        for req, (cat, bit) in self.bindings.items():
            if cat not in PRIVILEGE_CATEGORIES:
                raise ValueError(f"binding {req}: {cat} is not a privilege category")
            if bit not in self.rights[cat]:
                raise ValueError(f"binding {req}: unregistered bit {bit!r} in {cat}")

    def width(self, category: str) -> int:
        return len(self._names(category))

    def _names(self, category: str) -> tuple[str, ...]:
        try:
            return self.rights[category]
        except KeyError:
            raise UnregisteredRight(f"unknown rights category {category!r}") from None

    def index(self, category: str, name: str) -> int:
        names = self._names(category)
        try:
            return names.index(name)
        except ValueError:
            raise UnregisteredRight(
                f"right {name!r} not registered in category {category!r}") from None

    def names(self, category: str) -> tuple[str, ...]:
        return self._names(category)

    def has_right(self, category: str, name: str) -> bool:
        return name in self._names(category)

    def zeros(self, category: str) -> BitVector:
        return BitVector.zeros(self.width(category))

    def ones(self, category: str) -> BitVector:
        return BitVector.ones(self.width(category))

    def vector(self, category: str, names) -> BitVector:
        """Vector with exactly the given right names set."""
        return BitVector.from_bits(
            self.width(category), (self.index(category, n) for n in names))

    def set_names(self, category: str, vec: BitVector) -> list[str]:
        """Right names whose bits are set, in registry order."""
        names = self._names(category)
        if vec.width != len(names):
            raise ValueError(f"vector width {vec.width} != {category} width {len(names)}")
        return [n for i, n in enumerate(names) if vec.get(i)]

    def binding_for(self, request_type: str) -> tuple[str, str]:
        try:
            return self.bindings[request_type]
        except KeyError:
            raise UnregisteredRight(
                f"no privilege-bit binding for {request_type}") from None

    def is_object_type(self, token: str) -> bool:
        return token in self.types

    def is_scd(self, token: str) -> bool:
        return token in self.scd_types


def default_registry() -> RightsRegistry:
    return RightsRegistry()
