"""Command-line front end.

All administration verbs run against a store directory and an explicit
caller process id (``--as``): the whole system is a simulation, so the
caller's identity is declared, not taken from the OS. Mutating verbs write
the store back on success.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .admin import AdminApi, AdminCommand
from .audit import DecisionLog
from .engine import AdfEngine
from .errors import OsrError, PermissionDenied
from .matrix import default_matrix, parse_matrix
from .persist import PeriodicFlusher, load_store, save
from .sim import (
    Simulator,
    bootstrap_default_state,
    dump_syscall_table,
    ensure_init_process,
    materialize_cli_caller,
    parse_trace,
    render_audit_log,
)
from .store import AciStore

# attribute values that are single strings / booleans rather than token lists
_STRING_ATTRS = {"default_object_type", "name"}
_BOOL_ATTRS = {"executable"}

_GET_VERBS = {
    "rfsos_get_user_attr": "user",
    "rfsos_get_proc_attr": "process",
    "rfsos_get_file_dir_attr": "object",
    "rfsos_get_ipc_attr": "object",
    "rfsos_get_dev_attr": "object",
}
_SET_VERBS = {
    "rfsos_set_user_attr": "user",
    "rfsos_set_proc_attr": "process",
    "rfsos_set_file_dir_attr": "object",
    "rfsos_set_ipc_attr": "object",
    "rfsos_set_dev_attr": "object",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osrbac", description="role-based access control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bootstrap", help="create the default system state")
    p.add_argument("--store", required=True)

    p = sub.add_parser("replay", help="replay a syscall trace")
    p.add_argument("--store", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--strict-matrix", action="store_true",
                   help="treat blank matrix cells as deny")
    p.add_argument("--matrix", help="override decision-matrix file")
    p.add_argument("--save", action="store_true",
                   help="write the final state back to the store")
    p.add_argument("--audit-out", help="write the audit log to a file")

    sub.add_parser("dump-matrix", help="print the decision matrix")
    sub.add_parser("dump-syscall-table", help="print the request/syscall table")

    p = sub.add_parser("flush", help="flush the store to disk (no-op if clean)")
    p.add_argument("--store", required=True)

    p = sub.add_parser("whatif", help="dry-run a single access decision")
    p.add_argument("--store", required=True)
    p.add_argument("--as", dest="caller", required=True,
                   help="subject process id")
    p.add_argument("request_type")
    p.add_argument("--target")
    p.add_argument("--kind")
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE")

    p = sub.add_parser("serve", help="run the HTTP administration service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8300)
    p.add_argument("--flush-interval", type=float, default=5.0)
    p.add_argument("--frontend", help="directory with the built web console")
    p.add_argument("--strict-matrix", action="store_true")

    for verb, key in _GET_VERBS.items():
        p = sub.add_parser(verb, help=f"read a {key} attribute")
        _admin_args(p)
        p.add_argument("entity")
        p.add_argument("attr")
    for verb, key in _SET_VERBS.items():
        p = sub.add_parser(verb, help=f"set a {key} attribute")
        _admin_args(p)
        p.add_argument("entity")
        p.add_argument("attr")
        p.add_argument("values", nargs="*")
        p.add_argument("--json", dest="json_value",
                       help="JSON value (for the permission-array attributes)")

    p = sub.add_parser("rfsos_osr_add_role", help="register a new role")
    _admin_args(p)
    p.add_argument("--json", dest="json_value", required=True,
                   help="role record as JSON")

    p = sub.add_parser("rfsos_osr_del_role", help="delete a role")
    _admin_args(p)
    p.add_argument("role")

    p = sub.add_parser("rfsos_osr_get_role_attr", help="read a role attribute")
    _admin_args(p)
    p.add_argument("role")
    p.add_argument("attr")

    p = sub.add_parser("rfsos_osr_set_role_attr", help="set a role attribute")
    _admin_args(p)
    p.add_argument("role")
    p.add_argument("attr")
    p.add_argument("values", nargs="*")
    p.add_argument("--json", dest="json_value")

    p = sub.add_parser("rfsos_osr_activate_role",
                       help="activate roles on a principal")
    _admin_args(p)
    p.add_argument("principal")
    p.add_argument("roles", nargs="*")
    p.add_argument("--kind", choices=("user", "process"), default="process")

    p = sub.add_parser("rfsos_osr_check_app_right",
                       help="check an application-level right")
    _admin_args(p)
    p.add_argument("right")

    p = sub.add_parser("rfsos_add_user", help="register a user")
    _admin_args(p)
    p.add_argument("user")
    p.add_argument("--roles", help="comma-separated max roles")
    p.add_argument("--default-type")

    p = sub.add_parser("rfsos_add_object", help="register an object")
    _admin_args(p)
    p.add_argument("object")
    p.add_argument("kind", choices=("file", "dir", "device", "ipc"))
    p.add_argument("types", nargs="+")
    p.add_argument("--device", default="dev0")
    p.add_argument("--executable", action="store_true")
    p.add_argument("--exec-roles", help="comma-separated role ids")

    p = sub.add_parser("rfsos_get_state", help="dump the aggregate state view")
    _admin_args(p)

    return parser


def _admin_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store", required=True)
    p.add_argument("--as", dest="caller", required=True,
                   help="caller process id whose privileges gate the verb")


def _open_store(path: str) -> AciStore:
    """Load the store and boot it: init (pid 1) exists again afterwards."""
    store = AciStore(load_store(path))
    ensure_init_process(store)
    return store


def _attr_value(args) -> object:
    if getattr(args, "json_value", None):
        return json.loads(args.json_value)
    attr = args.attr.lower()
    if attr in _STRING_ATTRS:
        if len(args.values) != 1:
            raise OsrError(f"attribute {args.attr} expects exactly one value")
        return args.values[0]
    if attr in _BOOL_ATTRS:
        if len(args.values) != 1 or args.values[0] not in ("true", "false"):
            raise OsrError(f"attribute {args.attr} expects true or false")
        return args.values[0] == "true"
    return list(args.values)


def _emit(result: object) -> None:
    print(json.dumps(result, ensure_ascii=False, indent=2, default=str))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except PermissionDenied as exc:
        body = {"error": exc.token, "message": str(exc)}
        if exc.decision is not None:
            body["decision"] = exc.decision.to_dict()
        _emit(body)
        return 3
    except OsrError as exc:
        _emit({"error": exc.token, "message": str(exc)})
        return 2


def _run(args) -> int:
    cmd = args.command

    if cmd == "bootstrap":
        store = bootstrap_default_state()
        save(store, args.store)
        _emit({"ok": True, "store": args.store,
               "roles": store.role_ids(),
               "types": list(store.registry.types)})
        return 0

    if cmd == "dump-matrix":
        sys.stdout.write(default_matrix().dump())
        return 0

    if cmd == "dump-syscall-table":
        sys.stdout.write(dump_syscall_table())
        return 0

    if cmd == "flush":
        store = _open_store(args.store)
        save(store, args.store)
        _emit({"ok": True, "generation": store.generation})
        return 0

    if cmd == "replay":
        store = _open_store(args.store)
        matrix = (parse_matrix(Path(args.matrix).read_text("utf-8"), args.matrix)
                  if args.matrix else default_matrix())
        engine = AdfEngine(store, matrix=matrix, strict=args.strict_matrix,
                           log=DecisionLog())
        sim = Simulator(store, engine)
        events = parse_trace(Path(args.trace).read_text("utf-8"), args.trace)
        records = sim.replay_trace(events)
        log_text = render_audit_log(records)
        sys.stdout.write(log_text)
        if args.audit_out:
            Path(args.audit_out).write_text(log_text, "utf-8")
        if args.save:
            save(store, args.store)
        denials = sum(1 for r in records if r.verdict in ("deny", "error"))
        print(f"# events={len(records)} denials={denials}", file=sys.stderr)
        return 0

    if cmd == "whatif":
        store = _open_store(args.store)
        api = AdminApi(store)
        params = {}
        for pair in args.param:
            key, _, value = pair.partition("=")
            params[key] = value
        subject = materialize_cli_caller(store, args.caller)
        decision = api.what_if(subject, args.request_type,
                               target=args.target, target_kind=args.kind,
                               params=params)
        _emit(decision.to_dict())
        return 0

    if cmd == "serve":
        import uvicorn

        from .service import create_app
        store = _open_store(args.store)
        engine = AdfEngine(store, strict=args.strict_matrix, log=DecisionLog())
        api = AdminApi(store, engine)
        app = create_app(api, frontend_dist=args.frontend)
        flusher = PeriodicFlusher(store, args.store,
                                  interval=args.flush_interval)
        flusher.start()
        try:
            uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        finally:
            flusher.stop()
        return 0

    # administration verbs share the store-open / dispatch / save cycle
    store = _open_store(args.store)
    api = AdminApi(store, AdfEngine(store, log=DecisionLog()))
    caller = materialize_cli_caller(store, args.caller)
    payload = _verb_payload(cmd, args)
    result = api.admin_command(AdminCommand(cmd, caller, payload))
    if store.dirty:
        save(store, args.store)
    _emit(result)
    return 0


def _verb_payload(verb: str, args) -> dict:
    if verb in _GET_VERBS:
        return {_GET_VERBS[verb]: args.entity, "attr": args.attr}
    if verb in _SET_VERBS:
        return {_SET_VERBS[verb]: args.entity, "attr": args.attr,
                "value": _attr_value(args)}
    if verb == "rfsos_osr_add_role":
        return {"record": json.loads(args.json_value)}
    if verb == "rfsos_osr_del_role":
        return {"role": args.role}
    if verb == "rfsos_osr_get_role_attr":
        return {"role": args.role, "attr": args.attr}
    if verb == "rfsos_osr_set_role_attr":
        return {"role": args.role, "attr": args.attr, "value": _attr_value(args)}
    if verb == "rfsos_osr_activate_role":
        return {"kind": args.kind, "principal": args.principal,
                "roles": args.roles}
    if verb == "rfsos_osr_check_app_right":
        return {"right": args.right}
    if verb == "rfsos_add_user":
        payload = {"user": args.user}
        if args.roles:
            payload["max_roles"] = args.roles.split(",")
        if args.default_type:
            payload["default_type"] = args.default_type
        return payload
    if verb == "rfsos_add_object":
        payload = {"object": args.object, "kind": args.kind,
                   "types": args.types, "device": args.device,
                   "executable": args.executable}
        if args.exec_roles:
            payload["exec_roles"] = args.exec_roles.split(",")
        return payload
    if verb == "rfsos_get_state":
        return {}
    raise OsrError(f"unhandled verb {verb!r}")


if __name__ == "__main__":
    raise SystemExit(main())
