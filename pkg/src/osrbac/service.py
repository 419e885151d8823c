"""HTTP/JSON administration service consumed by the web console.

Verbs map 1:1 onto endpoints under /api/v1; every response is JSON with a
stable shape and error bodies embed the full Decision on denials so the
console can show the failing check verbatim. The caller is a declared
simulated process id (query param or body field) — never an OS identity.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .admin import AdminApi, AdminCommand
from .errors import (
    NotFound,
    OsrError,
    PermissionDenied,
    SubjectNotFound,
    TargetNotFound,
    UnknownAttribute,
    UnknownRequest,
)

_ENTITY_CLASS_VERBS = {
    "user": ("rfsos_get_user_attr", "rfsos_set_user_attr", "user"),
    "process": ("rfsos_get_proc_attr", "rfsos_set_proc_attr", "process"),
    "file_dir": ("rfsos_get_file_dir_attr", "rfsos_set_file_dir_attr", "object"),
    "ipc": ("rfsos_get_ipc_attr", "rfsos_set_ipc_attr", "object"),
    "dev": ("rfsos_get_dev_attr", "rfsos_set_dev_attr", "object"),
}


def _error_status(exc: OsrError) -> int:
    if isinstance(exc, PermissionDenied):
        return 403
    if isinstance(exc, (NotFound, SubjectNotFound, TargetNotFound,
                        UnknownAttribute, UnknownRequest)):
        return 404
    return 400


def create_app(api: AdminApi, frontend_dist: str | None = None) -> FastAPI:
    app = FastAPI(title="rbac-admin", docs_url=None, redoc_url=None)

    @app.exception_handler(OsrError)
    async def osr_error_handler(_request: Request, exc: OsrError):
        body: dict[str, Any] = {"error": exc.token, "message": str(exc)}
        if isinstance(exc, PermissionDenied) and exc.decision is not None:
            body["decision"] = exc.decision.to_dict()
        return JSONResponse(status_code=_error_status(exc), content=body)

    def run(verb: str, caller: str | None, payload: dict) -> Any:
        if not caller:
            raise UnknownRequest("caller process id is required")
        return api.admin_command(AdminCommand(verb, caller, payload))

    # generic dispatch: the CLI and every REST route below share it
    @app.post("/api/v1/command")
    async def command(body: dict):
        return run(body.get("verb", ""), body.get("caller"),
                   body.get("payload") or {})

    @app.get("/api/v1/state")
    async def state(caller: str = ""):
        if api.store_is_empty():
            # pre-bootstrap there are no processes, so no caller could ever
            # pass the gate; an empty store has nothing to protect
            return api._state_view()
        return run("rfsos_get_state", caller, {})

    @app.get("/api/v1/attrs/{entity_class}/{entity_id:path}")
    async def get_attr(entity_class: str, entity_id: str, attr: str,
                       caller: str = ""):
        if entity_class not in _ENTITY_CLASS_VERBS:
            raise UnknownRequest(f"unknown entity class {entity_class!r}")
        verb, _, key = _ENTITY_CLASS_VERBS[entity_class]
        return run(verb, caller, {key: entity_id, "attr": attr})

    @app.put("/api/v1/attrs/{entity_class}/{entity_id:path}")
    async def put_attr(entity_class: str, entity_id: str, body: dict):
        if entity_class not in _ENTITY_CLASS_VERBS:
            raise UnknownRequest(f"unknown entity class {entity_class!r}")
        _, verb, key = _ENTITY_CLASS_VERBS[entity_class]
        return run(verb, body.get("caller"),
                   {key: entity_id, "attr": body.get("attr"),
                    "value": body.get("value")})

    @app.post("/api/v1/roles")
    async def add_role(body: dict):
        return run("rfsos_osr_add_role", body.get("caller"),
                   {"record": body.get("record")})

    @app.delete("/api/v1/roles/{role_id}")
    async def del_role(role_id: str, caller: str = ""):
        return run("rfsos_osr_del_role", caller, {"role": role_id})

    @app.get("/api/v1/roles/{role_id}/attrs")
    async def get_role_attr(role_id: str, attr: str, caller: str = ""):
        return run("rfsos_osr_get_role_attr", caller,
                   {"role": role_id, "attr": attr})

    @app.put("/api/v1/roles/{role_id}/attrs")
    async def set_role_attr(role_id: str, body: dict):
        return run("rfsos_osr_set_role_attr", body.get("caller"),
                   {"role": role_id, "attr": body.get("attr"),
                    "value": body.get("value")})

    @app.post("/api/v1/activate")
    async def activate(body: dict):
        return run("rfsos_osr_activate_role", body.get("caller"),
                   {"kind": body.get("kind", "process"),
                    "principal": body.get("principal"),
                    "roles": body.get("roles", [])})

    @app.post("/api/v1/users")
    async def add_user(body: dict):
        payload = {k: v for k, v in body.items() if k != "caller"}
        return run("rfsos_add_user", body.get("caller"), payload)

    @app.post("/api/v1/objects")
    async def add_object(body: dict):
        payload = {k: v for k, v in body.items() if k != "caller"}
        return run("rfsos_add_object", body.get("caller"), payload)

    @app.post("/api/v1/whatif")
    async def whatif(body: dict):
        decision = api.what_if(
            subject=body.get("subject", ""),
            request_type=body.get("request_type", ""),
            target=body.get("target"),
            target_kind=body.get("target_kind"),
            params=body.get("params") or {},
        )
        return {"decision": decision.to_dict(),
                "generation": api.store.generation}

    @app.post("/api/v1/check-app-right")
    async def check_app_right(body: dict):
        return run("rfsos_osr_check_app_right", body.get("caller"),
                   {"right": body.get("right")})

    @app.post("/api/v1/switch-module")
    async def switch_module(body: dict):
        return run("rfsos_switch_module", body.get("caller"),
                   {"module": body.get("module"),
                    "enabled": body.get("enabled")})

    @app.post("/api/v1/switch-log")
    async def switch_log(body: dict):
        return run("rfsos_switch_log", body.get("caller"),
                   {"enabled": body.get("enabled")})

    if frontend_dist and Path(frontend_dist).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dist, html=True),
                  name="console")

    return app
