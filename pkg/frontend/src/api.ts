// Thin fetch client for the administration service. Every mutation goes
// through these endpoints; the console keeps no other channel.

import type {
  ApiErrorBody,
  Decision,
  StateView,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "ServiceUnreachable";
  }
}

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiRequestError";
    this.status = status;
    this.body = body;
  }

  get decision(): Decision | undefined {
    return this.body.decision;
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    public caller: string = "1",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceUnreachable(err);
    }
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  private put<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  fetchState(): Promise<StateView> {
    return this.request<StateView>(
      `/api/v1/state?caller=${encodeURIComponent(this.caller)}`,
    );
  }

  whatIf(req: WhatIfRequest): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>("/api/v1/whatif", req);
  }

  setAttr(entityClass: string, entityId: string, attr: string, value: unknown) {
    return this.put<Record<string, unknown>>(
      `/api/v1/attrs/${entityClass}/${entityId}`,
      { caller: this.caller, attr, value },
    );
  }

  getAttr(entityClass: string, entityId: string, attr: string) {
    return this.request<{ entity: string; attr: string; value: unknown }>(
      `/api/v1/attrs/${entityClass}/${entityId}` +
        `?attr=${encodeURIComponent(attr)}&caller=${encodeURIComponent(this.caller)}`,
    );
  }

  addRole(record: Record<string, unknown>) {
    return this.post<Record<string, unknown>>("/api/v1/roles", {
      caller: this.caller,
      record,
    });
  }

  deleteRole(roleId: string) {
    return this.request<Record<string, unknown>>(
      `/api/v1/roles/${encodeURIComponent(roleId)}?caller=${encodeURIComponent(this.caller)}`,
      { method: "DELETE" },
    );
  }

  setRoleAttr(roleId: string, attr: string, value: unknown) {
    return this.put<Record<string, unknown>>(
      `/api/v1/roles/${encodeURIComponent(roleId)}/attrs`,
      { caller: this.caller, attr, value },
    );
  }

  activate(kind: string, principal: string, roles: string[]) {
    return this.post<Record<string, unknown>>("/api/v1/activate", {
      caller: this.caller,
      kind,
      principal,
      roles,
    });
  }

  checkAppRight(right: string) {
    return this.post<{ right: string; verdict: string; decision: Decision }>(
      "/api/v1/check-app-right",
      { caller: this.caller, right },
    );
  }

  switchModule(module: string, enabled: boolean) {
    return this.post<{ module: string; enabled: boolean }>(
      "/api/v1/switch-module",
      { caller: this.caller, module, enabled },
    );
  }

  switchLog(enabled: boolean) {
    return this.post<{ enabled: boolean }>("/api/v1/switch-log", {
      caller: this.caller,
      enabled,
    });
  }

  addUser(user: string, maxRoles?: string[]) {
    const payload: Record<string, unknown> = { caller: this.caller, user };
    if (maxRoles) payload.max_roles = maxRoles;
    return this.post<Record<string, unknown>>("/api/v1/users", payload);
  }
}
