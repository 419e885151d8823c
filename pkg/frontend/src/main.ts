// DOM wiring: forms post to the service, responses re-render the view.
// All state lives in the ViewModel; this file only moves strings around.

import { ApiClient, ApiRequestError, ServiceUnreachable } from "./api.js";
import {
  AdminAction,
  ViewModel,
  emptyViewModel,
  fetchStateView,
  recordDecision,
  submitAdminAction,
} from "./state.js";
import { renderApp, renderDecision } from "./render.js";

const api = new ApiClient("", "1");
let vm: ViewModel = emptyViewModel();
let selectedRole: string | undefined;

const root = document.getElementById("app")!;
const whatifResult = document.getElementById("whatif-result")!;

function draw(): void {
  root.innerHTML = renderApp(vm, selectedRole);
}

async function refresh(): Promise<void> {
  vm = await fetchStateView(api, vm);
  draw();
}

async function runAction(action: AdminAction): Promise<void> {
  vm = await submitAdminAction(api, vm, action);
  draw();
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.dataset.action === "retry" || target.dataset.action === "refresh") {
    void refresh();
    return;
  }
  const row = target.closest("tr[data-role-id]") as HTMLElement | null;
  if (row?.dataset.roleId) {
    selectedRole = row.dataset.roleId;
    draw();
  }
});

function field(form: HTMLFormElement, name: string): string {
  return (new FormData(form).get(name) as string | null)?.trim() ?? "";
}

function listField(form: HTMLFormElement, name: string): string[] {
  const raw = field(form, name);
  return raw ? raw.split(",").map((s) => s.trim()).filter(Boolean) : [];
}

document.getElementById("caller-form")?.addEventListener("submit", (ev) => {
  ev.preventDefault();
  api.caller = field(ev.target as HTMLFormElement, "caller") || "1";
  void refresh();
});

document.getElementById("whatif-form")?.addEventListener("submit", async (ev) => {
  ev.preventDefault();
  const form = ev.target as HTMLFormElement;
  const params: Record<string, string> = {};
  const appBit = field(form, "app_bit");
  if (appBit) params.app_bit = appBit;
  try {
    const response = await api.whatIf({
      subject: field(form, "subject") || api.caller,
      request_type: field(form, "request_type"),
      target: field(form, "target") || null,
      target_kind: field(form, "target_kind") || null,
      params,
    });
    whatifResult.innerHTML = renderDecision(response.decision);
    vm = recordDecision(vm, `what-if ${field(form, "request_type")}`,
      response.decision);
    draw();
  } catch (err) {
    if (err instanceof ApiRequestError) {
      whatifResult.innerHTML = `<div class="banner error">${err.body.message}</div>`;
    } else if (err instanceof ServiceUnreachable) {
      vm = { ...vm, unreachable: true, banner: err.message };
      draw();
    } else {
      throw err;
    }
  }
});

document.getElementById("attr-form")?.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const form = ev.target as HTMLFormElement;
  const entityClass = field(form, "entity_class");
  const entityId = field(form, "entity_id");
  const attr = field(form, "attr");
  const value = listField(form, "value");
  void runAction({
    label: `set ${entityClass}/${entityId} ${attr}`,
    run: (client) =>
      entityClass === "role"
        ? client.setRoleAttr(entityId, attr, value)
        : client.setAttr(entityClass, entityId, attr, value),
  });
});

document.getElementById("activate-form")?.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const form = ev.target as HTMLFormElement;
  void runAction({
    label: `activate ${field(form, "principal")}`,
    run: (client) =>
      client.activate(
        field(form, "kind") || "process",
        field(form, "principal"),
        listField(form, "roles"),
      ),
  });
});

void refresh();
