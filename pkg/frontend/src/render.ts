// Pure HTML renderers. Every verdict or reason string placed in the markup
// is a response field passed through untouched (escaping aside); nothing
// here computes a policy answer.

import type { Decision, StateView } from "./types.js";
import type { HistoryEntry, ViewModel } from "./state.js";
import { isEmptyStore } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const e = escapeHtml;

function tokens(values: string[], cls: string): string {
  if (!values.length) return `<span class="muted">∅</span>`;
  return values.map((v) => `<span class="${cls}">${e(v)}</span>`).join(" ");
}

export function renderBanner(vm: ViewModel): string {
  const parts: string[] = [];
  if (vm.unreachable) {
    parts.push(
      `<div class="banner error" data-role="unreachable">` +
        `${e(vm.banner ?? "service unreachable")} ` +
        `<button data-action="retry">retry</button></div>`,
    );
  } else if (vm.banner) {
    parts.push(`<div class="banner" data-role="message">${e(vm.banner)}</div>`);
  }
  if (vm.stale) {
    parts.push(
      `<div class="banner warn" data-role="stale">store generation changed ` +
        `mid-fetch — view may be stale <button data-action="refresh">refresh</button></div>`,
    );
  }
  return parts.join("");
}

export function renderEmptyState(): string {
  return (
    `<section class="empty-state" data-role="empty-state">` +
    `<h2>Empty store</h2>` +
    `<p>No roles, principals or objects exist yet. Bootstrap the default ` +
    `system state first: <code>osrbac bootstrap --store DIR</code></p></section>`
  );
}

export function renderRoles(state: StateView): string {
  const rows = state.roles
    .map((role) => {
      const badges = [
        ...role.static_conflicts.map(
          (r) => `<span class="badge conflict-static" title="static conflict">⊘ ${e(r)}</span>`,
        ),
        ...role.dynamic_conflicts.map(
          (r) => `<span class="badge conflict-dynamic" title="dynamic conflict">⊖ ${e(r)}</span>`,
        ),
      ].join(" ");
      const edges = role.children
        .map((c) => `<span class="edge" data-edge="${e(role.role_id)}->${e(c)}">→ ${e(c)}</span>`)
        .join(" ");
      const flags = [
        role.mutable ? "" : `<span class="badge builtin">built-in</span>`,
        role.user_assignable ? "" : `<span class="badge system-only">system-only</span>`,
      ].join(" ");
      return (
        `<tr data-role-id="${e(role.role_id)}">` +
        `<td>${e(role.role_id)}</td><td>${e(role.name)}</td>` +
        `<td>${edges || `<span class="muted">leaf</span>`}</td>` +
        `<td>${badges || `<span class="muted">none</span>`}</td>` +
        `<td>${flags}</td></tr>`
      );
    })
    .join("");
  return (
    `<section data-role="roles"><h2>Roles (${state.roles.length})</h2>` +
    `<table><thead><tr><th>id</th><th>name</th><th>children</th>` +
    `<th>conflicts</th><th></th></tr></thead><tbody>${rows}</tbody></table></section>`
  );
}

// The role attribute editor: all nine permission lists plus edges and
// conflicts, mirroring the service's attribute names one to one.
export function renderRoleEditor(state: StateView, roleId: string): string {
  const role = state.roles.find((r) => r.role_id === roleId);
  if (!role) return `<p class="muted">unknown role ${e(roleId)}</p>`;
  const ordinaryCats: [string, string][] = [
    ["fd", "Fd_right_vectors_array"],
    ["dev", "Dev_right_vectors_array"],
    ["proc", "proc_right_vectors_array"],
    ["ipc", "Ipc_right_vectors_array"],
    ["scd", "scd_right_vectors_array"],
  ];
  const privCats: [string, string][] = [
    ["secadm", "secadm_privileges"],
    ["sysadm", "sysadm_privileges"],
    ["audadm", "audadm_privileges"],
    ["app", "app_privileges"],
  ];
  const ordinary = ordinaryCats
    .map(([cat, attr]) => {
      const perType = role.ordinary[cat] ?? {};
      const lines = Object.keys(perType)
        .sort()
        .map(
          (t) =>
            `<li><span class="type">${e(t)}</span>: ${tokens(perType[t] ?? [], "right")}</li>`,
        )
        .join("");
      return (
        `<div class="perm-list" data-attr="${e(attr)}">` +
        `<h4>${e(attr)}</h4><ul>${lines || "<li class='muted'>no rights</li>"}</ul></div>`
      );
    })
    .join("");
  const privileges = privCats
    .map(
      ([cat, attr]) =>
        `<div class="perm-list" data-attr="${e(attr)}"><h4>${e(attr)}</h4>` +
        `${tokens(role.privileges[cat] ?? [], "right")}</div>`,
    )
    .join("");
  return (
    `<section class="role-editor" data-role="role-editor" data-role-id="${e(roleId)}">` +
    `<h3>${e(role.name || role.role_id)}</h3>` +
    `<div class="perm-list" data-attr="child_roles"><h4>child_roles</h4>` +
    `${tokens(role.children, "role")}</div>` +
    `<div class="perm-list" data-attr="static_conflict_roles"><h4>static_conflict_roles</h4>` +
    `${tokens(role.static_conflicts, "role")}</div>` +
    `<div class="perm-list" data-attr="dynamic_conflict_roles"><h4>dynamic_conflict_roles</h4>` +
    `${tokens(role.dynamic_conflicts, "role")}</div>` +
    ordinary +
    privileges +
    `</section>`
  );
}

export function renderPrincipals(state: StateView): string {
  const users = state.users
    .map(
      (u) =>
        `<div class="panel" data-user="${e(u.user_id)}"><h4>${e(u.user_id)}</h4>` +
        `<dl><dt>max</dt><dd>${tokens(u.max_roles, "role")}</dd>` +
        `<dt>active</dt><dd>${tokens(u.active_roles, "role")}</dd>` +
        `<dt>default type</dt><dd>${e(u.default_type)}</dd></dl></div>`,
    )
    .join("");
  const processes = state.processes
    .map(
      (p) =>
        `<div class="panel" data-process="${e(p.process_id)}"><h4>pid ${e(p.process_id)}` +
        ` <span class="muted">(${e(p.owner_user)})</span></h4>` +
        `<dl><dt>max</dt><dd>${tokens(p.max_roles, "role")}</dd>` +
        `<dt>active</dt><dd>${tokens(p.active_roles, "role")}</dd>` +
        `<dt>types</dt><dd>${tokens(p.rac_types, "type")}</dd>` +
        `<dt>caps</dt><dd>${tokens(p.caps, "cap")}</dd></dl></div>`,
    )
    .join("");
  return (
    `<section data-role="principals"><h2>Users (${state.users.length})</h2>` +
    `<div class="panels">${users}</div>` +
    `<h2>Processes (${state.processes.length})</h2>` +
    `<div class="panels">${processes}</div></section>`
  );
}

export function renderDecision(decision: Decision): string {
  const verdictCls = decision.verdict === "allow" ? "allow" : "deny";
  const modules = decision.module_verdicts
    .map(([name, verdict]) => `<li>${e(name)}: ${e(verdict)}</li>`)
    .join("");
  return (
    `<div class="decision ${verdictCls}" data-role="decision">` +
    `<span class="verdict" data-field="verdict">${e(decision.verdict)}</span>` +
    (decision.reason !== null
      ? ` <span class="reason" data-field="reason">${e(decision.reason)}</span>`
      : "") +
    (decision.detail !== null
      ? `<p class="detail" data-field="detail">${e(decision.detail)}</p>`
      : "") +
    (decision.post_actions.length
      ? `<p class="post">post: ${decision.post_actions.map(e).join("+")}</p>`
      : "") +
    `<ul class="modules">${modules}</ul></div>`
  );
}

export function renderHistory(history: HistoryEntry[]): string {
  const rows = history
    .map(
      (h) =>
        `<tr><td>${e(h.label)}</td>` +
        `<td data-field="verdict">${e(h.verdict)}</td>` +
        `<td data-field="reason">${h.reason === null ? "" : e(h.reason)}</td></tr>`,
    )
    .join("");
  return (
    `<section data-role="history"><h2>Decision history</h2>` +
    `<table><thead><tr><th>action</th><th>verdict</th><th>reason</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></section>`
  );
}

export function renderDecisionLog(state: StateView): string {
  const lines = state.decision_log
    .map((line) => `<li><code>${e(line)}</code></li>`)
    .join("");
  return (
    `<section data-role="decision-log"><h2>Service decision log</h2>` +
    `<ul class="log">${lines || "<li class='muted'>empty</li>"}</ul></section>`
  );
}

export function renderApp(vm: ViewModel, selectedRole?: string): string {
  const banner = renderBanner(vm);
  if (vm.state === null) {
    return banner || `<p class="muted">loading…</p>`;
  }
  if (isEmptyStore(vm.state)) {
    return banner + renderEmptyState();
  }
  const editor = selectedRole ? renderRoleEditor(vm.state, selectedRole) : "";
  return (
    banner +
    `<header data-role="meta">generation ${vm.state.generation} · ` +
    `types: ${vm.state.types.map(e).join(", ")}</header>` +
    renderRoles(vm.state) +
    editor +
    renderPrincipals(vm.state) +
    renderHistory(vm.history) +
    renderDecisionLog(vm.state)
  );
}
