// View-model plumbing. The model is always a copy of the last service
// responses plus a history of decisions exactly as the service worded them.

import { ApiClient, ApiRequestError, ServiceUnreachable } from "./api.js";
import type { Decision, StateView } from "./types.js";

export interface HistoryEntry {
  label: string;
  verdict: string;
  // the failing check token and message, byte-for-byte from the service
  reason: string | null;
  detail: string | null;
}

export interface ViewModel {
  state: StateView | null;
  stale: boolean;
  unreachable: boolean;
  banner: string | null;
  history: HistoryEntry[];
}

export function emptyViewModel(): ViewModel {
  return { state: null, stale: false, unreachable: false, banner: null, history: [] };
}

export function isEmptyStore(state: StateView): boolean {
  return state.roles.length === 0 && state.users.length === 0
    && state.processes.length === 0 && state.objects.length === 0;
}

// Aggregate fetch: take the snapshot, then probe the generation again; a
// mismatch means the store moved mid-fetch and the view may be stale.
export async function fetchStateView(
  api: ApiClient,
  vm: ViewModel,
): Promise<ViewModel> {
  try {
    const snapshot = await api.fetchState();
    const probe = await api.fetchState();
    return {
      ...vm,
      state: snapshot,
      stale: probe.generation !== snapshot.generation,
      unreachable: false,
      banner: null,
    };
  } catch (err) {
    if (err instanceof ServiceUnreachable) {
      return { ...vm, unreachable: true, banner: err.message };
    }
    if (err instanceof ApiRequestError) {
      return { ...vm, banner: err.body.message };
    }
    throw err;
  }
}

export interface AdminAction {
  label: string;
  run: (api: ApiClient) => Promise<unknown>;
}

// Submit one action; on a denial the failing check is recorded verbatim;
// on success the state is refetched. Errors are rendered, never swallowed.
export async function submitAdminAction(
  api: ApiClient,
  vm: ViewModel,
  action: AdminAction,
): Promise<ViewModel> {
  try {
    await action.run(api);
  } catch (err) {
    if (err instanceof ApiRequestError) {
      const decision = err.decision;
      const entry: HistoryEntry = {
        label: action.label,
        verdict: decision ? decision.verdict : err.body.error,
        reason: decision ? decision.reason : err.body.message,
        detail: decision ? decision.detail : null,
      };
      return { ...vm, banner: err.body.message, history: [entry, ...vm.history] };
    }
    if (err instanceof ServiceUnreachable) {
      return { ...vm, unreachable: true, banner: err.message };
    }
    throw err;
  }
  const entry: HistoryEntry = {
    label: action.label,
    verdict: "allow",
    reason: null,
    detail: null,
  };
  const refreshed = await fetchStateView(api, vm);
  return { ...refreshed, history: [entry, ...vm.history] };
}

export function recordDecision(
  vm: ViewModel,
  label: string,
  decision: Decision,
): ViewModel {
  const entry: HistoryEntry = {
    label,
    verdict: decision.verdict,
    reason: decision.reason,
    detail: decision.detail,
  };
  return { ...vm, history: [entry, ...vm.history] };
}
