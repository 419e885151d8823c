// Wire types mirroring the /api/v1 JSON shapes. The console never derives
// policy facts from these: everything shown is a field of a response.

export interface RoleView {
  role_id: string;
  name: string;
  children: string[];
  static_conflicts: string[];
  dynamic_conflicts: string[];
  mutable: boolean;
  user_assignable: boolean;
  ordinary: Record<string, Record<string, string[]>>;
  privileges: Record<string, string[]>;
}

export interface UserView {
  user_id: string;
  max_roles: string[];
  active_roles: string[];
  default_type: string;
}

export interface ProcessView {
  process_id: string;
  owner_user: string;
  rac_types: string[];
  max_roles: string[];
  active_roles: string[];
  exec_file: string | null;
  caps: string[];
}

export interface ObjectView {
  object_id: string;
  kind: string;
  device: string;
  rac_types: string[];
  executable: boolean;
  exec_file_roles: string[];
}

export interface ModuleView {
  name: string;
  enabled: boolean;
}

export interface StateView {
  generation: number;
  types: string[];
  scd_types: string[];
  rights: Record<string, string[]>;
  roles: RoleView[];
  users: UserView[];
  processes: ProcessView[];
  objects: ObjectView[];
  modules: ModuleView[];
  decision_log: string[];
}

export interface Decision {
  verdict: string;
  reason: string | null;
  detail: string | null;
  post_actions: string[];
  module_verdicts: [string, string][];
}

export interface ApiErrorBody {
  error: string;
  message: string;
  decision?: Decision;
}

export interface WhatIfRequest {
  subject: string;
  request_type: string;
  target?: string | null;
  target_kind?: string | null;
  params?: Record<string, string>;
}

export interface WhatIfResponse {
  decision: Decision;
  generation: number;
}
