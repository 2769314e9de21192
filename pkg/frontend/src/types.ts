// Wire document shapes, mirroring the service's versioned JSON schema.
// The client never computes layout itself; it renders what the server says.

export const SCHEMA_VERSION = "1";

export type Envelope<T> = {
  schema_version: string;
  kind: string;
  request_id: string;
  body: T;
};

export type Vec3 = [number, number, number];

export type PoseDoc = {
  position: Vec3;
  forward: Vec3;
};

export type ThetaDoc = { w0: number; h0: number };

export type CellDoc = {
  index: number;
  x: number;
  y: number;
  width: number;
  height: number;
  occupant: string | null;
};

export type TemplateId = "1x1" | "2x2" | "1x2v" | "1x2h" | "2x1v" | "2x1h" | "occlusion";

export type ZoneDoc = {
  id: string;
  template: TemplateId;
  width: number;
  height: number;
  position: Vec3;
  orientation: { normal: Vec3; up: Vec3 };
  theta: ThetaDoc;
  locked: boolean;
  cells: CellDoc[];
};

export type WindowDoc = {
  app: string;
  position: Vec3 | null;
  width: number | null;
  height: number | null;
  host: [string, number] | null;
};

export type GoalDoc = { text: string; source: string };

export type RelevanceDoc = {
  goal: GoalDoc;
  entries: { app: string; score: number }[];
  fallback: boolean;
};

export type AssignmentDoc = {
  entries: Record<string, [string, number]>;
  provenance: Record<string, string>;
  unassigned: string[];
};

export type SizingResultDoc = {
  zone: string;
  theta_star: ThetaDoc;
  scale_factor: number;
  objective_value: number;
  evaluated_points: number;
  scale_clamped: boolean;
  locked: boolean;
};

export type ProposalStatus = "pending" | "ready" | "failed";

export type ProposalDoc = {
  id: string;
  status: ProposalStatus;
  goal: GoalDoc;
  relevance: RelevanceDoc | null;
  assignment: AssignmentDoc | null;
  sizing: SizingResultDoc[];
  total_cost: number;
  fallback: boolean;
  dropped: string[];
  warnings: string[];
  error: string | null;
};

export type StateDoc = {
  id: string;
  revision: number;
  pose: PoseDoc;
  zones: ZoneDoc[];
  occlusions: ZoneDoc[];
  windows: WindowDoc[];
  pending: ProposalDoc | null;
  events: unknown[];
};

export type AcceptanceRecordDoc = {
  proposal_id: string;
  decisions: Record<string, string>;
  proposed: number;
  accepted: number;
  declined: number;
  overridden: number;
  layouts_adjusted: number;
  reorderings: number;
};

export type ErrorDoc = {
  code: string;
  message: string;
  diagnostics: string[];
};

export type CellDecision = "accept" | "decline" | { override: [string, number] };

export type Op =
  | { kind: "create_zone"; id: string; template: TemplateId; width: number; height: number; position: Vec3; locked?: boolean }
  | { kind: "create_occlusion"; id: string; width: number; height: number; position: Vec3 }
  | { kind: "delete_zone"; id: string }
  | { kind: "translate_zone"; id: string; position: Vec3 }
  | { kind: "move_inner_knob"; id: string; axis: "vertical" | "horizontal"; value: number }
  | { kind: "move_outer_knob"; id: string; width: number; height: number }
  | { kind: "drag_in"; app: string; zone: string; cell: number }
  | { kind: "drag_out"; app: string; position: Vec3 };
