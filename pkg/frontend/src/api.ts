// Thin typed client for the layout service. Transport is injectable so the
// store can be tested without a network.

import {
  AcceptanceRecordDoc,
  CellDecision,
  Envelope,
  ErrorDoc,
  GoalDoc,
  Op,
  ProposalDoc,
  SCHEMA_VERSION,
  StateDoc,
} from "./types.js";

export type Transport = (
  method: "GET" | "POST",
  path: string,
  body?: unknown
) => Promise<{ status: number; body: Envelope<unknown> }>;

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public diagnostics: string[] = []
  ) {
    super(message);
  }
}

export function fetchTransport(baseUrl: string): Transport {
  return async (method, path, body) => {
    const response = await fetch(baseUrl + path, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const parsed = (await response.json()) as Envelope<unknown>;
    return { status: response.status, body: parsed };
  };
}

let requestCounter = 0;

export function envelope(kind: string, body: unknown): Envelope<unknown> {
  requestCounter += 1;
  return {
    schema_version: SCHEMA_VERSION,
    kind,
    request_id: `ui-${requestCounter}`,
    body,
  };
}

function unwrap<T>(status: number, env: Envelope<unknown>): T {
  if (env.kind === "error") {
    const error = env.body as ErrorDoc;
    throw new ServiceError(status, error.code, error.message, error.diagnostics);
  }
  if (status >= 400) {
    throw new ServiceError(status, "http_error", `status ${status}`);
  }
  return env.body as T;
}

export class ApiClient {
  constructor(private transport: Transport) {}

  async createWorkspace(state: StateDoc): Promise<{ id: string; revision: number }> {
    const { status, body } = await this.transport(
      "POST",
      "/v1/workspaces",
      envelope("workspace_create", state)
    );
    return unwrap(status, body);
  }

  async snapshot(workspaceId: string): Promise<StateDoc> {
    const { status, body } = await this.transport(
      "GET",
      `/v1/workspaces/${workspaceId}`
    );
    return unwrap(status, body);
  }

  async applyOp(
    workspaceId: string,
    op: Op,
    expectedRevision?: number
  ): Promise<{ revision: number; state: StateDoc; clamped?: boolean }> {
    const payload: Record<string, unknown> = { op };
    if (expectedRevision !== undefined) {
      payload.expected_revision = expectedRevision;
    }
    const { status, body } = await this.transport(
      "POST",
      `/v1/workspaces/${workspaceId}/ops`,
      envelope("ops_request", payload)
    );
    return unwrap(status, body);
  }

  async recommend(
    workspaceId: string,
    goal: GoalDoc,
    wait = false
  ): Promise<ProposalDoc> {
    const { status, body } = await this.transport(
      "POST",
      `/v1/workspaces/${workspaceId}/recommend`,
      envelope("recommend_request", { goal, wait })
    );
    return unwrap(status, body);
  }

  async resolve(
    workspaceId: string,
    decisions: Record<string, CellDecision>,
    batchAcceptZones: string[]
  ): Promise<{ record: AcceptanceRecordDoc; state: StateDoc }> {
    const { status, body } = await this.transport(
      "POST",
      `/v1/workspaces/${workspaceId}/resolve`,
      envelope("resolve_request", {
        decisions,
        batch_accept_zones: batchAcceptZones,
      })
    );
    return unwrap(status, body);
  }
}
