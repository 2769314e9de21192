// Client-side session state. The store holds no authoritative layout: every
// render comes from the latest server snapshot, mutations carry the expected
// revision, and a stale 409 just refreshes. One mutation is in flight at a
// time; later ones queue locally.

import { ApiClient, ServiceError } from "./api.js";
import {
  CellDecision,
  Op,
  ProposalDoc,
  StateDoc,
  TemplateId,
  Vec3,
} from "./types.js";

export type StoreEvent =
  | "snapshot"
  | "proposal"
  | "error"
  | "busy";

export type Listener = () => void;

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class PlaygroundStore {
  snapshot: StateDoc | null = null;
  proposal: ProposalDoc | null = null;
  toggles: Record<string, "accept" | "decline"> = {};
  batchZones: Set<string> = new Set();
  lastError: string | null = null;
  lastClamped = false;
  polling = false;

  private listeners = new Map<StoreEvent, Set<Listener>>();
  private queue: Promise<unknown> = Promise.resolve();
  private counter = 0;

  constructor(
    private api: ApiClient,
    private workspaceId: string,
    private pollIntervalMs = 1000
  ) {}

  on(event: StoreEvent, listener: Listener): void {
    if (!this.listeners.has(event)) {
      this.listeners.set(event, new Set());
    }
    this.listeners.get(event)!.add(listener);
  }

  private emit(event: StoreEvent): void {
    for (const listener of this.listeners.get(event) ?? []) {
      listener();
    }
  }

  nextId(prefix: string): string {
    this.counter += 1;
    return `${prefix}-${this.counter}`;
  }

  get revision(): number {
    return this.snapshot?.revision ?? 0;
  }

  async refresh(): Promise<StateDoc> {
    const snapshot = await this.api.snapshot(this.workspaceId);
    this.snapshot = snapshot;
    if (snapshot.pending && snapshot.pending.status === "ready") {
      this.adoptProposal(snapshot.pending);
    } else if (!snapshot.pending) {
      this.proposal = null;
    }
    this.emit("snapshot");
    return snapshot;
  }

  /** Serialize mutations: at most one request in flight, rest queued. */
  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.queue.then(work, work);
    this.queue = next.then(
      () => undefined,
      () => undefined
    );
    return next;
  }

  applyOp(op: Op): Promise<void> {
    return this.enqueue(async () => {
      this.emit("busy");
      try {
        const result = await this.api.applyOp(this.workspaceId, op, this.revision);
        this.snapshot = result.state;
        this.lastClamped = Boolean(result.clamped);
        this.lastError = null;
        this.emit("snapshot");
      } catch (error) {
        if (error instanceof ServiceError && error.status === 409) {
          // stale revision or a rejected drop: surface it and re-sync
          this.lastError = `${error.code}: ${error.message}`;
          await this.refresh();
        } else {
          this.lastError = error instanceof Error ? error.message : String(error);
        }
        this.emit("error");
      }
    });
  }

  createZone(template: TemplateId, width: number, height: number, position: Vec3) {
    if (template === "occlusion") {
      return this.applyOp({
        kind: "create_occlusion",
        id: this.nextId("occ"),
        width,
        height,
        position,
      });
    }
    return this.applyOp({
      kind: "create_zone",
      id: this.nextId("zone"),
      template,
      width,
      height,
      position,
    });
  }

  /** Submit a goal, then poll the snapshot until the proposal settles. */
  submitGoal(text: string): Promise<ProposalDoc> {
    return this.enqueue(async () => {
      this.emit("busy");
      const first = await this.api.recommend(
        this.workspaceId,
        { text, source: "typed" },
        false
      );
      if (first.status === "ready") {
        await this.refresh();
        this.adoptProposal(first);
        return first;
      }
      this.polling = true;
      try {
        while (true) {
          await sleep(this.pollIntervalMs);
          const snapshot = await this.refresh();
          const pending = snapshot.pending;
          if (!pending) {
            throw new Error("proposal disappeared while polling");
          }
          if (pending.status === "failed") {
            this.lastError = pending.error ?? "recommendation failed";
            this.emit("error");
            throw new Error(this.lastError);
          }
          if (pending.status === "ready") {
            this.adoptProposal(pending);
            return pending;
          }
        }
      } finally {
        this.polling = false;
      }
    });
  }

  private adoptProposal(proposal: ProposalDoc): void {
    const isNew = this.proposal?.id !== proposal.id;
    this.proposal = proposal;
    if (isNew) {
      this.toggles = {};
      this.batchZones = new Set();
      for (const app of Object.keys(proposal.assignment?.entries ?? {})) {
        this.toggles[app] = "accept";
      }
    }
    this.emit("proposal");
  }

  setToggle(app: string, decision: "accept" | "decline"): void {
    this.toggles[app] = decision;
    this.emit("proposal");
  }

  /** Batch-accept one zone: every proposed cell in it flips to accept. */
  batchAcceptZone(zoneId: string): void {
    this.batchZones.add(zoneId);
    const entries = this.proposal?.assignment?.entries ?? {};
    for (const [app, cell] of Object.entries(entries)) {
      if (cell[0] === zoneId) {
        this.toggles[app] = "accept";
      }
    }
    this.emit("proposal");
  }

  declineZone(zoneId: string): void {
    this.batchZones.delete(zoneId);
    const entries = this.proposal?.assignment?.entries ?? {};
    for (const [app, cell] of Object.entries(entries)) {
      if (cell[0] === zoneId) {
        this.toggles[app] = "decline";
      }
    }
    this.emit("proposal");
  }

  /** Toggle count must always equal the proposed entry count. */
  decisionsComplete(): boolean {
    const entries = Object.keys(this.proposal?.assignment?.entries ?? {});
    return entries.every((app) => app in this.toggles);
  }

  resolve(): Promise<import("./types.js").AcceptanceRecordDoc> {
    return this.enqueue(async () => {
      if (!this.proposal) {
        throw new Error("no proposal to resolve");
      }
      const decisions: Record<string, CellDecision> = {};
      for (const app of Object.keys(this.proposal.assignment?.entries ?? {})) {
        decisions[app] = this.toggles[app] ?? "decline";
      }
      const result = await this.api.resolve(
        this.workspaceId,
        decisions,
        Array.from(this.batchZones)
      );
      this.snapshot = result.state;
      this.proposal = null;
      this.toggles = {};
      this.batchZones = new Set();
      this.emit("snapshot");
      this.emit("proposal");
      return result.record;
    });
  }
}
