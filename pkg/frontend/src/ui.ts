// DOM layer: renders the authoritative snapshot onto the angular canvas and
// wires the palette, knobs, goal bar, and proposal panel to store actions.
// Everything drawn here is an echo of server state; the only client-side
// math is the bearing projection.

import { CanvasProjection, angularExtent, bearingOf, distanceTo } from "./projection.js";
import { PlaygroundStore } from "./store.js";
import { StateDoc, TemplateId, Vec3, ZoneDoc } from "./types.js";

// distinct fill per template so all seven kinds are tellable at a glance
export const TEMPLATE_STYLES: Record<TemplateId, { fill: string; label: string }> = {
  "1x1": { fill: "#2d6cdf22", label: "1 x 1" },
  "2x2": { fill: "#27a17622", label: "2 x 2" },
  "1x2v": { fill: "#b0742222", label: "1 x 2 vertical" },
  "1x2h": { fill: "#8246af22", label: "1 x 2 horizontal" },
  "2x1v": { fill: "#bb3e6c22", label: "2 x 1 vertical" },
  "2x1h": { fill: "#2092a722", label: "2 x 1 horizontal" },
  occlusion: { fill: "#d8333355", label: "occlusion-free" },
};

const APP_PALETTE = [
  "ide", "terminal", "browser", "docs", "chat", "mail", "notes", "music",
];

type Interaction =
  | { mode: "idle" }
  | { mode: "place"; template: TemplateId }
  | { mode: "dragWindow"; app: string };

export class PlaygroundUI {
  private projection: CanvasProjection;
  private interaction: Interaction = { mode: "idle" };
  private selectedZone: string | null = null;

  constructor(
    private store: PlaygroundStore,
    private root: HTMLElement,
    private canvas: HTMLCanvasElement
  ) {
    this.projection = new CanvasProjection(canvas.width, canvas.height);
    store.on("snapshot", () => this.render());
    store.on("proposal", () => this.renderProposalPanel());
    store.on("error", () => this.renderStatus());
    canvas.addEventListener("click", (event) => this.onCanvasClick(event));
    this.buildChrome();
  }

  private buildChrome(): void {
    const palette = this.root.querySelector("#palette")!;
    for (const [template, style] of Object.entries(TEMPLATE_STYLES)) {
      const button = document.createElement("button");
      button.textContent = style.label;
      button.onclick = () => {
        this.interaction = { mode: "place", template: template as TemplateId };
        this.renderStatus();
      };
      palette.appendChild(button);
    }
    const apps = this.root.querySelector("#apps")!;
    for (const app of APP_PALETTE) {
      const chip = document.createElement("button");
      chip.textContent = app;
      chip.onclick = () => {
        this.interaction = { mode: "dragWindow", app };
        this.renderStatus();
      };
      apps.appendChild(chip);
    }
    const goalForm = this.root.querySelector("#goal-form") as HTMLFormElement;
    goalForm.onsubmit = (event) => {
      event.preventDefault();
      const input = this.root.querySelector("#goal-text") as HTMLInputElement;
      if (input.value.trim()) {
        void this.store.submitGoal(input.value.trim());
      }
    };
    (this.root.querySelector("#zoom-in") as HTMLButtonElement).onclick = () => {
      this.projection.zoomBy(1.25);
      this.render();
    };
    (this.root.querySelector("#zoom-out") as HTMLButtonElement).onclick = () => {
      this.projection.zoomBy(0.8);
      this.render();
    };
    const knob = this.root.querySelector("#knob") as HTMLInputElement;
    knob.oninput = () => {
      if (!this.selectedZone || !this.store.snapshot) return;
      const zone = this.store.snapshot.zones.find((z) => z.id === this.selectedZone);
      if (!zone) return;
      void this.store.applyOp({
        kind: "move_inner_knob",
        id: zone.id,
        axis: "vertical",
        value: Number(knob.value) * zone.width,
      });
    };
  }

  private onCanvasClick(event: MouseEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const bearing = this.projection.toBearing(x, y);
    const distance = 2.0;
    const position: Vec3 = [
      distance * Math.cos(bearing.elevation) * Math.sin(bearing.azimuth),
      distance * Math.sin(bearing.elevation),
      distance * Math.cos(bearing.elevation) * Math.cos(bearing.azimuth),
    ];
    if (this.interaction.mode === "place") {
      void this.store.createZone(this.interaction.template, 1.2, 0.9, position);
      this.interaction = { mode: "idle" };
      return;
    }
    if (this.interaction.mode === "dragWindow") {
      const hit = this.hitTestCell(x, y);
      if (hit) {
        void this.store.applyOp({
          kind: "drag_in",
          app: this.interaction.app,
          zone: hit.zone.id,
          cell: hit.cell,
        });
      }
      this.interaction = { mode: "idle" };
      return;
    }
    const hit = this.hitTestCell(x, y);
    this.selectedZone = hit ? hit.zone.id : null;
    this.renderStatus();
  }

  private zoneScreenRect(zone: ZoneDoc, state: StateDoc) {
    const bearing = bearingOf(state.pose, zone.position);
    const extent = angularExtent(state.pose, zone);
    const center = this.projection.toScreen(bearing);
    const w = this.projection.toPixels(extent.width);
    const h = this.projection.toPixels(extent.height);
    return { x: center.x - w / 2, y: center.y - h / 2, w, h };
  }

  private hitTestCell(
    px: number,
    py: number
  ): { zone: ZoneDoc; cell: number } | null {
    const state = this.store.snapshot;
    if (!state) return null;
    for (const zone of [...state.zones].reverse()) {
      const rect = this.zoneScreenRect(zone, state);
      if (px < rect.x || px > rect.x + rect.w || py < rect.y || py > rect.y + rect.h) {
        continue;
      }
      const u = ((px - rect.x) / rect.w) * zone.width;
      const v = ((py - rect.y) / rect.h) * zone.height;
      for (const cell of zone.cells) {
        if (
          u >= cell.x && u <= cell.x + cell.width &&
          v >= cell.y && v <= cell.y + cell.height
        ) {
          return { zone, cell: cell.index };
        }
      }
    }
    return null;
  }

  render(): void {
    const state = this.store.snapshot;
    const ctx = this.canvas.getContext("2d");
    if (!state || !ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.save();
    ctx.strokeStyle = "#ccc";
    ctx.beginPath();
    ctx.moveTo(this.canvas.width / 2, 0);
    ctx.lineTo(this.canvas.width / 2, this.canvas.height);
    ctx.moveTo(0, this.canvas.height / 2);
    ctx.lineTo(this.canvas.width, this.canvas.height / 2);
    ctx.stroke();
    ctx.restore();

    const occlusionRects = state.occlusions.map((occ) => ({
      occ,
      rect: this.zoneScreenRect(occ, state),
    }));
    for (const { occ, rect } of occlusionRects) {
      ctx.fillStyle = TEMPLATE_STYLES.occlusion.fill;
      ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
      ctx.strokeStyle = "#d83333";
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
      ctx.fillStyle = "#d83333";
      ctx.font = "11px sans-serif";
      ctx.fillText(occ.id, rect.x + 4, rect.y + 14);
    }

    for (const zone of state.zones) {
      const rect = this.zoneScreenRect(zone, state);
      ctx.fillStyle = TEMPLATE_STYLES[zone.template].fill;
      ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
      // red contour when intersecting an occlusion region, per the
      // arrangement-zone warning convention
      const intrudes = occlusionRects.some(({ rect: o }) =>
        rect.x < o.x + o.w && o.x < rect.x + rect.w &&
        rect.y < o.y + o.h && o.y < rect.y + rect.h
      );
      ctx.strokeStyle = intrudes ? "#d83333" : zone.id === this.selectedZone ? "#222" : "#667";
      ctx.lineWidth = intrudes || zone.id === this.selectedZone ? 2.5 : 1;
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
      ctx.lineWidth = 1;
      for (const cell of zone.cells) {
        const cx = rect.x + (cell.x / zone.width) * rect.w;
        const cy = rect.y + (cell.y / zone.height) * rect.h;
        const cw = (cell.width / zone.width) * rect.w;
        const ch = (cell.height / zone.height) * rect.h;
        ctx.strokeStyle = "#99a";
        ctx.strokeRect(cx, cy, cw, ch);
        if (cell.occupant) {
          ctx.fillStyle = "#223";
          ctx.font = "12px sans-serif";
          ctx.fillText(cell.occupant, cx + 4, cy + 16);
        }
      }
      ctx.fillStyle = "#445";
      ctx.font = "11px sans-serif";
      ctx.fillText(
        `${zone.id} (${zone.template}, ${distanceTo(state.pose, zone.position).toFixed(1)} m)`,
        rect.x + 4,
        rect.y - 4
      );
    }

    for (const window of state.windows) {
      if (window.host || !window.position) continue;
      const bearing = bearingOf(state.pose, window.position);
      const point = this.projection.toScreen(bearing);
      ctx.strokeStyle = "#222";
      ctx.strokeRect(point.x - 18, point.y - 12, 36, 24);
      ctx.fillStyle = "#223";
      ctx.fillText(window.app, point.x - 16, point.y + 4);
    }

    this.renderStatus();
  }

  renderStatus(): void {
    const status = this.root.querySelector("#status")!;
    const parts = [
      `revision ${this.store.revision}`,
      this.interaction.mode === "place"
        ? `placing ${this.interaction.template}`
        : this.interaction.mode === "dragWindow"
          ? `dropping ${this.interaction.app}`
          : this.selectedZone
            ? `selected ${this.selectedZone}`
            : "idle",
    ];
    if (this.store.polling) parts.push("waiting for the recommendation…");
    if (this.store.lastClamped) parts.push("knob clamped to its admissible range");
    if (this.store.lastError) parts.push(`last error: ${this.store.lastError}`);
    status.textContent = parts.join(" · ");
  }

  renderProposalPanel(): void {
    const panel = this.root.querySelector("#proposal")!;
    panel.innerHTML = "";
    const proposal = this.store.proposal;
    if (!proposal || !proposal.assignment) {
      this.render();
      return;
    }
    const heading = document.createElement("h3");
    heading.textContent = `Proposal ${proposal.id}` + (proposal.fallback ? " — heuristic fallback" : "");
    if (proposal.fallback) heading.classList.add("fallback");
    panel.appendChild(heading);

    const byZone = new Map<string, [string, number][]>();
    for (const [app, cell] of Object.entries(proposal.assignment.entries)) {
      const list = byZone.get(cell[0]) ?? [];
      list.push([app, cell[1]]);
      byZone.set(cell[0], list);
    }
    const scores = new Map(
      (proposal.relevance?.entries ?? []).map((e) => [e.app, e.score])
    );
    for (const [zoneId, apps] of byZone) {
      const section = document.createElement("div");
      section.className = "zone-cards";
      const header = document.createElement("h4");
      header.textContent = zoneId;
      const batch = document.createElement("button");
      batch.textContent = "accept zone";
      batch.onclick = () => this.store.batchAcceptZone(zoneId);
      const declineAll = document.createElement("button");
      declineAll.textContent = "decline zone";
      declineAll.onclick = () => this.store.declineZone(zoneId);
      header.append(" ", batch, " ", declineAll);
      section.appendChild(header);
      for (const [app, cell] of apps) {
        const card = document.createElement("label");
        card.className = "card";
        const toggle = document.createElement("input");
        toggle.type = "checkbox";
        toggle.checked = this.store.toggles[app] === "accept";
        toggle.onchange = () =>
          this.store.setToggle(app, toggle.checked ? "accept" : "decline");
        card.append(
          toggle,
          ` ${app} → cell ${cell} (r=${(scores.get(app) ?? 0).toFixed(2)})`
        );
        section.appendChild(card);
      }
      panel.appendChild(section);
    }
    const sizing = document.createElement("pre");
    sizing.textContent = proposal.sizing
      .map(
        (s) =>
          `${s.zone}: θ*=(${s.theta_star.w0.toFixed(2)}, ${s.theta_star.h0.toFixed(2)})` +
          ` ×${s.scale_factor.toFixed(2)}${s.scale_clamped ? " (clamped)" : ""}`
      )
      .join("\n");
    panel.appendChild(sizing);

    const confirm = document.createElement("button");
    confirm.textContent = "confirm decisions";
    confirm.disabled = !this.store.decisionsComplete();
    confirm.onclick = () => void this.store.resolve();
    panel.appendChild(confirm);
    this.render();
  }
}
