import { describe, expect, it } from "vitest";

import { CanvasProjection, angularExtent, bearingOf } from "../src/projection.js";
import { PoseDoc, ZoneDoc } from "../src/types.js";

const pose: PoseDoc = { position: [0, 0, 0], forward: [0, 0, 1] };

describe("bearingOf", () => {
  it("points straight ahead at zero", () => {
    const b = bearingOf(pose, [0, 0, 2]);
    expect(b.azimuth).toBeCloseTo(0, 12);
    expect(b.elevation).toBeCloseTo(0, 12);
  });

  it("positive azimuth is to the user's right", () => {
    expect(bearingOf(pose, [1, 0, 1]).azimuth).toBeCloseTo(Math.PI / 4, 12);
    expect(bearingOf(pose, [-1, 0, 1]).azimuth).toBeCloseTo(-Math.PI / 4, 12);
  });

  it("positive elevation is up", () => {
    expect(bearingOf(pose, [0, 1, 1]).elevation).toBeCloseTo(Math.PI / 4, 12);
  });
});

describe("CanvasProjection", () => {
  it("screen -> bearing -> screen round trip stays under half a pixel", () => {
    const projection = new CanvasProjection(980, 560);
    for (let x = 0; x <= 980; x += 49) {
      for (let y = 0; y <= 560; y += 35) {
        const bearing = projection.toBearing(x, y);
        const back = projection.toScreen(bearing);
        expect(Math.abs(back.x - x)).toBeLessThan(0.5);
        expect(Math.abs(back.y - y)).toBeLessThan(0.5);
      }
    }
  });

  it("round trip holds across zoom levels", () => {
    const projection = new CanvasProjection(980, 560);
    for (const zoom of [0.25, 0.5, 2, 8]) {
      projection.zoom = zoom;
      const bearing = projection.toBearing(123.4, 456.7);
      const back = projection.toScreen(bearing);
      expect(Math.abs(back.x - 123.4)).toBeLessThan(0.5);
      expect(Math.abs(back.y - 456.7)).toBeLessThan(0.5);
    }
  });

  it("zoom is clamped to a sane range", () => {
    const projection = new CanvasProjection(980, 560);
    projection.zoomBy(1000);
    expect(projection.zoom).toBeLessThanOrEqual(8);
    projection.zoomBy(0.000001);
    expect(projection.zoom).toBeGreaterThanOrEqual(0.25);
  });
});

describe("angularExtent", () => {
  it("matches arctan of the half dimensions", () => {
    const zone = {
      id: "z",
      template: "1x1",
      width: 1,
      height: 1,
      position: [0, 0, 2],
      orientation: { normal: [0, 0, -1], up: [0, 1, 0] },
      theta: { w0: 0.5, h0: 0.5 },
      locked: false,
      cells: [],
    } as unknown as ZoneDoc;
    const extent = angularExtent(pose, zone);
    expect(extent.width).toBeCloseTo(2 * Math.atan(0.25), 12);
    expect(extent.height).toBeCloseTo(2 * Math.atan(0.25), 12);
  });
});

describe("template styling", () => {
  it("all six templates plus occlusion are visually distinct", async () => {
    const { TEMPLATE_STYLES } = await import("../src/ui.js");
    const fills = Object.values(TEMPLATE_STYLES).map((s) => s.fill);
    expect(fills.length).toBe(7);
    expect(new Set(fills).size).toBe(7);
  });
});
