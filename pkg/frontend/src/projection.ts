// 2-D angular canvas: azimuth maps to x, elevation to y. This is the exact
// observable geometry of the engine (bearings and angular sizes), so the
// playground shows what the cost model sees; depth appears only as a numeric
// distance per zone.

import { PoseDoc, Vec3, ZoneDoc } from "./types.js";

export type Bearing = { azimuth: number; elevation: number };

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

const WORLD_UP: Vec3 = [0, 1, 0];

/** User-relative bearing of a world point (radians, +azimuth to the right). */
export function bearingOf(pose: PoseDoc, point: Vec3): Bearing {
  const d = sub(point, pose.position);
  const len = norm(d);
  const f = pose.forward;
  const fh: Vec3 = [f[0], 0, f[2]];
  const fhLen = norm(fh) || 1;
  const forward: Vec3 = [fh[0] / fhLen, 0, fh[2] / fhLen];
  // right = world_up x forward
  const right: Vec3 = [
    WORLD_UP[1] * forward[2] - WORLD_UP[2] * forward[1],
    WORLD_UP[2] * forward[0] - WORLD_UP[0] * forward[2],
    WORLD_UP[0] * forward[1] - WORLD_UP[1] * forward[0],
  ];
  const unit: Vec3 = [d[0] / len, d[1] / len, d[2] / len];
  return {
    azimuth: Math.atan2(dot(unit, right), dot(unit, forward)),
    elevation: Math.asin(Math.max(-1, Math.min(1, dot(unit, WORLD_UP)))),
  };
}

export function distanceTo(pose: PoseDoc, point: Vec3): number {
  return norm(sub(point, pose.position));
}

/** Angular width/height a zone rectangle subtends from the pose (radians). */
export function angularExtent(pose: PoseDoc, zone: ZoneDoc): { width: number; height: number } {
  const d = distanceTo(pose, zone.position);
  return {
    width: 2 * Math.atan(zone.width / 2 / d),
    height: 2 * Math.atan(zone.height / 2 / d),
  };
}

export class CanvasProjection {
  // pixels per radian of azimuth at zoom 1; elevation shares the scale so
  // angular squares render square
  constructor(
    public width: number,
    public height: number,
    public zoom = 1,
    public pixelsPerRadian = 220
  ) {}

  private get scale(): number {
    return this.pixelsPerRadian * this.zoom;
  }

  toScreen(bearing: Bearing): { x: number; y: number } {
    return {
      x: this.width / 2 + bearing.azimuth * this.scale,
      y: this.height / 2 - bearing.elevation * this.scale,
    };
  }

  toBearing(x: number, y: number): Bearing {
    return {
      azimuth: (x - this.width / 2) / this.scale,
      elevation: (this.height / 2 - y) / this.scale,
    };
  }

  /** Screen size of an angular extent. */
  toPixels(radians: number): number {
    return radians * this.scale;
  }

  zoomBy(factor: number): void {
    this.zoom = Math.min(8, Math.max(0.25, this.zoom * factor));
  }
}
