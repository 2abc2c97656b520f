/** Editor state: handle list, per-handle transforms, beta, display mode.
 *
 * Client-side validation mirrors the service rules so invalid requests
 * never leave the browser.
 */

import type { HandleSpec, TransformSpec } from "./api.js";

export type DisplayMode = "shaded" | "energy" | "iso" | "conf";
export type OperatorKind = "flat" | "curved";

export const BETA_MIN = 0;
export const BETA_MAX = 0.99;

export interface EditorHandle {
  name: string;
  vertices: number[];
  transform: TransformSpec;
}

export function clampBeta(value: number): number {
  if (!Number.isFinite(value)) return BETA_MIN;
  return Math.min(BETA_MAX, Math.max(BETA_MIN, value));
}

export function normalizeQuat(
  q: [number, number, number, number],
): [number, number, number, number] {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n < 1e-12) return [1, 0, 0, 0];
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export class EditorState {
  sessionId: string | null = null;
  nVertices = 0;
  bboxDiag = 0;
  beta = 0.2;
  operator: OperatorKind = "curved";
  displayMode: DisplayMode = "energy";
  handles: EditorHandle[] = [];

  setBeta(value: number): void {
    this.beta = clampBeta(value);
  }

  /** Add a handle; rejects duplicates names, overlaps, and empty or
   *  all-covering selections (the service would 422 on the same input). */
  addHandle(name: string, vertices: number[]): string | null {
    if (vertices.length === 0) return "selection is empty";
    if (this.handles.some((h) => h.name === name)) {
      return `handle "${name}" already exists`;
    }
    const taken = new Set<number>();
    for (const h of this.handles) for (const v of h.vertices) taken.add(v);
    for (const v of vertices) {
      if (taken.has(v)) return "handles must not overlap";
    }
    const total = taken.size + new Set(vertices).size;
    if (total >= this.nVertices) return "no free vertices would remain";
    this.handles.push({
      name,
      vertices: [...new Set(vertices)].sort((a, b) => a - b),
      transform: {},
    });
    return null;
  }

  removeHandle(name: string): void {
    this.handles = this.handles.filter((h) => h.name !== name);
  }

  setTransform(name: string, transform: TransformSpec): void {
    const h = this.handles.find((x) => x.name === name);
    if (!h) return;
    if (transform.rotation) {
      transform = { ...transform, rotation: normalizeQuat(transform.rotation) };
    }
    h.transform = transform;
  }

  /** Selection radii at or beyond the bbox diagonal would swallow the
   *  whole mesh, leaving nothing free to solve for. */
  validRadius(radius: number): boolean {
    return radius >= 0 && radius < this.bboxDiag;
  }

  handleSpecs(): HandleSpec[] {
    return this.handles.map((h) => ({ name: h.name, vertices: h.vertices }));
  }

  transforms(): Record<string, TransformSpec> {
    const out: Record<string, TransformSpec> = {};
    for (const h of this.handles) {
      if (Object.keys(h.transform).length > 0) out[h.name] = h.transform;
    }
    return out;
  }
}
