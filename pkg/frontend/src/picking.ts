/** Ray picking and radius-grow handle selection.
 *
 * Pure array math (no renderer types) so the logic is unit-testable;
 * the viewer converts three.js rays to plain vectors before calling in.
 */

export type Vec3 = [number, number, number];

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export interface RayHit {
  triangle: number;
  t: number;
  point: Vec3;
}

/** Moeller-Trumbore ray/triangle intersection; returns t or null. */
export function rayTriangle(
  origin: Vec3,
  dir: Vec3,
  v0: Vec3,
  v1: Vec3,
  v2: Vec3,
): number | null {
  const e1 = sub(v1, v0);
  const e2 = sub(v2, v0);
  const p = cross(dir, e2);
  const det = dot(e1, p);
  if (Math.abs(det) < 1e-12) return null;
  const inv = 1 / det;
  const s = sub(origin, v0);
  const u = dot(s, p) * inv;
  if (u < 0 || u > 1) return null;
  const q = cross(s, e1);
  const v = dot(dir, q) * inv;
  if (v < 0 || u + v > 1) return null;
  const t = dot(e2, q) * inv;
  return t > 1e-12 ? t : null;
}

/** Closest intersection of a ray with an indexed triangle soup. */
export function pickSurface(
  origin: Vec3,
  dir: Vec3,
  positions: ArrayLike<number>,
  triangles: ArrayLike<number>,
): RayHit | null {
  let best: RayHit | null = null;
  const vert = (i: number): Vec3 => [
    positions[3 * i],
    positions[3 * i + 1],
    positions[3 * i + 2],
  ];
  for (let t = 0; t * 3 < triangles.length; t++) {
    const hit = rayTriangle(
      origin,
      dir,
      vert(triangles[3 * t]),
      vert(triangles[3 * t + 1]),
      vert(triangles[3 * t + 2]),
    );
    if (hit !== null && (best === null || hit < best.t)) {
      best = {
        triangle: t,
        t: hit,
        point: [
          origin[0] + hit * dir[0],
          origin[1] + hit * dir[1],
          origin[2] + hit * dir[2],
        ],
      };
    }
  }
  return best;
}

/** Vertices within a world-space radius of a point. Radius 0 selects the
 *  single nearest vertex (single-vertex handles). */
export function growSelection(
  point: Vec3,
  radius: number,
  positions: ArrayLike<number>,
): number[] {
  const n = positions.length / 3;
  if (radius <= 0) {
    let bestV = -1;
    let bestD = Infinity;
    for (let v = 0; v < n; v++) {
      const d = Math.hypot(
        positions[3 * v] - point[0],
        positions[3 * v + 1] - point[1],
        positions[3 * v + 2] - point[2],
      );
      if (d < bestD) {
        bestD = d;
        bestV = v;
      }
    }
    return bestV >= 0 ? [bestV] : [];
  }
  const out: number[] = [];
  for (let v = 0; v < n; v++) {
    const d = Math.hypot(
      positions[3 * v] - point[0],
      positions[3 * v + 1] - point[1],
      positions[3 * v + 2] - point[2],
    );
    if (d <= radius) out.push(v);
  }
  return out;
}
