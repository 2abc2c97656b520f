import { describe, expect, it } from "vitest";
import {
  growSelection,
  pickSurface,
  rayTriangle,
  type Vec3,
} from "../src/picking.js";

const v0: Vec3 = [0, 0, 0];
const v1: Vec3 = [1, 0, 0];
const v2: Vec3 = [0, 1, 0];

describe("rayTriangle", () => {
  it("hits a triangle straight on", () => {
    const t = rayTriangle([0.25, 0.25, 1], [0, 0, -1], v0, v1, v2);
    expect(t).toBeCloseTo(1, 12);
  });

  it("misses outside the triangle and for parallel rays", () => {
    expect(rayTriangle([2, 2, 1], [0, 0, -1], v0, v1, v2)).toBeNull();
    expect(rayTriangle([0.25, 0.25, 1], [1, 0, 0], v0, v1, v2)).toBeNull();
  });

  it("ignores intersections behind the origin", () => {
    expect(rayTriangle([0.25, 0.25, -1], [0, 0, -1], v0, v1, v2)).toBeNull();
  });
});

describe("pickSurface", () => {
  // two stacked triangles at z=0 and z=-1
  const positions = [0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, -1, 1, 0, -1, 0, 1, -1];
  const triangles = [0, 1, 2, 3, 4, 5];

  it("returns the closest hit", () => {
    const hit = pickSurface([0.2, 0.2, 2], [0, 0, -1], positions, triangles);
    expect(hit).not.toBeNull();
    expect(hit!.triangle).toBe(0);
    expect(hit!.point[2]).toBeCloseTo(0, 12);
  });

  it("returns null on background clicks", () => {
    expect(pickSurface([5, 5, 2], [0, 0, -1], positions, triangles)).toBeNull();
  });
});

describe("growSelection", () => {
  const positions = [0, 0, 0, 1, 0, 0, 2, 0, 0, 3, 0, 0];

  it("radius 0 selects the single nearest vertex", () => {
    expect(growSelection([1.1, 0, 0], 0, positions)).toEqual([1]);
  });

  it("positive radius selects everything within range", () => {
    expect(growSelection([0, 0, 0], 1.5, positions)).toEqual([0, 1]);
    expect(growSelection([1.5, 0, 0], 10, positions)).toEqual([0, 1, 2, 3]);
  });
});
