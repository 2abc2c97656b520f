import { describe, expect, it } from "vitest";
import { bboxDiag, centroid, parseObj } from "../src/mesh.js";

describe("parseObj", () => {
  it("parses vertices and triangles", () => {
    const m = parseObj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    expect(Array.from(m.positions)).toEqual([0, 0, 0, 1, 0, 0, 0, 1, 0]);
    expect(Array.from(m.triangles)).toEqual([0, 1, 2]);
  });

  it("fan-triangulates quads and strips slash suffixes", () => {
    const m = parseObj(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n",
    );
    expect(Array.from(m.triangles)).toEqual([0, 1, 2, 0, 2, 3]);
  });
});

describe("bboxDiag", () => {
  it("computes the bounding-box diagonal", () => {
    expect(bboxDiag([0, 0, 0, 1, 2, 2])).toBeCloseTo(3, 12);
  });
});

describe("centroid", () => {
  it("averages the selected vertex positions", () => {
    const pos = [0, 0, 0, 2, 0, 0, 0, 4, 0];
    expect(centroid([0, 1], pos)).toEqual([1, 0, 0]);
  });
});
