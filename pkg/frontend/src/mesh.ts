/** Minimal OBJ parsing for the bundled fixture meshes (v/f lines only). */

export interface ParsedMesh {
  positions: Float32Array;
  triangles: Uint32Array;
}

export function parseObj(text: string): ParsedMesh {
  const verts: number[] = [];
  const tris: number[] = [];
  for (const line of text.split("\n")) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === "v") {
      verts.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (parts[0] === "f") {
      const ids = parts.slice(1).map((p) => Number(p.split("/")[0]) - 1);
      for (let i = 1; i + 1 < ids.length; i++) {
        tris.push(ids[0], ids[i], ids[i + 1]);
      }
    }
  }
  return {
    positions: new Float32Array(verts),
    triangles: new Uint32Array(tris),
  };
}

export function bboxDiag(positions: ArrayLike<number>): number {
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < positions.length; i += 3) {
    for (let c = 0; c < 3; c++) {
      lo[c] = Math.min(lo[c], positions[i + c]);
      hi[c] = Math.max(hi[c], positions[i + c]);
    }
  }
  return Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
}

export function centroid(
  vertices: number[],
  positions: ArrayLike<number>,
): [number, number, number] {
  const c: [number, number, number] = [0, 0, 0];
  for (const v of vertices) {
    c[0] += positions[3 * v];
    c[1] += positions[3 * v + 1];
    c[2] += positions[3 * v + 2];
  }
  const n = Math.max(1, vertices.length);
  return [c[0] / n, c[1] / n, c[2] / n];
}
