"""Triangle mesh container, OBJ/PLY I/O and edge topology."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

# Relative area threshold below which a triangle counts as degenerate.
AREA_EPS_REL = 1e-12


class MeshError(Exception):
    """Mesh loading / validation failure with a stable error code."""

    def __init__(self, code: str, message: str, line: int | None = None):
        self.code = code
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Mesh:
    """Immutable indexed triangle surface.

    vertices : (V, 3) float64, row i holds x_i
    triangles: (T, 3) int indices (i, j, k)
    areas    : (T,) triangle areas
    normals  : (T, 3) unit triangle normals
    """

    vertices: np.ndarray
    triangles: np.ndarray
    areas: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def bbox_diag(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def make_mesh(vertices, triangles, face_lines=None) -> Mesh:
    """Validate raw arrays and build a Mesh.

    face_lines optionally maps each triangle to its source line in an OBJ
    file so degenerate-triangle errors can point at the offending face.
    """
    V = np.ascontiguousarray(vertices, dtype=np.float64)
    T = np.ascontiguousarray(triangles, dtype=np.int64)
    if V.ndim != 2 or V.shape[1] != 3:
        raise MeshError("bad-vertices", f"vertex array must be (V, 3), got {V.shape}")
    if T.ndim != 2 or T.shape[1] != 3:
        raise MeshError("bad-faces", f"triangle array must be (T, 3), got {T.shape}")
    if len(T) and (T.min() < 0 or T.max() >= len(V)):
        bad = int(np.flatnonzero(((T < 0) | (T >= len(V))).any(axis=1))[0])
        raise MeshError("index-out-of-range",
                        f"triangle {bad} references a vertex outside [0, {len(V)})",
                        line=None if face_lines is None else int(face_lines[bad]))

    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    cross = np.cross(b - a, c - a)
    norms = np.linalg.norm(cross, axis=1)
    areas = 0.5 * norms

    diag = float(np.linalg.norm(V.max(axis=0) - V.min(axis=0))) if len(V) else 0.0
    eps_area = AREA_EPS_REL * diag * diag
    bad = np.flatnonzero(areas <= eps_area)
    if bad.size:
        t = int(bad[0])
        raise MeshError("zero-area-triangle",
                        f"triangle {t} {tuple(T[t])} has area {areas[t]:g} <= {eps_area:g}",
                        line=None if face_lines is None else int(face_lines[t]))

    normals = cross / norms[:, None]
    for arr in (V, T, areas, normals):
        arr.setflags(write=False)
    return Mesh(V, T, areas, normals)


def parse_obj(text: str) -> Mesh:
    """Parse Wavefront OBJ text into a Mesh.

    Polygon faces are fan-triangulated from the first face vertex.
    Normals, texture coordinates, and materials are ignored.
    """
    vertices: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    face_lines: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshError("malformed-vertex",
                                f"vertex needs 3 coordinates, got {len(parts) - 1}", lineno)
            try:
                vertices.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise MeshError("malformed-vertex", f"cannot parse {raw!r}", lineno) from None
        elif tag == "f":
            if len(parts) < 4:
                raise MeshError("malformed-face", "face needs at least 3 vertices", lineno)
            idx = []
            for p in parts[1:]:
                tok = p.split("/")[0]
                try:
                    i = int(tok)
                except ValueError:
                    raise MeshError("malformed-face", f"cannot parse index {p!r}", lineno) from None
                if i == 0:
                    raise MeshError("index-out-of-range", "OBJ indices are 1-based", lineno)
                i = i - 1 if i > 0 else len(vertices) + i
                if not 0 <= i < len(vertices):
                    raise MeshError("index-out-of-range",
                                    f"face references vertex {p} of {len(vertices)}", lineno)
                idx.append(i)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
                face_lines.append(lineno)
        # ignore vn / vt / usemtl / o / g / s / mtllib
    if not vertices or not faces:
        raise MeshError("empty-mesh", "OBJ contains no vertices or no faces")
    return make_mesh(np.array(vertices), np.array(faces), face_lines)


def load_obj(path) -> Mesh:
    with open(path, "r", encoding="ascii", errors="replace") as f:
        return parse_obj(f.read())


def write_obj(mesh: Mesh, positions: np.ndarray | None = None) -> str:
    """Serialize to OBJ text. %.17g keeps float64 round-trips exact."""
    X = mesh.vertices if positions is None else np.asarray(positions)
    out = []
    for x, y, z in X:
        out.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for i, j, k in mesh.triangles:
        out.append(f"f {i + 1} {j + 1} {k + 1}")
    return "\n".join(out) + "\n"


def save_obj(mesh: Mesh, path, positions=None) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(write_obj(mesh, positions))


def write_ply(mesh: Mesh, vertex_rgb: np.ndarray,
              positions: np.ndarray | None = None) -> bytes:
    """Binary little-endian PLY with per-vertex uchar RGB."""
    X = np.asarray(mesh.vertices if positions is None else positions, dtype=np.float32)
    rgb = np.asarray(vertex_rgb, dtype=np.uint8)
    if rgb.shape != (len(X), 3):
        raise ValueError(f"vertex_rgb must be ({len(X)}, 3), got {rgb.shape}")
    header = "\n".join([
        "ply",
        "format binary_little_endian 1.0",
        f"element vertex {len(X)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        f"element face {mesh.n_triangles}",
        "property list uchar int vertex_indices",
        "end_header",
    ]) + "\n"
    buf = bytearray(header.encode("ascii"))
    for p, c in zip(X, rgb):
        buf += struct.pack("<fffBBB", p[0], p[1], p[2], c[0], c[1], c[2])
    for t in mesh.triangles:
        buf += struct.pack("<Biii", 3, t[0], t[1], t[2])
    return bytes(buf)


def save_ply(mesh: Mesh, path, vertex_rgb, positions=None) -> None:
    with open(path, "wb") as f:
        f.write(write_ply(mesh, vertex_rgb, positions))


@dataclass(frozen=True)
class EdgeTopology:
    """Internal / boundary edge classification with left/right triangles.

    Internal edge e has exactly two incident triangles left[e], right[e];
    left[e] is the triangle in which the edge occurs with ascending vertex
    order in its cyclic orientation (ties broken by lower triangle index).
    """

    internal_vpairs: np.ndarray   # (E_i, 2) vertex ids, ascending
    left: np.ndarray              # (E_i,) triangle ids
    right: np.ndarray             # (E_i,) triangle ids
    lengths: np.ndarray           # (E_i,) world-space edge lengths
    boundary_vpairs: np.ndarray   # (E_b, 2) vertex ids, ascending
    boundary_triangles: np.ndarray  # (E_b,) the single incident triangle

    @property
    def n_internal(self) -> int:
        return len(self.left)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_vpairs)

    @property
    def n_edges(self) -> int:
        return self.n_internal + self.n_boundary


def build_topology(mesh: Mesh) -> EdgeTopology:
    """Classify edges and assign deterministic left/right triangles."""
    incident: dict[tuple[int, int], list[tuple[int, bool]]] = {}
    for t, (i, j, k) in enumerate(mesh.triangles):
        for a, b in ((i, j), (j, k), (k, i)):
            key = (int(min(a, b)), int(max(a, b)))
            incident.setdefault(key, []).append((t, a < b))

    internal, boundary = [], []
    for key in sorted(incident):
        tris = incident[key]
        if len(tris) > 2:
            raise MeshError("non-manifold-edge",
                            f"edge {key} has {len(tris)} incident triangles: "
                            f"{sorted(t for t, _ in tris)}")
        if len(tris) == 1:
            boundary.append((key, tris[0][0]))
            continue
        (t0, fwd0), (t1, fwd1) = tris
        if fwd0 != fwd1:
            l, r = (t0, t1) if fwd0 else (t1, t0)
        else:
            l, r = min(t0, t1), max(t0, t1)
        internal.append((key, l, r))

    if internal:
        ivp = np.array([k for k, _, _ in internal], dtype=np.int64)
        left = np.array([l for _, l, _ in internal], dtype=np.int64)
        right = np.array([r for _, _, r in internal], dtype=np.int64)
        lengths = np.linalg.norm(mesh.vertices[ivp[:, 1]] - mesh.vertices[ivp[:, 0]], axis=1)
    else:
        ivp = np.zeros((0, 2), dtype=np.int64)
        left = right = np.zeros(0, dtype=np.int64)
        lengths = np.zeros(0)
    if boundary:
        bvp = np.array([k for k, _ in boundary], dtype=np.int64)
        btri = np.array([t for _, t in boundary], dtype=np.int64)
    else:
        bvp = np.zeros((0, 2), dtype=np.int64)
        btri = np.zeros(0, dtype=np.int64)

    for arr in (ivp, left, right, lengths, bvp, btri):
        arr.setflags(write=False)
    return EdgeTopology(ivp, left, right, lengths, bvp, btri)
