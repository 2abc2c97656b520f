"""JSON scenario documents for the batch CLI and tests."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .guidance import Handle, HandleSet, Transform, make_handle_set
from .mesh import Mesh


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class HandleSpec:
    name: str
    vertices: list[int] | None
    sphere: tuple[tuple[float, float, float], float] | None
    transform: Transform


@dataclass(frozen=True)
class Scenario:
    mesh_path: str
    handles: tuple[HandleSpec, ...]
    beta: float
    operator: str
    base_dir: str = "."


def _parse_transform(doc: dict, where: str) -> Transform:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where}: transform must be an object")
    rot = doc.get("rotation", [1.0, 0.0, 0.0, 0.0])
    tra = doc.get("translation", [0.0, 0.0, 0.0])
    scale = doc.get("scale", 1.0)
    pivot = doc.get("pivot")
    try:
        rot = tuple(float(v) for v in rot)
        tra = tuple(float(v) for v in tra)
        scale = float(scale)
        pivot = None if pivot is None else tuple(float(v) for v in pivot)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: malformed transform") from None
    if len(rot) != 4 or len(tra) != 3 or (pivot is not None and len(pivot) != 3):
        raise ScenarioError(f"{where}: transform fields have wrong arity")
    return Transform(rotation=rot, translation=tra, scale=scale, pivot=pivot)


def parse_scenario(doc: dict, base_dir: str = ".") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    if doc.get("version") != 1:
        raise ScenarioError(f"unsupported scenario version {doc.get('version')!r}")
    mesh_path = doc.get("mesh")
    if not isinstance(mesh_path, str):
        raise ScenarioError("scenario requires a 'mesh' path")
    beta = doc.get("beta", 0.2)
    try:
        beta = float(beta)
    except (TypeError, ValueError):
        raise ScenarioError(f"malformed beta {beta!r}") from None
    if not 0.0 <= beta < 1.0:
        raise ScenarioError(f"beta must be in [0, 1), got {beta}")
    operator = doc.get("operator", "curved")
    if operator not in ("flat", "curved"):
        raise ScenarioError(f"operator must be 'flat' or 'curved', got {operator!r}")

    raw = doc.get("handles")
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("scenario requires a non-empty 'handles' list")
    specs = []
    for i, h in enumerate(raw):
        where = f"handles[{i}]"
        if not isinstance(h, dict):
            raise ScenarioError(f"{where}: must be an object")
        name = h.get("name", f"handle_{i}")
        verts = h.get("vertices")
        sphere = h.get("sphere")
        if (verts is None) == (sphere is None):
            raise ScenarioError(f"{where}: exactly one of 'vertices' or 'sphere' required")
        if verts is not None:
            try:
                verts = [int(v) for v in verts]
            except (TypeError, ValueError):
                raise ScenarioError(f"{where}: malformed vertex list") from None
        else:
            try:
                center = tuple(float(v) for v in sphere["center"])
                radius = float(sphere["radius"])
            except (KeyError, TypeError, ValueError):
                raise ScenarioError(f"{where}: sphere needs 'center' and 'radius'") from None
            if len(center) != 3 or radius < 0:
                raise ScenarioError(f"{where}: malformed sphere selector")
            sphere = (center, radius)
        transform = _parse_transform(h.get("transform", {}), where)
        specs.append(HandleSpec(str(name), verts, sphere, transform))
    return Scenario(mesh_path, tuple(specs), beta, operator, base_dir)


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path}: invalid JSON ({exc})") from exc
    return parse_scenario(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def resolve_mesh_path(scn: Scenario) -> str:
    p = scn.mesh_path
    return p if os.path.isabs(p) else os.path.join(scn.base_dir, p)


def resolve_handles(scn: Scenario, mesh: Mesh) -> HandleSet:
    """Freeze sphere selectors against rest positions; validate the set."""
    handles = []
    for spec in scn.handles:
        if spec.vertices is not None:
            ids = np.asarray(spec.vertices, dtype=np.int64)
        else:
            center, radius = spec.sphere
            d = np.linalg.norm(mesh.vertices - np.asarray(center), axis=1)
            ids = np.flatnonzero(d <= radius)
            if ids.size == 0:
                raise ScenarioError(
                    f"sphere selector of handle {spec.name!r} captures no vertices")
        handles.append(Handle(spec.name, ids, spec.transform))
    return make_handle_set(handles, mesh.n_vertices)


def dump_resolved(scn: Scenario, handles: HandleSet) -> str:
    """Scenario JSON with sphere selectors replaced by explicit vertex lists."""
    doc = {
        "version": 1,
        "mesh": scn.mesh_path,
        "beta": scn.beta,
        "operator": scn.operator,
        "handles": [
            {
                "name": h.name,
                "vertices": [int(v) for v in h.vertices],
                "transform": {
                    "rotation": list(h.transform.rotation),
                    "translation": list(h.transform.translation),
                    "scale": h.transform.scale,
                    **({"pivot": list(h.transform.pivot)}
                       if h.transform.pivot is not None else {}),
                },
            }
            for h in handles.handles
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
