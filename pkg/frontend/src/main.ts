/** Application wiring: load the bundled mesh, manage handles, and stream
 *  deformations from the service. */

import {
  decodeColors,
  decodePositions,
  ServiceClient,
  type DeformRequest,
  type DeformResponse,
} from "./api.js";
import { DebouncedRequester } from "./debounce.js";
import { bboxDiag, centroid, parseObj } from "./mesh.js";
import { growSelection, pickSurface } from "./picking.js";
import { EditorState } from "./state.js";
import { Viewer } from "./viewer.js";

const $ = (id: string) => document.getElementById(id)!;

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("visible");
  setTimeout(() => el.classList.remove("visible"), 4000);
}

async function boot() {
  const client = new ServiceClient("");
  const state = new EditorState();
  const viewer = new Viewer($("canvas-host"));

  const objText = await (await fetch("cylinder.obj")).text();
  const rest = parseObj(objText);
  const info = await client.createSession(objText);
  state.sessionId = info.session_id;
  state.nVertices = info.n_vertices;
  state.bboxDiag = bboxDiag(rest.positions);
  viewer.setMesh(rest.positions, rest.triangles);
  $("mesh-stats").textContent =
    `${info.n_vertices} vertices, ${info.n_triangles} triangles`;

  const requester = new DebouncedRequester<DeformRequest, DeformResponse>(
    (req, signal) => client.deform(state.sessionId!, req, signal),
    (resp) => applyResponse(resp),
    (err) => toast(String(err instanceof Error ? err.message : err)),
  );

  function applyResponse(resp: DeformResponse): void {
    viewer.updatePositions(decodePositions(resp.positions_b64));
    viewer.setTriangleColors(
      state.displayMode === "energy" ? decodeColors(resp.colors_b64) : null,
    );
    $("legend-max").textContent = resp.p95.toExponential(2);
    $("stat-iso").textContent = resp.max_iso.toFixed(4);
    $("stat-conf").textContent = resp.max_conf.toFixed(4);
    $("stat-timing").textContent =
      `${resp.cache_hit ? "cached" : `factorize ${resp.factorize_ms.toFixed(1)} ms`}` +
      `, solve ${resp.solve_ms.toFixed(1)} ms`;
  }

  function requestDeform(): void {
    if (state.handles.length === 0) return;
    requester.request({
      transforms: state.transforms(),
      beta: state.beta,
      operator: state.operator,
    });
  }

  // -- beta / operator / display controls ---------------------------------

  const betaSlider = $("beta") as HTMLInputElement;
  betaSlider.addEventListener("input", () => {
    state.setBeta(Number(betaSlider.value));
    $("beta-value").textContent = state.beta.toFixed(3);
    requestDeform();
  });

  ($("operator") as HTMLSelectElement).addEventListener("change", (e) => {
    state.operator = (e.target as HTMLSelectElement).value as
      | "flat"
      | "curved";
    requestDeform();
  });

  ($("display") as HTMLSelectElement).addEventListener("change", (e) => {
    state.displayMode = (e.target as HTMLSelectElement).value as any;
    requestDeform();
  });

  // -- handle selection -----------------------------------------------------

  let pickMode = false;
  $("add-handle").addEventListener("click", () => {
    pickMode = true;
    toast("click the mesh to place a handle");
  });

  viewer.renderer.domElement.addEventListener("pointerdown", async (e) => {
    if (!pickMode || e.button !== 0) return;
    const { origin, dir } = viewer.pointerRay(e as PointerEvent);
    const hit = pickSurface(origin, dir, rest.positions, rest.triangles);
    if (!hit) return; // background click: selection unchanged
    pickMode = false;
    const radius = Number(($("radius") as HTMLInputElement).value);
    if (!state.validRadius(radius)) {
      toast("radius must be below the mesh bounding-box diagonal");
      return;
    }
    const vertices = growSelection(hit.point, radius, rest.positions);
    const name = `handle_${state.handles.length}`;
    const err = state.addHandle(name, vertices);
    if (err) {
      toast(err);
      return;
    }
    try {
      await client.setHandles(state.sessionId!, state.handleSpecs());
    } catch (ex) {
      state.removeHandle(name);
      toast(String(ex instanceof Error ? ex.message : ex));
      return;
    }
    refreshHandleList();
    selectHandle(name);
    requestDeform();
  });

  function refreshHandleList(): void {
    const list = $("handles");
    list.innerHTML = "";
    const all: number[] = [];
    for (const h of state.handles) {
      all.push(...h.vertices);
      const li = document.createElement("li");
      li.textContent = `${h.name} (${h.vertices.length})`;
      li.addEventListener("click", () => selectHandle(h.name));
      list.appendChild(li);
    }
    viewer.setMarkers(rest.positions, all);
  }

  function selectHandle(name: string): void {
    const h = state.handles.find((x) => x.name === name);
    if (!h) return;
    viewer.attachGizmo(centroid(h.vertices, rest.positions));
    viewer.onGizmoChange = (change) => {
      state.setTransform(name, change);
      requestDeform();
    };
  }

  ($("gizmo-mode") as HTMLSelectElement).addEventListener("change", (e) => {
    viewer.setGizmoMode(
      (e.target as HTMLSelectElement).value as "rotate" | "translate",
    );
  });
}

boot().catch((err) => {
  toast(String(err instanceof Error ? err.message : err));
  console.error(err);
});
