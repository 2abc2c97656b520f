/** three.js scene wrapper: renders the mesh with per-triangle colors,
 *  hosts the camera / gizmo controls, and exposes picking rays. */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import { TransformControls } from "three/addons/controls/TransformControls.js";
import type { Vec3 } from "./picking.js";

export interface GizmoChange {
  rotation: [number, number, number, number]; // w, x, y, z
  translation: [number, number, number];
  pivot: [number, number, number];
}

export class Viewer {
  scene = new THREE.Scene();
  camera: THREE.PerspectiveCamera;
  renderer: THREE.WebGLRenderer;
  orbit: OrbitControls;
  gizmo: TransformControls;
  onGizmoChange: ((change: GizmoChange) => void) | null = null;

  private geometry: THREE.BufferGeometry | null = null;
  private mesh: THREE.Mesh | null = null;
  private markers: THREE.Points | null = null;
  private triangles: Uint32Array = new Uint32Array(0);
  private gizmoAnchor = new THREE.Object3D();
  private gizmoPivot: Vec3 = [0, 0, 0];
  private raycaster = new THREE.Raycaster();

  constructor(private container: HTMLElement) {
    this.camera = new THREE.PerspectiveCamera(
      45,
      container.clientWidth / container.clientHeight,
      0.01,
      1000,
    );
    this.camera.position.set(4, 4, 6);
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);

    this.scene.background = new THREE.Color(0x20242a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.6));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 5, 4);
    this.scene.add(sun);

    this.orbit = new OrbitControls(this.camera, this.renderer.domElement);
    this.gizmo = new TransformControls(this.camera, this.renderer.domElement);
    this.gizmo.setMode("rotate");
    this.scene.add(this.gizmoAnchor);
    const helper = this.gizmo.getHelper();
    this.scene.add(helper);
    this.gizmo.addEventListener("dragging-changed", (e: any) => {
      this.orbit.enabled = !e.value;
    });
    this.gizmo.addEventListener("objectChange", () => this.emitGizmo());

    window.addEventListener("resize", () => this.resize());
    this.animate();
  }

  private animate = () => {
    requestAnimationFrame(this.animate);
    this.renderer.render(this.scene, this.camera);
  };

  private resize() {
    const w = this.container.clientWidth;
    const h = this.container.clientHeight;
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(w, h);
  }

  /** Replace the displayed mesh. Geometry is de-indexed so per-triangle
   *  colors are exact. */
  setMesh(positions: Float32Array, triangles: Uint32Array): void {
    this.triangles = triangles;
    if (this.mesh) this.scene.remove(this.mesh);
    this.geometry = new THREE.BufferGeometry();
    const soup = new Float32Array(triangles.length * 3);
    const colors = new Float32Array(triangles.length * 3).fill(0.75);
    this.geometry.setAttribute(
      "position",
      new THREE.BufferAttribute(soup, 3),
    );
    this.geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
    const material = new THREE.MeshLambertMaterial({
      vertexColors: true,
      side: THREE.DoubleSide,
    });
    this.mesh = new THREE.Mesh(this.geometry, material);
    this.scene.add(this.mesh);
    this.updatePositions(positions);
  }

  /** Update the geometry buffer in place from indexed vertex positions. */
  updatePositions(positions: Float32Array): void {
    if (!this.geometry) return;
    const attr = this.geometry.getAttribute(
      "position",
    ) as THREE.BufferAttribute;
    const soup = attr.array as Float32Array;
    for (let i = 0; i < this.triangles.length; i++) {
      const v = this.triangles[i];
      soup[3 * i] = positions[3 * v];
      soup[3 * i + 1] = positions[3 * v + 1];
      soup[3 * i + 2] = positions[3 * v + 2];
    }
    attr.needsUpdate = true;
    this.geometry.computeVertexNormals();
    this.geometry.computeBoundingSphere();
  }

  /** Per-triangle RGB bytes from the service, or null for plain shading. */
  setTriangleColors(rgb: Uint8Array | null): void {
    if (!this.geometry) return;
    const attr = this.geometry.getAttribute("color") as THREE.BufferAttribute;
    const colors = attr.array as Float32Array;
    const nTri = this.triangles.length / 3;
    for (let t = 0; t < nTri; t++) {
      for (let corner = 0; corner < 3; corner++) {
        const o = 9 * t + 3 * corner;
        if (rgb) {
          colors[o] = rgb[3 * t] / 255;
          colors[o + 1] = rgb[3 * t + 1] / 255;
          colors[o + 2] = rgb[3 * t + 2] / 255;
        } else {
          colors[o] = colors[o + 1] = colors[o + 2] = 0.75;
        }
      }
    }
    attr.needsUpdate = true;
  }

  /** Highlight handle vertices as point markers. */
  setMarkers(positions: Float32Array, vertices: number[]): void {
    if (this.markers) this.scene.remove(this.markers);
    const pts = new Float32Array(vertices.length * 3);
    vertices.forEach((v, i) => {
      pts[3 * i] = positions[3 * v];
      pts[3 * i + 1] = positions[3 * v + 1];
      pts[3 * i + 2] = positions[3 * v + 2];
    });
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(pts, 3));
    this.markers = new THREE.Points(
      geo,
      new THREE.PointsMaterial({ color: 0xffcc00, size: 0.12 }),
    );
    this.scene.add(this.markers);
  }

  /** Attach the gizmo at a handle's pivot point. */
  attachGizmo(pivot: Vec3): void {
    this.gizmoPivot = pivot;
    this.gizmoAnchor.position.set(pivot[0], pivot[1], pivot[2]);
    this.gizmoAnchor.quaternion.identity();
    this.gizmo.attach(this.gizmoAnchor);
  }

  detachGizmo(): void {
    this.gizmo.detach();
  }

  setGizmoMode(mode: "rotate" | "translate"): void {
    this.gizmo.setMode(mode);
  }

  private emitGizmo(): void {
    if (!this.onGizmoChange) return;
    const q = this.gizmoAnchor.quaternion;
    const p = this.gizmoAnchor.position;
    this.onGizmoChange({
      rotation: [q.w, q.x, q.y, q.z],
      translation: [
        p.x - this.gizmoPivot[0],
        p.y - this.gizmoPivot[1],
        p.z - this.gizmoPivot[2],
      ],
      pivot: this.gizmoPivot,
    });
  }

  /** Pointer event to a world-space ray for the picking module. */
  pointerRay(event: PointerEvent): { origin: Vec3; dir: Vec3 } {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const o = this.raycaster.ray.origin;
    const d = this.raycaster.ray.direction;
    return { origin: [o.x, o.y, o.z], dir: [d.x, d.y, d.z] };
  }
}
