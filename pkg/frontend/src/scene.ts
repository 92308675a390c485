/**
 * three.js view: draggable keypoint markers and hand gizmos feed the
 * controller; the robot skeleton and collision capsules are drawn purely
 * from the latest service state (no client-side kinematics).
 *
 * The scene uses the engine's body-centric frame directly (x front, y left,
 * z up) by setting the camera's up vector; units are meters, 1:1.
 */
import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { TransformControls } from "three/examples/jsm/controls/TransformControls.js";

import { SandboxController } from "./controller";
import { DistanceBand, MarkerName, Side } from "./model";
import { CapsuleState, Vec3 } from "./protocol";

const BAND_COLORS: Record<DistanceBand, number> = {
  safe: 0x3fa65c,
  near: 0xd9a421,
  violated: 0xd5393a,
};

const SIDE_COLORS: Record<Side, number> = { left: 0x4f7dd9, right: 0xd9784f };

const CAMERA_PRESETS: Record<string, Vec3> = {
  front: [2.2, 0.0, 0.15],
  side: [0.0, -2.2, 0.15],
  top: [0.05, 0.0, 2.2],
};

function vec(v: Vec3): THREE.Vector3 {
  return new THREE.Vector3(v[0], v[1], v[2]);
}

class CapsuleMesh {
  group = new THREE.Group();
  private cylinder: THREE.Mesh;
  private capA: THREE.Mesh;
  private capB: THREE.Mesh;
  private material: THREE.MeshStandardMaterial;

  constructor() {
    this.material = new THREE.MeshStandardMaterial({
      transparent: true,
      opacity: 0.35,
      color: BAND_COLORS.safe,
    });
    this.cylinder = new THREE.Mesh(
      new THREE.CylinderGeometry(1, 1, 1, 20, 1, true),
      this.material,
    );
    this.capA = new THREE.Mesh(new THREE.SphereGeometry(1, 20, 12), this.material);
    this.capB = new THREE.Mesh(new THREE.SphereGeometry(1, 20, 12), this.material);
    this.group.add(this.cylinder, this.capA, this.capB);
  }

  update(capsule: CapsuleState, band: DistanceBand): void {
    const p1 = vec(capsule.p1);
    const p2 = vec(capsule.p2);
    const axis = p2.clone().sub(p1);
    const length = axis.length();
    const r = capsule.r;
    this.material.color.setHex(BAND_COLORS[band]);

    this.capA.position.copy(p1);
    this.capA.scale.setScalar(r);
    this.capB.position.copy(p2);
    this.capB.scale.setScalar(r);

    this.cylinder.visible = length > 1e-9;
    if (this.cylinder.visible) {
      this.cylinder.position.copy(p1).addScaledVector(axis, 0.5);
      this.cylinder.scale.set(r, length, r);
      this.cylinder.quaternion.setFromUnitVectors(
        new THREE.Vector3(0, 1, 0),
        axis.normalize(),
      );
    }
  }
}

class ArmView {
  group = new THREE.Group();
  private joints: THREE.Mesh[] = [];
  private line: THREE.Line;
  private toolAxes = new THREE.AxesHelper(0.07);

  constructor(color: number) {
    const jointMaterial = new THREE.MeshStandardMaterial({ color });
    for (let i = 0; i < 4; i += 1) {
      const joint = new THREE.Mesh(new THREE.SphereGeometry(0.016, 16, 10), jointMaterial);
      this.joints.push(joint);
      this.group.add(joint);
    }
    const geometry = new THREE.BufferGeometry().setFromPoints([
      new THREE.Vector3(),
      new THREE.Vector3(),
      new THREE.Vector3(),
      new THREE.Vector3(),
    ]);
    this.line = new THREE.Line(geometry, new THREE.LineBasicMaterial({ color }));
    this.group.add(this.line, this.toolAxes);
  }

  update(points: Vec3[], toolQuat: [number, number, number, number]): void {
    const positions = this.line.geometry.attributes.position as THREE.BufferAttribute;
    points.forEach((p, i) => {
      this.joints[i].position.set(p[0], p[1], p[2]);
      positions.setXYZ(i, p[0], p[1], p[2]);
    });
    positions.needsUpdate = true;
    const tool = points[3];
    this.toolAxes.position.set(tool[0], tool[1], tool[2]);
    this.toolAxes.quaternion.set(toolQuat[0], toolQuat[1], toolQuat[2], toolQuat[3]);
  }
}

export class SandboxScene {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private orbit: OrbitControls;
  private raycaster = new THREE.Raycaster();
  private markers = new Map<string, THREE.Mesh>();
  private gizmos: Record<Side, THREE.Group>;
  private gizmoControls: TransformControls[] = [];
  private capsuleMeshes = new Map<string, CapsuleMesh>();
  private arms: Record<Side, ArmView>;
  private dragging: { side: Side; name: MarkerName; plane: THREE.Plane } | null = null;

  constructor(
    container: HTMLElement,
    private readonly controller: SandboxController,
  ) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    this.renderer.setClearColor(0x15181d);
    container.appendChild(this.renderer.domElement);

    this.camera = new THREE.PerspectiveCamera(
      45,
      container.clientWidth / container.clientHeight,
      0.01,
      50,
    );
    this.camera.up.set(0, 0, 1);
    this.setCameraPreset("front");

    this.orbit = new OrbitControls(this.camera, this.renderer.domElement);
    this.orbit.target.set(0.15, 0, -0.25);

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(1.5, -1.0, 2.0);
    this.scene.add(sun);

    const grid = new THREE.GridHelper(3, 30, 0x334, 0x223);
    grid.rotation.x = Math.PI / 2; // z-up
    grid.position.z = -0.8;
    this.scene.add(grid);
    this.scene.add(new THREE.AxesHelper(0.2));

    this.arms = { left: new ArmView(SIDE_COLORS.left), right: new ArmView(SIDE_COLORS.right) };
    this.scene.add(this.arms.left.group, this.arms.right.group);

    this.gizmos = { left: this.makeGizmo("left"), right: this.makeGizmo("right") };
    this.makeMarkers();

    window.addEventListener("resize", () => {
      this.camera.aspect = container.clientWidth / container.clientHeight;
      this.camera.updateProjectionMatrix();
      this.renderer.setSize(container.clientWidth, container.clientHeight);
    });
    const dom = this.renderer.domElement;
    dom.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    dom.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    dom.addEventListener("pointerup", () => (this.dragging = null));
  }

  setCameraPreset(name: keyof typeof CAMERA_PRESETS | string): void {
    const p = CAMERA_PRESETS[name] ?? CAMERA_PRESETS.front;
    this.camera.position.set(p[0], p[1], p[2]);
    this.camera.lookAt(0.15, 0, -0.25);
  }

  private makeMarkers(): void {
    for (const side of ["left", "right"] as const) {
      for (const name of ["s", "e", "w"] as const) {
        const mesh = new THREE.Mesh(
          new THREE.SphereGeometry(name === "s" ? 0.028 : 0.022, 16, 10),
          new THREE.MeshStandardMaterial({
            color: SIDE_COLORS[side],
            emissive: 0x202020,
          }),
        );
        mesh.userData = { side, name };
        this.markers.set(`${side}:${name}`, mesh);
        this.scene.add(mesh);
      }
    }
  }

  private makeGizmo(side: Side): THREE.Group {
    const group = new THREE.Group();
    group.add(new THREE.AxesHelper(0.1));
    this.scene.add(group);
    const control = new TransformControls(this.camera, this.renderer.domElement);
    control.setMode("rotate");
    control.setSize(0.45);
    control.attach(group);
    control.addEventListener("dragging-changed", (event) => {
      this.orbit.enabled = !(event as unknown as { value: boolean }).value;
    });
    control.addEventListener("objectChange", () => {
      const q = group.quaternion;
      this.controller.rotateHand(side, [q.x, q.y, q.z, q.w]);
    });
    this.gizmoControls.push(control);
    this.scene.add(control.getHelper());
    return group;
  }

  private pointerRay(event: PointerEvent): THREE.Raycaster {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    return this.raycaster;
  }

  private onPointerDown(event: PointerEvent): void {
    const ray = this.pointerRay(event);
    const hits = ray.intersectObjects([...this.markers.values()], false);
    if (hits.length === 0) return;
    const mesh = hits[0].object as THREE.Mesh;
    const { side, name } = mesh.userData as { side: Side; name: MarkerName };
    const normal = new THREE.Vector3();
    this.camera.getWorldDirection(normal);
    const plane = new THREE.Plane().setFromNormalAndCoplanarPoint(normal, mesh.position);
    this.dragging = { side, name, plane };
    this.orbit.enabled = false;
  }

  private onPointerMove(event: PointerEvent): void {
    if (!this.dragging) return;
    const ray = this.pointerRay(event);
    const hit = new THREE.Vector3();
    if (ray.ray.intersectPlane(this.dragging.plane, hit)) {
      this.controller.dragMarker(this.dragging.side, this.dragging.name, [hit.x, hit.y, hit.z]);
    }
  }

  /** Pull marker intent and authoritative robot state into the meshes. */
  sync(): void {
    const model = this.controller.model;
    for (const side of ["left", "right"] as const) {
      for (const name of ["s", "e", "w"] as const) {
        const mesh = this.markers.get(`${side}:${name}`)!;
        if (!this.dragging || this.dragging.side !== side || this.dragging.name !== name) {
          const p = model.markers[side][name];
          mesh.position.set(p[0], p[1], p[2]);
        }
      }
      const w = model.markers[side].w;
      const h = model.markers[side].hand;
      const gizmo = this.gizmos[side];
      gizmo.position.set(w[0], w[1] + (side === "left" ? 0.12 : -0.12), w[2] + 0.1);
      if (!this.gizmoControls.some((c) => (c as unknown as { dragging: boolean }).dragging)) {
        gizmo.quaternion.set(h[0], h[1], h[2], h[3]);
      }
    }

    const state = model.lastState;
    if (state) {
      for (const side of ["left", "right"] as const) {
        const arm = state[side];
        this.arms[side].update([arm.s, arm.e, arm.w, arm.t], arm.tool_quat);
      }
      for (const capsule of state.capsules) {
        let mesh = this.capsuleMeshes.get(capsule.tag);
        if (!mesh) {
          mesh = new CapsuleMesh();
          this.capsuleMeshes.set(capsule.tag, mesh);
          this.scene.add(mesh.group);
        }
        mesh.update(capsule, model.capsuleBand(capsule.tag));
      }
    }
  }

  start(): void {
    const loop = () => {
      this.sync();
      this.orbit.update();
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(loop);
    };
    loop();
  }
}
