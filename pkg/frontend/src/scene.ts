// three.js renderer fed by the pure scene model.

import * as THREE from 'three';
import { SceneModel } from './scenemodel';

export class RobotScene {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private dynamic = new THREE.Group();
  private planeGroup = new THREE.Group();
  private azimuth = -0.9;
  private elevation = 0.45;
  private radius = 90;
  private target = new THREE.Vector3(0, 0, 8);

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(45, 1, 1, 2000);
    this.scene.background = new THREE.Color('#10151a');
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(40, -60, 120);
    this.scene.add(sun);
    this.scene.add(this.planeGroup);
    this.scene.add(this.dynamic);
    this.buildPlane();
    this.bindOrbit();
    this.resize();
    window.addEventListener('resize', () => this.resize());
  }

  private buildPlane(): void {
    this.planeGroup.clear();
    const grid = new THREE.GridHelper(240, 24, 0x2e4353, 0x22303c);
    grid.rotation.x = Math.PI / 2;
    this.planeGroup.add(grid);
    const uphill = new THREE.ArrowHelper(
      new THREE.Vector3(1, 0, 0), new THREE.Vector3(0, -55, 0.5), 18, 0x4fa3ff, 5, 3,
    );
    this.planeGroup.add(uphill);
  }

  private bindOrbit(): void {
    let dragging = false;
    let px = 0;
    let py = 0;
    this.canvas.addEventListener('pointerdown', (e) => {
      dragging = true;
      px = e.clientX;
      py = e.clientY;
    });
    window.addEventListener('pointerup', () => (dragging = false));
    window.addEventListener('pointermove', (e) => {
      if (!dragging) return;
      this.azimuth -= (e.clientX - px) * 0.008;
      this.elevation = Math.min(1.4, Math.max(0.05, this.elevation + (e.clientY - py) * 0.005));
      px = e.clientX;
      py = e.clientY;
    });
    this.canvas.addEventListener('wheel', (e) => {
      this.radius = Math.min(300, Math.max(30, this.radius * (1 + e.deltaY * 0.001)));
      e.preventDefault();
    });
  }

  resize(): void {
    const w = this.canvas.clientWidth || 800;
    const h = this.canvas.clientHeight || 600;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  render(model: SceneModel, followX: number): void {
    this.dynamic.clear();

    const addSegments = (segments: { a: number[]; b: number[]; color: string; width: number }[]) => {
      for (const seg of segments) {
        const geom = new THREE.BufferGeometry().setFromPoints([
          new THREE.Vector3(...seg.a),
          new THREE.Vector3(...seg.b),
        ]);
        const mat = new THREE.LineBasicMaterial({ color: new THREE.Color(seg.color) });
        this.dynamic.add(new THREE.Line(geom, mat));
      }
    };
    addSegments(model.payloadSprings);
    addSegments(model.cables);

    for (const rod of model.rods) {
      const a = new THREE.Vector3(...rod.a);
      const b = new THREE.Vector3(...rod.b);
      const dir = b.clone().sub(a);
      const len = dir.length();
      const geom = new THREE.CylinderGeometry(0.45, 0.45, len, 8);
      const mat = new THREE.MeshStandardMaterial({ color: 0xb0bec5 });
      const mesh = new THREE.Mesh(geom, mat);
      mesh.position.copy(a.clone().add(b).multiplyScalar(0.5));
      mesh.quaternion.setFromUnitVectors(new THREE.Vector3(0, 1, 0), dir.normalize());
      this.dynamic.add(mesh);
    }

    for (const m of model.contactMarkers) {
      const mesh = new THREE.Mesh(
        new THREE.SphereGeometry(1.1, 12, 12),
        new THREE.MeshBasicMaterial({ color: 0xffc400 }),
      );
      mesh.position.set(m[0], m[1], 0.4);
      this.dynamic.add(mesh);
    }

    const com = new THREE.Mesh(
      new THREE.SphereGeometry(1.0, 12, 12),
      new THREE.MeshBasicMaterial({ color: model.tippingImminent ? 0xff5252 : 0x69f0ae }),
    );
    com.position.set(...model.comMarker);
    this.dynamic.add(com);

    const proj = new THREE.Mesh(
      new THREE.SphereGeometry(0.7, 10, 10),
      new THREE.MeshBasicMaterial({ color: model.tippingImminent ? 0xff5252 : 0x80d8ff }),
    );
    proj.position.set(...model.projectedCom);
    this.dynamic.add(proj);

    if (model.polygon.length > 1) {
      const geom = new THREE.BufferGeometry().setFromPoints(
        model.polygon.map((p) => new THREE.Vector3(...p)),
      );
      this.dynamic.add(new THREE.Line(geom, new THREE.LineBasicMaterial({ color: 0x4fa3ff })));
    }

    this.target.x = followX;
    const cx = this.target.x + this.radius * Math.cos(this.elevation) * Math.cos(this.azimuth);
    const cy = this.target.y + this.radius * Math.cos(this.elevation) * Math.sin(this.azimuth);
    const cz = this.target.z + this.radius * Math.sin(this.elevation);
    this.camera.position.set(cx, cy, cz);
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(this.target);
    this.renderer.render(this.scene, this.camera);
  }
}
