// Pure frame -> drawable-scene mapping (no three.js, no DOM) so the render
// contract is unit-testable: marker counts, segment endpoints, colors.

import { HelloMessage, TelemetryFrame, Vec3 } from './protocol';

export interface Segment {
  a: Vec3;
  b: Vec3;
  color: string;
  width: number;
}

export interface SceneModel {
  rods: Segment[];
  cables: Segment[];
  contactMarkers: Vec3[];
  comMarker: Vec3;
  projectedCom: Vec3;
  polygon: Vec3[];       // closed outline on the plane
  payloadSprings: Segment[];
  tippingImminent: boolean;
  inclineDeg: number;
}

export function tensionColor(tension: number, maxTension: number): string {
  const t = maxTension > 0 ? Math.min(tension / maxTension, 1) : 0;
  const r = Math.round(80 + 175 * t);
  const g = Math.round(200 - 160 * t);
  return `rgb(${r},${g},64)`;
}

export function buildSceneModel(hello: HelloMessage, frame: TelemetryFrame): SceneModel {
  const nodes = frame.node_positions;
  const maxTension = Math.max(...frame.cable_tensions, 1e-9);

  const rods: Segment[] = hello.topology.rods.map(([i, j]) => ({
    a: nodes[i],
    b: nodes[j],
    color: '#cfd8dc',
    width: 3,
  }));

  const actuated = new Set(hello.actuated_cables);
  const cables: Segment[] = hello.topology.cables.map(([i, j], idx) => ({
    a: nodes[i],
    b: nodes[j],
    color: tensionColor(frame.cable_tensions[idx], maxTension),
    width: actuated.has(idx) ? 2 : 1,
  }));

  const contactMarkers = frame.contact_set.map((n) => nodes[n]);

  const polygon: Vec3[] = frame.support_polygon.map(([x, y]) => [x, y, 0.05]);
  if (polygon.length > 0) polygon.push(polygon[0]);

  const payloadSprings: Segment[] = nodes.map((p) => ({
    a: p,
    b: frame.com,
    color: 'rgba(120,144,156,0.9)',
    width: 0.5,
  }));

  return {
    rods,
    cables,
    contactMarkers,
    comMarker: frame.com,
    projectedCom: [frame.projected_com[0], frame.projected_com[1], 0.1],
    polygon,
    payloadSprings,
    tippingImminent: frame.uphill_margin !== null && frame.uphill_margin < 0,
    inclineDeg: frame.incline_deg,
  };
}
