import { beforeEach, describe, expect, it } from 'vitest';
import { HelloMessage, TelemetryFrame } from '../src/protocol';
import { ViewModel } from '../src/viewmodel';

const hello: HelloMessage = {
  type: 'hello',
  config: {},
  topology: {
    rod_length_cm: 25,
    nodes_cm: Array.from({ length: 12 }, (_, i) => [i, 0, 0] as [number, number, number]),
    rods: [[0, 1]],
    cables: [[0, 2]],
    actuated_cables: [2, 20, 16, 19, 5, 9],
    stable_faces: [[0, 2, 4]],
  },
  frame_rate: 30,
  actuated_cables: [2, 20, 16, 19, 5, 9],
};

function telemetry(time: number, overrides: Partial<TelemetryFrame> = {}): TelemetryFrame {
  return {
    type: 'telemetry',
    time,
    node_positions: Array.from({ length: 12 }, () => [0, 0, 0] as [number, number, number]),
    com: [0, 0, 9.5],
    projected_com: [0, 0],
    support_polygon: [],
    uphill_margin: 3,
    downhill_margin: 3,
    cable_fractions: Array(24).fill(1),
    cable_tensions: Array(24).fill(0),
    target_fractions: Array(6).fill(1),
    contact_set: [0, 2, 4],
    current_face: 0,
    distance_cm: 0,
    incline_deg: 0,
    paused: false,
    policy_running: null,
    ...overrides,
  };
}

describe('ViewModel', () => {
  let vm: ViewModel;
  let sent: string[];

  beforeEach(() => {
    vm = new ViewModel();
    sent = [];
    vm.bindSender((raw) => sent.push(raw));
    vm.handle(hello);
  });

  it('tracks connection and sliders from hello', () => {
    expect(vm.connection).toBe('connected');
    expect(vm.cables.size).toBe(6);
    expect(vm.cables.get(2)?.slider).toBe(1);
  });

  it('ack confirms the slider at the acknowledged value', () => {
    const id = vm.setCable(2, 0.6);
    expect(JSON.parse(sent[0]).command).toEqual({ kind: 'set_cable', cable: 2, fraction: 0.6 });
    expect(vm.cables.get(2)?.pendingId).toBe(id);
    vm.handle({ type: 'ack', id });
    const ctl = vm.cables.get(2)!;
    expect(ctl.confirmed).toBe(0.6);
    expect(ctl.slider).toBe(0.6);
    expect(ctl.pendingId).toBeNull();
  });

  it('rejection reverts the slider and surfaces the reason', () => {
    const ok = vm.setCable(2, 0.6);
    vm.handle({ type: 'ack', id: ok });
    const bad = vm.setCable(2, 0.05);
    expect(vm.cables.get(2)?.slider).toBe(0.05);
    vm.handle({ type: 'rejection', id: bad, reason: 'fraction out of range' });
    const ctl = vm.cables.get(2)!;
    expect(ctl.slider).toBe(0.6);      // reverted to last confirmed value
    expect(ctl.confirmed).toBe(0.6);
    expect(vm.lastError).toMatch(/out of range/);
  });

  it('locks manual control while a policy runs', () => {
    vm.handle(telemetry(1.0, { policy_running: 'alternating' }));
    expect(vm.locked).toBe(true);
    vm.handle(telemetry(1.1, { policy_running: null }));
    expect(vm.locked).toBe(false);
  });

  it('keeps only full frames and builds history', () => {
    vm.handle(telemetry(0.5));
    vm.handle(telemetry(0.6, { com: [0, 0, 7.6] }));
    expect(vm.frame?.time).toBe(0.6);
    expect(vm.history).toHaveLength(2);
    expect(vm.history[1].heightPct).toBeCloseTo(80, 5);
  });

  it('reports displayed numbers verbatim from frames', () => {
    vm.handle(telemetry(2.0, { uphill_margin: -0.5, distance_cm: 42.125 }));
    expect(vm.frame?.uphill_margin).toBe(-0.5);
    expect(vm.frame?.distance_cm).toBe(42.125);
  });

  it('marks closed on end-of-stream', () => {
    vm.handle({ type: 'end' });
    expect(vm.connection).toBe('closed');
  });
});
