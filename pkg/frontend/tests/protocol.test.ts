import { describe, expect, it } from 'vitest';
import { encodeCommand, parseServerMessage } from '../src/protocol';

function frame(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({
    type: 'telemetry',
    time: 1.25,
    node_positions: Array.from({ length: 12 }, (_, i) => [i, 0, 1]),
    com: [0, 0, 9],
    projected_com: [0, 0],
    support_polygon: [[1, 0], [-1, 1], [-1, -1]],
    uphill_margin: 2.5,
    downhill_margin: 3.5,
    cable_fractions: Array(24).fill(1),
    cable_tensions: Array(24).fill(0.5),
    target_fractions: Array(6).fill(1),
    contact_set: [0, 2, 4],
    current_face: 0,
    distance_cm: 12.5,
    incline_deg: 10,
    paused: false,
    policy_running: null,
    ...overrides,
  });
}

describe('protocol', () => {
  it('round-trips telemetry frames', () => {
    const msg = parseServerMessage(frame());
    expect(msg.type).toBe('telemetry');
    if (msg.type === 'telemetry') {
      expect(msg.contact_set).toEqual([0, 2, 4]);
      expect(msg.node_positions).toHaveLength(12);
    }
  });

  it('rejects malformed JSON', () => {
    expect(() => parseServerMessage('{nope')).toThrow(/not JSON/);
  });

  it('rejects missing type', () => {
    expect(() => parseServerMessage('{"a": 1}')).toThrow(/missing type/);
  });

  it('rejects wrong-size telemetry arrays', () => {
    expect(() => parseServerMessage(frame({ node_positions: [[0, 0, 0]] })))
      .toThrow(/node_positions/);
    expect(() => parseServerMessage(frame({ cable_fractions: [1, 2] })))
      .toThrow(/cable_fractions/);
  });

  it('rejects unknown message types', () => {
    expect(() => parseServerMessage('{"type": "mystery"}')).toThrow(/unknown/);
  });

  it('encodes commands with ids', () => {
    const raw = encodeCommand(7, { kind: 'set_cable', cable: 3, fraction: 0.6 });
    const parsed = JSON.parse(raw);
    expect(parsed).toEqual({
      type: 'command',
      id: 7,
      command: { kind: 'set_cable', cable: 3, fraction: 0.6 },
    });
  });
});
