// Wire protocol shared with the simulation server: JSON messages with a
// `type` field. Telemetry frames carry sim-state snapshots; commands are
// acknowledged or rejected by id.

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];

export interface TelemetryFrame {
  type: 'telemetry';
  time: number;
  node_positions: Vec3[];
  com: Vec3;
  projected_com: Vec2;
  support_polygon: Vec2[];
  uphill_margin: number | null;
  downhill_margin: number | null;
  cable_fractions: number[];   // 24
  cable_tensions: number[];    // 24
  target_fractions: number[];  // 6, gait order
  contact_set: number[];
  current_face: number | null;
  distance_cm: number;
  incline_deg: number;
  paused: boolean;
  policy_running: string | null;
  wall_time?: number;
}

export interface HelloMessage {
  type: 'hello';
  config: Record<string, unknown>;
  topology: {
    rod_length_cm: number;
    nodes_cm: Vec3[];
    rods: [number, number][];
    cables: [number, number][];
    actuated_cables: number[];
    stable_faces: number[][];
  };
  frame_rate: number;
  actuated_cables: number[];
}

export interface AckMessage { type: 'ack'; id: number }
export interface RejectionMessage { type: 'rejection'; id: number; reason: string }
export interface ErrorMessage { type: 'error'; reason: string }
export interface EndMessage { type: 'end' }

export type ServerMessage =
  | TelemetryFrame | HelloMessage | AckMessage | RejectionMessage | ErrorMessage | EndMessage;

export type Command =
  | { kind: 'set_cable'; cable: number; fraction: number }
  | { kind: 'run_policy'; policy_kind: string; params?: Record<string, number>; cycles?: number }
  | { kind: 'stop_policy' }
  | { kind: 'set_incline'; incline_deg: number }
  | { kind: 'reset'; face: number }
  | { kind: 'pause' }
  | { kind: 'resume' }
  | { kind: 'set_speed'; factor: number };

export interface CommandEnvelope { type: 'command'; id: number; command: Command }

export function encodeCommand(id: number, command: Command): string {
  return JSON.stringify({ type: 'command', id, command });
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error('malformed server message: not JSON');
  }
  if (typeof data !== 'object' || data === null || !('type' in data)) {
    throw new Error('malformed server message: missing type');
  }
  const msg = data as { type: string };
  switch (msg.type) {
    case 'telemetry': {
      const f = data as TelemetryFrame;
      if (!Array.isArray(f.node_positions) || f.node_positions.length !== 12) {
        throw new Error('malformed telemetry: node_positions');
      }
      if (!Array.isArray(f.cable_fractions) || f.cable_fractions.length !== 24) {
        throw new Error('malformed telemetry: cable_fractions');
      }
      if (!Array.isArray(f.contact_set)) {
        throw new Error('malformed telemetry: contact_set');
      }
      return f;
    }
    case 'hello':
    case 'ack':
    case 'rejection':
    case 'error':
    case 'end':
      return data as ServerMessage;
    default:
      throw new Error(`unknown message type ${msg.type}`);
  }
}
