// Console state: the latest complete frame plus control echo. No physics
// here; every displayed number comes verbatim from telemetry, and control
// state only reflects server acknowledgments.

import {
  Command,
  HelloMessage,
  ServerMessage,
  TelemetryFrame,
} from './protocol';

export type ConnectionState = 'connecting' | 'connected' | 'closed';

export interface CableControl {
  slider: number;        // fraction currently shown on the slider
  confirmed: number;     // last server-acknowledged fraction
  pendingId: number | null;
}

export interface PendingCommand {
  id: number;
  command: Command;
  revert?: () => void;
}

export class ViewModel {
  connection: ConnectionState = 'connecting';
  hello: HelloMessage | null = null;
  frame: TelemetryFrame | null = null;
  cables: Map<number, CableControl> = new Map();
  policyRunning: string | null = null;
  lastError = '';
  locked = false;  // manual sliders locked while a policy drives the robot
  private pending: Map<number, PendingCommand> = new Map();
  private nextId = 1;
  private send: (raw: string) => void = () => {};
  history: { t: number; heightPct: number; up: number | null; down: number | null }[] = [];
  neutralHeight: number | null = null;

  bindSender(send: (raw: string) => void): void {
    this.send = send;
  }

  issue(command: Command, revert?: () => void): number {
    const id = this.nextId++;
    this.pending.set(id, { id, command, revert });
    this.send(JSON.stringify({ type: 'command', id, command }));
    return id;
  }

  setCable(cable: number, fraction: number): number {
    const ctl = this.cables.get(cable) ?? { slider: 1, confirmed: 1, pendingId: null };
    const before = ctl.confirmed;
    ctl.slider = fraction;
    const id = this.issue({ kind: 'set_cable', cable, fraction }, () => {
      const c = this.cables.get(cable);
      if (c) {
        c.slider = before;
        c.pendingId = null;
      }
    });
    ctl.pendingId = id;
    this.cables.set(cable, ctl);
    return id;
  }

  handle(msg: ServerMessage): void {
    switch (msg.type) {
      case 'hello': {
        this.hello = msg;
        this.connection = 'connected';
        for (const cable of msg.actuated_cables) {
          this.cables.set(cable, { slider: 1, confirmed: 1, pendingId: null });
        }
        break;
      }
      case 'telemetry': {
        this.frame = msg;
        this.policyRunning = msg.policy_running;
        this.locked = msg.policy_running !== null;
        if (this.neutralHeight === null && msg.current_face !== null) {
          this.neutralHeight = msg.com[2];
        }
        const ref = this.neutralHeight ?? msg.com[2];
        this.history.push({
          t: msg.time,
          heightPct: (msg.com[2] / ref) * 100,
          up: msg.uphill_margin,
          down: msg.downhill_margin,
        });
        if (this.history.length > 600) this.history.shift();
        break;
      }
      case 'ack': {
        const p = this.pending.get(msg.id);
        if (p) {
          this.pending.delete(msg.id);
          if (p.command.kind === 'set_cable') {
            const ctl = this.cables.get(p.command.cable);
            if (ctl) {
              ctl.confirmed = p.command.fraction;
              ctl.slider = p.command.fraction;
              ctl.pendingId = null;
            }
          }
        }
        break;
      }
      case 'rejection': {
        const p = this.pending.get(msg.id);
        this.lastError = msg.reason;
        if (p) {
          this.pending.delete(msg.id);
          p.revert?.();
        }
        break;
      }
      case 'error': {
        this.lastError = msg.reason;
        break;
      }
      case 'end': {
        this.connection = 'closed';
        break;
      }
    }
  }

  closed(): void {
    this.connection = 'closed';
    this.locked = true;
  }
}
