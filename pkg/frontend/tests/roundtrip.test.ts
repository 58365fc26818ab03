// Live round-trip against a real `serve` session: slider updates on ack,
// reverts on rejection, telemetry flows. Spawns the simulation server.

import { ChildProcess, spawn } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import WebSocket from 'ws';
import { parseServerMessage } from '../src/protocol';
import { ViewModel } from '../src/viewmodel';

const PORT = 8931 + Math.floor(Math.random() * 500);
let server: ChildProcess;

function delay(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}

async function connectWithRetry(url: string, attempts = 40): Promise<WebSocket> {
  for (let i = 0; i < attempts; i++) {
    try {
      const ws = new WebSocket(url);
      await new Promise<void>((resolve, reject) => {
        ws.once('open', resolve);
        ws.once('error', reject);
      });
      return ws;
    } catch {
      await delay(500);
    }
  }
  throw new Error('server did not come up');
}

beforeAll(async () => {
  server = spawn('python3', ['-m', 'sixbar.cli', 'serve', '--port', String(PORT)], {
    cwd: new URL('../..', import.meta.url).pathname,
    stdio: 'ignore',
  });
}, 30000);

afterAll(() => {
  server?.kill();
});

describe('live serve round-trip', () => {
  it('acks a valid SetCable (slider confirmed) and rejects an invalid one (slider reverts)', async () => {
    const ws = await connectWithRetry(`ws://127.0.0.1:${PORT}/ws`);
    const vm = new ViewModel();
    vm.bindSender((raw) => ws.send(raw));
    const updates: string[] = [];
    ws.on('message', (data) => {
      const msg = parseServerMessage(String(data));
      updates.push(msg.type);
      vm.handle(msg);
    });

    // hello + first telemetry
    for (let i = 0; i < 100 && vm.connection !== 'connected'; i++) await delay(100);
    expect(vm.connection).toBe('connected');
    expect(vm.hello?.actuated_cables).toHaveLength(6);
    for (let i = 0; i < 100 && vm.frame === null; i++) await delay(100);
    expect(vm.frame).not.toBeNull();
    expect(vm.frame!.contact_set.length).toBeGreaterThanOrEqual(3);

    const cable = vm.hello!.actuated_cables[0];

    // valid command: ack confirms the slider at the acknowledged value
    vm.setCable(cable, 0.7);
    for (let i = 0; i < 100 && vm.cables.get(cable)!.pendingId !== null; i++) await delay(100);
    expect(vm.cables.get(cable)!.confirmed).toBe(0.7);
    expect(vm.cables.get(cable)!.slider).toBe(0.7);

    // telemetry echoes the commanded target for that cable
    const idx = vm.hello!.actuated_cables.indexOf(cable);
    for (let i = 0; i < 100 && Math.abs(vm.frame!.target_fractions[idx] - 0.7) > 1e-9; i++) {
      await delay(100);
    }
    expect(vm.frame!.target_fractions[idx]).toBeCloseTo(0.7, 9);

    // invalid command: rejection reverts the slider
    vm.setCable(cable, 1.7);
    for (let i = 0; i < 100 && vm.cables.get(cable)!.pendingId !== null; i++) await delay(100);
    expect(vm.cables.get(cable)!.slider).toBe(0.7);
    expect(vm.lastError).toMatch(/range/);

    ws.close();
  }, 90000);
});
