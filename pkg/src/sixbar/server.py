"""WebSocket front door for teleoperation sessions.

One session per connection.  Wire protocol: JSON text frames, each carrying a
`type` field:

  server -> client:  {"type": "hello", config, topology, frame_rate, ...}
                     {"type": "telemetry", ...frame fields, "wall_time": t}
                     {"type": "ack", "id": n}
                     {"type": "rejection", "id": n, "reason": str}
                     {"type": "error", "reason": str}
                     {"type": "end"}
  client -> server:  {"type": "command", "id": n, "command": {"kind": ...}}

Telemetry frames are dropped oldest-first when the consumer lags; control
messages (acks, rejections, errors) are never dropped.  The same HTTP port
serves the console's static assets on non-WebSocket requests.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
import time
from collections import deque
from pathlib import Path

from .harness import ScenarioConfig
from .teleop import TeleopSession

TICK_S = 1.0 / 60.0          # wall pacing granularity
MAX_CHUNK_SIM_S = 0.25       # cap per-tick sim advance (stall recovery)
FRAME_QUEUE_LIMIT = 90


class SessionConnection:
    """Bridges one TeleopSession to one websocket connection."""

    def __init__(self, websocket, config: ScenarioConfig, log_dir: Path | None):
        self.ws = websocket
        log_path = None
        if log_dir is not None:
            log_dir.mkdir(parents=True, exist_ok=True)
            log_path = log_dir / f"session-{int(time.time() * 1000)}.jsonl"
        self.session = TeleopSession(config, log_path=log_path)
        self.frames: deque = deque(maxlen=FRAME_QUEUE_LIMIT)
        self.control: asyncio.Queue = asyncio.Queue()
        self.wake = asyncio.Event()
        self.closed = False

    async def run(self):
        await self.ws.send(json.dumps(self.session.config_header()))
        tasks = [
            asyncio.create_task(self._receiver()),
            asyncio.create_task(self._pacer()),
            asyncio.create_task(self._sender()),
        ]
        try:
            await asyncio.gather(*tasks)
        finally:
            self.closed = True
            for t in tasks:
                t.cancel()
            self.session.close()

    async def _receiver(self):
        try:
            async for raw in self.ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as e:
                    await self.control.put({"type": "error", "reason": f"bad JSON: {e}"})
                    self.wake.set()
                    continue
                if msg.get("type") != "command" or not isinstance(msg.get("command"), dict):
                    await self.control.put(
                        {"type": "error", "reason": "expected {type: command, command: {...}}"}
                    )
                    self.wake.set()
                    continue
                result = self.session.handle_command(msg["command"])
                reply = {"id": msg.get("id")}
                if result["status"] == "ack":
                    reply["type"] = "ack"
                else:
                    reply["type"] = "rejection"
                    reply["reason"] = result["reason"]
                await self.control.put(reply)
                self.wake.set()
        finally:
            self.closed = True
            self.wake.set()

    async def _pacer(self):
        prev = time.monotonic()
        target = self.session.state.time
        next_keepalive = 0.0
        while not self.closed:
            await asyncio.sleep(TICK_S)
            now = time.monotonic()
            sim_dt = min((now - prev) * self.session.speed, MAX_CHUNK_SIM_S)
            prev = now
            if self.session.paused:
                # frozen view at the frame rate, wall metadata advancing
                target = self.session.state.time
                if now >= next_keepalive:
                    frame = self.session.frame().to_dict()
                    frame["wall_time"] = now
                    self.frames.append(frame)
                    next_keepalive = now + 1.0 / self.session.frame_rate
            else:
                # track a sim-time target so sub-step chunks accumulate
                target = min(target + sim_dt, self.session.state.time + MAX_CHUNK_SIM_S)
                for frame in self.session.advance_to(target):
                    d = frame.to_dict()
                    d["wall_time"] = now
                    self.frames.append(d)
            self.wake.set()

    async def _sender(self):
        while not self.closed:
            await self.wake.wait()
            self.wake.clear()
            while not self.control.empty():
                await self.ws.send(json.dumps(self.control.get_nowait()))
            while self.frames:
                await self.ws.send(json.dumps(self.frames.popleft()))


def _static_responder(ui_dir: Path | None):
    def process_request(connection, request):
        if "Upgrade" in request.headers.get("Connection", "") or request.path == "/ws":
            return None
        if ui_dir is None:
            return connection.respond(404, "no UI assets configured\n")
        rel = request.path.lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        try:
            target.relative_to(ui_dir.resolve())
        except ValueError:
            return connection.respond(403, "forbidden\n")
        if not target.is_file():
            return connection.respond(404, "not found\n")
        body = target.read_bytes()
        response = connection.respond(200, "")
        response.body = body
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        response.headers["Content-Type"] = ctype
        response.headers["Content-Length"] = str(len(body))
        return response

    return process_request


async def serve_sessions(config: ScenarioConfig, host: str = "127.0.0.1", port: int = 8765,
                         ui_dir=None, log_dir=None, ready: asyncio.Event | None = None):
    """Serve teleop sessions (and UI assets) until cancelled."""
    import websockets.asyncio.server

    ui_dir = Path(ui_dir) if ui_dir else None
    log_dir = Path(log_dir) if log_dir else None

    async def handler(websocket):
        conn = SessionConnection(websocket, config, log_dir)
        try:
            await conn.run()
        except Exception:
            pass

    async with websockets.asyncio.server.serve(
        handler, host, port, process_request=_static_responder(ui_dir)
    ):
        if ready is not None:
            ready.set()
        await asyncio.Future()


def run_server(config: ScenarioConfig, host: str = "127.0.0.1", port: int = 8765,
               ui_dir=None, log_dir=None):
    try:
        asyncio.run(serve_sessions(config, host, port, ui_dir, log_dir))
    except KeyboardInterrupt:
        pass
