"""Teleoperation session core: commands in, telemetry frames out.

The session owns one SimState and advances it in sim time only; wall-clock
pacing, speed factors and transport live in the server layer.  Commands apply
at step boundaries and are logged with their sim time, so a recorded session
replays to a bit-identical telemetry stream.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import apply_cable_targets, init_resting, set_incline, step
from .errors import InvalidCommandError, InvalidPolicyError, SixbarError
from .harness import ScenarioConfig
from .policies import PolicyParams, compile_policy
from .stability import state_support
from .topology import build_six_bar

FRAME_RATE_HZ = 30.0


@dataclass(frozen=True)
class TelemetryFrame:
    """Wire-format snapshot streamed to the console (sim content only)."""

    time: float
    node_positions: tuple
    com: tuple
    projected_com: tuple
    support_polygon: tuple
    uphill_margin: float | None
    downhill_margin: float | None
    cable_fractions: tuple     # commanded rest-length fraction, all 24 cables
    cable_tensions: tuple      # N, all 24 cables
    target_fractions: tuple    # 6 actuated targets, gait order
    contact_set: tuple
    current_face: int | None
    distance_cm: float
    incline_deg: float
    paused: bool
    policy_running: str | None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["type"] = "telemetry"
        return d


def stream_hash(frames) -> str:
    """Canonical hash of a telemetry stream (replay-determinism check)."""
    h = hashlib.sha256()
    for f in frames:
        h.update(json.dumps(f.to_dict(), sort_keys=True).encode())
        h.update(b"\n")
    return h.hexdigest()


class TeleopSession:
    """One live simulation session driven by timestamped commands."""

    def __init__(self, config: ScenarioConfig, frame_rate: float = FRAME_RATE_HZ,
                 log_path=None):
        self.config = config
        self.frame_rate = frame_rate
        self.gait = config.resolved_gait()
        self.topology = build_six_bar(
            config.rod_length_cm, actuated_cables=[g.cable for g in self.gait]
        )
        self.speed = 1.0
        self.paused = False
        self.schedule = None
        self.schedule_t0 = 0.0
        self._frame_interval = 1.0 / frame_rate
        self._log_fh = Path(log_path).open("w") if log_path else None
        self.command_log: list[dict] = []
        self._reset(self.gait[0].face)
        if self._log_fh:
            self._log_fh.write(json.dumps(
                {"type": "header", "config": config.to_dict(), "frame_rate": frame_rate},
                sort_keys=True) + "\n")
            self._log_fh.flush()

    # -- lifecycle ---------------------------------------------------------

    def _reset(self, face: int):
        yaw = 0.0
        for g in self.gait:
            if g.face == face:
                yaw = g.yaw
                break
        self.state = init_resting(self.topology, self.config.world, face,
                                  params=self.config.robot, yaw=yaw)
        self.origin_x = float(self.state.total_com()[0])
        self.schedule = None
        self._next_frame_t = self.state.time

    def close(self):
        if self._log_fh:
            self._log_fh.write(json.dumps(
                {"type": "end", "sim_time": self.state.time}, sort_keys=True) + "\n")
            self._log_fh.close()
            self._log_fh = None

    def config_header(self) -> dict:
        return {
            "type": "hello",
            "config": self.config.to_dict(),
            "topology": self.topology.to_dict(),
            "frame_rate": self.frame_rate,
            "actuated_cables": list(self.topology.actuated_cables),
        }

    # -- commands ----------------------------------------------------------

    def handle_command(self, command: dict) -> dict:
        """Validate and apply a command at the current step boundary.

        Returns {"status": "ack"} or {"status": "rejected", "reason": ...};
        rejected commands leave the session unchanged.
        """
        try:
            kind = command.get("kind")
            if kind == "set_cable":
                cable = int(command["cable"])
                fraction = float(command["fraction"])
                apply_cable_targets(self.state, {cable: fraction})
            elif kind == "run_policy":
                params = command.get("params") or {}
                known = {f.name for f in dataclasses.fields(PolicyParams)}
                bad = set(params) - known
                if bad:
                    raise InvalidCommandError(f"unknown policy params: {sorted(bad)}")
                schedule = compile_policy(
                    command["policy_kind"], PolicyParams(**params),
                    [g.cable for g in self.gait],
                    repeats=int(command.get("cycles", 1000)),
                    c_max=self.config.robot.max_contraction,
                )
                self.schedule = schedule
                self.schedule_t0 = self.state.time
            elif kind == "stop_policy":
                self.schedule = None
                self.state.target_fraction[:] = 1.0
            elif kind == "set_incline":
                set_incline(self.state, float(command["incline_deg"]))
            elif kind == "reset":
                self._reset(int(command["face"]))
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            elif kind == "set_speed":
                factor = float(command["factor"])
                if not 0.01 <= factor <= 50.0:
                    raise InvalidCommandError("speed factor must lie in [0.01, 50]")
                self.speed = factor
            else:
                raise InvalidCommandError(f"unknown command kind {kind!r}")
        except (KeyError, TypeError, ValueError, SixbarError) as e:
            reason = str(e) or e.__class__.__name__
            return {"status": "rejected", "reason": reason}
        self._log_command(command)
        return {"status": "ack"}

    def _log_command(self, command: dict):
        entry = {"type": "command", "sim_time": self.state.time, "command": command}
        self.command_log.append(entry)
        if self._log_fh:
            self._log_fh.write(json.dumps(entry, sort_keys=True) + "\n")
            self._log_fh.flush()

    # -- time --------------------------------------------------------------

    def advance(self, sim_seconds: float) -> list[TelemetryFrame]:
        """Advance sim time (unless paused) and return the frames crossed."""
        frames: list[TelemetryFrame] = []
        if self.paused or sim_seconds <= 0.0:
            return frames
        dt = self.state.world.dt
        seq = np.array([g.cable for g in self.gait])
        for _ in range(int(round(sim_seconds / dt))):
            if self.schedule is not None:
                t_local = self.state.time - self.schedule_t0
                self.state.target_fraction[seq] = self.schedule.targets_at(t_local)
                if t_local > self.schedule.duration:
                    self.schedule = None
            step(self.state)
            if self.state.time >= self._next_frame_t - 0.5 * dt:
                frames.append(self.frame())
                self._next_frame_t += self._frame_interval
        return frames

    def advance_to(self, sim_time: float) -> list[TelemetryFrame]:
        return self.advance(sim_time - self.state.time)

    # -- telemetry -----------------------------------------------------------

    def frame(self) -> TelemetryFrame:
        s = self.state
        com = s.total_com()
        try:
            poly, proj, margins = state_support(s)
            polygon = tuple(map(tuple, np.round(poly.vertices, 9).tolist()))
            up, down = margins.uphill_margin, margins.downhill_margin
            proj_t = tuple(np.round(proj, 9).tolist())
        except SixbarError:
            polygon = ()
            up = down = None
            proj_t = (float(com[0]), float(com[1]))
        seq = [g.cable for g in self.gait]
        return TelemetryFrame(
            time=round(s.time, 9),
            node_positions=tuple(map(tuple, np.round(s.node_positions(), 9).tolist())),
            com=tuple(np.round(com, 9).tolist()),
            projected_com=proj_t,
            support_polygon=polygon,
            uphill_margin=up,
            downhill_margin=down,
            cable_fractions=tuple(np.round(s.commanded_fractions(), 9).tolist()),
            cable_tensions=tuple(np.round(s.cable_tension, 9).tolist()),
            target_fractions=tuple(np.round(s.target_fraction[seq], 9).tolist()),
            contact_set=tuple(int(n) for n in s.contact_set),
            current_face=s.current_face(),
            distance_cm=round(float(com[0]) - self.origin_x, 9),
            incline_deg=s.world.incline_deg,
            paused=self.paused,
            policy_running=self.schedule.kind if self.schedule is not None else None,
        )


def replay_log(path, tail_s: float = 0.0) -> tuple[list[TelemetryFrame], str]:
    """Re-run a recorded session log; returns (frames, stream hash).

    The log is JSON lines: a header with the scenario config, commands with
    their sim times, and an end marker.  Identical config and command times
    reproduce an identical stream.
    """
    lines = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise InvalidCommandError("session log must start with a header line")
    config = ScenarioConfig.from_dict(lines[0]["config"])
    session = TeleopSession(config, frame_rate=lines[0].get("frame_rate", FRAME_RATE_HZ))
    frames: list[TelemetryFrame] = []
    end_time = None
    for entry in lines[1:]:
        if entry["type"] == "command":
            frames.extend(session.advance_to(entry["sim_time"]))
            result = session.handle_command(entry["command"])
            if result["status"] != "ack":
                raise InvalidCommandError(
                    f"logged command failed on replay: {result['reason']}"
                )
        elif entry["type"] == "end":
            end_time = entry["sim_time"]
    if end_time is not None:
        frames.extend(session.advance_to(end_time))
    if tail_s > 0.0:
        frames.extend(session.advance(tail_s))
    return frames, stream_hash(frames)
