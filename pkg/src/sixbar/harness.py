"""Scenario runner: single trials, incline sweeps, metrics and file outputs.

A scenario couples a robot build, a world, a compiled policy schedule and the
gait (cable sequence plus per-step stances).  Trials are deterministic per
config; repeated trials differ only when a nonzero perturbation is configured,
in which case each trial index seeds its own velocity noise.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    RobotParams,
    SimState,
    WorldConfig,
    init_resting,
    step,
)
from .errors import (
    ConfigError,
    DivergenceError,
    NonConvergenceError,
    SettlingSlipError,
)
from .policies import (
    GaitStep,
    PolicyParams,
    PolicySchedule,
    compile_policy,
    default_policy_params,
)
from .stability import (
    FaceChange,
    FailureMode,
    classify_failure,
    project_com,
    stability_margins,
    state_support,
)
from .topology import build_six_bar

DEFAULT_SUCCESS_DISTANCE_CM = 91.4


def _dataclass_from_dict(cls, data: dict, where: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad {where} config: {e}") from e


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one trial or sweep."""

    rod_length_cm: float = 25.0
    world: WorldConfig = field(default_factory=WorldConfig)
    robot: RobotParams = field(default_factory=RobotParams)
    policy_kind: str = "single"
    policy: PolicyParams | None = None  # None -> calibrated per-kind defaults
    cycles: int = 3
    gait: tuple[GaitStep, ...] | None = None  # None -> packaged default gait
    duration_s: float | None = None           # None -> schedule duration + tail
    success_distance_cm: float = DEFAULT_SUCCESS_DISTANCE_CM
    trials: int = 5
    seed: int = 0
    perturbation_cm_s: float = 0.0
    sample_dt_s: float = 1.0 / 30.0
    # stop hopeless trials early (first backward roll, sustained slip, or a
    # full cycle without any face change); classification is unaffected
    early_exit: bool = True

    def __post_init__(self):
        if self.success_distance_cm <= 0.0:
            raise ConfigError("success_distance_cm must be positive")
        if self.duration_s is not None and self.duration_s <= 0.0:
            raise ConfigError("duration_s must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.policy is None:
            object.__setattr__(self, "policy", default_policy_params(self.policy_kind))
        if self.gait is not None:
            object.__setattr__(
                self, "gait",
                tuple(g if isinstance(g, GaitStep) else GaitStep(**g) for g in self.gait),
            )

    def resolved_gait(self) -> tuple[GaitStep, ...]:
        if self.gait is not None:
            return self.gait
        return default_gait()

    def schedule(self) -> PolicySchedule:
        gait = self.resolved_gait()
        return compile_policy(
            self.policy_kind, self.policy, [g.cable for g in gait],
            repeats=self.cycles, c_max=self.robot.max_contraction,
        )

    def to_dict(self) -> dict:
        d = {
            "rod_length_cm": self.rod_length_cm,
            "world": dataclasses.asdict(self.world),
            "robot": dataclasses.asdict(self.robot),
            "policy_kind": self.policy_kind,
            "policy": dataclasses.asdict(self.policy),
            "cycles": self.cycles,
            "gait": [dataclasses.asdict(g) for g in self.resolved_gait()],
            "duration_s": self.duration_s,
            "success_distance_cm": self.success_distance_cm,
            "trials": self.trials,
            "seed": self.seed,
            "perturbation_cm_s": self.perturbation_cm_s,
            "sample_dt_s": self.sample_dt_s,
        }
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        for key, sub in (("world", WorldConfig), ("robot", RobotParams),
                         ("policy", PolicyParams)):
            if key in data and isinstance(data[key], dict):
                data[key] = _dataclass_from_dict(sub, data[key], key)
        if data.get("gait") is not None:
            data["gait"] = tuple(
                _dataclass_from_dict(GaitStep, g, "gait step") for g in data["gait"]
            )
        return _dataclass_from_dict(cls, data, "scenario")

    @classmethod
    def from_json_file(cls, path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        return cls.from_dict(raw)


def default_gait() -> tuple[GaitStep, ...]:
    """The packaged straight-line gait derived by policies.derive_gait."""
    from importlib import resources

    ref = resources.files("sixbar").joinpath("data/default_gait.json")
    data = json.loads(ref.read_text())
    return tuple(GaitStep(**g) for g in data["steps"])


@dataclass
class TrialResult:
    """Metrics and traces of one scenario run."""

    distance_cm: float
    avg_velocity_cm_s: float
    success: bool
    failure_mode: FailureMode
    step_count: int
    elapsed_s: float
    neutral_height_cm: float
    max_com_height_pct: float
    max_segment_slip_cm: float
    face_events: list[FaceChange]
    com_trace: list[tuple[float, float, float, float]]      # t, x, y, z
    margin_trace: list[tuple[float, float, float]]          # t, uphill, downhill
    contact_count_trace: list[tuple[float, int]]
    valid: bool = True
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "distance_cm": self.distance_cm,
            "avg_velocity_cm_s": self.avg_velocity_cm_s,
            "success": self.success,
            "failure_mode": self.failure_mode.value,
            "step_count": self.step_count,
            "elapsed_s": self.elapsed_s,
            "neutral_height_cm": self.neutral_height_cm,
            "max_com_height_pct": self.max_com_height_pct,
            "max_segment_slip_cm": self.max_segment_slip_cm,
            "face_events": [dataclasses.asdict(e) for e in self.face_events],
            "com_trace": self.com_trace,
            "margin_trace": self.margin_trace,
            "contact_count_trace": self.contact_count_trace,
            "valid": self.valid,
            "diagnostic": self.diagnostic,
        }

    def result_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def com_height_ratio(com_trace, neutral_height: float, after_t: float = 0.0) -> float:
    """Max plane-normal CoM height over the trace as a % of the neutral height."""
    if neutral_height <= 0.0:
        raise ValueError("neutral_height must be positive")
    heights = [z for t, x, y, z in com_trace if t >= after_t]
    if not heights:
        return 100.0
    return max(heights) / neutral_height * 100.0


def _failed_result(mode: FailureMode, diagnostic: str, neutral_height: float = 0.0,
                   valid: bool = True) -> TrialResult:
    return TrialResult(
        distance_cm=0.0, avg_velocity_cm_s=0.0, success=False, failure_mode=mode,
        step_count=0, elapsed_s=0.0, neutral_height_cm=neutral_height,
        max_com_height_pct=100.0, max_segment_slip_cm=0.0, face_events=[],
        com_trace=[], margin_trace=[], contact_count_trace=[],
        valid=valid, diagnostic=diagnostic,
    )


def run_trial(config: ScenarioConfig, trial_index: int = 0) -> TrialResult:
    """Simulate the compiled schedule from a settled start.

    Success means travelling `success_distance_cm` up the incline before the
    trial duration elapses; failures are classified from the trace.
    """
    gait = config.resolved_gait()
    topo = build_six_bar(config.rod_length_cm, actuated_cables=[g.cable for g in gait])
    schedule = config.schedule()
    try:
        state = init_resting(topo, config.world, gait[0].face,
                             params=config.robot, yaw=gait[0].yaw)
    except SettlingSlipError as e:
        return _failed_result(FailureMode.SLIPPED, f"slipped while settling: {e}")
    except NonConvergenceError as e:
        return _failed_result(FailureMode.ROLLED_BACK, f"could not settle: {e}")

    if config.perturbation_cm_s > 0.0:
        rng = np.random.default_rng((config.seed, trial_index))
        state.rod_vel += rng.normal(0.0, config.perturbation_cm_s, (6, 3))

    duration = config.duration_s
    if duration is None:
        duration = schedule.duration + 5.0
    dt = config.world.dt
    n_steps = int(round(duration / dt))
    sample_every = max(1, int(round(config.sample_dt_s / dt)))
    face_check_every = max(1, int(round(0.01 / dt)))

    seq = np.array(schedule.sequence)
    com0 = state.total_com()
    neutral_height = float(com0[2])
    origin_x = float(com0[0])
    t_first_full = schedule.phases[0].t_full

    com_trace: list[tuple[float, float, float, float]] = []
    margin_trace: list[tuple[float, float, float]] = []
    contact_trace: list[tuple[float, int]] = []
    face_events: list[FaceChange] = []
    max_height = -np.inf
    current_face = state.current_face()
    pending_face = None
    pending_count = 0
    segment_slip = 0.0
    max_segment_slip = 0.0
    slip_total = 0.0
    success = False
    elapsed = duration
    distance = 0.0
    diagnostic = ""
    valid = True

    def face_centroid_x(face_idx):
        tri = list(state._cache.faces[face_idx])
        return float(state.node_positions()[tri, 0].mean())

    stop_early = ""
    try:
        for i in range(n_steps):
            state.target_fraction[seq] = schedule.targets_at(state.time)
            step(state)

            if state.contact_slide_speed.any():
                touching = int((state.contact_normal > 0.0).sum())
                inc = float(state.contact_slide_speed.sum()) / max(touching, 1) * dt
                segment_slip += inc
                slip_total += inc
                if segment_slip > max_segment_slip:
                    max_segment_slip = segment_slip

            com = state.total_com()
            if state.time >= t_first_full and com[2] > max_height:
                max_height = com[2]
            distance = float(com[0]) - origin_x

            if (i + 1) % face_check_every == 0:
                f = state.current_face()
                if f is not None and f != current_face:
                    if f == pending_face:
                        pending_count += 1
                        if pending_count >= 3:
                            old_x = face_centroid_x(current_face) if current_face is not None else 0.0
                            new_x = face_centroid_x(f)
                            face_events.append(FaceChange(
                                time=float(state.time), from_face=current_face,
                                to_face=f, dx=new_x - old_x,
                            ))
                            current_face = f
                            pending_face = None
                            pending_count = 0
                            segment_slip = 0.0
                    else:
                        pending_face = f
                        pending_count = 1
                else:
                    pending_face = None
                    pending_count = 0

            if (i + 1) % sample_every == 0:
                t = float(state.time)
                com_trace.append((t, float(com[0]), float(com[1]), float(com[2])))
                contact_trace.append((t, len(state.contact_set)))
                try:
                    _, _, margins = state_support(state)
                    margin_trace.append((t, margins.uphill_margin, margins.downhill_margin))
                except Exception:
                    margin_trace.append((t, math.nan, math.nan))

            if distance >= config.success_distance_cm:
                success = True
                elapsed = float(state.time)
                break

            if config.early_exit:
                if face_events and face_events[-1].dx < -0.5:
                    stop_early = "rolled backward"
                    break
                if max_segment_slip > 15.0:
                    stop_early = "sustained sliding"
                    break
                if not face_events and state.time > schedule.cycle_period + 2.0:
                    stop_early = "no face change in a full cycle"
                    break
    except DivergenceError as e:
        valid = False
        diagnostic = str(e)

    if not success:
        elapsed = float(state.time)
        if stop_early:
            diagnostic = (diagnostic + "; " if diagnostic else "") + f"stopped early: {stop_early}"
    mode = classify_failure(face_events, max_segment_slip, success)

    height_pct = 100.0 if max_height == -np.inf else max_height / neutral_height * 100.0
    return TrialResult(
        distance_cm=distance,
        avg_velocity_cm_s=distance / elapsed if elapsed > 0 else 0.0,
        success=success,
        failure_mode=mode,
        step_count=len(face_events),
        elapsed_s=elapsed,
        neutral_height_cm=neutral_height,
        max_com_height_pct=float(height_pct),
        max_segment_slip_cm=max_segment_slip,
        face_events=face_events,
        com_trace=com_trace,
        margin_trace=margin_trace,
        contact_count_trace=contact_trace,
        valid=valid,
        diagnostic=diagnostic,
    )


def run_trials(config: ScenarioConfig) -> list[TrialResult]:
    """Run the configured number of trials.

    With zero perturbation every trial is bit-identical (the dynamics are
    deterministic), so the single computed result is replicated.
    """
    if config.perturbation_cm_s == 0.0:
        result = run_trial(config, 0)
        return [result] * config.trials
    return [run_trial(config, k) for k in range(config.trials)]


@dataclass
class SweepRow:
    incline_deg: float
    policy_kind: str
    success_rate: float
    avg_velocity_cm_s: float
    failure_modes: list[str]


@dataclass
class SweepResult:
    rows: list[SweepRow]

    def max_reliable_incline(self, policy_kind: str | None = None) -> float | None:
        """Largest incline at which every trial succeeded."""
        ok = [r.incline_deg for r in self.rows
              if r.success_rate == 1.0 and (policy_kind is None or r.policy_kind == policy_kind)]
        return max(ok) if ok else None

    def to_rows(self):
        return [
            (r.incline_deg, r.policy_kind, r.success_rate, r.avg_velocity_cm_s)
            for r in self.rows
        ]


def incline_sweep(config: ScenarioConfig, inclines, trials: int | None = None) -> SweepResult:
    """Run `trials` trials at each incline (ascending) and tabulate outcomes."""
    inclines = list(inclines)
    if sorted(inclines) != inclines:
        raise ConfigError("incline list must be sorted ascending")
    trials = trials if trials is not None else config.trials
    rows = []
    for theta in inclines:
        cfg = dataclasses.replace(
            config,
            world=dataclasses.replace(config.world, incline_deg=float(theta)),
            trials=trials,
        )
        results = run_trials(cfg)
        n_ok = sum(1 for r in results if r.success)
        vels = [r.avg_velocity_cm_s for r in results if r.success]
        rows.append(SweepRow(
            incline_deg=float(theta),
            policy_kind=config.policy_kind,
            success_rate=n_ok / len(results),
            avg_velocity_cm_s=float(np.mean(vels)) if vels else 0.0,
            failure_modes=[r.failure_mode.value for r in results],
        ))
    return SweepResult(rows=rows)


# -- file outputs ---------------------------------------------------------------


def write_result_files(result: TrialResult, out_dir, config: ScenarioConfig | None = None) -> dict:
    """Write result.json, com_trace.csv and margins.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    payload = result.to_dict()
    if config is not None:
        payload["config"] = config.to_dict()
    paths["result"] = out / "result.json"
    paths["result"].write_text(json.dumps(payload, indent=2, sort_keys=True))

    paths["com_trace"] = out / "com_trace.csv"
    with paths["com_trace"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "x_cm", "y_cm", "z_cm", "height_pct"])
        for t, x, y, z in result.com_trace:
            w.writerow([t, x, y, z, z / result.neutral_height_cm * 100.0])

    paths["margins"] = out / "margins.csv"
    with paths["margins"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "uphill_margin_cm", "downhill_margin_cm"])
        for row in result.margin_trace:
            w.writerow(row)
    return paths


def write_sweep_csv(sweep: SweepResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["incline_deg", "policy", "success_rate", "avg_velocity_cm_s"])
        for row in sweep.to_rows():
            w.writerow(row)
    return path
