"""Open-loop actuation policies: single-cable, simultaneous and alternating.

A policy compiles to a per-cable timeline of rest-length fractions.  All three
share the same phase shape (linear contract ramp, hold at full contraction,
linear release ramp); they differ in how consecutive phases interleave:

  single:       one cable at a time, full return to neutral plus a dwell
                before the next phase starts.
  simultaneous: the next cable contracts during the current one's release.
  alternating:  the next cable is fully contracted `overlap` seconds before
                the current one starts releasing (two at full briefly).

Schedules are immutable; evaluation is a pure function of (schedule, t).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidPolicyError

SINGLE = "single"
SIMULTANEOUS = "simultaneous"
ALTERNATING = "alternating"
KINDS = (SINGLE, SIMULTANEOUS, ALTERNATING)


@dataclass(frozen=True)
class PolicyParams:
    """Timing of one actuation phase; `overlap` defaults per policy kind."""

    contraction: float = 0.74   # c: fraction of neutral length removed at full
    ramp_time: float = 1.0      # s, contract ramp duration
    hold_time: float = 1.5      # s, see per-kind semantics
    overlap: float | None = None
    dwell_time: float = 0.5     # s, single-cable only: pause at neutral
    release_time: float | None = None  # s, spool-out duration; None -> ramp_time

    def resolved_overlap(self, kind: str) -> float:
        if self.overlap is not None:
            return self.overlap
        if kind == SIMULTANEOUS:
            return self.ramp_time
        if kind == ALTERNATING:
            return self.hold_time / 2.0
        return 0.0

    def resolved_release(self) -> float:
        return self.release_time if self.release_time is not None else self.ramp_time


def default_policy_params(kind: str) -> PolicyParams:
    """Calibrated per-kind defaults (robot defaults, flat-to-moderate inclines).

    The single policy tips from a settled stance and wants slow deep pulls.
    The simultaneous policy lives off the contraction transient and runs a
    fast ramp with the next cable already engaged.  The alternating policy
    keeps the previous cable fully contracted through each roll and eases it
    out slowly, which holds the low two-cable crouch; its releases finish
    settling before the next contraction starts.
    """
    if kind == SIMULTANEOUS:
        return PolicyParams(contraction=0.74, ramp_time=0.3, hold_time=1.5)
    if kind == ALTERNATING:
        return PolicyParams(contraction=0.55, ramp_time=1.0, hold_time=4.0,
                            overlap=0.5, release_time=2.0)
    return PolicyParams()


@dataclass(frozen=True)
class ActuationPhase:
    cable: int
    t_contract_start: float
    t_full: float
    t_release_start: float
    t_neutral: float
    contraction_fraction: float

    def __post_init__(self):
        if not (self.t_contract_start < self.t_full <= self.t_release_start < self.t_neutral):
            raise InvalidPolicyError(f"phase times out of order: {self}")


@dataclass(frozen=True)
class PolicySchedule:
    """One compiled cycle of six phases, repeated `repeat_count` times."""

    kind: str
    phases: tuple[ActuationPhase, ...]
    sequence: tuple[int, ...]
    cycle_period: float
    repeat_count: int
    params: PolicyParams
    _starts: np.ndarray = field(repr=False, default=None)
    _fulls: np.ndarray = field(repr=False, default=None)
    _rels: np.ndarray = field(repr=False, default=None)
    _neus: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_starts", np.array([p.t_contract_start for p in self.phases]))
        object.__setattr__(self, "_fulls", np.array([p.t_full for p in self.phases]))
        object.__setattr__(self, "_rels", np.array([p.t_release_start for p in self.phases]))
        object.__setattr__(self, "_neus", np.array([p.t_neutral for p in self.phases]))

    @property
    def duration(self) -> float:
        """Time at which every cable is back at neutral for good."""
        last_cycle = (self.repeat_count - 1) * self.cycle_period
        return last_cycle + max(p.t_neutral for p in self.phases)

    def targets_at(self, t: float) -> np.ndarray:
        """Rest-length fractions for the 6 sequence cables at time t.

        Piecewise linear: 1 -> 1-c over the contract ramp, hold, then back to
        1 over the release ramp; outside any phase the cable sits at 1.
        """
        if t < 0.0:
            raise InvalidPolicyError("schedule time must be >= 0")
        c = self.params.contraction
        n = np.floor((t - self._starts) / self.cycle_period)
        np.clip(n, 0, self.repeat_count - 1, out=n)
        tl = t - n * self.cycle_period
        down = np.clip((tl - self._starts) / (self._fulls - self._starts), 0.0, 1.0)
        up = np.clip((tl - self._rels) / (self._neus - self._rels), 0.0, 1.0)
        return 1.0 - c * (down - up)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sequence": list(self.sequence),
            "cycle_period_s": self.cycle_period,
            "repeat_count": self.repeat_count,
            "contraction": self.params.contraction,
            "phases": [
                {
                    "cable": p.cable,
                    "t_contract_start": p.t_contract_start,
                    "t_full": p.t_full,
                    "t_release_start": p.t_release_start,
                    "t_neutral": p.t_neutral,
                }
                for p in self.phases
            ],
        }

    def timeline_rows(self, sample_dt: float = 0.05):
        """(t, fraction_0..fraction_5) rows for plotting the policy."""
        tmax = self.duration
        ts = np.arange(0.0, tmax + sample_dt, sample_dt)
        return [(float(t), *map(float, self.targets_at(float(t)))) for t in ts]


def compile_policy(kind: str, params: PolicyParams, sequence, repeats: int,
                   c_max: float = 0.78) -> PolicySchedule:
    """Compile a policy kind into an executable six-phase cycle."""
    if kind not in KINDS:
        raise InvalidPolicyError(f"unknown policy kind {kind!r}")
    seq = tuple(int(x) for x in sequence)
    if len(seq) != 6:
        raise InvalidPolicyError("sequence must list 6 cables in gait order")
    if repeats < 1:
        raise InvalidPolicyError("repeats must be >= 1")
    c = params.contraction
    r = params.ramp_time
    h = params.hold_time
    if not 0.0 < c <= c_max:
        raise InvalidPolicyError(f"contraction must lie in (0, {c_max}]")
    if r <= 0.0 or h <= 0.0:
        raise InvalidPolicyError("ramp_time and hold_time must be positive")
    o = params.resolved_overlap(kind)
    rel = params.resolved_release()
    if rel <= 0.0:
        raise InvalidPolicyError("release_time must be positive")

    phases = []
    if kind == SINGLE:
        if params.dwell_time < 0.0:
            raise InvalidPolicyError("dwell_time must be >= 0")
        period = r + h + rel + params.dwell_time
        for k, cable in enumerate(seq):
            s = k * period
            phases.append(ActuationPhase(cable, s, s + r, s + r + h, s + r + h + rel, c))
        cycle = 6.0 * period
    elif kind == SIMULTANEOUS:
        if not 0.0 < o <= max(r, rel):
            raise InvalidPolicyError("simultaneous overlap must lie in (0, ramp_time]")
        # next cable starts contracting (r - o) after the current starts releasing
        period = r + h + (r - o)
        for k, cable in enumerate(seq):
            s = k * period
            phases.append(ActuationPhase(cable, s, s + r, s + r + h, s + r + h + rel, c))
        cycle = 6.0 * period
    else:  # alternating
        period = r + h
        if o <= 0.0:
            raise InvalidPolicyError("alternating overlap must be positive")
        if o >= period:
            raise InvalidPolicyError(
                "alternating overlap must be smaller than ramp_time + hold_time "
                "(three cables would be fully contracted)"
            )
        for k, cable in enumerate(seq):
            s = k * period
            full = s + r
            release = full + period + o   # next cable reaches full at full+period
            phases.append(ActuationPhase(cable, s, full, release, release + rel, c))
        cycle = 6.0 * period

    return PolicySchedule(
        kind=kind,
        phases=tuple(phases),
        sequence=seq,
        cycle_period=cycle,
        repeat_count=int(repeats),
        params=params,
    )


def targets_at(schedule: PolicySchedule, t: float) -> np.ndarray:
    return schedule.targets_at(t)


def write_timeline_csv(schedule: PolicySchedule, path, sample_dt: float = 0.05):
    """Per-cable rest-length-fraction timeline, for plotting the policy."""
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s"] + [f"cable_{c}" for c in schedule.sequence])
        for row in schedule.timeline_rows(sample_dt):
            w.writerow(row)
    return path


# -- gait construction ---------------------------------------------------------


@dataclass(frozen=True)
class GaitStep:
    """Stance and cable for one step of the rolling gait.

    `face`/`yaw` reproduce the stance the gait reaches before this step, so
    per-step analyses can re-create it with init_resting(face, yaw=yaw).
    """

    cable: int
    face: int
    yaw: float


def find_step_cable(state, direction=(1.0, 0.0), candidates=None,
                    contraction: float | None = None, probe_kwargs: dict | None = None) -> int:
    """Cable whose quasi-static full contraction rolls the robot toward `direction`.

    Candidates default to the actuated set.  A candidate scores by the CoM
    displacement along `direction` when its contraction tips the robot onto a
    new face; candidates that do not tip, or tip against the direction, do
    not count.  Raises NoStepAvailableError when no candidate rolls forward.
    """
    from .errors import NoStepAvailableError
    from .stability import quasistatic_settle

    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    candidates = list(candidates) if candidates is not None else list(state.topology.actuated_cables)
    contraction = contraction if contraction is not None else state.params.max_contraction
    probe_kwargs = probe_kwargs or {}
    base_face = state.current_face()
    if base_face is None:
        raise NoStepAvailableError("robot is not settled on a stable face")
    com0 = state.total_com()

    best_cable = None
    best_score = 0.25  # cm of forward CoM motion required to count as a step
    for cable in candidates:
        probe = quasistatic_settle(state, {int(cable): 1.0 - contraction}, **probe_kwargs)
        if probe.current_face() in (None, base_face):
            continue
        d = probe.total_com() - com0
        score = float(d[:2] @ direction)
        if score > best_score:
            best_score = score
            best_cable = int(cable)
    if best_cable is None:
        raise NoStepAvailableError(
            f"no cable rolls the robot toward {direction.tolist()} from face {base_face}"
        )
    return best_cable


def derive_gait(topology, world=None, params=None, contraction: float | None = None,
                start_face: int = 0, steps: int = 6, candidates=None,
                probe_kwargs: dict | None = None) -> list[GaitStep]:
    """Derive the 6-cable straight-line rolling gait by repeated step search.

    From a settled stance, finds the cable that rolls the robot along +x,
    executes the roll quasi-statically (contract, settle, release, settle)
    and repeats.  The returned steps carry the stance (face, yaw) each cable
    expects, for reproducible per-step analysis.
    """
    from .dynamics import RobotParams, WorldConfig, estimate_yaw, init_resting
    from .stability import quasistatic_settle

    world = world or WorldConfig()
    params = params or RobotParams()
    state = init_resting(topology, world, start_face, params=params)
    entries = []
    for _ in range(steps):
        face = state.current_face()
        yaw = estimate_yaw(state, face)
        cable = find_step_cable(state, (1.0, 0.0),
                                candidates=candidates or range(24),
                                contraction=contraction, probe_kwargs=probe_kwargs)
        entries.append(GaitStep(cable=cable, face=face, yaw=float(yaw)))
        c = contraction if contraction is not None else params.max_contraction
        state = quasistatic_settle(state, {cable: 1.0 - c}, **(probe_kwargs or {}))
        state = quasistatic_settle(state, {cable: 1.0}, **(probe_kwargs or {}))
    return entries
