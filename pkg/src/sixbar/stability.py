"""Quasi-static stability analysis in the incline-plane frame.

The simulation frame puts the inclined plane at z = 0 with uphill along +x, so
a "2-D point in the plane frame" is just (x, y).  Gravity is tilted instead of
the plane; projecting the CoM along gravity onto the plane therefore reduces to
a downhill shift of height * tan(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSupportError

UPHILL = np.array([1.0, 0.0])


@dataclass(frozen=True)
class SupportPolygon:
    """Counterclockwise convex hull of the contact points, in the plane frame."""

    vertices: np.ndarray          # (n, 2), CCW, no collinear interior points
    uphill_direction: np.ndarray  # unit 2-vector

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.uphill_direction.setflags(write=False)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


@dataclass(frozen=True)
class StabilityMargins:
    """Signed distances from the projected CoM to the extreme base edges.

    Positive means the projection lies inside that edge; the uphill margin is
    the distance to the tip-forward edge, the downhill margin to the
    tip-backward edge.
    """

    uphill_margin: float
    downhill_margin: float


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Counterclockwise convex hull via the monotone chain, collinear points dropped."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        raise DegenerateSupportError(f"need >= 3 distinct points, got {len(pts)}")

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and _cross2(chain[-2], chain[-1], p) <= 0.0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateSupportError("contact points are collinear")
    return np.array(hull, dtype=float)


def support_polygon(contacts, uphill_direction=UPHILL) -> SupportPolygon:
    """Supporting base polygon of >= 3 contact points given in the plane frame.

    Accepts 3-D contact points (the plane-normal component is ignored) or 2-D
    points directly.  Raises DegenerateSupportError for < 3 distinct points or
    a collinear set.
    """
    contacts = np.asarray(contacts, dtype=float)
    if contacts.ndim != 2 or len(contacts) < 3:
        raise DegenerateSupportError("need at least 3 contact points")
    flat = contacts[:, :2]
    hull = convex_hull_2d(flat)
    direction = np.asarray(uphill_direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return SupportPolygon(vertices=hull, uphill_direction=direction)


def project_com(com, world) -> np.ndarray:
    """Project the CoM along gravity onto the inclined plane (plane-frame x, y).

    At incline theta the gravity vector leans downhill, so the projection sits
    height * tan(theta) downhill (-x) of the plane-normal foot.
    """
    com = np.asarray(com, dtype=float)
    theta = math.radians(world.incline_deg)
    return np.array([com[0] - com[2] * math.tan(theta), com[1]])


def _edge_inside_distance(point, v0, v1) -> float:
    """Signed distance from point to edge line; positive on the interior side (CCW)."""
    e = v1 - v0
    n_out = np.array([e[1], -e[0]])
    n_out = n_out / np.linalg.norm(n_out)
    return -float((point - v0) @ n_out)


def directional_margin(point, polygon: SupportPolygon, direction) -> float:
    """Signed distance to the polygon edge extremal in `direction`.

    The relevant edge is the one whose outward normal best aligns with
    `direction`; ties break toward the lower first-vertex index.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    best_dot = -np.inf
    best_margin = 0.0
    for v0, v1 in polygon.edges():
        e = v1 - v0
        n_out = np.array([e[1], -e[0]])
        n_out = n_out / np.linalg.norm(n_out)
        d = float(n_out @ direction)
        if d > best_dot + 1e-12:
            best_dot = d
            best_margin = _edge_inside_distance(point, v0, v1)
    return best_margin


def stability_margins(proj, polygon: SupportPolygon) -> StabilityMargins:
    """Uphill/downhill stability margins of a projected CoM (positive = inside)."""
    proj = np.asarray(proj, dtype=float)
    up = polygon.uphill_direction
    return StabilityMargins(
        uphill_margin=directional_margin(proj, polygon, up),
        downhill_margin=directional_margin(proj, polygon, -up),
    )


def max_incline_no_slip(mu: float) -> float:
    """Steepest incline (degrees) a Coulomb contact holds without sliding: arctan(mu)."""
    if mu < 0.0:
        raise ValueError("friction coefficient must be non-negative")
    return math.degrees(math.atan(mu))


# -- quasi-static probing ----------------------------------------------------


def state_support(state):
    """(polygon, projected CoM, margins) of a simulation state's contact set."""
    contacts = state.node_positions()[list(state.contact_set)]
    poly = support_polygon(contacts)
    proj = project_com(state.total_com(), state.world)
    return poly, proj, stability_margins(proj, poly)


def quasistatic_settle(state, fractions: dict, damping_scale: float = 5.0,
                       ke_threshold: float = 5e-5, max_time: float = 25.0):
    """Copy the state, command cable fractions and settle with heavy damping.

    Used by the contraction search and the step-cable search: the scaled body
    drag suppresses dynamic overshoot so the settled pose approximates the
    quasi-static response.  Slip detection is off; deformation drag on the
    feet is expected.
    """
    from .dynamics import settle

    probe = state.copy()
    for cable, frac in fractions.items():
        probe.target_fraction[int(cable)] = float(frac)
    settle(probe, damping_scale=damping_scale, ke_threshold=ke_threshold,
           max_time=max_time, detect_slip=False)
    return probe


@dataclass(frozen=True)
class NotAchievable:
    """Returned when no admissible contraction initiates a forward roll."""

    reason: str


def required_contraction(topology, world, cable: int, face: int, yaw: float = 0.0,
                         params=None, c_max: float | None = None,
                         resolution: float = 0.005, probe_kwargs: dict | None = None):
    """Smallest contraction fraction of `cable` that tips the robot uphill.

    The robot starts settled on `face` at `yaw` (the stance the gait reaches
    for this step).  Bisection over quasi-static settled probes at the given
    resolution (fraction of neutral length).  Returns NotAchievable if the
    maximum contraction does not tip, or if some intermediate contraction
    tips downhill first; settling failures propagate.
    """
    from .dynamics import RobotParams, init_resting

    params = params or RobotParams()
    c_max = c_max if c_max is not None else params.max_contraction
    probe_kwargs = probe_kwargs or {}
    base = init_resting(topology, world, face, params=params, yaw=yaw)
    base_face = base.current_face()
    com0 = base.total_com()

    def outcome(c: float) -> str:
        probe = quasistatic_settle(base, {cable: 1.0 - c}, **probe_kwargs)
        f = probe.current_face()
        if f == base_face:
            return "stable"
        return "forward" if probe.total_com()[0] > com0[0] else "backward"

    top = outcome(c_max)
    if top == "stable":
        return NotAchievable(f"cable {cable}: max contraction {c_max} does not tip")
    if top == "backward":
        return NotAchievable(f"cable {cable}: tips downhill at {c_max}")
    lo, hi = 0.0, c_max
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        o = outcome(mid)
        if o == "forward":
            hi = mid
        elif o == "stable":
            lo = mid
        else:
            return NotAchievable(f"cable {cable}: tips downhill at {mid:.3f}")
    return hi


# -- trial outcome classification ---------------------------------------------


def write_required_contraction_csv(rows, path):
    """CSV rows (incline_deg, cable, required_fraction | NA).

    `rows` holds (theta, cable, result) with result a float or NotAchievable.
    """
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["incline_deg", "cable", "required_fraction"])
        for theta, cable, result in rows:
            value = "NA" if isinstance(result, NotAchievable) else f"{result:.4f}"
            w.writerow([theta, cable, value])
    return path


class FailureMode(str, Enum):
    NONE = "none"
    ROLLED_BACK = "rolled_back"
    SLIPPED = "slipped"
    STALLED = "stalled"


@dataclass(frozen=True)
class FaceChange:
    time: float
    from_face: int | None
    to_face: int | None
    dx: float  # uphill displacement of the contact centroid, cm


def classify_failure(face_events, max_segment_slip_cm: float, success: bool,
                     backward_dx: float = -0.5, slip_threshold_cm: float = 5.0) -> FailureMode:
    """Classify a completed trial trace.

    RolledBack: some face change moved the robot downhill.  Slipped: the
    contact set slid more than the threshold between face changes.  Stalled:
    neither face change nor slip while the schedule ran.  None on success.
    """
    if success:
        return FailureMode.NONE
    if any(ev.dx < backward_dx for ev in face_events):
        return FailureMode.ROLLED_BACK
    if max_segment_slip_cm > slip_threshold_cm:
        return FailureMode.SLIPPED
    return FailureMode.STALLED
