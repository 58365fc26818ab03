"""Rigid-rod / tension-only-cable dynamics on an inclined plane.

The simulation runs in the incline-plane frame: the ground is z = 0, uphill is
+x, and gravity is tilted by the incline angle.  Units are cm, kg, s, N; since
1 N = 100 kg*cm/s^2, accelerations are force/mass * 100.

Integration is semi-implicit Euler: velocities first (forces at current
positions), then positions with the new velocities.  Ground contact is a
penalty spring-damper on the rod end caps; Coulomb friction is applied as a
tangential impulse capped at mu*N*dt, which sticks exactly (no creep) and never
leaves the friction cone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import quats
from .errors import (
    DivergenceError,
    InvalidCommandError,
    InvalidParameterError,
    NonConvergenceError,
    SettlingSlipError,
)
from .topology import TensegrityTopology, face_outward_normal, stable_faces

# 1 N on 1 kg accelerates at 100 cm/s^2.
CM_PER_S2_PER_N_PER_KG = 100.0


def _cross_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cross product of (n, 3) arrays (avoids np.cross overhead)."""
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


@dataclass(frozen=True)
class WorldConfig:
    """Inclined-plane environment and integration parameters."""

    incline_deg: float = 0.0
    gravity: float = 9.81            # m/s^2
    friction_mu: float = 0.49
    contact_stiffness: float = 500.0  # N/cm
    contact_damping: float = 0.4      # N*s/cm
    dt: float = 5.0e-4                # s
    stick_velocity: float = 0.1       # cm/s, slide/stick threshold for slip metrics
    touch_tolerance: float = 0.05     # cm, gap below which a node counts as touching
    stick_stabilization: float = 0.2  # per-step pullback toward the stick anchor

    def __post_init__(self):
        if not 0.0 <= self.incline_deg < 90.0:
            raise InvalidParameterError("incline_deg must lie in [0, 90)")
        if self.friction_mu < 0.0:
            raise InvalidParameterError("friction_mu must be >= 0")
        if self.dt <= 0.0:
            raise InvalidParameterError("dt must be positive")

    @property
    def gravity_acc(self) -> np.ndarray:
        """Gravity acceleration vector in the plane frame (cm/s^2)."""
        th = math.radians(self.incline_deg)
        g = self.gravity * CM_PER_S2_PER_N_PER_KG
        return np.array([-g * math.sin(th), 0.0, -g * math.cos(th)])


@dataclass(frozen=True)
class RobotParams:
    """Physical parameters of the robot (config-overridable calibration values)."""

    rod_mass: float = 0.06            # kg
    payload_mass: float = 0.40        # kg
    cable_stiffness: float = 4.0      # N/cm
    cable_damping: float = 0.05       # N*s/cm
    suspension_stiffness: float = 0.4  # N/cm per spring
    suspension_damping: float = 0.05   # N*s/cm
    suspension_rest_fraction: float = 0.75  # rest length / neutral node-center distance
    pretension_fraction: float = 0.05  # neutral commanded rest = (1 - this) * geometric
    max_contraction: float = 0.78      # c_max: smallest commanded fraction is 1 - c_max
    slew_rate: float = 2.5             # max |d fraction / dt| tracked by the actuators
    cap_radius: float = 0.5            # cm, rod end-cap contact sphere
    # lattice-hysteresis losses, mostly damp the rigid rocking mode
    rod_linear_drag: float = 0.002     # N*s/cm
    rod_angular_drag: float = 0.2      # N*cm*s

    def __post_init__(self):
        if self.rod_mass <= 0.0 or self.payload_mass <= 0.0:
            raise InvalidParameterError("masses must be positive")
        if not 0.0 < self.max_contraction < 1.0:
            raise InvalidParameterError("max_contraction must lie in (0, 1)")


@dataclass
class RodBodyState:
    """Per-rod rigid-body state view."""

    com_position: np.ndarray
    orientation: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    mass: float
    inertia: np.ndarray


@dataclass
class CableState:
    neutral_rest_length: float
    commanded_rest_length: float
    stiffness: float
    damping: float
    current_tension: float


@dataclass
class PayloadState:
    position: np.ndarray
    velocity: np.ndarray
    mass: float
    suspension: list


class _Cache:
    """Immutable per-topology precomputation shared by copies of a state."""

    def __init__(self, topo: TensegrityTopology, params: RobotParams):
        self.topo = topo
        self.params = params
        self.n0 = topo.rods[:, 0]
        self.n1 = topo.rods[:, 1]
        # spring system: 24 cables + 12 payload suspension springs, endpoint
        # indices into the 13-point array [12 nodes, payload]
        self.si = np.concatenate([topo.cables[:, 0], np.arange(12)])
        self.sj = np.concatenate([topo.cables[:, 1], np.full(12, 12)])
        # gather map: rod-endpoint array [n0 rods; n1 rods] -> node order
        end_index = np.empty(12, dtype=int)
        end_index[self.n0] = np.arange(6)
        end_index[self.n1] = np.arange(6, 12)
        self.end_to_node = end_index
        nsprings = 36
        inc = np.zeros((13, nsprings))
        inc[self.si, np.arange(nsprings)] += 1.0
        inc[self.sj, np.arange(nsprings)] -= 1.0
        self.incidence = inc
        center_dist = float(np.linalg.norm(topo.nodes[0]))
        self.suspension_rest = params.suspension_rest_fraction * center_dist
        self.spring_k = np.concatenate(
            [np.full(24, params.cable_stiffness), np.full(12, params.suspension_stiffness)]
        )
        self.spring_c = np.concatenate(
            [np.full(24, params.cable_damping), np.full(12, params.suspension_damping)]
        )
        self.neutral_rest = (1.0 - params.pretension_fraction) * topo.cable_rest_length
        self.node_rod_of_spring_i = topo.node_of_rod()[self.si]
        self.node_rod_of_spring_j = topo.node_of_rod()[topo.cables[:, 1]]
        L = topo.rod_length
        r = params.cap_radius
        m = params.rod_mass
        i_perp = m * (L * L / 12.0 + r * r / 4.0)
        i_axial = m * r * r / 2.0
        self.i_perp = i_perp
        self.inertia_body = np.diag([i_perp, i_perp, i_axial])
        self.masses = np.concatenate([np.full(6, m), [params.payload_mass]])
        self.total_mass = 6.0 * m + params.payload_mass
        self.faces = stable_faces(topo)
        self.node_rod = topo.node_of_rod()


class SimState:
    """Full dynamic state of the robot on the plane.

    Rod states are stored as flat arrays for vectorized stepping; the
    per-entity views are available through rods()/cables()/payload().
    """

    def __init__(self, topology: TensegrityTopology, world: WorldConfig,
                 params: RobotParams | None = None):
        params = params or RobotParams()
        self.topology = topology
        self.world = world
        self.params = params
        self._cache = _Cache(topology, params)
        self.time = 0.0
        self.rod_pos = np.zeros((6, 3))
        self.rod_quat = np.tile(np.array([1.0, 0.0, 0.0, 0.0]), (6, 1))
        self.rod_vel = np.zeros((6, 3))
        self.rod_omega = np.zeros((6, 3))
        self.payload_pos = np.zeros(3)
        self.payload_vel = np.zeros(3)
        self.commanded_rest = np.full(24, self._cache.neutral_rest)
        self.target_fraction = np.ones(24)
        self.cable_tension = np.zeros(24)
        self.contact_normal = np.zeros(12)      # N per node, this step
        self.friction_force = np.zeros(12)      # |tangential| N per node, this step
        self.contact_slide_speed = np.zeros(12)  # cm/s tangential speed after friction
        self.stick_anchor = np.zeros((12, 2))    # plane-frame stick points
        self.stick_active = np.zeros(12, dtype=bool)
        self.damping_scale = 1.0
        self._node_pos = np.zeros((12, 3))
        self._node_vel = np.zeros((12, 3))
        self._pts = np.zeros((13, 3))
        self._vels = np.zeros((13, 3))
        self._rest = np.concatenate([self.commanded_rest, np.full(12, self._cache.suspension_rest)])
        self._ends = np.zeros((12, 3))
        self._refresh_kinematics()

    # -- kinematics ---------------------------------------------------------

    def _refresh_kinematics(self):
        c = self._cache
        R = quats.to_matrix_normalized(self.rod_quat)
        self._rot = R
        half = self.topology.rod_length / 2.0
        off = R[:, :, 2] * half
        spin = _cross_rows(self.rod_omega, off)
        ends = self._ends
        ends[:6] = self.rod_pos - off
        ends[6:] = self.rod_pos + off
        self._node_pos[:] = ends[c.end_to_node]
        ends[:6] = self.rod_vel - spin
        ends[6:] = self.rod_vel + spin
        self._node_vel[:] = ends[c.end_to_node]

    def node_positions(self) -> np.ndarray:
        return self._node_pos

    def node_velocities(self) -> np.ndarray:
        return self._node_vel

    @property
    def contact_set(self) -> tuple[int, ...]:
        """Nodes within touch tolerance of the plane."""
        gap = self._node_pos[:, 2] - self.params.cap_radius
        return tuple(np.nonzero(gap < self.world.touch_tolerance)[0].tolist())

    def current_face(self) -> int | None:
        """Index of the stable face supporting the robot, if any.

        The supporting face is the stable face whose three nodes are all in
        the contact set; with extra touching nodes (deformed stances) the
        most load-bearing matching face wins.
        """
        cs = set(self.contact_set)
        if len(cs) < 3:
            return None
        matches = [i for i, f in enumerate(self._cache.faces) if set(f) <= cs]
        if not matches:
            return None
        if len(matches) == 1:
            return matches[0]
        return max(matches, key=lambda i: self.contact_normal[list(self._cache.faces[i])].sum())

    def total_com(self) -> np.ndarray:
        """Mass-weighted CoM of the 6 rods and the payload (cm)."""
        c = self._cache
        s = self.rod_pos.sum(axis=0) * self.params.rod_mass
        s = s + self.payload_pos * self.params.payload_mass
        return s / c.total_mass

    def commanded_fractions(self) -> np.ndarray:
        return self.commanded_rest / self._cache.neutral_rest

    # -- energy -------------------------------------------------------------

    def kinetic_energy(self) -> float:
        """Translational + rotational kinetic energy, N*cm.

        Rod angular velocity is kept perpendicular to the rod axis (axial spin
        is an exact invariant of this model), so I*omega = I_perp*omega.
        """
        c = self._cache
        ke = 0.5 * self.params.rod_mass * np.sum(self.rod_vel ** 2)
        ke += 0.5 * self.params.payload_mass * np.sum(self.payload_vel ** 2)
        ke += 0.5 * c.i_perp * np.sum(self.rod_omega ** 2)
        return ke / CM_PER_S2_PER_N_PER_KG

    def potential_energy(self) -> float:
        """Gravitational + elastic (cable, suspension, contact) energy, N*cm."""
        c = self._cache
        g = self.world.gravity_acc
        pe = -self.params.rod_mass * float(np.sum(self.rod_pos @ g))
        pe -= self.params.payload_mass * float(self.payload_pos @ g)
        pe /= CM_PER_S2_PER_N_PER_KG
        pts = np.vstack([self._node_pos, self.payload_pos])
        d = pts[c.sj] - pts[c.si]
        lengths = np.linalg.norm(d, axis=1)
        rest = np.concatenate([self.commanded_rest, np.full(12, c.suspension_rest)])
        stretch = np.maximum(lengths - rest, 0.0)
        pe += 0.5 * float(np.sum(c.spring_k * stretch ** 2))
        pen = np.maximum(self.params.cap_radius - self._node_pos[:, 2], 0.0)
        pe += 0.5 * self.world.contact_stiffness * float(np.sum(pen ** 2))
        return pe

    def total_energy(self) -> float:
        return self.kinetic_energy() + self.potential_energy()

    # -- per-entity views ------------------------------------------------------

    def rods(self) -> list[RodBodyState]:
        c = self._cache
        Iw = self._rot @ c.inertia_body @ np.swapaxes(self._rot, 1, 2)
        return [
            RodBodyState(
                com_position=self.rod_pos[r].copy(),
                orientation=self.rod_quat[r].copy(),
                linear_velocity=self.rod_vel[r].copy(),
                angular_velocity=self.rod_omega[r].copy(),
                mass=self.params.rod_mass,
                inertia=Iw[r],
            )
            for r in range(6)
        ]

    def cables(self) -> list[CableState]:
        return [
            CableState(
                neutral_rest_length=self._cache.neutral_rest,
                commanded_rest_length=float(self.commanded_rest[i]),
                stiffness=self.params.cable_stiffness,
                damping=self.params.cable_damping,
                current_tension=float(self.cable_tension[i]),
            )
            for i in range(24)
        ]

    def payload(self) -> PayloadState:
        return PayloadState(
            position=self.payload_pos.copy(),
            velocity=self.payload_vel.copy(),
            mass=self.params.payload_mass,
            suspension=[
                (n, self.params.suspension_stiffness, self._cache.suspension_rest)
                for n in range(12)
            ],
        )

    # -- copy / serialization -------------------------------------------------

    def copy(self) -> "SimState":
        s = SimState.__new__(SimState)
        s.topology = self.topology
        s.world = self.world
        s.params = self.params
        s._cache = self._cache
        s.time = self.time
        for name in ("rod_pos", "rod_quat", "rod_vel", "rod_omega", "payload_pos",
                     "payload_vel", "commanded_rest", "target_fraction", "cable_tension",
                     "contact_normal", "friction_force", "contact_slide_speed",
                     "stick_anchor", "stick_active",
                     "_node_pos", "_node_vel", "_rot", "_pts", "_vels", "_rest", "_ends"):
            setattr(s, name, getattr(self, name).copy())
        s.damping_scale = self.damping_scale
        return s

    def snapshot(self) -> dict:
        """JSON-serializable snapshot (telemetry and golden tests)."""
        return {
            "time_s": self.time,
            "rod_com_cm": self.rod_pos.tolist(),
            "rod_quat": self.rod_quat.tolist(),
            "rod_vel_cm_s": self.rod_vel.tolist(),
            "rod_omega_rad_s": self.rod_omega.tolist(),
            "payload_cm": self.payload_pos.tolist(),
            "payload_vel_cm_s": self.payload_vel.tolist(),
            "commanded_rest_cm": self.commanded_rest.tolist(),
            "cable_tension_n": self.cable_tension.tolist(),
            "node_positions_cm": self._node_pos.tolist(),
            "contact_set": list(self.contact_set),
            "incline_deg": self.world.incline_deg,
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)


def set_incline(state: SimState, incline_deg: float) -> SimState:
    """Replace the world incline angle (validated by WorldConfig)."""
    state.world = replace(state.world, incline_deg=incline_deg)
    return state


def apply_cable_targets(state: SimState, targets) -> SimState:
    """Set per-cable rest-length targets (fractions of neutral) on actuated cables.

    `targets` maps cable index -> fraction, or is a length-6 sequence in the
    actuated gait order.  Fractions must lie in [1 - c_max, 1]; any violation
    rejects the whole command and leaves the state unchanged.
    """
    seq = state.topology.actuated_cables
    if isinstance(targets, dict):
        items = list(targets.items())
    else:
        arr = list(targets)
        if len(arr) != len(seq):
            raise InvalidCommandError(f"expected {len(seq)} fractions, got {len(arr)}")
        items = list(zip(seq, arr))
    lo = 1.0 - state.params.max_contraction
    for cable, frac in items:
        cable = int(cable)
        if cable not in seq:
            raise InvalidCommandError(f"cable {cable} is not actuated")
        if not (lo - 1e-12 <= frac <= 1.0 + 1e-12):
            raise InvalidCommandError(
                f"fraction {frac} out of range [{lo:.3f}, 1.0] for cable {cable}"
            )
    for cable, frac in items:
        state.target_fraction[int(cable)] = min(max(float(frac), lo), 1.0)
    return state


def step(state: SimState) -> SimState:
    """Advance the state by one timestep in place and return it."""
    c = state._cache
    w = state.world
    p = state.params
    dt = w.dt

    # actuator rate limit: commanded rest length slews toward the target
    max_d = p.slew_rate * c.neutral_rest * dt
    err = state.target_fraction * c.neutral_rest - state.commanded_rest
    np.clip(err, -max_d, max_d, out=err)
    state.commanded_rest += err

    node_pos = state._node_pos
    node_vel = state._node_vel
    half = state.topology.rod_length / 2.0
    off = state._rot[:, :, 2] * half

    # tension-only springs (24 cables + 12 payload suspension)
    pts = state._pts
    vels = state._vels
    pts[:12] = node_pos
    pts[12] = state.payload_pos
    vels[:12] = node_vel
    vels[12] = state.payload_vel
    d = pts[c.sj] - pts[c.si]
    lengths = np.sqrt(np.einsum("si,si->s", d, d))
    u = d / lengths[:, None]
    rest = state._rest
    rest[:24] = state.commanded_rest
    stretch = lengths - rest
    rate = np.einsum("si,si->s", vels[c.sj] - vels[c.si], u)
    # explicit dampers are only stable up to ~m_eff/dt; clamp the requested
    # damping there so heavy settling damping saturates instead of diverging
    spring_c = np.minimum(state.damping_scale * c.spring_c,
                          _spring_damping_limit(state, u, off))
    tension = c.spring_k * stretch + spring_c * rate
    tension[stretch <= 0.0] = 0.0
    np.maximum(tension, 0.0, out=tension)
    state.cable_tension = tension[:24].copy()
    f_pts = c.incidence @ (tension[:, None] * u)

    # penalty contact: the elastic part enters as a force; the damping part is
    # applied as an impulse after the velocity update (unconditionally stable
    # for the light effective mass of a rod end cap)
    pen = p.cap_radius - node_pos[:, 2]
    normal = w.contact_stiffness * np.maximum(pen, 0.0)
    state.contact_normal = normal.copy()

    f_nodes = f_pts[:12]
    f_nodes[:, 2] += normal

    # rod force/torque about the CoM (N, N*cm)
    f0 = f_nodes[c.n0]
    f1 = f_nodes[c.n1]
    f_rod = f0 + f1
    tau = _cross_rows(off, f1 - f0)

    # structural losses; angular drag acts on the perpendicular component only
    # (axial rod spin is never excited, keep it out of the explicit update)
    f_rod -= state.damping_scale * p.rod_linear_drag * state.rod_vel
    ax = state._rot[:, :, 2]
    omega_perp = state.rod_omega - np.einsum("ri,ri->r", state.rod_omega, ax)[:, None] * ax
    tau -= state.damping_scale * p.rod_angular_drag * omega_perp

    g = w.gravity_acc

    # velocity update (semi-implicit: positions move with the new velocities).
    # Rods are axisymmetric and never torqued about their axis, so with zero
    # axial spin I*omega = I_perp*omega and the gyroscopic term vanishes.
    state.rod_vel += dt * (f_rod / p.rod_mass * CM_PER_S2_PER_N_PER_KG + g)
    state.rod_omega += tau * (dt * CM_PER_S2_PER_N_PER_KG / c.i_perp)
    state.payload_vel += dt * (f_pts[12] / p.payload_mass * CM_PER_S2_PER_N_PER_KG + g)

    _contact_impulses(state, normal, off, dt)

    # position update
    state.rod_pos += dt * state.rod_vel
    state.payload_pos += dt * state.payload_vel
    state.rod_quat = quats.integrate(state.rod_quat, state.rod_omega, dt)
    state.time += dt

    state._refresh_kinematics()
    # re-project out axial spin leaked by the discrete axis rotation
    ax_new = state._rot[:, :, 2]
    state.rod_omega -= np.einsum("ri,ri->r", state.rod_omega, ax_new)[:, None] * ax_new

    total = (state.rod_pos.sum() + state.rod_vel.sum() + state.rod_omega.sum()
             + state.payload_pos.sum())
    if not np.isfinite(total):
        _raise_divergence(state)
    return state


def _spring_damping_limit(state: SimState, u: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Largest stable damping coefficient (N*s/cm) per spring this step.

    Uses the reduced effective mass of the two endpoints along the spring
    axis; |r x u|^2 = |r|^2 - (r.u)^2 since u is unit and r = +-off lies on
    the rod axis.
    """
    c = state._cache
    p = state.params
    half_sq = (state.topology.rod_length / 2.0) ** 2
    dot_i = np.einsum("si,si->s", off[c.node_rod_of_spring_i], u)
    inv_m_i = 1.0 / p.rod_mass + (half_sq - dot_i ** 2) / c.i_perp
    inv_m_j = np.empty(36)
    dot_j = np.einsum("si,si->s", off[c.node_rod_of_spring_j], u[:24])
    inv_m_j[:24] = 1.0 / p.rod_mass + (half_sq - dot_j ** 2) / c.i_perp
    inv_m_j[24:] = 1.0 / p.payload_mass
    m_red = 1.0 / (inv_m_i + inv_m_j)
    return 0.4 * m_red / (state.world.dt * CM_PER_S2_PER_N_PER_KG)


def _contact_impulses(state: SimState, normal: np.ndarray, off: np.ndarray,
                      dt: float) -> None:
    """Normal damping and Coulomb friction as impulses at the contact nodes.

    The normal damper is integrated backward-Euler on approach velocity only
    (never sticky, unconditionally stable).  Friction applies the tangential
    impulse that would stop the node, capped at mu*N*dt: below the cap the
    node sticks exactly, at the cap it slides with |F_t| = mu*N.  Contact
    nodes of a resting face lie on distinct rods, so a single pass is exact
    there.  Scalar math throughout: this runs for every touching node every
    step.
    """
    c = state._cache
    w = state.world
    mu = w.friction_mu
    state.friction_force[:] = 0.0
    state.contact_slide_speed[:] = 0.0
    touching = normal > 0.0
    state.stick_active &= touching
    active = np.nonzero(touching)[0]
    if len(active) == 0:
        return
    inv_m = 1.0 / state.params.rod_mass
    inv_i = 1.0 / c.i_perp
    c_damp = state.damping_scale * w.contact_damping * CM_PER_S2_PER_N_PER_KG
    imp_to_force = 1.0 / (dt * CM_PER_S2_PER_N_PER_KG)
    beta_dt = w.stick_stabilization / dt
    rv = state.rod_vel
    ro = state.rod_omega
    pos = state._node_pos
    for n in active:
        rod = int(c.node_rod[n])
        sign = 1.0 if c.n1[rod] == n else -1.0
        rx = sign * off[rod, 0]
        ry = sign * off[rod, 1]
        rz = sign * off[rod, 2]
        vrx, vry, vrz = rv[rod, 0], rv[rod, 1], rv[rod, 2]
        ox, oy, oz = ro[rod, 0], ro[rod, 1], ro[rod, 2]
        # point velocity v = v_rod + omega x r
        vx = vrx + oy * rz - oz * ry
        vy = vry + oz * rx - ox * rz
        vz = vrz + ox * ry - oy * rx

        n_force = normal[n]
        if vz < 0.0 and c_damp > 0.0:
            m_n = 1.0 / (inv_m + (rx * rx + ry * ry) * inv_i)
            k = c_damp * dt / m_n
            j_n = m_n * (-vz) * (k / (1.0 + k))
            vrz += j_n * inv_m
            ox += j_n * inv_i * ry
            oy -= j_n * inv_i * rx
            vx = vrx + oy * rz - oz * ry
            vy = vry + oz * rx - ox * rz
            n_force += j_n * imp_to_force
            state.contact_normal[n] = n_force

        if mu > 0.0:
            # stick anchor: drive the node back toward where it first stuck so
            # static loads are carried without creep; released when the cone
            # cap is hit (sliding) or the node lifts off
            if not state.stick_active[n]:
                state.stick_anchor[n, 0] = pos[n, 0]
                state.stick_anchor[n, 1] = pos[n, 1]
                state.stick_active[n] = True
            tx = -beta_dt * (pos[n, 0] - state.stick_anchor[n, 0])
            ty = -beta_dt * (pos[n, 1] - state.stick_anchor[n, 1])
            dvx = tx - vx
            dvy = ty - vy
            need = math.hypot(dvx, dvy)
            if need > 1e-12:
                dx = dvx / need
                dy = dvy / need
                # ang = (r x d)/I_perp, m_eff = 1/(1/m + ((ang x r) . d))
                ax = -rz * dy * inv_i
                ay = rz * dx * inv_i
                az = (rx * dy - ry * dx) * inv_i
                dot = (ay * rz - az * ry) * dx + (az * rx - ax * rz) * dy
                m_t = 1.0 / (inv_m + dot)
                j_stop = m_t * need
                j_max = mu * n_force * dt * CM_PER_S2_PER_N_PER_KG
                if j_stop <= j_max:
                    j = j_stop
                else:
                    j = j_max
                    state.stick_anchor[n, 0] = pos[n, 0]
                    state.stick_anchor[n, 1] = pos[n, 1]
                    state.contact_slide_speed[n] = (j_stop - j_max) / m_t
                vrx += j * dx * inv_m
                vry += j * dy * inv_m
                ox += j * ax
                oy += j * ay
                oz += j * az
                state.friction_force[n] = j * imp_to_force

        rv[rod, 0], rv[rod, 1], rv[rod, 2] = vrx, vry, vrz
        ro[rod, 0], ro[rod, 1], ro[rod, 2] = ox, oy, oz


def _raise_divergence(state: SimState) -> None:
    for r in range(6):
        if not (np.isfinite(state.rod_pos[r]).all() and np.isfinite(state.rod_vel[r]).all()
                and np.isfinite(state.rod_omega[r]).all()):
            raise DivergenceError(f"rod {r} diverged at t={state.time:.4f}s", body=f"rod {r}")
    raise DivergenceError(f"payload diverged at t={state.time:.4f}s", body="payload")


def run(state: SimState, duration: float) -> SimState:
    """Step the state forward by `duration` seconds."""
    for _ in range(int(round(duration / state.world.dt))):
        step(state)
    return state


def settle(state: SimState, ke_threshold: float = 2e-5, max_time: float = 30.0,
           damping_scale: float = 3.0, detect_slip: bool = True,
           slip_window_s: float = 1.0, slip_window_cm: float = 1.2,
           slip_windows: int = 3, hold_steps: int = 200,
           zero_velocities: bool = True) -> SimState:
    """Run with scaled damping until kinetic energy stays below the threshold.

    Transient foot skids (deformation, landing) are tolerated; a sustained
    skid -- at least `slip_window_cm` of contact sliding in each of
    `slip_windows` consecutive windows -- raises SettlingSlipError.  Raises
    NonConvergenceError on timeout.
    """
    prev_scale = state.damping_scale
    state.damping_scale = damping_scale
    dt = state.world.dt
    steps = int(round(max_time / dt))
    window_steps = max(1, int(round(slip_window_s / dt)))
    quiet = 0
    window_slide = 0.0
    hot_windows = 0
    total_slide = 0.0
    try:
        for i in range(steps):
            step(state)
            sliding = state.contact_slide_speed
            if sliding.any():
                inc = sliding.max() * dt
                window_slide += inc
                total_slide += inc
            if detect_slip and (i + 1) % window_steps == 0:
                hot_windows = hot_windows + 1 if window_slide > slip_window_cm else 0
                window_slide = 0.0
                if hot_windows >= slip_windows:
                    raise SettlingSlipError(
                        f"contacts kept sliding while settling "
                        f"({total_slide:.2f} cm accumulated)",
                        slip_distance_cm=float(total_slide),
                    )
            if state.kinetic_energy() < ke_threshold:
                quiet += 1
                if quiet >= hold_steps:
                    break
            else:
                quiet = 0
        else:
            raise NonConvergenceError(
                f"settling did not converge in {max_time}s "
                f"(KE={state.kinetic_energy():.3e} N*cm)"
            )
    finally:
        state.damping_scale = prev_scale
    if zero_velocities:
        state.rod_vel[:] = 0.0
        state.rod_omega[:] = 0.0
        state.payload_vel[:] = 0.0
        state._refresh_kinematics()
    return state


def canonical_face_rotation(topology: TensegrityTopology, face: int) -> np.ndarray:
    """Rotation placing the given stable face flat on the ground at yaw zero."""
    tri = stable_faces(topology)[face]
    n_out = face_outward_normal(topology, tri)
    q_align = quats.from_two_vectors(n_out, np.array([0.0, 0.0, -1.0]))
    return quats.to_matrix(q_align)


def estimate_orientation(state: SimState) -> np.ndarray:
    """Best-fit (Kabsch) rotation from body-frame nodes to the current pose."""
    xb = state.topology.nodes
    yw = state._node_pos - state._node_pos.mean(axis=0)
    h = xb.T @ yw
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    return vt.T @ np.diag([1.0, 1.0, d]) @ u.T


def estimate_yaw(state: SimState, face: int) -> float:
    """Yaw about the plane normal relative to the face's canonical placement."""
    r = estimate_orientation(state) @ canonical_face_rotation(state.topology, face).T
    return math.atan2(r[1, 0], r[0, 0])


def neutral_state(topology: TensegrityTopology, world: WorldConfig,
                  params: RobotParams | None = None, face: int = 0,
                  yaw: float = 0.0, lift: float = 0.0) -> SimState:
    """Unsettled neutral-geometry state oriented with `face` down.

    The face's outward normal points into the plane and the lowest face node
    touches the plane (plus `lift`).  No settling: rod poses follow the exact
    topology geometry.
    """
    faces = stable_faces(topology)
    if not 0 <= face < len(faces):
        raise InvalidParameterError(f"face index must lie in [0, {len(faces)}), got {face}")
    tri = faces[face]

    R = quats.rotation_about_z(yaw) @ canonical_face_rotation(topology, face)
    nodes = topology.nodes @ R.T

    params = params or RobotParams()
    state = SimState(topology, world, params)
    dz = params.cap_radius - nodes[list(tri), 2].min() + lift
    nodes = nodes + np.array([0.0, 0.0, dz])

    n0, n1 = topology.rods[:, 0], topology.rods[:, 1]
    state.rod_pos = 0.5 * (nodes[n0] + nodes[n1])
    axes = nodes[n1] - nodes[n0]
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    state.rod_quat = np.array(
        [quats.from_two_vectors(np.array([0.0, 0.0, 1.0]), a) for a in axes]
    )
    state.payload_pos = nodes.mean(axis=0)
    state._refresh_kinematics()
    return state


def init_resting(topology: TensegrityTopology, world: WorldConfig, face: int,
                 params: RobotParams | None = None, yaw: float = 0.0,
                 settle_kwargs: dict | None = None) -> SimState:
    """Settled neutral state resting on the given stable face.

    The body frame is rotated so the face's outward normal points into the
    plane, then spun by `yaw` about the plane normal; the structure is placed
    touching the plane and settled with no cables contracted.
    """
    state = neutral_state(topology, world, params, face=face, yaw=yaw)
    settle(state, **(settle_kwargs or {}))
    state.time = 0.0
    return state


def total_com(state: SimState) -> np.ndarray:
    return state.total_com()
