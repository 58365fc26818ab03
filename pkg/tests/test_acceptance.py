"""Acceptance suite: one test per release criterion, each at a fixed tolerance.

Every criterion prints a PASS/FAIL line with its measured values (visible
with -s, or in the failure output).  The two checks that expect the
alternating policy to out-climb the simultaneous policy and to hold a
4-contact forward stance are known-red with the calibrated defaults; see the
limitation note in the README.  They are asserted faithfully regardless.
"""

import itertools
import json
import math

import numpy as np
import pytest

from sixbar import quats
from sixbar.dynamics import (
    RobotParams,
    WorldConfig,
    init_resting,
    neutral_state,
    step,
)
from sixbar.harness import ScenarioConfig, default_gait, incline_sweep, run_trial
from sixbar.policies import PolicyParams, default_policy_params
from sixbar.stability import (
    NotAchievable,
    convex_hull_2d,
    max_incline_no_slip,
    quasistatic_settle,
    required_contraction,
    state_support,
)
from sixbar.teleop import TeleopSession, replay_log, stream_hash
from sixbar.topology import CABLE_LENGTH_FACTOR, build_six_bar, stable_faces
from sixbar.errors import DegenerateSupportError


def report(name: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'} - {name}" + (f" ({detail})" if detail else ""))
    return ok


# -----------------------------------------------------------------------------


def test_geometry_exactness():
    topo = build_six_bar(25.0)
    rod_ok = bool(np.all(np.abs(topo.edge_lengths(topo.rods) - 25.0) <= 1e-9 * 25.0))
    cable_ok = bool(np.all(
        np.abs(topo.edge_lengths(topo.cables) - 25.0 * CABLE_LENGTH_FACTOR) <= 1e-9 * 25.0
    ))
    faces_ok = len(stable_faces(topo)) == 8
    rod_deg = np.zeros(12, int)
    cab_deg = np.zeros(12, int)
    for i, j in topo.rods:
        rod_deg[[i, j]] += 1
    for i, j in topo.cables:
        cab_deg[[i, j]] += 1
    degrees_ok = bool(np.all(rod_deg == 1) and np.all(cab_deg == 4))
    ok = rod_ok and cable_ok and faces_ok and degrees_ok
    assert report("geometry exactness", ok,
                  f"rods={rod_ok} cables={cable_ok} faces={faces_ok} degrees={degrees_ok}")


def test_slip_bound_exactness():
    vals = {mu: max_incline_no_slip(mu) for mu in (0.49, 0.42, 0.57)}
    ok = (abs(vals[0.49] - 26.10) <= 0.01
          and abs(vals[0.42] - 22.78) <= 0.01
          and abs(vals[0.57] - 29.68) <= 0.01
          and vals[0.42] < 23.0 and vals[0.57] > 29.0)
    assert report("slip bound exactness", ok,
                  f"mu .49->{vals[0.49]:.2f} .42->{vals[0.42]:.2f} .57->{vals[0.57]:.2f} deg")


def test_hull_oracle_1000_cases():
    from tests.test_stability import oracle_hull_vertices

    rng = np.random.default_rng(2024)
    mismatches = 0
    cases = 0
    for _ in range(1000):
        n = int(rng.integers(3, 11))
        pts = rng.integers(-7, 8, size=(n, 2)).astype(float)
        try:
            hull = convex_hull_2d(pts)
        except DegenerateSupportError:
            continue
        cases += 1
        if {tuple(v) for v in hull} != oracle_hull_vertices(pts):
            mismatches += 1
    ok = mismatches == 0 and cases >= 900
    assert report("hull oracle (1000 random sets)", ok,
                  f"{cases} non-degenerate cases, {mismatches} mismatches")


def test_dynamics_sanity():
    topo = build_six_bar(25.0)

    # isolated system: momentum conserved to 1e-6 relative over 1000 steps
    params = RobotParams(rod_linear_drag=0.0, rod_angular_drag=0.0)
    s = neutral_state(topo, WorldConfig(gravity=0.0), params, lift=500.0)
    rng = np.random.default_rng(7)
    s.rod_vel += rng.normal(0.0, 0.5, (6, 3))
    s.rod_omega += rng.normal(0.0, 0.02, (6, 3))
    ax = s._rot[:, :, 2]
    s.rod_omega -= np.einsum("ri,ri->r", s.rod_omega, ax)[:, None] * ax
    s.payload_vel += rng.normal(0.0, 0.5, 3)
    s._refresh_kinematics()

    def momenta(st):
        p = st.params.rod_mass * st.rod_vel.sum(axis=0) + st.params.payload_mass * st.payload_vel
        com = st.total_com()
        L = np.zeros(3)
        for r in range(6):
            L += st.params.rod_mass * np.cross(st.rod_pos[r] - com, st.rod_vel[r])
            L += st._cache.i_perp * st.rod_omega[r]
        L += st.params.payload_mass * np.cross(st.payload_pos - com, st.payload_vel)
        return p, L

    p0, L0 = momenta(s)
    for _ in range(1000):
        step(s)
    p1, L1 = momenta(s)
    dp = np.linalg.norm(p1 - p0) / max(np.linalg.norm(p0), 1e-12)
    dL = np.linalg.norm(L1 - L0) / max(np.linalg.norm(L0), 1e-12)
    momentum_ok = dp < 1e-6 and dL < 1e-6

    # 60 s logged run: tension-only and friction cone at every step
    world = WorldConfig(incline_deg=10.0)
    gait = default_gait()
    seq = np.array([g.cable for g in gait])
    topo2 = build_six_bar(25.0, actuated_cables=seq)
    st = init_resting(topo2, world, gait[0].face, yaw=gait[0].yaw)
    schedule = ScenarioConfig(policy_kind="single",
                              world=world, cycles=3, trials=1).schedule()
    tension_ok = True
    cone_ok = True
    n_steps = int(round(60.0 / world.dt))
    for _ in range(n_steps):
        st.target_fraction[seq] = schedule.targets_at(st.time)
        step(st)
        if st.cable_tension.min() < 0.0:
            tension_ok = False
            break
        # slack cables carry zero force
        pts = st.node_positions()
        lengths = np.linalg.norm(pts[topo2.cables[:, 1]] - pts[topo2.cables[:, 0]], axis=1)
        slack = lengths < st.commanded_rest - 1e-9
        if np.any(st.cable_tension[slack] != 0.0):
            tension_ok = False
            break
        if np.any(st.friction_force > world.friction_mu * st.contact_normal + 1e-9):
            cone_ok = False
            break

    # identical configs -> bit-identical trajectories
    cfg = ScenarioConfig(policy_kind="single", cycles=1, trials=1,
                         world=WorldConfig(incline_deg=6.0), duration_s=10.0,
                         success_distance_cm=1e9)
    ha = run_trial(cfg).result_hash()
    hb = run_trial(cfg).result_hash()
    det_ok = ha == hb

    ok = momentum_ok and tension_ok and cone_ok and det_ok
    assert report(
        "dynamics sanity", ok,
        f"momentum dp={dp:.1e} dL={dL:.1e}, tension-only={tension_ok}, "
        f"friction-cone={cone_ok}, deterministic={det_ok}",
    )


@pytest.mark.slow
def test_required_contraction_trend():
    topo = build_six_bar(25.0)
    gait = default_gait()
    thetas = [0.0, 4.0, 8.0, 12.0, 16.0]
    curves = {}
    for k, g in enumerate(gait):
        vals = []
        for th in thetas:
            rc = required_contraction(topo, WorldConfig(incline_deg=th), g.cable,
                                      g.face, yaw=g.yaw, resolution=0.005)
            vals.append(1.0 if isinstance(rc, NotAchievable) else float(rc))
        curves[k] = vals

    def spearman(xs, ys):
        def ranks(v):
            order = np.argsort(v, kind="stable")
            r = np.empty(len(v))
            r[order] = np.arange(len(v))
            return r
        rx, ry = ranks(np.array(xs)), ranks(np.array(ys))
        rx -= rx.mean()
        ry -= ry.mean()
        denom = math.sqrt(float((rx ** 2).sum() * (ry ** 2).sum()))
        return float((rx * ry).sum() / denom) if denom > 0 else 1.0

    rhos = {k: spearman(thetas, v) for k, v in curves.items()}
    monotone_ok = all(rho >= 0.95 for rho in rhos.values())

    # two symmetry groups: steps {0,2,4} and {1,3,5} agree within 1 percent
    spread_ok = True
    spreads = []
    for group in ((0, 2, 4), (1, 3, 5)):
        for i, th in enumerate(thetas):
            vals = [curves[k][i] for k in group]
            spread = max(vals) - min(vals)
            spreads.append(spread)
            if spread > 0.01 + 1e-9:
                spread_ok = False
    ok = monotone_ok and spread_ok
    assert report(
        "required-contraction trend", ok,
        f"spearman min={min(rhos.values()):.3f}, max group spread={max(spreads):.4f}; "
        + "; ".join(f"cable{gait[k].cable}:{['%.3f' % x for x in v]}" for k, v in curves.items()),
    )


@pytest.mark.slow
def test_policy_capability_ordering():
    thetas = [float(t) for t in range(0, 31, 2)]
    caps = {}
    sweeps = {}
    for kind in ("single", "simultaneous", "alternating"):
        cfg = ScenarioConfig(policy_kind=kind, cycles=3, trials=5)
        sweeps[kind] = incline_sweep(cfg, thetas)
        caps[kind] = sweeps[kind].max_reliable_incline()

    single, sim, alt = caps["single"], caps["simultaneous"], caps["alternating"]
    band_ok = single is not None and 14.0 <= single <= 18.0
    order1_ok = single is not None and sim is not None and single < sim
    order2_ok = sim is not None and alt is not None and sim <= alt
    alt20_ok = alt is not None and alt >= 20.0
    bound = max_incline_no_slip(0.49)
    above = [r for r in sweeps["alternating"].rows if r.incline_deg > bound]
    slip_ok = all(all(m == "slipped" for m in r.failure_modes) for r in above) and above

    ok = band_ok and order1_ok and order2_ok and alt20_ok and bool(slip_ok)
    assert report(
        "policy capability ordering", ok,
        f"max reliable: single={single} sim={sim} alt={alt}; "
        f"single-band={band_ok} single<sim={order1_ok} sim<=alt={order2_ok} "
        f"alt>=20={alt20_ok} slip-above-bound={bool(slip_ok)}",
    )


@pytest.mark.slow
def test_speed_ratio_at_10deg():
    world = WorldConfig(incline_deg=10.0)
    vels = {}
    for kind in ("single", "simultaneous"):
        cfg = ScenarioConfig(policy_kind=kind, cycles=3, trials=1, world=world)
        r = run_trial(cfg)
        assert r.success, f"{kind} failed at 10 deg"
        vels[kind] = r.avg_velocity_cm_s
    ratio = vels["simultaneous"] / vels["single"]
    ok = ratio >= 1.5
    assert report("speed ratio at 10 deg", ok,
                  f"sim {vels['simultaneous']:.2f} / single {vels['single']:.2f} = {ratio:.2f}")


@pytest.mark.slow
def test_com_height_ordering_flat():
    heights = {}
    for kind in ("single", "simultaneous", "alternating"):
        cfg = ScenarioConfig(policy_kind=kind, cycles=3, trials=1)
        r = run_trial(cfg)
        assert r.success, f"{kind} failed on flat ground"
        heights[kind] = r.max_com_height_pct
    alt, sim, single = heights["alternating"], heights["simultaneous"], heights["single"]
    order_ok = alt < sim < single
    alt_band_ok = 70.0 <= alt <= 90.0
    sim_band_ok = 85.0 <= sim <= 100.0
    ok = order_ok and alt_band_ok and sim_band_ok
    assert report(
        "CoM height ordering (flat)", ok,
        f"alt={alt:.1f}% sim={sim:.1f}% single={single:.1f}%; "
        f"order={order_ok} alt-band={alt_band_ok} sim-band={sim_band_ok}",
    )


@pytest.mark.slow
def test_stance_geometry_at_10deg():
    topo = build_six_bar(25.0)
    world = WorldConfig(incline_deg=10.0)
    gait = default_gait()
    g0, g1 = gait[0], gait[1]

    single_stance = init_resting(topo, world, g1.face, yaw=g1.yaw)
    _, _, m_single = state_support(single_stance)
    single_contacts = len(single_stance.contact_set)

    # two-cable hold stance: consecutive gait cables contracted together
    c = default_policy_params("alternating").contraction
    hold = quasistatic_settle(single_stance, {g0.cable: 1.0 - c, g1.cable: 1.0 - c})
    _, _, m_hold = state_support(hold)
    hold_contacts = len(hold.contact_set)

    contacts_ok = hold_contacts == 4 and single_contacts == 3
    up_ok = m_hold.uphill_margin <= 0.7 * m_single.uphill_margin
    down_ok = m_hold.downhill_margin > m_single.downhill_margin
    ok = contacts_ok and up_ok and down_ok
    assert report(
        "stance geometry at 10 deg", ok,
        f"contacts single={single_contacts} hold={hold_contacts}; "
        f"uphill {m_hold.uphill_margin:.2f} vs {m_single.uphill_margin:.2f} "
        f"(<=70%%: {up_ok}); downhill {m_hold.downhill_margin:.2f} vs "
        f"{m_single.downhill_margin:.2f} (> : {down_ok})",
    )


def test_replay_determinism(tmp_path):
    cfg = ScenarioConfig(trials=1, world=WorldConfig(dt=1e-3))
    log = tmp_path / "teleop.jsonl"
    session = TeleopSession(cfg, log_path=log)
    frames = []
    frames += session.advance(0.5)
    cable = session.topology.actuated_cables[0]
    assert session.handle_command(
        {"kind": "set_cable", "cable": cable, "fraction": 0.7})["status"] == "ack"
    frames += session.advance(0.5)
    assert session.handle_command(
        {"kind": "run_policy", "policy_kind": "alternating", "cycles": 1})["status"] == "ack"
    frames += session.advance(1.5)
    session.close()
    live = stream_hash(frames)

    _, replay_a = replay_log(log)
    _, replay_b = replay_log(log)
    ok = replay_a == live and replay_b == live
    assert report("replay determinism", ok, f"live={live[:12]}.. replay={replay_a[:12]}..")
