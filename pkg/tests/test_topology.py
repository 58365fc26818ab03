import itertools
import json
import math

import numpy as np
import pytest

from sixbar.errors import InvalidParameterError
from sixbar.topology import (
    ActuatorMap,
    CABLE_LENGTH_FACTOR,
    build_six_bar,
    face_outward_normal,
    stable_faces,
)


@pytest.fixture(scope="module")
def topo():
    return build_six_bar(25.0)


def test_counts(topo):
    assert topo.nodes.shape == (12, 3)
    assert topo.rods.shape == (6, 2)
    assert topo.cables.shape == (24, 2)


def test_node_coordinates_are_expanded_octahedron(topo):
    L = 25.0
    expected = set()
    for sy, sz in itertools.product((-1, 1), repeat=2):
        expected.add((0.0, sy * L / 4, sz * L / 2))
        expected.add((sz * L / 2, 0.0, sy * L / 4))
        expected.add((sy * L / 4, sz * L / 2, 0.0))
    got = {tuple(p) for p in topo.nodes.tolist()}
    assert got == expected


def test_rod_lengths_exact(topo):
    lengths = topo.edge_lengths(topo.rods)
    assert np.all(np.abs(lengths - 25.0) <= 1e-9 * 25.0)


def test_cable_lengths_exact(topo):
    lengths = topo.edge_lengths(topo.cables)
    target = 25.0 * CABLE_LENGTH_FACTOR
    assert np.all(np.abs(lengths - target) <= 1e-9 * 25.0)
    assert target == pytest.approx(15.30931089, abs=1e-6)


def test_node_degrees(topo):
    rod_deg = np.zeros(12, int)
    cable_deg = np.zeros(12, int)
    for i, j in topo.rods:
        rod_deg[[i, j]] += 1
    for i, j in topo.cables:
        cable_deg[[i, j]] += 1
    assert np.all(rod_deg == 1)
    assert np.all(cable_deg == 4)


def test_parallel_rod_pairs_and_separation(topo):
    axes = []
    mids = []
    for i, j in topo.rods:
        d = topo.nodes[j] - topo.nodes[i]
        axes.append(d / np.linalg.norm(d))
        mids.append(topo.nodes[[i, j]].mean(axis=0))
    pairs = []
    used = set()
    for a, b in itertools.combinations(range(6), 2):
        if abs(abs(axes[a] @ axes[b]) - 1.0) < 1e-12:
            pairs.append((a, b))
            used.update((a, b))
    assert len(pairs) == 3 and used == set(range(6))
    pair_axes = []
    for a, b in pairs:
        sep = mids[b] - mids[a]
        sep = sep - (sep @ axes[a]) * axes[a]
        assert np.linalg.norm(sep) == pytest.approx(12.5, abs=1e-9)
        pair_axes.append(axes[a])
    for u, v in itertools.combinations(pair_axes, 2):
        assert abs(u @ v) < 1e-12


def brute_force_faces(topo):
    cset = topo.cable_set()
    out = []
    for tri in itertools.combinations(range(12), 3):
        i, j, k = tri
        if (i, j) in cset and (i, k) in cset and (j, k) in cset:
            out.append(tri)
    return sorted(out)


def test_stable_faces_match_brute_force(topo):
    faces = stable_faces(topo)
    assert faces == brute_force_faces(topo)
    assert len(faces) == 8


@pytest.mark.parametrize("L", [1.0, 7.3, 25.0, 250.0])
def test_eight_faces_any_scale(L):
    assert len(stable_faces(build_six_bar(L))) == 8


def test_faces_have_no_rod_edges(topo):
    rods = {(int(i), int(j)) for i, j in topo.rods}
    for tri in stable_faces(topo):
        for a, b in itertools.combinations(tri, 2):
            assert (a, b) not in rods


def test_each_node_on_exactly_two_faces(topo):
    count = np.zeros(12, int)
    for tri in stable_faces(topo):
        count[list(tri)] += 1
    assert np.all(count == 2)


def test_homogeneity_under_scaling():
    a = build_six_bar(10.0)
    b = build_six_bar(30.0)
    assert np.allclose(b.nodes, 3.0 * a.nodes, rtol=0, atol=1e-12)
    assert np.array_equal(a.rods, b.rods)
    assert np.array_equal(a.cables, b.cables)


def test_face_outward_normals_are_unit_and_outward(topo):
    for idx, tri in enumerate(stable_faces(topo)):
        n = face_outward_normal(topo, tri)
        assert np.linalg.norm(n) == pytest.approx(1.0, abs=1e-12)
        centroid = topo.nodes[list(tri)].mean(axis=0)
        assert n @ centroid > 0


def test_invalid_rod_length():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(InvalidParameterError):
            build_six_bar(bad)


def test_actuator_map_validation():
    ActuatorMap(sequence=(2, 20, 16, 19, 5, 9))
    with pytest.raises(InvalidParameterError):
        ActuatorMap(sequence=(1, 1, 2, 3, 4, 5))
    with pytest.raises(InvalidParameterError):
        ActuatorMap(sequence=(0, 1, 2, 3, 4, 24))
    with pytest.raises(InvalidParameterError):
        ActuatorMap(sequence=(0, 1, 2, 3, 4, 5), max_contraction=1.5)


def test_json_export_roundtrip(topo):
    d = json.loads(topo.to_json())
    assert d["rod_length_cm"] == 25.0
    assert len(d["nodes_cm"]) == 12
    assert len(d["cables"]) == 24
    assert len(d["stable_faces"]) == 8
    assert sorted(d["actuated_cables"]) == sorted(set(d["actuated_cables"]))


def test_with_actuated_replaces_sequence(topo):
    t2 = topo.with_actuated((2, 20, 16, 19, 5, 9))
    assert t2.actuated_cables == (2, 20, 16, 19, 5, 9)
    assert np.array_equal(t2.nodes, topo.nodes)
