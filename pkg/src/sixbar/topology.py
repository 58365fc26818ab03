"""Six-bar (expanded octahedron) tensegrity graph: nodes, rods, cables, stable faces.

The structure is the 6-rod, 24-cable spherical tensegrity whose 12 nodes sit at
the cyclic permutations of (0, +-L/4, +-L/2).  Rods join same-axis node pairs and
form three mutually orthogonal parallel pairs; the 24 nearest-neighbour pairs are
cables of length L*sqrt(6)/4.  Everything here is pure geometry: immutable after
construction and safe to share between concurrent simulations.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# Neutral cable length as a fraction of rod length for the regular six-bar.
CABLE_LENGTH_FACTOR = math.sqrt(6.0) / 4.0

# Geometric tolerance for identifying rods/cables and checking invariants.
REL_TOL = 1e-9

# Placeholder actuated set used before a gait has been derived; real scenarios
# overwrite it with the cable sequence stored in the gait configuration.
_PLACEHOLDER_ACTUATED = (0, 1, 2, 3, 4, 5)


@dataclass(frozen=True)
class ActuatorMap:
    """Assignment of the six actuators to cables, in gait order."""

    sequence: tuple[int, ...]
    max_contraction: float = 0.5

    def __post_init__(self):
        seq = tuple(int(c) for c in self.sequence)
        if len(seq) != 6 or len(set(seq)) != 6:
            raise InvalidParameterError("actuator sequence must be 6 distinct cable indices")
        if not all(0 <= c < 24 for c in seq):
            raise InvalidParameterError("cable indices must lie in [0, 24)")
        if not 0.0 < self.max_contraction < 1.0:
            raise InvalidParameterError("max_contraction must lie in (0, 1)")
        object.__setattr__(self, "sequence", seq)


@dataclass(frozen=True)
class TensegrityTopology:
    """Immutable node/rod/cable graph of the six-bar robot.

    nodes: (12, 3) coordinates in cm, body frame, centroid at the origin.
    rods: (6, 2) node-index pairs, sorted by (min, max).
    cables: (24, 2) node-index pairs, sorted by (min, max).
    actuated_cables: the 6 cable indices driven by the actuators, in gait order.
    """

    nodes: np.ndarray
    rods: np.ndarray
    cables: np.ndarray
    actuated_cables: tuple[int, ...]
    rod_length: float
    cable_rest_length: float

    def __post_init__(self):
        for name in ("nodes", "rods", "cables"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        object.__setattr__(self, "actuated_cables", tuple(int(c) for c in self.actuated_cables))
        self.validate()

    # -- derived geometry -------------------------------------------------

    def edge_lengths(self, pairs: np.ndarray) -> np.ndarray:
        d = self.nodes[pairs[:, 1]] - self.nodes[pairs[:, 0]]
        return np.linalg.norm(d, axis=1)

    def cable_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.cables}

    def node_of_rod(self) -> np.ndarray:
        """Map node index -> rod index owning it."""
        owner = np.full(len(self.nodes), -1, dtype=int)
        for r, (i, j) in enumerate(self.rods):
            owner[i] = r
            owner[j] = r
        return owner

    def with_actuated(self, sequence) -> "TensegrityTopology":
        """Copy of this topology with a different actuated-cable sequence."""
        return TensegrityTopology(
            nodes=self.nodes.copy(),
            rods=self.rods.copy(),
            cables=self.cables.copy(),
            actuated_cables=tuple(int(c) for c in sequence),
            rod_length=self.rod_length,
            cable_rest_length=self.cable_rest_length,
        )

    # -- validation --------------------------------------------------------

    def validate(self):
        if self.nodes.shape != (12, 3):
            raise InvalidParameterError("expected 12 nodes")
        if self.rods.shape != (6, 2) or self.cables.shape != (24, 2):
            raise InvalidParameterError("expected 6 rods and 24 cables")

        rod_deg = np.zeros(12, dtype=int)
        cable_deg = np.zeros(12, dtype=int)
        for i, j in self.rods:
            rod_deg[i] += 1
            rod_deg[j] += 1
        for i, j in self.cables:
            cable_deg[i] += 1
            cable_deg[j] += 1
        if not (np.all(rod_deg == 1) and np.all(cable_deg == 4)):
            raise InvalidParameterError("every node must touch exactly 1 rod and 4 cables")

        L = self.rod_length
        if np.any(np.abs(self.edge_lengths(self.rods) - L) > REL_TOL * L):
            raise InvalidParameterError("rod lengths deviate from rod_length")
        target = L * CABLE_LENGTH_FACTOR
        if np.any(np.abs(self.edge_lengths(self.cables) - target) > REL_TOL * L):
            raise InvalidParameterError("cable lengths deviate from rod_length*sqrt(6)/4")

        self._check_rod_pairs()

        if len(stable_faces(self)) != 8:
            raise InvalidParameterError("expected exactly 8 stable faces")

        seq = self.actuated_cables
        if len(seq) != 6 or len(set(seq)) != 6 or not all(0 <= c < 24 for c in seq):
            raise InvalidParameterError("actuated_cables must be 6 distinct indices in [0, 24)")

    def _check_rod_pairs(self):
        L = self.rod_length
        axes = []
        for i, j in self.rods:
            d = self.nodes[j] - self.nodes[i]
            axes.append(d / np.linalg.norm(d))
        axes = np.asarray(axes)

        # Group rods into parallel pairs, check the three pair axes are
        # mutually orthogonal and each pair is separated by L/2.
        unpaired = list(range(6))
        pair_axes = []
        while unpaired:
            a = unpaired.pop(0)
            mate = None
            for b in unpaired:
                if abs(abs(axes[a] @ axes[b]) - 1.0) < 1e-9:
                    mate = b
                    break
            if mate is None:
                raise InvalidParameterError("rods do not form parallel pairs")
            unpaired.remove(mate)
            mid_a = self.nodes[self.rods[a]].mean(axis=0)
            mid_b = self.nodes[self.rods[mate]].mean(axis=0)
            sep = mid_b - mid_a
            sep -= (sep @ axes[a]) * axes[a]
            if abs(np.linalg.norm(sep) - L / 2.0) > 1e-9 * L:
                raise InvalidParameterError("parallel-rod separation is not rod_length/2")
            pair_axes.append(axes[a])
        for u, v in itertools.combinations(pair_axes, 2):
            if abs(u @ v) > 1e-9:
                raise InvalidParameterError("rod pair axes are not mutually orthogonal")

    # -- export ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "rod_length_cm": self.rod_length,
            "cable_rest_length_cm": self.cable_rest_length,
            "nodes_cm": self.nodes.tolist(),
            "rods": self.rods.tolist(),
            "cables": self.cables.tolist(),
            "actuated_cables": list(self.actuated_cables),
            "stable_faces": [list(f) for f in stable_faces(self)],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _six_bar_nodes(rod_length: float) -> np.ndarray:
    q = rod_length / 4.0
    h = rod_length / 2.0
    pts = []
    for sy, sz in itertools.product((-1.0, 1.0), repeat=2):
        pts.append((0.0, sy * q, sz * h))   # rods along z
        pts.append((sz * h, 0.0, sy * q))   # rods along x
        pts.append((sy * q, sz * h, 0.0))   # rods along y
    pts.sort()
    return np.array(pts, dtype=float)


def build_six_bar(rod_length: float, actuated_cables=None) -> TensegrityTopology:
    """Construct the regular six-bar tensegrity with the given rod length (cm).

    Nodes are placed at the 12 cyclic permutations of (0, +-L/4, +-L/2), sorted
    lexicographically.  Rods connect same-axis node pairs; cables are the 24
    nearest-neighbour pairs at distance L*sqrt(6)/4.
    """
    if not (isinstance(rod_length, (int, float)) and math.isfinite(rod_length) and rod_length > 0):
        raise InvalidParameterError(f"rod_length must be positive, got {rod_length!r}")
    rod_length = float(rod_length)

    nodes = _six_bar_nodes(rod_length)
    dists = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=2)

    rods = []
    cables = []
    cable_target = rod_length * CABLE_LENGTH_FACTOR
    for i, j in itertools.combinations(range(12), 2):
        d = dists[i, j]
        if abs(d - rod_length) < REL_TOL * rod_length:
            rods.append((i, j))
        elif abs(d - cable_target) < REL_TOL * rod_length:
            cables.append((i, j))
    rods.sort()
    cables.sort()

    if actuated_cables is None:
        actuated_cables = _PLACEHOLDER_ACTUATED

    return TensegrityTopology(
        nodes=nodes,
        rods=np.array(rods, dtype=int),
        cables=np.array(cables, dtype=int),
        actuated_cables=tuple(actuated_cables),
        rod_length=rod_length,
        cable_rest_length=rod_length * CABLE_LENGTH_FACTOR,
    )


def stable_faces(topology: TensegrityTopology) -> list[tuple[int, int, int]]:
    """Node triples whose three pairwise links are all cables, sorted canonically.

    These are the 8 resting orientations of the robot: a triple held together
    purely by cables forms a rigid triangular base when it faces the ground.
    """
    cset = topology.cable_set()
    faces = []
    for tri in itertools.combinations(range(12), 3):
        i, j, k = tri
        if (i, j) in cset and (i, k) in cset and (j, k) in cset:
            faces.append(tri)
    faces.sort()
    return faces


def face_outward_normal(topology: TensegrityTopology, face: tuple[int, int, int]) -> np.ndarray:
    """Unit normal of a stable face pointing away from the structure centroid."""
    a, b, c = (topology.nodes[i] for i in face)
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n)
    centroid = (a + b + c) / 3.0
    if n @ centroid < 0.0:
        n = -n
    return n
