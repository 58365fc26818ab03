"""Tour of the six-bar geometry: nodes, rods, cables, stable faces.

Run:  python demos/01_topology_tour.py
"""
import numpy as np

from sixbar.topology import build_six_bar, face_outward_normal, stable_faces

topo = build_six_bar(25.0)

print("six-bar tensegrity, rod length 25 cm")
print(f"  nodes:  {len(topo.nodes)} (cyclic permutations of (0, +-6.25, +-12.5))")
print(f"  rods:   {len(topo.rods)} -> {topo.rods.tolist()}")
print(f"  cables: {len(topo.cables)}, every one {topo.cable_rest_length:.4f} cm long")

lengths = topo.edge_lengths(topo.cables)
print(f"  cable length spread: {lengths.max() - lengths.min():.2e} cm (exact by construction)")

faces = stable_faces(topo)
print(f"\n{len(faces)} stable faces (node triples whose edges are all cables):")
for i, tri in enumerate(faces):
    n = face_outward_normal(topo, tri)
    print(f"  face {i}: nodes {tri}, outward normal {np.round(n, 3)}")

counts = np.zeros(12, int)
for tri in faces:
    counts[list(tri)] += 1
print(f"\nevery node belongs to exactly {set(counts.tolist())} faces")
print("\ntopology JSON export (for the console UI):")
print(topo.to_json()[:200] + " ...")
