"""Required cable retraction to initiate a forward roll, per incline.

Reproduces the required-contraction analysis for the first gait cable
(smallest contraction of the front base edge that tips the robot uphill,
found by bisection over quasi-static settles).

Run:  python demos/04_required_contraction.py
"""
from sixbar.dynamics import WorldConfig
from sixbar.harness import default_gait
from sixbar.stability import NotAchievable, required_contraction
from sixbar.topology import build_six_bar

topo = build_six_bar(25.0)
step = default_gait()[0]

print(f"gait step 0: cable {step.cable}, stance face {step.face}")
print("theta   required contraction (fraction of neutral length)")
rows = []
for theta in (0.0, 4.0, 8.0, 12.0):
    rc = required_contraction(topo, WorldConfig(incline_deg=theta), step.cable,
                              step.face, yaw=step.yaw, resolution=0.01)
    txt = f"{rc:.3f}" if not isinstance(rc, NotAchievable) else f"n/a ({rc.reason})"
    rows.append((theta, txt))
    print(f"{theta:5.1f}   {txt}")

print("\nsteeper inclines demand deeper retraction (the single-cable policy's")
print("capability ends where the required contraction crosses the actuator cap).")
