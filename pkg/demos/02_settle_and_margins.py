"""Settle the robot on an incline and read its stability margins.

Run:  python demos/02_settle_and_margins.py
"""
import numpy as np

from sixbar.dynamics import WorldConfig, init_resting
from sixbar.errors import SettlingSlipError
from sixbar.stability import max_incline_no_slip, state_support
from sixbar.topology import build_six_bar

topo = build_six_bar(25.0)

print("theta  com height   uphill margin  downhill margin")
for theta in (0.0, 8.0, 16.0, 20.0):
    state = init_resting(topo, WorldConfig(incline_deg=theta), face=0)
    com = state.total_com()
    poly, proj, margins = state_support(state)
    print(f"{theta:5.1f}  {com[2]:9.2f}   {margins.uphill_margin:12.2f}"
          f"  {margins.downhill_margin:14.2f}")

mu = 0.49
print(f"\nanalytic slip bound for a uniformly loaded contact, mu={mu}: "
      f"{max_incline_no_slip(mu):.1f} deg")
print("the real stance unloads its uphill foot first, so sliding sets in earlier:")
for theta in (22.0, 28.0):
    try:
        init_resting(topo, WorldConfig(incline_deg=theta), face=0,
                     settle_kwargs={"max_time": 12.0})
        print(f"  {theta:.0f} deg -> settled")
    except SettlingSlipError as e:
        print(f"  {theta:.0f} deg -> {e}")
