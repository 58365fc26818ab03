"""Run one punctuated-rolling trial per policy and compare the metrics.

Run:  python demos/03_rolling_trial.py [incline_deg]
"""
import sys

from sixbar.dynamics import WorldConfig
from sixbar.harness import ScenarioConfig, run_trial, write_result_files

theta = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0

print(f"91.4 cm dash on a {theta:.0f} deg incline\n")
print("policy         outcome        distance   velocity   steps  max CoM height")
for kind in ("single", "simultaneous", "alternating"):
    cfg = ScenarioConfig(policy_kind=kind, cycles=3, trials=1,
                         world=WorldConfig(incline_deg=theta))
    r = run_trial(cfg)
    outcome = "success" if r.success else f"failed ({r.failure_mode.value})"
    print(f"{kind:13s}  {outcome:13s}  {r.distance_cm:7.1f}cm  {r.avg_velocity_cm_s:6.2f}cm/s"
          f"  {r.step_count:4d}   {r.max_com_height_pct:6.1f}%")
    paths = write_result_files(r, f"out/demo_{kind}", cfg)
print("\ntraces written under out/demo_<policy>/ (result.json, com_trace.csv, margins.csv)")
