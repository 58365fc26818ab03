"""Record a scripted teleoperation session, then replay it bit-identically.

Run:  python demos/05_teleop_replay.py
"""
from pathlib import Path

from sixbar.dynamics import WorldConfig
from sixbar.harness import ScenarioConfig
from sixbar.teleop import TeleopSession, replay_log, stream_hash

log = Path("out/demo_session.jsonl")
log.parent.mkdir(exist_ok=True)

cfg = ScenarioConfig(trials=1, world=WorldConfig(dt=1e-3))
session = TeleopSession(cfg, log_path=log)

frames = []
frames += session.advance(0.5)
cable = session.topology.actuated_cables[0]
print("operator pulls cable", cable, "->",
      session.handle_command({"kind": "set_cable", "cable": cable, "fraction": 0.6}))
frames += session.advance(1.0)
print("operator starts the alternating policy ->",
      session.handle_command({"kind": "run_policy", "policy_kind": "alternating", "cycles": 1}))
frames += session.advance(3.0)
session.close()

live = stream_hash(frames)
print(f"\nlive session: {len(frames)} frames, stream sha256 {live[:16]}...")

replayed, digest = replay_log(log)
print(f"replayed:     {len(replayed)} frames, stream sha256 {digest[:16]}...")
print("bit-identical:", digest == live)
print(f"\nsession log: {log} (replay any time with `sixbar replay --log {log}`)")
