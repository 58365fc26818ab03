"""Six-bar spherical tensegrity rolling simulator.

Deterministic rigid-rod / tension-only-cable dynamics on inclined planes,
quasi-static stability analysis, the three open-loop rolling policies, a
scenario/sweep harness and a replayable teleoperation service.
"""

from .dynamics import (
    RobotParams,
    SimState,
    WorldConfig,
    apply_cable_targets,
    init_resting,
    neutral_state,
    settle,
    step,
)
from .harness import ScenarioConfig, TrialResult, default_gait, incline_sweep, run_trial
from .policies import (
    ALTERNATING,
    SIMULTANEOUS,
    SINGLE,
    GaitStep,
    PolicyParams,
    PolicySchedule,
    compile_policy,
    default_policy_params,
    derive_gait,
    find_step_cable,
)
from .stability import (
    FailureMode,
    NotAchievable,
    classify_failure,
    max_incline_no_slip,
    project_com,
    required_contraction,
    stability_margins,
    state_support,
    support_polygon,
)
from .teleop import TeleopSession, replay_log, stream_hash
from .topology import TensegrityTopology, build_six_bar, stable_faces

__all__ = [
    "ALTERNATING",
    "FailureMode",
    "GaitStep",
    "NotAchievable",
    "PolicyParams",
    "PolicySchedule",
    "RobotParams",
    "SIMULTANEOUS",
    "SINGLE",
    "ScenarioConfig",
    "SimState",
    "TeleopSession",
    "TensegrityTopology",
    "TrialResult",
    "WorldConfig",
    "apply_cable_targets",
    "build_six_bar",
    "classify_failure",
    "compile_policy",
    "default_gait",
    "default_policy_params",
    "derive_gait",
    "find_step_cable",
    "incline_sweep",
    "init_resting",
    "max_incline_no_slip",
    "neutral_state",
    "project_com",
    "replay_log",
    "required_contraction",
    "run_trial",
    "settle",
    "stability_margins",
    "stable_faces",
    "state_support",
    "step",
    "stream_hash",
    "support_polygon",
]
