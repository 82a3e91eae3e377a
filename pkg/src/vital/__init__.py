"""Terrain-aware locomotion planning: foothold evaluation criteria over
heightmaps, foothold adaptation, pose adaptation via RBF regression and
box-constrained pose optimization, and a quasi-kinematic gait simulator."""

from .terrain import Heightmap, TerrainMap, extract_heightmap, sample_height
from .robot import (
    BodyTwist,
    GaitParams,
    LEG_NAMES,
    Pose,
    RobotModel,
    SwingTrajectory,
    hip_height,
    nominal_foothold,
    robot_preset,
    swing_trajectory,
    workspace_contains,
)
from .fec import (
    FecConfig,
    FecEvaluator,
    FecInput,
    SafetyGrid,
    count_safe,
    erode_safe_set,
    eval_fc,
    eval_fec,
    eval_kf,
    eval_lc,
    eval_tr,
)
from .vfa import FootholdDecision, VfaInput, adjust_trajectory, foothold_evaluation
from .vpa import (
    HipHeightSet,
    PoseOptProblem,
    PoseOptResult,
    SafeFootholdFunction,
    SafeFootholdSamples,
    cost_int,
    cost_prod,
    cost_smooth,
    cost_sum,
    fit_rbf,
    fit_rbf_per_leg,
    optimize_pose_receding,
    optimize_pose_single,
    pose_evaluation,
)
from .tbr import TbrReference, tbr_pose
from .sim import ConfigError, RunMetrics, Scenario, compare_scenarios, run_scenario

__version__ = "0.1.0"
