"""Solvers for two-user multiple-access channels with noiseless feedback.

The library evaluates information-rate bounds and optimal coding policies
by dynamic programming over belief states, with exhaustive brute-force
oracles for small instances. See README.md for the CLI and file formats.
"""

from .belief import (
    AugmentedState,
    JointBelief,
    PrivateBeliefTable,
    initial_state,
    observation_distribution,
    uniform_initial,
    update_augmented,
    update_joint,
    update_private,
)
from .channel import Alphabets, Channel, MessageSpace, preset, validate_channel
from .dp import (
    DsahtResult,
    HorizonResult,
    StationaryResult,
    evaluate_tree,
    reachability_diagnostic,
    solve_dsaht,
    solve_horizon,
    solve_stationary,
)
from .encoding import (
    EncoderAction,
    EncoderFunction,
    PolicyTree,
    enumerate_actions,
    policy_from_csv,
    policy_to_csv,
    prune_actions,
)
from .oracle import (
    blahut_arimoto,
    evaluate_policy_In,
    evaluate_scheme_error,
    exhaustive_Cn,
    exhaustive_min_error,
)
from .region import RegionEstimate, export_region, lambda_samples, sweep
from .reward import (
    LambdaWeights,
    RewardBreakdown,
    entropy,
    reward_i1,
    reward_i2,
    reward_i3,
    reward_reduced,
    reward_weighted,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabets",
    "AugmentedState",
    "Channel",
    "DsahtResult",
    "EncoderAction",
    "EncoderFunction",
    "HorizonResult",
    "JointBelief",
    "LambdaWeights",
    "MessageSpace",
    "PolicyTree",
    "PrivateBeliefTable",
    "RegionEstimate",
    "RewardBreakdown",
    "StationaryResult",
    "blahut_arimoto",
    "entropy",
    "enumerate_actions",
    "evaluate_policy_In",
    "evaluate_scheme_error",
    "evaluate_tree",
    "exhaustive_Cn",
    "exhaustive_min_error",
    "export_region",
    "initial_state",
    "lambda_samples",
    "observation_distribution",
    "policy_from_csv",
    "policy_to_csv",
    "preset",
    "prune_actions",
    "reachability_diagnostic",
    "reward_i1",
    "reward_i2",
    "reward_i3",
    "reward_reduced",
    "reward_weighted",
    "solve_dsaht",
    "solve_horizon",
    "solve_stationary",
    "sweep",
    "uniform_initial",
    "update_augmented",
    "update_joint",
    "update_private",
    "validate_channel",
    "__version__",
]
