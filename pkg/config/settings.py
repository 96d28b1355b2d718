# config/settings.py
"""Configuration settings for the heralded entanglement toolkit."""

import math

# Numerical tolerances
NUMERICS_CONFIG = {
    "zero_threshold": 1e-30,          # norm² at or below this is an annihilated branch
    "normalization_tolerance": 1e-12,
    "schmidt_norm_tolerance": 1e-10,
    "schmidt_drop_threshold": 1e-14,  # Schmidt values below this are ignored in E_N
    "angle_slack": 1e-12,
}

# Fock cutoff policy
CUTOFF_CONFIG = {
    "base": 25,
    "per_unit_r": 35,
    "policy_min": 40,
    "policy_max": 200,
    "hard_max": 400,
    "amplitude_tail": 1e-12,  # target for lambda^(K+1)
    "tail_band": 5,
    "tail_tolerance": 1e-10,
}

# Circuit defaults
SETUP_CONFIG = {
    "theta_a": math.pi / 4,  # BS_A premix, 50:50
}

# Grid sweep defaults (transmittance axis T = cos^2 theta)
SWEEP_CONFIG = {
    "r_min": 0.05,
    "r_max": 1.5,
    "r_steps": 60,
    "t_min": 0.02,
    "t_max": 0.98,
    "t_steps": 60,
    "threads_env": "HERALD_THREADS",
}

# Constrained optimizer
OPTIMIZE_CONFIG = {
    "coarse_steps": 40,
    "rounds": 20,
}

# Table output
OUTPUT_CONFIG = {
    "schema_version": 1,
    "columns": ["r", "T", "success_prob", "E_N", "delta_E_N", "spill"],
    "json_precision": 15,  # most digits pandas writes; CSV floats use repr
    "formats": ["csv", "json-lines"],
}

# Verification suite grid resolutions
VERIFY_CONFIG = {
    "full": {"grid_steps": 60, "equivalence_steps": 10, "reduction_steps": 5, "random_points": 100},
    "quick": {"grid_steps": 14, "equivalence_steps": 4, "reduction_steps": 3, "random_points": 20},
    "reduction_r_max": 1.0,
    "soft_ratio_floor": 2.5,
    "target_ratio": 3.0,
    "three_fold_p_min": 0.2,  # usable heralding rate for the ratio
    "log_dir": "logs",
}

# Logging
LOG_CONFIG = {
    "level": "INFO",
    "level_env": "HERALD_LOG_LEVEL",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}

# Named heralding scenarios. lower_noop means no BS at all on the lower mode.
HERALD_PRESETS = {
    "setup1_addition": {"m": 1, "n": 0, "m_prime": 0, "n_prime": 0, "lower_noop": True},
    "setup1_catalysis": {"m": 1, "n": 0, "m_prime": 1, "n_prime": 0, "lower_noop": True},
    "setup1_subtraction": {"m": 1, "n": 0, "m_prime": 2, "n_prime": 0, "lower_noop": True},
    "setup2_addition": {"m": 1, "n": 0, "m_prime": 0, "n_prime": 0, "lower_noop": False},
    "setup2_catalysis_10": {"m": 1, "n": 0, "m_prime": 1, "n_prime": 0, "lower_noop": False},
    "setup2_catalysis_01": {"m": 1, "n": 0, "m_prime": 0, "n_prime": 1, "lower_noop": False},
    "setup2_catalysis_11": {"m": 1, "n": 1, "m_prime": 1, "n_prime": 1, "lower_noop": False},
    "setup2_subtraction": {"m": 1, "n": 0, "m_prime": 1, "n_prime": 1, "lower_noop": False},
}
