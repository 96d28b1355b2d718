# components/sweep_opt.py
"""Grid sweeps over (r, T) and the constrained optimizer built on them."""

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from components.protocols import (
    SETUP1,
    SETUP2,
    run_setup1,
    run_setup2,
    setup2_addition_analytic,
)
from config.settings import OPTIMIZE_CONFIG, OUTPUT_CONFIG, SWEEP_CONFIG
from utils.beamsplitter import BSAngle
from utils.env_settings import get_thread_count
from utils.errors import DomainError, NoFeasiblePoint, TruncationUnsafe
from utils.fock import Cutoff

logger = logging.getLogger(__name__)

SETUP2_ANALYTIC = "setup2_analytic"
COLUMNS = OUTPUT_CONFIG["columns"]


def _run_setup2_analytic(r, spec, cutoff):
    if (spec.m, spec.n, spec.m_prime, spec.n_prime) != (1, 0, 0, 0):
        raise DomainError("The analytic protocol only covers |10⟩ in, |00⟩ detected")
    return setup2_addition_analytic(r, spec.theta_u, cutoff)


PROTOCOLS = {
    SETUP1: run_setup1,
    SETUP2: run_setup2,
    SETUP2_ANALYTIC: _run_setup2_analytic,
}


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular (r, T) grid; T = cos²θ is the system splitters' transmittance."""
    r_min: float = SWEEP_CONFIG["r_min"]
    r_max: float = SWEEP_CONFIG["r_max"]
    r_steps: int = SWEEP_CONFIG["r_steps"]
    t_min: float = SWEEP_CONFIG["t_min"]
    t_max: float = SWEEP_CONFIG["t_max"]
    t_steps: int = SWEEP_CONFIG["t_steps"]

    def __post_init__(self):
        if self.r_min < 0 or self.r_max < self.r_min:
            raise DomainError(f"Need 0 <= r_min <= r_max, got [{self.r_min}, {self.r_max}]")
        if not 0.0 <= self.t_min < self.t_max <= 1.0:
            raise DomainError(f"Need 0 <= t_min < t_max <= 1, got [{self.t_min}, {self.t_max}]")
        if self.r_steps < 2 or self.t_steps < 2:
            raise DomainError("Each axis needs at least 2 steps")

    @property
    def r_values(self):
        return np.linspace(self.r_min, self.r_max, int(self.r_steps))

    @property
    def t_values(self):
        return np.linspace(self.t_min, self.t_max, int(self.t_steps))

    @property
    def points(self):
        """Grid points in row-major order (r outer, T inner)."""
        return [(float(r), float(t)) for r in self.r_values for t in self.t_values]


@dataclass(frozen=True, eq=False)
class OptimumReport:
    best_r: float
    best_t: float
    delta_e_n: float
    e_n: float
    success_prob: float
    p_min: float
    neighborhood: pd.DataFrame
    evaluations: int = 0

    def as_meta(self):
        return {
            "best_r": self.best_r,
            "best_T": self.best_t,
            "delta_E_N": self.delta_e_n,
            "E_N": self.e_n,
            "success_prob": self.success_prob,
            "p_min": self.p_min,
            "evaluations": self.evaluations,
        }


def evaluate_point(protocol, spec, r, t, cutoff_k=None, allow_truncation=False):
    """Run one protocol at squeezing r and transmittance t (θ_U = θ_L)."""
    if protocol not in PROTOCOLS:
        raise DomainError(f"Unknown protocol '{protocol}'. Available: {', '.join(PROTOCOLS)}")
    if cutoff_k is None:
        cutoff = Cutoff.for_squeezing(r, allow_truncation=allow_truncation)
    else:
        cutoff = Cutoff(cutoff_k, allow_truncation=allow_truncation)
    point_spec = spec.with_angle(BSAngle.from_transmittance(t))
    return PROTOCOLS[protocol](r, point_spec, cutoff)


def outcome_row(r, t, outcome, spill=None):
    """One table row; undefined E_N / ΔE_N become NaN (empty cells on output)."""
    return {
        "r": float(r),
        "T": float(t),
        "success_prob": float(outcome.success_prob),
        "E_N": np.nan if outcome.e_n is None else float(outcome.e_n),
        "delta_E_N": np.nan if outcome.delta_e_n is None else float(outcome.delta_e_n),
        "spill": float(outcome.truncation_spill if spill is None else spill),
    }


def _evaluate_row(protocol, spec, r, t, cutoff_k):
    try:
        outcome = evaluate_point(protocol, spec, r, t, cutoff_k)
        return outcome_row(r, t, outcome)
    except TruncationUnsafe as exc:
        logger.warning(f"⚠️ r={r:.6g}, T={t:.6g}: {exc}; re-evaluating with truncation allowed")
        outcome = evaluate_point(protocol, spec, r, t, cutoff_k, allow_truncation=True)
        return outcome_row(r, t, outcome, spill=max(outcome.truncation_spill, exc.tail_mass))


def _evaluate_points(protocol, spec, points, n_jobs=None, cutoff_k=None):
    n_jobs = n_jobs or get_thread_count()
    if n_jobs == 1 or len(points) < 2:
        rows = [_evaluate_row(protocol, spec, r, t, cutoff_k) for r, t in points]
    else:
        # Parallel returns results in submission order
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_evaluate_row)(protocol, spec, r, t, cutoff_k) for r, t in points
        )
    return pd.DataFrame(rows, columns=COLUMNS)


def sweep(protocol, spec, grid=None, n_jobs=None, cutoff_k=None):
    """Evaluate the protocol at every grid point; rows come back in row-major order."""
    grid = grid or SweepGrid()
    if protocol not in PROTOCOLS:
        raise DomainError(f"Unknown protocol '{protocol}'. Available: {', '.join(PROTOCOLS)}")
    logger.info(f"Sweeping {protocol} over {grid.r_steps}×{grid.t_steps} points")
    table = _evaluate_points(protocol, spec, grid.points, n_jobs, cutoff_k)
    annihilated = int(table["E_N"].isna().sum())
    if annihilated:
        logger.info(f"{annihilated} grid point(s) have an annihilated branch")
    return table


def _best_row(table, p_min):
    """Feasible row maximizing (ΔE_N, success, −r, −T), or None."""
    feasible = table[(table["success_prob"] >= p_min) & table["delta_E_N"].notna()]
    if feasible.empty:
        return None
    ranked = feasible.sort_values(
        ["delta_E_N", "success_prob", "r", "T"],
        ascending=[False, False, True, True],
        kind="mergesort",
    )
    return ranked.iloc[0]


def _local_points(center, r_step, t_step, bounds):
    r_axis = sorted({min(max(center["r"] + d * r_step, bounds.r_min), bounds.r_max) for d in (-1, 0, 1)})
    t_axis = sorted({min(max(center["T"] + d * t_step, bounds.t_min), bounds.t_max) for d in (-1, 0, 1)})
    return [(float(r), float(t)) for r in r_axis for t in t_axis]


def optimize(protocol, spec, bounds=None, p_min=0.0, coarse_steps=None, rounds=None,
             n_jobs=None, cutoff_k=None):
    """Maximize ΔE_N subject to success_prob >= p_min.

    A coarse grid scan picks the incumbent, then each round evaluates the
    3×3 grid around it at half the previous spacing.
    """
    if not 0.0 <= p_min < 1.0:
        raise DomainError(f"p_min must lie in [0, 1), got {p_min}")
    bounds = bounds or SweepGrid()
    coarse_steps = coarse_steps or OPTIMIZE_CONFIG["coarse_steps"]
    rounds = OPTIMIZE_CONFIG["rounds"] if rounds is None else rounds

    coarse = replace(bounds, r_steps=coarse_steps, t_steps=coarse_steps)
    table = sweep(protocol, spec, coarse, n_jobs, cutoff_k)
    evaluations = len(table)
    best = _best_row(table, p_min)
    if best is None:
        raise NoFeasiblePoint(f"No grid point of {protocol} reaches success_prob >= {p_min}")
    logger.info(f"Coarse optimum ΔE_N={best['delta_E_N']:.6g} at r={best['r']:.6g}, T={best['T']:.6g}")

    r_step = (coarse.r_max - coarse.r_min) / (coarse_steps - 1)
    t_step = (coarse.t_max - coarse.t_min) / (coarse_steps - 1)
    for _ in range(rounds):
        r_step /= 2.0
        t_step /= 2.0
        local = _evaluate_points(protocol, spec, _local_points(best, r_step, t_step, coarse), n_jobs, cutoff_k)
        evaluations += len(local)
        best = _best_row(pd.concat([pd.DataFrame([best.to_dict()]), local], ignore_index=True), p_min)

    neighborhood = _evaluate_points(protocol, spec, _local_points(best, r_step, t_step, coarse), n_jobs, cutoff_k)
    evaluations += len(neighborhood)

    report = OptimumReport(
        best_r=float(best["r"]),
        best_t=float(best["T"]),
        delta_e_n=float(best["delta_E_N"]),
        e_n=float(best["E_N"]),
        success_prob=float(best["success_prob"]),
        p_min=p_min,
        neighborhood=neighborhood.reset_index(drop=True),
        evaluations=evaluations,
    )
    logger.info(f"✅ Optimum ΔE_N={report.delta_e_n:.6g} (success {report.success_prob:.4f}) "
                f"at r={report.best_r:.6g}, T={report.best_t:.6g}")
    return report
