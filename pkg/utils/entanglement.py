"""Logarithmic negativity of pure bipartite states and entanglement-change bookkeeping."""

import math
from dataclasses import dataclass

import numpy as np

from config.settings import NUMERICS_CONFIG
from utils.errors import DomainError

LOG2_E = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class EntanglementReport:
    """E_N, the TMSVS baseline for the same squeezing, and their difference (bits)."""
    e_n: float
    baseline: float
    delta: float


def baseline_tmsvs(r):
    """E_N of the two-mode squeezed vacuum, 2r·log₂e."""
    if r < 0:
        raise DomainError(f"Squeezing must be non-negative, got {r}")
    return 2.0 * r * LOG2_E


def log_negativity_pure(spectrum, drop_threshold=None):
    """log₂[(Σ s_k)²] for a normalized Schmidt spectrum."""
    if drop_threshold is None:
        drop_threshold = NUMERICS_CONFIG["schmidt_drop_threshold"]
    values = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    total = float(np.sum(values ** 2))
    if abs(total - 1.0) > NUMERICS_CONFIG["schmidt_norm_tolerance"]:
        raise DomainError(f"Schmidt spectrum is not normalized (Σ s² = {total!r})")
    kept = values[values > drop_threshold]
    return 2.0 * math.log2(float(np.sum(kept)))


def log_negativity_from_coefficients(coefficients):
    """E_N = log₂[N²(Σ|C_k|)²] for a state already in Schmidt form Σ C_k |u_k⟩|v_k⟩."""
    magnitudes = np.abs(np.asarray(coefficients, dtype=float))
    norm2 = float(np.sum(magnitudes ** 2))
    if norm2 <= 0.0:
        raise DomainError("All Schmidt coefficients vanish")
    return math.log2(float(np.sum(magnitudes)) ** 2 / norm2)


def entanglement_report(e_n, r):
    baseline = baseline_tmsvs(r)
    return EntanglementReport(e_n=e_n, baseline=baseline, delta=e_n - baseline)
