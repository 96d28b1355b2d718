"""Truncated Fock-space state containers, norms, tail diagnostics and Schmidt decomposition."""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from config.settings import CUTOFF_CONFIG, NUMERICS_CONFIG
from utils.errors import ConvergenceFailure, DomainError, TruncationUnsafe, ZeroState

logger = logging.getLogger(__name__)


def default_k_max(r):
    """Per-mode cutoff for a TMSVS of squeezing r.

    The linear rule is a floor; the cutoff grows until tanh(r)^(K+1) drops
    below the amplitude-tail target, capped at the hard maximum.
    """
    cfg = CUTOFF_CONFIG
    k_max = math.ceil(cfg["base"] + cfg["per_unit_r"] * r)
    k_max = min(max(k_max, cfg["policy_min"]), cfg["policy_max"])
    lam = math.tanh(r)
    if lam >= 1.0:
        return cfg["hard_max"]
    if lam > 0.0:
        needed = math.ceil(math.log(cfg["amplitude_tail"]) / math.log(lam)) - 1
        k_max = max(k_max, needed)
    return min(k_max, cfg["hard_max"])


@dataclass(frozen=True)
class Cutoff:
    """Largest photon number kept per system mode (indices 0..k_max)."""
    k_max: int
    allow_truncation: bool = False

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise DomainError(f"k_max must be an integer >= 1, got {self.k_max}")
        object.__setattr__(self, "k_max", int(self.k_max))

    @property
    def dim(self):
        return self.k_max + 1

    def extended(self, extra):
        return replace(self, k_max=self.k_max + int(extra))

    @classmethod
    def for_squeezing(cls, r, allow_truncation=False):
        return cls(default_k_max(r), allow_truncation=allow_truncation)


def _frozen_array(values):
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("State amplitudes must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Real amplitudes c[j][k] of Σ c_jk |j,k⟩ over a truncated two-mode basis."""
    cutoff: Cutoff
    coeffs: np.ndarray
    normalized: bool = False
    spill: float = 0.0

    def __post_init__(self):
        coeffs = _frozen_array(self.coeffs)
        shape = (self.cutoff.dim, self.cutoff.dim)
        if coeffs.shape != shape:
            raise DomainError(f"Expected coefficient matrix {shape}, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)
        if self.normalized:
            total = float(np.sum(coeffs ** 2))
            if abs(total - 1.0) > NUMERICS_CONFIG["normalization_tolerance"]:
                raise DomainError(f"State flagged normalized but Σ|c|² = {total!r}")

    @classmethod
    def zeros(cls, cutoff):
        return cls(cutoff, np.zeros((cutoff.dim, cutoff.dim)))

    @classmethod
    def basis(cls, j, k, cutoff):
        coeffs = np.zeros((cutoff.dim, cutoff.dim))
        coeffs[j, k] = 1.0
        return cls(cutoff, coeffs, normalized=True)


@dataclass(frozen=True, eq=False)
class FourModeState:
    """Amplitudes c[k_U][k_L][a_U][a_L] over system modes (U, L) and ancillas (UA, LA)."""
    cutoff: Cutoff
    ancilla_cap: int
    coeffs: np.ndarray
    normalized: bool = False
    spill: float = 0.0

    def __post_init__(self):
        if self.ancilla_cap < 0:
            raise DomainError(f"ancilla_cap must be >= 0, got {self.ancilla_cap}")
        coeffs = _frozen_array(self.coeffs)
        a_dim = self.ancilla_cap + 1
        shape = (self.cutoff.dim, self.cutoff.dim, a_dim, a_dim)
        if coeffs.shape != shape:
            raise DomainError(f"Expected coefficient tensor {shape}, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_product(cls, system, m, n, ancilla_cap, cutoff=None):
        """system ⊗ |m⟩_UA |n⟩_LA, with the system embedded in `cutoff` if given."""
        cutoff = cutoff or system.cutoff
        if m > ancilla_cap or n > ancilla_cap:
            raise DomainError(f"Ancilla photons ({m}, {n}) exceed cap {ancilla_cap}")
        if cutoff.k_max < system.cutoff.k_max:
            raise DomainError("Target cutoff is smaller than the system cutoff")
        a_dim = ancilla_cap + 1
        coeffs = np.zeros((cutoff.dim, cutoff.dim, a_dim, a_dim))
        d = system.cutoff.dim
        coeffs[:d, :d, m, n] = system.coeffs
        return cls(cutoff, ancilla_cap, coeffs, normalized=system.normalized, spill=system.spill)


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Schmidt coefficients in descending order."""
    values: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        values = _frozen_array(self.values)
        if np.any(values < 0):
            raise DomainError("Schmidt values must be non-negative")
        if np.any(np.diff(values) > 0):
            raise DomainError("Schmidt values must be sorted descending")
        object.__setattr__(self, "values", values)


def norm_squared(state):
    return float(np.sum(np.abs(state.coeffs) ** 2))


def normalize(state, zero_threshold=None):
    """Return (unit-norm state, Σ|c|² before normalization)."""
    if zero_threshold is None:
        zero_threshold = NUMERICS_CONFIG["zero_threshold"]
    total = norm_squared(state)
    if total <= zero_threshold:
        raise ZeroState(total)
    return replace(state, coeffs=state.coeffs / math.sqrt(total), normalized=True), total


def embed(state, cutoff):
    """Zero-pad a two-mode state into a larger cutoff."""
    if cutoff.k_max < state.cutoff.k_max:
        raise DomainError(f"Cannot embed k_max={state.cutoff.k_max} into k_max={cutoff.k_max}")
    coeffs = np.zeros((cutoff.dim, cutoff.dim))
    d = state.cutoff.dim
    coeffs[:d, :d] = state.coeffs
    return TwoModeState(cutoff, coeffs, normalized=state.normalized, spill=state.spill)


def canonicalize_phase(state):
    """Flip the global sign so the largest-magnitude amplitude is positive."""
    flat = state.coeffs.ravel()
    if flat.size == 0 or flat[np.argmax(np.abs(flat))] >= 0:
        return state
    return replace(state, coeffs=-state.coeffs)


def overlap(first, second):
    """|⟨first|second⟩| for real states of equal shape."""
    if first.coeffs.shape != second.coeffs.shape:
        raise DomainError("States live in different truncated bases")
    return abs(float(np.sum(first.coeffs * second.coeffs)))


def tail_mass(state, band):
    """Probability with any system-mode index above k_max - band."""
    if band < 0:
        raise DomainError(f"band must be >= 0, got {band}")
    k_max = state.cutoff.k_max
    outside = np.arange(k_max + 1) > k_max - band
    if not outside.any():
        return 0.0
    prob = np.abs(state.coeffs) ** 2
    mask = outside[:, None] | outside[None, :]
    if prob.ndim == 4:
        mask = mask[:, :, None, None]
    mask = np.broadcast_to(mask, prob.shape)
    return float(prob[mask].sum())


def check_truncation(state, band=None, tolerance=None):
    """Raise TruncationUnsafe (or warn, if the cutoff allows it) when the tail is too heavy."""
    band = CUTOFF_CONFIG["tail_band"] if band is None else band
    tolerance = CUTOFF_CONFIG["tail_tolerance"] if tolerance is None else tolerance
    tail = tail_mass(state, band)
    if tail >= tolerance:
        if state.cutoff.allow_truncation:
            logger.warning(f"⚠️ Truncation-unsafe state: tail mass {tail:.3e} at k_max={state.cutoff.k_max}")
        else:
            raise TruncationUnsafe(tail, state.cutoff.k_max)
    return tail


def schmidt(state):
    """Schmidt spectrum of a normalized two-mode state (singular values of c)."""
    total = norm_squared(state)
    tolerance = NUMERICS_CONFIG["schmidt_norm_tolerance"]
    if abs(total - 1.0) > tolerance:
        raise DomainError(f"Schmidt decomposition needs a normalized state, Σ|c|² = {total!r}")

    values = None
    for driver in ("gesdd", "gesvd"):
        try:
            values = scipy.linalg.svd(state.coeffs, compute_uv=False, lapack_driver=driver)
            break
        except (np.linalg.LinAlgError, ValueError) as exc:
            logger.warning(f"SVD with {driver} failed: {exc}")
    if values is None:
        raise ConvergenceFailure(f"SVD did not converge for k_max={state.cutoff.k_max}")

    values = np.clip(values, 0.0, None)
    if abs(float(np.sum(values ** 2)) - total) > tolerance:
        raise ConvergenceFailure("Singular values do not reproduce the state norm")
    return SchmidtSpectrum(values, residual=tail_mass(state, CUTOFF_CONFIG["tail_band"]))
