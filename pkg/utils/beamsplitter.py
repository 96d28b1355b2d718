"""Conditional beam-splitter operators and full two-mode beam-splitter unitaries.

Convention: the splitter exp{θ(a†a_A − a_A†a)} maps
    a_A† → cosθ a_A† + sinθ a†,    a† → −sinθ a_A† + cosθ a†,
and ⟨k+m−m'|⟨m'|_A B̂(θ) |k⟩|m⟩_A = B_{m,m',k}(θ).
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from config.settings import NUMERICS_CONFIG
from utils.errors import DomainError
from utils.fock import FourModeState, TwoModeState, norm_squared

logger = logging.getLogger(__name__)

FIRST, SECOND = "first", "second"


@dataclass(frozen=True)
class BSAngle:
    """Beam-splitter mixing angle θ ∈ [0, π/2]; T = cos²θ, R = sin²θ."""
    theta: float

    def __post_init__(self):
        slack = NUMERICS_CONFIG["angle_slack"]
        theta = float(self.theta)
        if not (-slack <= theta <= math.pi / 2 + slack):
            raise DomainError(f"theta must lie in [0, π/2], got {theta}")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi / 2))

    @classmethod
    def from_transmittance(cls, transmittance):
        if not 0.0 <= transmittance <= 1.0:
            raise DomainError(f"Transmittance must lie in [0, 1], got {transmittance}")
        return cls(math.acos(math.sqrt(transmittance)))

    @property
    def cos(self):
        return 0.0 if self.theta == math.pi / 2 else math.cos(self.theta)

    @property
    def sin(self):
        return math.sin(self.theta)

    @property
    def transmittance(self):
        return self.cos ** 2

    @property
    def reflectance(self):
        return self.sin ** 2


def _log_power(base, exponents):
    """log(base**e) for base >= 0, with 0**0 = 1."""
    exponents = np.asarray(exponents, dtype=float)
    if base == 0.0:
        return np.where(exponents == 0, 0.0, -np.inf)
    return exponents * math.log(base)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def bs_coefficients(m, m_prime, ks, angle):
    """B_{m,m',k}(θ) for an array of k.

    Each term of the closed-form sum is built in log space with its sign kept
    apart, then the terms are added in ascending i.
    """
    if m < 0 or m_prime < 0:
        raise DomainError(f"Photon counts must be non-negative, got m={m}, m'={m_prime}")
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    if np.any(ks < 0):
        raise DomainError("Fock indices must be non-negative")
    out = np.zeros(ks.shape, dtype=float)
    cos_t, sin_t = angle.cos, angle.sin

    for i in range(min(m, m_prime) + 1):
        j = m_prime - i
        # binom(k, j) vanishes for k < j, which also covers k + m - m' < 0
        live = ks >= j
        if not live.any():
            continue
        k = ks[live].astype(float)
        log_mag = (
            _log_binom(m, i)
            + _log_binom(k, j)
            + _log_power(cos_t, k + 2 * i - m_prime)
            + _log_power(sin_t, m + m_prime - 2 * i)
            + 0.5 * (gammaln(m_prime + 1) - gammaln(m + 1) + gammaln(k + m - m_prime + 1) - gammaln(k + 1))
        )
        sign = -1.0 if j % 2 else 1.0
        out[live] += sign * np.exp(log_mag)
    return out


def bs_coefficient(m, m_prime, k, angle):
    if k + m - m_prime < 0:
        return 0.0
    return float(bs_coefficients(m, m_prime, [k], angle)[0])


@dataclass(frozen=True, eq=False)
class ConditionalOp:
    """B̂_{m,m'} = Σ_k b[k] |k+m−m'⟩⟨k| for a fixed angle."""
    m: int
    m_prime: int
    angle: BSAngle
    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        b.flags.writeable = False
        object.__setattr__(self, "b", b)

    @property
    def shift(self):
        return self.m - self.m_prime

    @property
    def k_max(self):
        return len(self.b) - 1


def make_conditional_op(m, m_prime, angle, cutoff):
    b = bs_coefficients(m, m_prime, np.arange(cutoff.dim), angle)
    return ConditionalOp(m, m_prime, angle, b)


def identity_op(cutoff):
    """No splitter on the mode: m = m' = 0 at θ = 0, so B ≡ 1."""
    return make_conditional_op(0, 0, BSAngle(0.0), cutoff)


def apply_conditional(op, which_mode, state):
    """Apply B̂_{m,m'} to one mode; the result is unnormalized and its norm² is the branch probability."""
    if op.k_max != state.cutoff.k_max:
        raise DomainError(f"Operator cutoff {op.k_max} does not match state cutoff {state.cutoff.k_max}")
    if which_mode not in (FIRST, SECOND):
        raise DomainError(f"which_mode must be '{FIRST}' or '{SECOND}'")

    coeffs = state.coeffs if which_mode == FIRST else state.coeffs.T
    scaled = op.b[:, None] * coeffs
    dim = state.cutoff.dim
    out = np.zeros_like(scaled)
    shift = op.shift
    src = np.arange(dim)
    dst = src + shift
    keep = (dst >= 0) & (dst < dim)
    out[dst[keep]] = scaled[src[keep]]
    spill = float(np.sum(scaled[src[(dst >= dim)]] ** 2))
    if spill > 0:
        logger.debug(f"Conditional op spilled {spill:.3e} above k_max={state.cutoff.k_max}")

    if which_mode == SECOND:
        out = out.T
    return TwoModeState(state.cutoff, out, normalized=False, spill=state.spill + spill)


@lru_cache(maxsize=65536)
def _pair_block(theta, total, dim_a, dim_b):
    """In-range slice of the BS unitary on the fixed-photon-number block `total`."""
    angle = BSAngle(theta)
    lo = max(0, total - dim_a + 1)
    hi = min(total, dim_b - 1)
    kbs = np.arange(lo, hi + 1)
    block = np.zeros((len(kbs), len(kbs)))
    for col, kb in enumerate(kbs):
        for row, jb in enumerate(kbs):
            block[row, col] = bs_coefficient(int(kb), int(jb), int(total - kb), angle)
    block.flags.writeable = False
    kbs.flags.writeable = False
    return kbs, block


def apply_full_bs(state, pair, angle):
    """Full BS unitary on two axes of a FourModeState; pair[1] transforms as the ancilla a_A.

    Amplitude pushed past any axis limit is dropped and added to `spill`.
    """
    mode_a, mode_b = pair
    if mode_a == mode_b or not (0 <= mode_a < 4 and 0 <= mode_b < 4):
        raise DomainError(f"Invalid mode pair {pair}")

    work = np.moveaxis(np.array(state.coeffs), (mode_a, mode_b), (-2, -1))
    dim_a, dim_b = work.shape[-2:]
    out = np.zeros_like(work)
    for total in range(dim_a + dim_b - 1):
        kbs, block = _pair_block(angle.theta, total, dim_a, dim_b)
        if len(kbs) == 0:
            continue
        column = work[..., total - kbs, kbs]
        out[..., total - kbs, kbs] = column @ block.T
    out = np.moveaxis(out, (-2, -1), (mode_a, mode_b))

    lost = max(norm_squared(state) - float(np.sum(out ** 2)), 0.0)
    return replace(state, coeffs=out, normalized=False, spill=state.spill + lost)


def taylor_expm(matrix, tolerance=1e-16):
    """exp(matrix) by scaling and squaring with a Taylor series."""
    matrix = np.asarray(matrix, dtype=float)
    norm = np.linalg.norm(matrix, ord=1)
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = matrix / 2.0 ** squarings

    result = np.eye(matrix.shape[0])
    term = np.eye(matrix.shape[0])
    order = 0
    while True:
        order += 1
        term = term @ scaled / order
        result = result + term
        if np.linalg.norm(term, ord=1) < tolerance:
            break
    for _ in range(squarings):
        result = result @ result
    return result


@lru_cache(maxsize=32)
def _brute_force_unitary(theta, dim):
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a = np.kron(lower, eye)        # system mode
    a_anc = np.kron(eye, lower)    # ancilla mode
    generator = theta * (a.T @ a_anc - a_anc.T @ a)
    unitary = taylor_expm(generator)
    unitary.flags.writeable = False
    return unitary


def brute_force_bs_element(m, m_prime, k, k_out, theta, dim):
    """⟨k_out, m'| exp{θ(a†a_A − a_A†a)} |k, m⟩ from a dense matrix exponential."""
    if dim < k + m + 5:
        raise DomainError(f"dim={dim} leaves no headroom for k={k}, m={m}")
    if max(k_out, m_prime) >= dim:
        return 0.0
    unitary = _brute_force_unitary(float(theta), int(dim))
    return float(unitary[k_out * dim + m_prime, k * dim + m])
