# components/protocols.py
"""Heralding circuits acting on a two-mode squeezed vacuum.

Setup 1 sends each TMSVS mode through its own splitter with a Fock ancilla.
Setup 2 first mixes the two ancillas on BS_A, then proceeds as setup 1.
Both return a ProtocolOutcome with the heralded state, its success
probability and its logarithmic negativity.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from config.settings import HERALD_PRESETS, NUMERICS_CONFIG, SETUP_CONFIG
from utils.beamsplitter import (
    FIRST,
    SECOND,
    BSAngle,
    apply_conditional,
    apply_full_bs,
    bs_coefficients,
    identity_op,
    make_conditional_op,
)
from utils.entanglement import (
    entanglement_report,
    log_negativity_from_coefficients,
    log_negativity_pure,
)
from utils.errors import DomainError, ZeroState
from utils.fock import (
    Cutoff,
    FourModeState,
    TwoModeState,
    canonicalize_phase,
    check_truncation,
    embed,
    normalize,
    schmidt,
)

logger = logging.getLogger(__name__)

# FourModeState axes
U, L, UA, LA = 0, 1, 2, 3

SETUP1, SETUP2 = "setup1", "setup2"

# relative p_k differences below this count as ties
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SqueezeParam:
    """Squeezing factor r of the TMSVS source."""
    r: float

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0:
            raise DomainError(f"Squeezing must be a finite value >= 0, got {self.r}")
        # λ must stay below 1 in floating point
        if math.tanh(r) >= 1.0:
            raise DomainError(f"Squeezing r={r} is too large: tanh(r) rounds to 1")
        object.__setattr__(self, "r", r)

    @property
    def lam(self):
        return math.tanh(self.r)

    @property
    def prefactor(self):
        return 1.0 / math.cosh(self.r)


def _as_squeeze(r):
    return r if isinstance(r, SqueezeParam) else SqueezeParam(r)


def _default_theta_a():
    return BSAngle(SETUP_CONFIG["theta_a"])


@dataclass(frozen=True)
class HeraldSpec:
    """Ancilla inputs (m, n), detected counts (m', n') and splitter angles.

    `lower_noop` removes the lower splitter entirely (B ≡ 1), which is not the
    same as a vacuum-heralded splitter at some angle.
    """
    m: int = 0
    n: int = 0
    m_prime: int = 0
    n_prime: int = 0
    theta_u: BSAngle = field(default_factory=lambda: BSAngle(0.0))
    theta_l: BSAngle = field(default_factory=lambda: BSAngle(0.0))
    theta_a: BSAngle = field(default_factory=_default_theta_a)
    lower_noop: bool = False

    def __post_init__(self):
        for name in ("m", "n", "m_prime", "n_prime"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.lower_noop:
            if self.n or self.n_prime:
                raise DomainError("A lower no-op cannot carry lower ancilla photons")
            object.__setattr__(self, "theta_l", BSAngle(0.0))

    def with_angle(self, angle):
        """Same herald with θ_U = θ_L = angle (θ_L stays 0 for a lower no-op)."""
        return replace(self, theta_u=angle, theta_l=BSAngle(0.0) if self.lower_noop else angle)

    @classmethod
    def from_preset(cls, name, angle=None, theta_a=None):
        if name not in HERALD_PRESETS:
            raise DomainError(f"Unknown preset '{name}'. Available: {', '.join(sorted(HERALD_PRESETS))}")
        spec = cls(**HERALD_PRESETS[name])
        if theta_a is not None:
            spec = replace(spec, theta_a=theta_a)
        return spec.with_angle(angle) if angle is not None else spec

    @property
    def kind(self):
        """'addition', 'subtraction' or 'catalysis' by net photon change."""
        net = (self.m + self.n) - (self.m_prime + self.n_prime)
        if net > 0:
            return "addition"
        if net < 0:
            return "subtraction"
        return "catalysis"


@dataclass(frozen=True, eq=False)
class ProtocolOutcome:
    """Result of one heralded run. `state`, `e_n` and `delta_e_n` are None for an annihilated branch."""
    state: TwoModeState
    success_prob: float
    e_n: float
    delta_e_n: float
    truncation_spill: float
    r: float = 0.0

    @property
    def annihilated(self):
        return self.state is None


def tmsvs(r, cutoff=None):
    """sech r Σ_k tanh^k r |k,k⟩ truncated at cutoff.k_max."""
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    k = np.arange(cutoff.dim)
    amplitudes = squeeze.prefactor * squeeze.lam ** k
    deficit = squeeze.lam ** (2 * cutoff.dim)
    state = TwoModeState(
        cutoff,
        np.diag(amplitudes),
        normalized=deficit <= 0.5 * NUMERICS_CONFIG["normalization_tolerance"],
        spill=deficit,
    )
    check_truncation(state)
    return state


def setup1_coefficients(r, spec, cutoff=None):
    """C_k = sech r λ^k B_{m,m',k}(θ_U) B_{n,n',k}(θ_L) for k = 0..k_max."""
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    k = np.arange(cutoff.dim)
    upper = bs_coefficients(spec.m, spec.m_prime, k, spec.theta_u)
    if spec.lower_noop:
        lower = np.ones(cutoff.dim)
    else:
        lower = bs_coefficients(spec.n, spec.n_prime, k, spec.theta_l)
    return squeeze.prefactor * squeeze.lam ** k * upper * lower


def _finish(branch, r, spill, coefficients=None, check_tail=True):
    """Normalize a heralded branch and attach its entanglement figures."""
    try:
        state, success = normalize(branch)
    except ZeroState as exc:
        logger.info(f"Heralded branch annihilated at r={r:.6g} (norm² = {exc.norm_squared:.3e})")
        return ProtocolOutcome(None, exc.norm_squared, None, None, spill, r)

    state = canonicalize_phase(state)
    if check_tail:
        check_truncation(state)
    if coefficients is not None:
        e_n = log_negativity_from_coefficients(coefficients)
    else:
        e_n = log_negativity_pure(schmidt(state))
    report = entanglement_report(e_n, r)
    return ProtocolOutcome(state, success, report.e_n, report.delta, spill, r)


def _setup1_branch(squeeze, spec, cutoff):
    source = tmsvs(squeeze, cutoff)
    out_cutoff = cutoff.extended(spec.m + spec.n)
    branch = embed(source, out_cutoff)
    upper = make_conditional_op(spec.m, spec.m_prime, spec.theta_u, out_cutoff)
    branch = apply_conditional(upper, FIRST, branch)
    if spec.lower_noop:
        lower = identity_op(out_cutoff)
    else:
        lower = make_conditional_op(spec.n, spec.n_prime, spec.theta_l, out_cutoff)
    return source, apply_conditional(lower, SECOND, branch)


def run_setup1(r, spec, cutoff=None):
    """Two independent splitters, one per TMSVS mode (θ_A is not used)."""
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    source, branch = _setup1_branch(squeeze, spec, cutoff)
    coefficients = setup1_coefficients(squeeze, spec, cutoff)
    return _finish(branch, squeeze.r, source.spill, coefficients)


def _setup2_evolved(squeeze, spec, cutoff, ancilla_cap):
    """TMSVS ⊗ |m⟩_UA|n⟩_LA after BS_A, BS_U and BS_L."""
    source = tmsvs(squeeze, cutoff)
    out_cutoff = cutoff.extended(spec.m + spec.n)
    state = FourModeState.from_product(source, spec.m, spec.n, ancilla_cap, out_cutoff)
    # (LA, UA) ordering turns a UA photon into (a_UA† + a_LA†)/√2 at π/4
    state = apply_full_bs(state, (LA, UA), spec.theta_a)
    state = apply_full_bs(state, (U, UA), spec.theta_u)
    state = apply_full_bs(state, (L, LA), spec.theta_l)
    return source, state


def project_ancillas(state, m_prime, n_prime):
    """⟨m'|_UA ⟨n'|_LA applied to a FourModeState, leaving an unnormalized two-mode branch."""
    if m_prime > state.ancilla_cap or n_prime > state.ancilla_cap:
        coeffs = np.zeros((state.cutoff.dim, state.cutoff.dim))
    else:
        coeffs = state.coeffs[:, :, m_prime, n_prime]
    return TwoModeState(state.cutoff, coeffs, normalized=False, spill=state.spill)


def run_setup2(r, spec, cutoff=None):
    """Premixed ancillas: BS_A on (UA, LA), then BS_U on (U, UA) and BS_L on (L, LA)."""
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    ancilla_cap = max(spec.m + spec.n, spec.m_prime, spec.n_prime)
    source, state = _setup2_evolved(squeeze, spec, cutoff, ancilla_cap)
    branch = project_ancillas(state, spec.m_prime, spec.n_prime)
    return _finish(branch, squeeze.r, source.spill)


def setup2_addition_analytic(r, angle, cutoff=None):
    """Closed form of setup-2 single-photon addition (|10⟩ in, |00⟩ detected, θ_U = θ_L = angle).

    |ψ⟩ ∝ Σ_k (λcos²θ)^k √(k+1) (|k+1,k⟩ + |k,k+1⟩)/√2 with success
    sech²r sin²θ / (1 − λ²cos⁴θ)².
    """
    if angle.theta == 0.0:
        raise DomainError("The analytic addition form needs theta > 0")
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    out_cutoff = cutoff.extended(1)

    ratio = squeeze.lam * angle.cos ** 2
    k = np.arange(cutoff.dim)
    amplitudes = (1.0 - ratio ** 2) * ratio ** k * np.sqrt(k + 1.0) / math.sqrt(2.0)
    coeffs = np.zeros((out_cutoff.dim, out_cutoff.dim))
    coeffs[k + 1, k] = amplitudes
    coeffs[k, k + 1] = amplitudes

    deficit = squeeze.lam ** (2 * cutoff.dim)
    state, _ = normalize(TwoModeState(out_cutoff, coeffs, spill=deficit))
    state = canonicalize_phase(state)
    check_truncation(state)
    success = squeeze.prefactor ** 2 * angle.sin ** 2 / (1.0 - ratio ** 2) ** 2
    e_n = log_negativity_pure(schmidt(state))
    report = entanglement_report(e_n, squeeze.r)
    return ProtocolOutcome(state, success, report.e_n, report.delta, deficit, squeeze.r)


def _pk_ratio(r, angle):
    """x = λ²cos⁴θ, the geometric ratio of the p_k distribution."""
    return (math.tanh(_as_squeeze(r).r) * angle.cos ** 2) ** 2


def pk_distribution(r, angle, k_limit):
    """p_k = (1 − x)² x^k (k + 1) for k = 0..k_limit, with x = λ²cos⁴θ."""
    if k_limit < 0:
        raise DomainError(f"k_limit must be >= 0, got {k_limit}")
    x = _pk_ratio(r, angle)
    k = np.arange(int(k_limit) + 1)
    return (1.0 - x) ** 2 * x ** k * (k + 1.0)


def _log_pk(x, k):
    return 2.0 * math.log1p(-x) + k * math.log(x) + math.log(k + 1.0)


def pk_mode(r, angle):
    """Most probable k of the p_k distribution; ties go to the smaller k."""
    x = _pk_ratio(r, angle)
    if 2.0 * x <= 1.0 + TIE_TOLERANCE:
        return 0
    peak = 1.0 / (1.0 - x) - 2.0
    lo, hi = max(math.floor(peak), 0), max(math.ceil(peak), 0)
    return lo if _log_pk(x, lo) >= _log_pk(x, hi) - TIE_TOLERANCE else hi


def fock_input(k, cutoff=None):
    """Amplitude vector of the single-mode Fock state |k⟩."""
    if k < 0:
        raise DomainError(f"Fock index must be >= 0, got {k}")
    dim = cutoff.dim if cutoff is not None else k + 1
    if k >= dim:
        raise DomainError(f"|{k}⟩ does not fit in k_max={dim - 1}")
    amplitudes = np.zeros(dim)
    amplitudes[k] = 1.0
    return amplitudes


def run_single_mode(amplitudes, m, m_prime, angle, cutoff=None):
    """Herald B̂_{m,m'}(θ) on a single-mode input Σ c_k|k⟩.

    The output is stored as the product |ψ_out⟩|0⟩, so E_N is 0 and the
    entanglement baseline is that of r = 0.
    """
    amplitudes = np.asarray(amplitudes, dtype=float).ravel()
    if amplitudes.size == 0:
        raise DomainError("Input amplitudes are empty")
    total = float(np.sum(amplitudes ** 2))
    if total <= NUMERICS_CONFIG["zero_threshold"]:
        raise DomainError("Input state has zero norm")
    cutoff = cutoff or Cutoff(max(amplitudes.size - 1, 1) + m)
    if amplitudes.size > cutoff.dim:
        raise DomainError(f"Input needs k_max >= {amplitudes.size - 1}, got {cutoff.k_max}")

    coeffs = np.zeros((cutoff.dim, cutoff.dim))
    coeffs[: amplitudes.size, 0] = amplitudes / math.sqrt(total)
    source = TwoModeState(cutoff, coeffs, normalized=True)
    branch = apply_conditional(make_conditional_op(m, m_prime, angle, cutoff), FIRST, source)
    return _finish(branch, 0.0, branch.spill, check_tail=False)


def premixed_ancilla(m, n, theta_a=None):
    """Ancilla pair (UA, LA) after BS_A acting on |m⟩_UA|n⟩_LA, with its E_N in bits."""
    theta_a = theta_a or _default_theta_a()
    cap = max(m + n, 1)
    vacuum = TwoModeState.basis(0, 0, Cutoff(1))
    state = FourModeState.from_product(vacuum, m, n, cap)
    state = apply_full_bs(state, (LA, UA), theta_a)
    pair = TwoModeState(Cutoff(cap), state.coeffs[0, 0], spill=state.spill)
    pair, _ = normalize(pair)
    pair = canonicalize_phase(pair)
    return pair, log_negativity_pure(schmidt(pair))


def herald_distribution(r, spec, cutoff=None, setup=SETUP1, max_detected=None):
    """Success probability of every detection outcome (m', n') for fixed inputs and angles.

    The herald's own (m', n') are ignored. `max_detected` defaults to every
    photon number the circuit can deliver to a detector.
    """
    squeeze = _as_squeeze(r)
    cutoff = cutoff or Cutoff.for_squeezing(squeeze.r)
    reachable = cutoff.k_max + spec.m + spec.n
    max_detected = reachable if max_detected is None else int(max_detected)

    rows = []
    if setup == SETUP1:
        n_range = [0] if spec.lower_noop else range(max_detected + 1)
        for m_prime in range(max_detected + 1):
            for n_prime in n_range:
                trial = replace(spec, m_prime=m_prime, n_prime=n_prime)
                _, branch = _setup1_branch(squeeze, trial, cutoff)
                rows.append((m_prime, n_prime, float(np.sum(branch.coeffs ** 2))))
    elif setup == SETUP2:
        cap = max(max_detected, spec.m + spec.n)
        _, state = _setup2_evolved(squeeze, spec, cutoff, cap)
        probs = np.sum(state.coeffs ** 2, axis=(0, 1))
        for m_prime in range(max_detected + 1):
            for n_prime in range(max_detected + 1):
                rows.append((m_prime, n_prime, float(probs[m_prime, n_prime])))
    else:
        raise DomainError(f"Unknown setup '{setup}'")

    table = pd.DataFrame(rows, columns=["m_prime", "n_prime", "success_prob"])
    logger.debug(f"Herald distribution over {len(table)} outcomes sums to {table['success_prob'].sum():.12f}")
    return table
