"""
Command-line front end for the heralded entanglement toolkit.

    python main.py tmsvs --r 0.5
    python main.py setup2 --preset setup2_addition --r 0.3 --T 0.7
    python main.py sweep --protocol setup1 --preset setup1_catalysis --out surface.csv
    python main.py verify --quick
"""

import logging
import sys

import click
import numpy as np
import pandas as pd

from components.protocols import (
    SETUP1,
    SETUP2,
    HeraldSpec,
    fock_input,
    pk_distribution,
    pk_mode,
    run_setup1,
    run_setup2,
    run_single_mode,
    tmsvs,
)
from components.sweep_opt import PROTOCOLS, SweepGrid, optimize, outcome_row, sweep
from components.verification import CHECKS, run_verification
from config.settings import HERALD_PRESETS, LOG_CONFIG, OPTIMIZE_CONFIG, OUTPUT_CONFIG, SWEEP_CONFIG
from utils.beamsplitter import BSAngle
from utils.entanglement import baseline_tmsvs, log_negativity_pure
from utils.env_settings import get_log_level
from utils.errors import (
    ConvergenceFailure,
    DomainError,
    NoFeasiblePoint,
    TruncationUnsafe,
    ZeroState,
)
from utils.fock import Cutoff, schmidt
from utils.report_helpers import (
    format_optimum_text,
    format_outcome_text,
    format_pk_text,
    format_verification_text,
)
from utils.table_io import write_table

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC, EXIT_UNDEFINED = 0, 1, 2, 3, 4


def output_options(command):
    command = click.option("--out", default="-", show_default=True, help="Output path, '-' for stdout.")(command)
    command = click.option("--format", "fmt", type=click.Choice(OUTPUT_CONFIG["formats"]), default="csv",
                           show_default=True)(command)
    return command


def cutoff_options(command):
    command = click.option("--cutoff", type=click.IntRange(min=1), default=None,
                           help="Per-mode Fock cutoff k_max (overrides the adaptive policy).")(command)
    command = click.option("--allow-truncation", is_flag=True,
                           help="Downgrade the truncation check to a warning.")(command)
    return command


def angle_options(command):
    command = click.option("--T", "transmittance", type=click.FloatRange(0.0, 1.0), default=None,
                           help="System splitter transmittance T = cos²θ.")(command)
    command = click.option("--theta", type=float, default=None, help="System splitter angle θ in radians.")(command)
    return command


def herald_options(command):
    command = click.option("--preset", type=click.Choice(sorted(HERALD_PRESETS)), default=None,
                           help="Named herald; replaces --m/--n/--m-prime/--n-prime.")(command)
    for flag in ("--m", "--n", "--m-prime", "--n-prime"):
        command = click.option(flag, type=click.IntRange(min=0), default=0, show_default=True)(command)
    command = click.option("--lower-bs", is_flag=True,
                           help="Setup 1: put a splitter on the lower mode even with n = n' = 0.")(command)
    command = click.option("--theta-a", type=float, default=None,
                           help="Setup 2: ancilla premix angle (default π/4).")(command)
    return command


def resolve_angle(transmittance, theta):
    if transmittance is not None and theta is not None:
        raise click.UsageError("--T and --theta are mutually exclusive")
    if transmittance is None and theta is None:
        raise click.UsageError("One of --T or --theta is required")
    return BSAngle.from_transmittance(transmittance) if transmittance is not None else BSAngle(theta)


def resolve_cutoff(cutoff, allow_truncation, r):
    if cutoff is None:
        return Cutoff.for_squeezing(r, allow_truncation=allow_truncation)
    return Cutoff(cutoff, allow_truncation=allow_truncation)


def build_spec(setup, preset, m, n, m_prime, n_prime, lower_bs, theta_a):
    theta_a = BSAngle(theta_a) if theta_a is not None else None
    if preset:
        return HeraldSpec.from_preset(preset, theta_a=theta_a)
    extra = {"theta_a": theta_a} if theta_a is not None else {}
    lower_noop = setup == SETUP1 and not lower_bs and n == 0 and n_prime == 0
    return HeraldSpec(m=m, n=n, m_prime=m_prime, n_prime=n_prime, lower_noop=lower_noop, **extra)


def spec_meta(setup, spec):
    return {
        "setup": setup,
        "m": spec.m,
        "n": spec.n,
        "m_prime": spec.m_prime,
        "n_prime": spec.n_prime,
        "theta_U": spec.theta_u.theta,
        "theta_L": spec.theta_l.theta,
        "theta_A": spec.theta_a.theta,
        "lower_noop": spec.lower_noop,
    }


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Heralded photon addition, subtraction and catalysis on a two-mode squeezed vacuum."""


@cli.command("tmsvs")
@click.option("--r", "r", type=click.FloatRange(min=0.0), required=True, help="Squeezing factor.")
@cutoff_options
@output_options
def tmsvs_command(r, cutoff, allow_truncation, out, fmt):
    """Print E_N and the diagonal coefficients of the TMSVS."""
    state = tmsvs(r, resolve_cutoff(cutoff, allow_truncation, r))
    e_n = log_negativity_pure(schmidt(state))
    table = pd.DataFrame({"k": np.arange(state.cutoff.dim), "c_kk": np.diag(state.coeffs)})
    meta = {"r": r, "k_max": state.cutoff.k_max, "E_N": e_n, "baseline": baseline_tmsvs(r), "spill": state.spill}
    write_table(table, out, fmt, meta)
    click.echo(f"E_N = {e_n:.6f} bits (2r log2 e = {baseline_tmsvs(r):.6f})", err=True)
    return EXIT_OK


def _run_setup(setup, r, transmittance, theta, cutoff, allow_truncation, out, fmt, spec_args, fock_k=None):
    angle = resolve_angle(transmittance, theta)
    spec = build_spec(setup, *spec_args).with_angle(angle)

    if fock_k is not None:
        if r is not None or cutoff is not None:
            raise click.UsageError("--fock-input cannot be combined with --r or --cutoff")
        outcome = run_single_mode(fock_input(fock_k), spec.m, spec.m_prime, spec.theta_u)
        title = f"|{fock_k}⟩ through B_{{{spec.m},{spec.m_prime}}}"
        r = 0.0
    else:
        if r is None:
            raise click.UsageError("--r is required")
        runner = run_setup1 if setup == SETUP1 else run_setup2
        outcome = runner(r, spec, resolve_cutoff(cutoff, allow_truncation, r))
        title = f"{setup} {spec.kind} (m={spec.m}, n={spec.n}, m'={spec.m_prime}, n'={spec.n_prime})"

    table = pd.DataFrame([outcome_row(r, angle.transmittance, outcome)], columns=OUTPUT_CONFIG["columns"])
    write_table(table, out, fmt, spec_meta(setup, spec))
    click.echo(format_outcome_text(outcome, title), err=True)
    if outcome.annihilated:
        raise ZeroState(outcome.success_prob)
    return EXIT_OK


@cli.command("setup1")
@click.option("--r", "r", type=click.FloatRange(min=0.0), default=None, help="Squeezing factor.")
@angle_options
@herald_options
@click.option("--fock-input", "fock_k", type=click.IntRange(min=0), default=None,
              help="Send the single-mode Fock state |K⟩ through the upper splitter instead of the TMSVS.")
@cutoff_options
@output_options
def setup1_command(r, transmittance, theta, preset, m, n, m_prime, n_prime, lower_bs, theta_a, fock_k,
                   cutoff, allow_truncation, out, fmt):
    """Two independent splitters, one per TMSVS mode."""
    spec_args = (preset, m, n, m_prime, n_prime, lower_bs, theta_a)
    return _run_setup(SETUP1, r, transmittance, theta, cutoff, allow_truncation, out, fmt, spec_args, fock_k)


@cli.command("setup2")
@click.option("--r", "r", type=click.FloatRange(min=0.0), required=True, help="Squeezing factor.")
@angle_options
@herald_options
@cutoff_options
@output_options
def setup2_command(r, transmittance, theta, preset, m, n, m_prime, n_prime, lower_bs, theta_a,
                   cutoff, allow_truncation, out, fmt):
    """Ancillas premixed on BS_A before the system splitters."""
    spec_args = (preset, m, n, m_prime, n_prime, lower_bs, theta_a)
    return _run_setup(SETUP2, r, transmittance, theta, cutoff, allow_truncation, out, fmt, spec_args)


@cli.command("pk")
@click.option("--r", "r", type=click.FloatRange(min=0.0), required=True, help="Squeezing factor.")
@angle_options
@click.option("--k-limit", type=click.IntRange(min=0), default=50, show_default=True)
@output_options
def pk_command(r, transmittance, theta, k_limit, out, fmt):
    """p_k weights of the setup-2 addition state and the most probable k."""
    angle = resolve_angle(transmittance, theta)
    distribution = pk_distribution(r, angle, k_limit)
    mode = pk_mode(r, angle)
    table = pd.DataFrame({"k": np.arange(len(distribution)), "p_k": distribution})
    write_table(table, out, fmt, {"r": r, "T": angle.transmittance, "pk_mode": mode})
    click.echo(format_pk_text(distribution, mode), err=True)
    return EXIT_OK


def grid_options(command):
    defaults = (
        ("--r-min", "r_min", float), ("--r-max", "r_max", float), ("--r-steps", "r_steps", int),
        ("--t-min", "t_min", float), ("--t-max", "t_max", float), ("--t-steps", "t_steps", int),
    )
    for flag, key, kind in defaults:
        command = click.option(flag, key, type=kind, default=SWEEP_CONFIG[key], show_default=True)(command)
    command = click.option("--protocol", type=click.Choice(list(PROTOCOLS)), required=True)(command)
    command = click.option("--jobs", type=click.IntRange(min=1), default=None,
                           help="Worker processes (default: HERALD_THREADS or CPU count).")(command)
    return command


@cli.command("sweep")
@grid_options
@herald_options
@click.option("--cutoff", type=click.IntRange(min=1), default=None, help="Fixed k_max for every point.")
@output_options
def sweep_command(protocol, jobs, r_min, r_max, r_steps, t_min, t_max, t_steps, preset, m, n, m_prime, n_prime,
                  lower_bs, theta_a, cutoff, out, fmt):
    """Evaluate a protocol over an (r, T) grid and write the surface table."""
    setup = SETUP1 if protocol == SETUP1 else SETUP2
    spec = build_spec(setup, preset, m, n, m_prime, n_prime, lower_bs, theta_a)
    grid = SweepGrid(r_min, r_max, r_steps, t_min, t_max, t_steps)
    table = sweep(protocol, spec, grid, n_jobs=jobs, cutoff_k=cutoff)
    write_table(table, out, fmt)
    return EXIT_OK


@cli.command("optimize")
@grid_options
@herald_options
@click.option("--p-min", type=click.FloatRange(0.0, 1.0, max_open=True), default=0.0, show_default=True)
@click.option("--coarse-steps", type=click.IntRange(min=2), default=OPTIMIZE_CONFIG["coarse_steps"],
              show_default=True)
@click.option("--rounds", type=click.IntRange(min=0), default=OPTIMIZE_CONFIG["rounds"], show_default=True)
@click.option("--cutoff", type=click.IntRange(min=1), default=None, help="Fixed k_max for every point.")
@output_options
def optimize_command(protocol, jobs, r_min, r_max, r_steps, t_min, t_max, t_steps, preset, m, n, m_prime, n_prime,
                     lower_bs, theta_a, p_min, coarse_steps, rounds, cutoff, out, fmt):
    """Maximize ΔE_N subject to a minimum success probability."""
    setup = SETUP1 if protocol == SETUP1 else SETUP2
    spec = build_spec(setup, preset, m, n, m_prime, n_prime, lower_bs, theta_a)
    bounds = SweepGrid(r_min, r_max, r_steps, t_min, t_max, t_steps)
    report = optimize(protocol, spec, bounds, p_min, coarse_steps, rounds, n_jobs=jobs, cutoff_k=cutoff)
    write_table(report.neighborhood, out, fmt, report.as_meta())
    click.echo(format_optimum_text(report, protocol), err=True)
    return EXIT_OK


@cli.command("verify")
@click.option("--quick", is_flag=True, help="Reduced grids.")
@click.option("--check", "checks", type=click.Choice(list(CHECKS)), multiple=True, help="Run only these checks.")
def verify_command(quick, checks):
    """Run the invariant and acceptance suite; exit 1 on any failure."""
    report = run_verification(quick=quick, checks=checks or None)
    click.echo(format_verification_text(report.results))
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv=None):
    """Run the CLI and return its exit code."""
    logging.basicConfig(level=get_log_level(), format=LOG_CONFIG["format"], stream=sys.stderr)
    try:
        result = cli.main(args=argv, prog_name="herald", standalone_mode=False)
        return result if isinstance(result, int) else EXIT_OK
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except DomainError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_USAGE
    except (TruncationUnsafe, ConvergenceFailure) as exc:
        logger.error(f"❌ {exc}")
        return EXIT_NUMERIC
    except (ZeroState, NoFeasiblePoint) as exc:
        logger.error(f"❌ {exc}")
        return EXIT_UNDEFINED


if __name__ == "__main__":
    sys.exit(main())
