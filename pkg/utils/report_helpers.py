# utils/report_helpers.py
"""Human-readable summaries printed by the CLI."""

import numpy as np


def _fmt(value, spec=".6f"):
    return "undefined" if value is None else format(value, spec)


def format_outcome_text(outcome, title):
    """Bullet summary of a ProtocolOutcome."""
    text = f"🔬 {title}:\n\n"
    if outcome.annihilated:
        text += f"   • Branch annihilated (norm² = {outcome.success_prob:.3e})\n"
        text += "   • E_N: undefined\n"
        text += "   • ΔE_N: undefined"
        return text

    text += f"   • Success probability: {outcome.success_prob:.6f}\n"
    text += f"   • E_N: {_fmt(outcome.e_n)} bits\n"
    text += f"   • ΔE_N vs TMSVS: {_fmt(outcome.delta_e_n, '+.6f')} bits\n"
    text += f"   • Truncation spill: {outcome.truncation_spill:.3e}\n"
    text += f"   • Basis cutoff: k_max = {outcome.state.cutoff.k_max}"
    return text


def format_pk_text(distribution, mode):
    """Bullet summary of a p_k distribution and its most probable k."""
    text = f"📊 p_k distribution ({len(distribution)} terms):\n\n"
    text += f"   • Most probable k: {mode}\n"
    text += f"   • Σ p_k: {float(np.sum(distribution)):.12f}"
    return text


def format_optimum_text(report, protocol):
    text = f"🎯 Optimum for {protocol} (success ≥ {report.p_min:g}):\n\n"
    text += f"   • r = {report.best_r:.6g}, T = {report.best_t:.6g}\n"
    text += f"   • ΔE_N: {report.delta_e_n:+.6f} bits (E_N = {report.e_n:.6f})\n"
    text += f"   • Success probability: {report.success_prob:.6f}\n"
    text += f"   • Evaluations: {report.evaluations}"
    return text


def format_verification_text(results):
    """One line per check with the ✅ / ⚠️ / ❌ marker of its status."""
    markers = {"pass": "✅", "soft": "⚠️", "fail": "❌"}
    lines = []
    for result in results:
        value = "" if result.value is None else f" [{result.value:.6g}]"
        lines.append(f"{markers[result.status]} {result.name}: {result.status}{value} {result.detail}".rstrip())
    return "\n".join(lines)
