import pytest
from joblib import cpu_count

from components.protocols import HeraldSpec, run_setup1
from components.verification import CHECKS, FAIL, PASS, CheckResult, VerificationReport, run_verification
from config.settings import VERIFY_CONFIG
from utils.beamsplitter import BSAngle
from utils.env_settings import get_log_level, get_thread_count
from utils.report_helpers import format_outcome_text, format_verification_text


class TestEnvSettings:

    def test_thread_count_defaults_to_cpus(self, monkeypatch):
        monkeypatch.delenv("HERALD_THREADS", raising=False)
        assert get_thread_count() == cpu_count()

    def test_thread_count_is_capped(self, monkeypatch):
        monkeypatch.setenv("HERALD_THREADS", "100000")
        assert get_thread_count() == cpu_count()
        monkeypatch.setenv("HERALD_THREADS", "1")
        assert get_thread_count() == 1

    @pytest.mark.parametrize("raw", ["many", "0"])
    def test_bad_thread_count_is_ignored(self, monkeypatch, caplog, raw):
        monkeypatch.setenv("HERALD_THREADS", raw)
        assert get_thread_count() == cpu_count()
        assert "Ignoring HERALD_THREADS" in caplog.text

    def test_log_level(self, monkeypatch):
        monkeypatch.setenv("HERALD_LOG_LEVEL", "debug")
        assert get_log_level() == "DEBUG"
        monkeypatch.setenv("HERALD_LOG_LEVEL", "chatty")
        assert get_log_level() == "INFO"


class TestReportHelpers:

    def test_outcome_text(self):
        outcome = run_setup1(0.3, HeraldSpec.from_preset("setup1_catalysis", BSAngle.from_transmittance(0.05)))
        text = format_outcome_text(outcome, "catalysis")
        assert "   • Success probability:" in text
        assert "ΔE_N vs TMSVS: +0.3" in text

    def test_annihilated_text(self):
        outcome = run_setup1(0.0, HeraldSpec.from_preset("setup1_subtraction", BSAngle.from_transmittance(0.5)))
        assert "E_N: undefined" in format_outcome_text(outcome, "subtraction")

    def test_verification_markers(self):
        text = format_verification_text([
            CheckResult("a", "pass", 1e-13, "ok"),
            CheckResult("b", "soft", 0.5, "measured"),
            CheckResult("c", "fail"),
        ])
        lines = text.split("\n")
        assert lines[0].startswith("✅ a: pass [1e-13]")
        assert lines[1].startswith("⚠️ b: soft")
        assert lines[2] == "❌ c: fail"


class TestVerification:

    def test_report_passes_unless_a_check_fails(self):
        report = VerificationReport([CheckResult("a", PASS), CheckResult("b", "soft")])
        assert report.passed
        report.results.append(CheckResult("c", FAIL))
        assert not report.passed
        assert report.counts == {"pass": 1, "soft": 1, "fail": 1}

    def test_unknown_check(self):
        with pytest.raises(ValueError):
            run_verification(checks=["nonexistent"])

    @pytest.mark.parametrize("name", sorted(CHECKS))
    def test_quick_checks_do_not_fail(self, name):
        report = run_verification(quick=True, checks=[name])
        assert report.results[0].status != FAIL, report.results[0].detail

    @pytest.mark.parametrize("name", [
        "vacuum_identities",
        "oracle_off_shell",
        "conditional_norm",
        "full_bs_norm",
        "schmidt_symmetry",
        "setup1_band",
    ])
    def test_structural_checks_pass(self, name):
        report = run_verification(quick=True, checks=[name])
        assert report.results[0].status == PASS, report.results[0].detail

    def test_three_fold_uses_usable_success_rates(self, caplog):
        caplog.set_level("INFO")
        result = run_verification(quick=True, checks=["three_fold"]).results[0]
        assert result.status != FAIL
        assert result.value >= VERIFY_CONFIG["soft_ratio_floor"]
        assert "unconstrained ratio" in result.detail
        assert "Unconstrained max ΔE_N ratio" in caplog.text
