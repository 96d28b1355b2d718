import io

import pytest

import main as cli
from components.protocols import setup2_addition_analytic
from config.settings import NUMERICS_CONFIG
from main import EXIT_NUMERIC, EXIT_OK, EXIT_UNDEFINED, EXIT_USAGE, main
from utils.beamsplitter import BSAngle
from utils.table_io import read_table


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestStateCommands:

    def test_tmsvs_reports_baseline(self, capsys):
        code, out, err = run(capsys, "tmsvs", "--r", "0.5")
        assert code == EXIT_OK
        table, meta = read_table(io.StringIO(out))
        assert meta["E_N"] == pytest.approx(1.442695, abs=1e-6)
        assert list(table.columns) == ["k", "c_kk"]
        assert "E_N = 1.442695" in err

    def test_setup2_addition_matches_closed_form(self, capsys):
        code, out, _ = run(capsys, "setup2", "--preset", "setup2_addition", "--r", "0.3", "--T", "0.7")
        assert code == EXIT_OK
        table, meta = read_table(io.StringIO(out))
        closed = setup2_addition_analytic(0.3, BSAngle.from_transmittance(0.7))
        assert table.loc[0, "success_prob"] == pytest.approx(closed.success_prob, rel=1e-10)
        assert meta["setup"] == "setup2"

    def test_json_lines_output(self, capsys):
        code, out, _ = run(capsys, "setup1", "--m", "1", "--r", "0.3", "--theta", "0.4", "--format", "json-lines")
        assert code == EXIT_OK
        assert out.startswith('{"schema_version": 1')

    def test_pk(self, capsys):
        code, out, _ = run(capsys, "pk", "--r", "0.2", "--theta", "0", "--k-limit", "10")
        assert code == EXIT_OK
        table, meta = read_table(io.StringIO(out))
        assert len(table) == 11
        assert meta["pk_mode"] == 0

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "point.csv"
        code, out, _ = run(capsys, "setup1", "--preset", "setup1_catalysis", "--r", "0.3", "--T", "0.05",
                           "--out", str(path))
        assert code == EXIT_OK
        assert out == ""
        table, _ = read_table(path)
        assert table.loc[0, "delta_E_N"] > 0.3


class TestExitCodes:

    def test_angle_flags_are_exclusive(self, capsys):
        code, _, _ = run(capsys, "setup1", "--m", "1", "--r", "0.3", "--T", "0.5", "--theta", "0.3")
        assert code == EXIT_USAGE

    def test_missing_angle(self, capsys):
        code, _, _ = run(capsys, "setup2", "--preset", "setup2_addition", "--r", "0.3")
        assert code == EXIT_USAGE

    def test_negative_squeezing(self, capsys):
        code, _, _ = run(capsys, "tmsvs", "--r", "-1")
        assert code == EXIT_USAGE

    def test_lower_photons_without_lower_splitter_are_allowed(self, capsys):
        code, _, _ = run(capsys, "setup1", "--n", "1", "--r", "0.3", "--T", "0.5")
        assert code == EXIT_OK

    def test_annihilated_fock_input(self, capsys):
        code, out, err = run(capsys, "setup1", "--fock-input", "1", "--m", "1", "--m-prime", "1", "--T", "0.5")
        assert code == EXIT_UNDEFINED
        table, _ = read_table(io.StringIO(out))
        assert table.loc[0, "success_prob"] <= NUMERICS_CONFIG["zero_threshold"]

    def test_fock_input_rejects_squeezing_flags(self, capsys):
        for extra in (("--r", "0.3"), ("--cutoff", "20")):
            code, _, err = run(capsys, "setup1", "--fock-input", "1", "--m", "1", "--T", "0.5", *extra)
            assert code == EXIT_USAGE
            assert "--fock-input" in err

    def test_squeezing_past_float_range(self, capsys):
        assert run(capsys, "pk", "--r", "20", "--theta", "0")[0] == EXIT_USAGE
        assert run(capsys, "tmsvs", "--r", "20")[0] == EXIT_USAGE

    def test_interrupt_is_a_usage_exit(self, capsys, monkeypatch):
        def interrupted(**kwargs):
            raise KeyboardInterrupt

        monkeypatch.setattr(cli, "run_verification", interrupted)
        code, _, err = run(capsys, "verify", "--quick")
        assert code == EXIT_USAGE
        assert "Aborted!" in err

    def test_truncation_unsafe(self, capsys):
        argv = ("setup1", "--preset", "setup1_addition", "--r", "1.0", "--T", "0.5", "--cutoff", "5")
        assert run(capsys, *argv)[0] == EXIT_NUMERIC
        assert run(capsys, *argv, "--allow-truncation")[0] == EXIT_OK

    def test_no_feasible_point(self, capsys):
        code, _, _ = run(
            capsys, "optimize", "--protocol", "setup1", "--preset", "setup1_catalysis",
            "--r-min", "0.5", "--r-max", "1.0", "--p-min", "0.999", "--coarse-steps", "3", "--rounds", "0",
            "--jobs", "1",
        )
        assert code == EXIT_UNDEFINED


class TestGridCommands:

    def test_sweep(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--protocol", "setup2_analytic", "--preset", "setup2_addition",
            "--r-min", "0.1", "--r-max", "0.5", "--r-steps", "2", "--t-min", "0.2", "--t-max", "0.8",
            "--t-steps", "2", "--jobs", "1",
        )
        assert code == EXIT_OK
        table, _ = read_table(io.StringIO(out))
        assert table.shape == (4, 6)
        assert list(table["r"]) == [0.1, 0.1, 0.5, 0.5]

    def test_optimize_writes_neighborhood(self, capsys):
        code, out, err = run(
            capsys, "optimize", "--protocol", "setup2_analytic", "--preset", "setup2_addition",
            "--r-min", "0.05", "--r-max", "1.0", "--t-min", "0.02", "--t-max", "0.9",
            "--coarse-steps", "4", "--rounds", "1", "--jobs", "1",
        )
        assert code == EXIT_OK
        table, meta = read_table(io.StringIO(out))
        assert 1 <= len(table) <= 9
        assert (abs(table["delta_E_N"] - meta["delta_E_N"]) < 1e-9).any()

    def test_verify_subset(self, capsys):
        code, out, _ = run(capsys, "verify", "--check", "bs_unitarity", "--check", "flattening")
        assert code == EXIT_OK
        assert "bs_unitarity" in out and "flattening" in out
