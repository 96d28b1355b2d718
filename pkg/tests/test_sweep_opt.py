import numpy as np
import pandas as pd
import pytest

from components.protocols import SETUP1, SETUP2, HeraldSpec
from components.sweep_opt import (
    COLUMNS,
    SETUP2_ANALYTIC,
    SweepGrid,
    evaluate_point,
    optimize,
    outcome_row,
    sweep,
)
from utils.errors import DomainError, NoFeasiblePoint


def small_grid(**overrides):
    values = dict(r_min=0.1, r_max=0.5, r_steps=3, t_min=0.2, t_max=0.8, t_steps=4)
    values.update(overrides)
    return SweepGrid(**values)


class TestSweepGrid:

    def test_points_are_row_major(self):
        grid = small_grid()
        points = grid.points
        assert len(points) == 12
        assert points[0] == (pytest.approx(0.1), pytest.approx(0.2))
        assert points[1][0] == pytest.approx(0.1) and points[1][1] == pytest.approx(0.4)
        assert points[4][0] == pytest.approx(0.3)

    @pytest.mark.parametrize("overrides", [
        {"r_min": -0.1},
        {"r_min": 1.0, "r_max": 0.5},
        {"t_min": 0.9, "t_max": 0.5},
        {"t_max": 1.2},
        {"r_steps": 1},
    ])
    def test_validation(self, overrides):
        with pytest.raises(DomainError):
            small_grid(**overrides)


class TestEvaluatePoint:

    def test_unknown_protocol(self):
        with pytest.raises(DomainError):
            evaluate_point("setup3", HeraldSpec(), 0.3, 0.5)

    def test_analytic_protocol_only_covers_addition(self):
        with pytest.raises(DomainError):
            evaluate_point(SETUP2_ANALYTIC, HeraldSpec.from_preset("setup2_catalysis_11"), 0.3, 0.5)

    def test_row_for_annihilated_branch(self):
        outcome = evaluate_point(SETUP1, HeraldSpec.from_preset("setup1_subtraction"), 0.0, 0.5)
        row = outcome_row(0.0, 0.5, outcome)
        assert row["success_prob"] == 0.0
        assert np.isnan(row["E_N"]) and np.isnan(row["delta_E_N"])


class TestSweep:

    def test_columns_and_order(self):
        grid = small_grid()
        table = sweep(SETUP1, HeraldSpec.from_preset("setup1_addition"), grid, n_jobs=1)
        assert list(table.columns) == COLUMNS
        assert len(table) == 12
        expected = pd.DataFrame(grid.points, columns=["r", "T"])
        assert np.allclose(table[["r", "T"]].to_numpy(), expected.to_numpy())

    def test_vacuum_herald_still_costs_norm(self):
        table = sweep(SETUP1, HeraldSpec(lower_noop=True), small_grid(), n_jobs=1)
        assert (table["success_prob"] < 1.0).all() and (table["success_prob"] > 0.0).all()
        assert table["E_N"].notna().all()

    def test_analytic_matches_numeric(self):
        grid = small_grid(r_steps=2, t_steps=2)
        spec = HeraldSpec.from_preset("setup2_addition")
        numeric = sweep(SETUP2, spec, grid, n_jobs=1)
        closed = sweep(SETUP2_ANALYTIC, spec, grid, n_jobs=1)
        assert np.allclose(numeric["success_prob"], closed["success_prob"], atol=1e-10)
        assert np.allclose(numeric["E_N"], closed["E_N"], atol=1e-10)

    def test_serial_and_parallel_agree(self):
        grid = small_grid(r_steps=2, t_steps=3)
        spec = HeraldSpec.from_preset("setup1_catalysis")
        serial = sweep(SETUP1, spec, grid, n_jobs=1)
        parallel = sweep(SETUP1, spec, grid, n_jobs=2)
        pd.testing.assert_frame_equal(serial, parallel)

    def test_fixed_cutoff_too_small_is_flagged(self):
        grid = small_grid(r_min=1.0, r_max=1.2, r_steps=2, t_steps=2)
        table = sweep(SETUP1, HeraldSpec.from_preset("setup1_addition"), grid, n_jobs=1, cutoff_k=6)
        assert (table["spill"] > 1e-6).all()


class TestOptimize:

    def test_refinement_never_loses_to_the_coarse_grid(self):
        spec = HeraldSpec.from_preset("setup1_catalysis")
        bounds = small_grid(r_min=0.1, r_max=0.6, t_min=0.02, t_max=0.5)
        coarse = sweep(SETUP1, spec, SweepGrid(0.1, 0.6, 4, 0.02, 0.5, 4), n_jobs=1)
        report = optimize(SETUP1, spec, bounds, coarse_steps=4, rounds=2, n_jobs=1)
        assert report.delta_e_n >= coarse["delta_E_N"].max() - 1e-12
        assert bounds.r_min <= report.best_r <= bounds.r_max
        assert bounds.t_min <= report.best_t <= bounds.t_max
        assert report.evaluations >= 16
        assert list(report.neighborhood.columns) == COLUMNS

    def test_success_constraint_is_respected(self):
        spec = HeraldSpec.from_preset("setup1_addition")
        report = optimize(SETUP1, spec, small_grid(), p_min=0.3, coarse_steps=3, rounds=1, n_jobs=1)
        assert report.success_prob >= 0.3
        meta = report.as_meta()
        assert meta["p_min"] == 0.3 and meta["best_T"] == report.best_t

    def test_no_feasible_point(self):
        spec = HeraldSpec.from_preset("setup1_catalysis")
        with pytest.raises(NoFeasiblePoint):
            optimize(SETUP1, spec, small_grid(r_min=0.5, r_max=1.0), p_min=0.999, coarse_steps=3, rounds=0, n_jobs=1)

    @pytest.mark.parametrize("p_min", [-0.1, 1.0])
    def test_p_min_range(self, p_min):
        with pytest.raises(DomainError):
            optimize(SETUP1, HeraldSpec(), small_grid(), p_min=p_min, n_jobs=1)
