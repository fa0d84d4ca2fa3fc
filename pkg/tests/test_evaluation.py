"""Tests for the Monte Carlo risk harness."""

import math

import numpy as np
import pytest

from gl_conditional_density.const import ESTIMATOR_KERNEL, ESTIMATOR_PROJECTION
from gl_conditional_density.evaluation import (
    RiskConfig,
    RiskReport,
    TrueDensityCurve,
    async_run_cells,
    estimate_once,
    mse,
    oracle_ratio,
    run_cell,
)
from gl_conditional_density.exceptions import ConfigurationError, EvaluationError, ReplicationError
from gl_conditional_density.sampling import ExampleId, true_conditional_density

FAST = {"quadrature_points": 256, "per_axis": 4}


def kernel_cell(**changes):
    """A small kernel cell that runs in well under a second per replication."""
    values = {"example": "ex1", "estimator": ESTIMATOR_KERNEL, "x": 0.5, "n": 60, "replications": 2, **FAST}
    values.update(changes)
    return RiskConfig(**values)


class ShiftedStep:
    """A step function living partly outside the true window."""

    def evaluate(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.where((y >= 20.0) & (y < 21.0), 1.0, 0.0)

    def support_intervals(self):
        return [(20.0, 21.0)]

    def breakpoints(self):
        return [20.0, 21.0]

    def resolution(self):
        return math.inf


class ShiftedTruth:
    """The true section raised by 0.1 on [4, 6]."""

    def __init__(self, example, x):
        self.truth = TrueDensityCurve(example, x)

    def evaluate(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.truth.evaluate(y) + np.where((y >= 4.0) & (y <= 6.0), 0.1, 0.0)

    def breakpoints(self):
        return [4.0, 6.0]


class TestRiskConfig:
    """Test the cell configuration."""

    def test_seeds(self):
        """Test seeds base_seed + 1 .. base_seed + N."""
        assert kernel_cell(base_seed=10, replications=3).seeds == [11, 12, 13]

    def test_example_parsed(self):
        """Test that string examples are normalised."""
        assert kernel_cell(example="EX2").example is ExampleId.EX2

    @pytest.mark.parametrize(
        "changes",
        [
            {"example": "ex9"},
            {"estimator": "spline"},
            {"n": 7},
            {"eta": -1.0},
            {"replications": 0},
            {"base_seed": -1},
            {"quadrature_points": 63},
            {"quadrature_points": 65},
            {"quadrature_points": 32},
            {"example": "ex2", "heavy_tailed": True},
            {"per_axis": 0},
        ],
    )
    def test_invalid(self, changes):
        """Test that invalid cells are rejected."""
        with pytest.raises(ConfigurationError):
            kernel_cell(**changes)

    def test_as_dict(self):
        """Test the flat representation."""
        values = kernel_cell().as_dict()
        assert values["example"] == "ex1"
        assert values["marginal_grid_size"] == 10
        assert "marginal" not in values

    def test_with_overrides(self):
        """Test copying with changes."""
        cfg = kernel_cell().with_overrides(n=100)
        assert cfg.n == 100
        assert cfg.example is ExampleId.EX1


class TestRiskReport:
    """Test the aggregation."""

    def test_mean_and_stderr(self):
        """Test the sample mean and its standard error."""
        report = RiskReport.from_values(kernel_cell(), [1.0, 3.0], [1, 2])
        assert report.mse_mean == 2.0
        assert report.mse_stderr == pytest.approx(1.0)
        assert report.stderr_defined
        assert report.replications == 2

    def test_single_replication(self):
        """Test that N = 1 flags the standard error as undefined."""
        report = RiskReport.from_values(kernel_cell(replications=1), [0.5], [1])
        assert report.mse_stderr == 0.0
        assert not report.stderr_defined


class TestMSE:
    """Test the integrated squared error."""

    def test_truth_is_zero(self):
        """Test that the true section has zero risk."""
        curve = TrueDensityCurve("ex2", 0.5)
        assert mse(curve, "ex2", 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_zero_curve(self):
        """Test the risk of 0 against Example 1 at 0.5."""
        expected = 1.0 / (2.0 * math.sqrt(math.pi) * math.sqrt(0.8))
        assert mse(0.0, "ex1", 0.5) == pytest.approx(expected, abs=1e-6)
        assert mse(0.0, "ex1", 0.5) == pytest.approx(0.31539, abs=1e-4)

    def test_callable_curve(self):
        """Test a plain function of y."""
        assert mse(lambda y: np.zeros_like(y), "ex3", 0.0) == pytest.approx(mse(0.0, "ex3", 0.0))

    def test_curve_outside_window(self):
        """Test that mass outside the true window is counted."""
        expected = 1.0 + mse(0.0, "ex1", 0.5)
        assert mse(ShiftedStep(), "ex1", 0.5) == pytest.approx(expected, rel=1e-6)

    def test_shifted_truth(self):
        """Test a constant shift of 0.1 on a window of width 2."""
        assert mse(ShiftedTruth("ex1", 0.5), "ex1", 0.5) == pytest.approx(0.01 * 2.0, abs=1e-8)

    def test_quadrature_stable(self):
        """Test that doubling the points changes little."""
        curve = TrueDensityCurve("ex1", 0.4)
        coarse = mse(curve, "ex1", 0.5, quadrature_points=512)
        fine = mse(curve, "ex1", 0.5, quadrature_points=1024)
        assert fine == pytest.approx(coarse, rel=1e-5)

    def test_mixture_jump(self):
        """Test the risk of the mixture's normal branch alone."""
        x = 0.5

        def normal_part(y):
            values = true_conditional_density("ex2", x, y)
            return values - 0.25 * 2.0 * np.exp(-2.0 * np.maximum(y - 2.0, 0.0)) * (y >= 2.0)

        assert mse(normal_part, "ex2", x) == pytest.approx(0.25**2 * 2.0 / 2.0, rel=1e-4)

    def test_non_finite(self):
        """Test that non-finite curve values are rejected."""
        with pytest.raises(EvaluationError):
            mse(lambda y: np.full_like(y, np.nan), "ex1", 0.5)


class TestEstimateOnce:
    """Test a single pipeline pass."""

    def test_kernel(self):
        """Test the kernel pipeline."""
        result = estimate_once(kernel_cell(), 3)
        assert result.trace.chosen in result.candidates
        assert len(result.candidates) == 16
        assert result.risk() >= 0.0

    def test_known_marginal(self):
        """Test that the known design density is used."""
        result = estimate_once(kernel_cell(fx_known=True), 3)
        assert result.marginal.known
        assert result.marginal.delta_hat == 1.0

    def test_projection(self):
        """Test the projection pipeline."""
        cfg = kernel_cell(estimator=ESTIMATOR_PROJECTION, n=100)
        result = estimate_once(cfg, 5)
        assert result.basis is not None
        assert result.curve.model == result.trace.chosen
        assert math.isfinite(result.risk())

    def test_candidate_curve(self):
        """Test that the chosen candidate rebuilds the selected curve."""
        result = estimate_once(kernel_cell(), 4)
        rebuilt = result.candidate_curve(result.trace.chosen)
        ys = np.linspace(3.0, 8.0, 11)
        assert rebuilt.evaluate(ys) == pytest.approx(result.curve.evaluate(ys))


class TestRunCell:
    """Test the replication loop."""

    def test_deterministic(self):
        """Test that equal cells give identical reports."""
        first = run_cell(kernel_cell())
        second = run_cell(kernel_cell())
        assert first.per_replication == second.per_replication
        assert first.seeds == (1, 2)

    def test_stitching(self):
        """Test that N = 4 equals two consecutive N = 2 runs."""
        whole = run_cell(kernel_cell(replications=4))
        head = run_cell(kernel_cell(replications=2))
        tail = run_cell(kernel_cell(replications=2, base_seed=2))
        assert whole.per_replication == head.per_replication + tail.per_replication

    def test_threaded(self):
        """Test that a thread pool keeps replication order and values."""
        cfg = kernel_cell(replications=3)
        assert run_cell(cfg, max_workers=3).per_replication == run_cell(cfg).per_replication

    def test_failure_aborts_cell(self):
        """Test that a replication outside the model's domain aborts the cell."""
        with pytest.raises(ReplicationError) as excinfo:
            run_cell(kernel_cell(x=1.5))
        assert excinfo.value.replication == 1
        assert excinfo.value.seed == 1

    def test_oracle_single_candidate(self):
        """Test that a one-candidate grid has oracle ratio one."""
        assert oracle_ratio(kernel_cell(per_axis=1)) == pytest.approx(1.0)


class TestAsyncRunCells:
    """Test concurrent cells."""

    @pytest.mark.asyncio
    async def test_order(self):
        """Test that reports follow the input order."""
        configs = [kernel_cell(n=40), kernel_cell(n=60), kernel_cell(example="ex3", x=0.0)]
        reports = await async_run_cells(configs, max_workers=2)
        assert [report.config for report in reports] == configs
        assert reports[1].per_replication == run_cell(configs[1]).per_replication


@pytest.mark.slow
class TestAcceptance:
    """Monte Carlo checks against reference risk levels."""

    @staticmethod
    def cell(**changes):
        values = {"example": "ex1", "estimator": ESTIMATOR_KERNEL, "x": 0.5, "eta": 1.0, "replications": 100}
        values.update(changes)
        return RiskConfig(**values)

    def test_kernel_levels_decrease(self):
        """Test Example 1 kernel risks against 0.028, 0.009 and 0.006."""
        means = []
        for n, level in [(250, 0.028), (500, 0.009), (1000, 0.006)]:
            report = run_cell(self.cell(n=n), max_workers=4)
            assert 0.5 * level <= report.mse_mean <= 3.0 * level
            means.append(report.mse_mean)
        assert means[0] > means[2]

    def test_small_eta_explodes(self):
        """Test that eta = -0.8 inflates the risk by an order of magnitude."""
        low = run_cell(self.cell(n=500, eta=-0.8), max_workers=4).mse_mean
        high = run_cell(self.cell(n=500, eta=1.0), max_workers=4).mse_mean
        assert low >= 10.0 * high

    @pytest.mark.xfail(strict=False, reason="sigma at eta = -0.2 stays above the noise level of the A term")
    def test_mild_negative_eta_explodes(self):
        """Test that eta = -0.2 inflates the risk by an order of magnitude."""
        low = run_cell(self.cell(n=500, eta=-0.2), max_workers=4).mse_mean
        high = run_cell(self.cell(n=500, eta=1.0), max_workers=4).mse_mean
        assert low >= 10.0 * high

    @pytest.mark.xfail(strict=False, reason="the y bandwidth cap leaves a jump bias near 0.058 h2")
    def test_mixture_kernel(self):
        """Test Example 2 at n = 1000."""
        report = run_cell(self.cell(example="ex2", n=1000), max_workers=4)
        assert report.mse_mean <= 0.012

    def test_projection_level(self):
        """Test the Example 1 projection risk at n = 1000."""
        report = run_cell(self.cell(estimator=ESTIMATOR_PROJECTION, n=1000, eta=0.5), max_workers=4)
        assert 0.5 * 0.047 <= report.mse_mean <= 3.0 * 0.047

    def test_sparse_design_point(self):
        """Test that the design dip at 0.36 doubles the risk."""
        dense = run_cell(self.cell(example="ex3", x=0.0, n=1000), max_workers=4).mse_mean
        sparse = run_cell(self.cell(example="ex3", x=0.36, n=1000), max_workers=4).mse_mean
        assert sparse >= 2.0 * dense

    def test_known_versus_estimated_design(self):
        """Test that estimating f_X costs little."""
        known = run_cell(self.cell(n=1000, fx_known=True), max_workers=4).mse_mean
        unknown = run_cell(self.cell(n=1000), max_workers=4).mse_mean
        assert abs(unknown - known) <= 0.5 * unknown

    def test_oracle_ratio(self):
        """Test that the selected bandwidth is close to the best on the grid."""
        assert oracle_ratio(self.cell(n=500, replications=20)) <= 5.0
