"""Tests for the simulation examples."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from gl_conditional_density.exceptions import ArgumentError, DomainError
from gl_conditional_density.sampling import (
    ExampleId,
    conditional_window,
    generate,
    true_conditional_density,
    true_marginal_density,
)


class TestExampleId:
    """Test example parsing."""

    @pytest.mark.parametrize("value", ["ex1", "EX1", " Ex1 ", "1", 1, ExampleId.EX1])
    def test_parse(self, value):
        """Test the accepted spellings."""
        assert ExampleId.parse(value) is ExampleId.EX1

    def test_parse_unknown(self):
        """Test that unknown examples are rejected."""
        with pytest.raises(ArgumentError):
            ExampleId.parse("ex5")

    def test_families(self):
        """Test the design and response families."""
        assert ExampleId.EX2.uniform_design and ExampleId.EX2.mixture_response
        assert not ExampleId.EX3.uniform_design and not ExampleId.EX3.mixture_response


class TestGenerate:
    """Test sample generation."""

    def test_uniform_design(self):
        """Test that Example 1 designs lie in [0, 1]."""
        obs = generate(ExampleId.EX1, 500, 7)
        assert obs.n == 500
        assert obs.marginal_x.shape == (500,)
        assert np.all((obs.x >= 0.0) & (obs.x <= 1.0))
        assert np.all((obs.marginal_x >= 0.0) & (obs.marginal_x <= 1.0))

    def test_deterministic(self):
        """Test that equal arguments give identical bytes."""
        first = generate("ex3", 200, 11)
        second = generate("ex3", 200, 11)
        assert first.x.tobytes() == second.x.tobytes()
        assert first.y.tobytes() == second.y.tobytes()
        assert first.marginal_x.tobytes() == second.marginal_x.tobytes()

    def test_seeds_and_halves_differ(self):
        """Test that seeds and the two halves give different draws."""
        first = generate("ex1", 100, 1)
        second = generate("ex1", 100, 2)
        assert not np.array_equal(first.x, second.x)
        assert not np.array_equal(first.x, first.marginal_x)

    def test_read_only(self):
        """Test that observation arrays cannot be modified."""
        obs = generate("ex1", 10, 0)
        with pytest.raises(ValueError):
            obs.x[0] = 2.0

    def test_estimation_pairs(self):
        """Test the pair view of the estimation half."""
        obs = generate("ex2", 5, 3)
        assert obs.estimation_pairs[0] == (obs.x[0], obs.y[0])
        assert len(obs.estimation_pairs) == 5

    @pytest.mark.parametrize("n", [0, 1, 2.5, -3])
    def test_invalid_n(self, n):
        """Test that invalid sample sizes are rejected."""
        with pytest.raises(ArgumentError):
            generate("ex1", n, 0)

    def test_invalid_seed(self):
        """Test that negative seeds are rejected."""
        with pytest.raises(ArgumentError):
            generate("ex1", 10, -1)

    def test_heavy_tailed_only_example_1(self):
        """Test that the Cauchy variant is limited to Example 1."""
        generate("ex1", 10, 0, heavy_tailed=True)
        with pytest.raises(ArgumentError):
            generate("ex2", 10, 0, heavy_tailed=True)

    def test_mixture_tail_fraction(self):
        """Test P(Y > 2) for Example 2 against a quadrature oracle."""
        n = 100_000
        obs = generate("ex2", n, 1)
        normal_tail, _ = integrate.quad(lambda x: stats.norm.sf(2.0 / (2.0 + x)), 0.0, 1.0)
        expected = 0.25 + 0.75 * normal_tail
        stderr = math.sqrt(expected * (1.0 - expected) / n)
        assert abs(np.mean(obs.y > 2.0) - expected) < 3.0 * stderr

    def test_mixture_design_mean(self):
        """Test the mean of the Example 3 design."""
        n = 100_000
        obs = generate("ex3", n, 1)
        variance = 0.5 * (1.0 / 81.0) + 0.5 * (1.0 + 1.0 / 16.0) - 0.25
        assert abs(np.mean(obs.x) - 0.5) < 3.0 * math.sqrt(variance / n)

    def test_conditional_law_example_1(self):
        """Test Y given X in a small bin against the true conditional law."""
        obs = generate("ex1", 100_000, 5)
        in_bin = np.abs(obs.x - 0.5) < 0.01
        count = int(np.sum(in_bin))
        statistic = stats.kstest(obs.y[in_bin], stats.norm(5.5, math.sqrt(0.8)).cdf).statistic
        assert statistic < 3.0 / math.sqrt(count)


class TestTrueDensities:
    """Test the exact density oracles."""

    def test_example_1_peak(self):
        """Test the Example 1 density at its mean."""
        assert true_conditional_density("ex1", 0.5, 5.5) == pytest.approx(0.44603, abs=1e-5)

    def test_example_2_below_shift(self):
        """Test the mixture at y = 0, where the exponential branch vanishes."""
        assert true_conditional_density("ex2", 0.5, 0.0) == pytest.approx(0.75 / (2.5 * math.sqrt(2 * math.pi)))
        assert true_conditional_density("ex2", 0.5, 0.0) == pytest.approx(0.11968, abs=1e-5)

    def test_example_2_at_shift(self):
        """Test the mixture at the start of the exponential branch."""
        expected = 0.75 * stats.norm.pdf(2.0, 0.0, 2.5) + 0.25 * 2.0
        assert true_conditional_density("ex2", 0.5, 2.0) == pytest.approx(expected)

    def test_vectorised(self):
        """Test that arrays of y are accepted."""
        values = true_conditional_density("ex3", 0.0, np.array([0.0, 1.0, 2.0]))
        assert values.shape == (3,)
        assert values[1] == pytest.approx(1.0 / math.sqrt(2 * math.pi * 1.3))

    def test_example_1_domain(self):
        """Test that Example 1 is undefined once the variance turns negative."""
        with pytest.raises(DomainError):
            true_conditional_density("ex1", 1.3, 5.0)
        with pytest.raises(DomainError):
            true_conditional_density("ex1", -1.5, 5.0)

    def test_heavy_tailed_density(self):
        """Test the scaled Cauchy density at its centre."""
        scale = math.sqrt(0.8)
        assert true_conditional_density("ex1", 0.5, 5.5, heavy_tailed=True) == pytest.approx(1.0 / (math.pi * scale))

    @pytest.mark.parametrize(
        "example, x",
        [("ex1", 0.0), ("ex1", 0.5), ("ex2", 0.5), ("ex2", 1.0), ("ex3", 0.0), ("ex3", 0.36), ("ex4", 1.0)],
    )
    def test_normalised(self, example, x):
        """Test that every section integrates to one over its window."""
        low, high = conditional_window(example, x)
        total, _ = integrate.quad(
            lambda y: true_conditional_density(example, x, y), low, high, points=[2.0], limit=400, epsabs=1e-12
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_marginal_uniform(self):
        """Test the uniform design density."""
        assert true_marginal_density("ex1", 0.5) == 1.0
        assert true_marginal_density("ex2", 1.5) == 0.0

    def test_marginal_mixture(self):
        """Test the Example 3 design density at 0."""
        expected = 0.5 * 9.0 / math.sqrt(2 * math.pi) + 0.5 * 4.0 / math.sqrt(2 * math.pi) * math.exp(-8.0)
        assert true_marginal_density("ex3", 0.0) == pytest.approx(expected, rel=1e-12)
        assert true_marginal_density("ex3", 0.0) == pytest.approx(1.7955, abs=1e-3)

    def test_marginal_dip(self):
        """Test that the mixture design is thinner at 0.36 than at 0 and 1."""
        dip = true_marginal_density("ex3", 0.36)
        assert dip < min(true_marginal_density("ex3", 0.0), true_marginal_density("ex3", 1.0))

    def test_window_contains_bulk(self):
        """Test that the window covers eight standard deviations."""
        low, high = conditional_window("ex1", 0.5)
        assert low == pytest.approx(5.5 - 8.0 * math.sqrt(0.8))
        assert high == pytest.approx(5.5 + 8.0 * math.sqrt(0.8))
        low, high = conditional_window("ex2", 0.0)
        assert low == pytest.approx(-16.0)
        assert high >= 6.0
