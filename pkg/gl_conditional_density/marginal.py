"""Pointwise Goldenshluger-Lepski estimation of the design density f_X."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .const import (
    DEFAULT_MARGINAL_GRID_SIZE,
    DEFAULT_MARGINAL_TUNING,
    DEFAULT_NEIGHBORHOOD_A,
    DEFAULT_NEIGHBORHOOD_POINTS,
    GAUSSIAN_L1_NORM,
    GAUSSIAN_L2_NORM_1D,
    MARGINAL_GRID_SPREAD,
    ROT_EXPONENT,
    ROT_FACTOR,
    ROT_IQR_SCALE,
)
from .exceptions import ArgumentError, ConfigurationError, EstimationError
from .kernels import convolved_bandwidth, kernel_density
from .sampling import ExampleId, true_marginal_density
from .selection import SelectionTrace, select_minimum

_LOGGER = logging.getLogger(__name__)


def default_k_n(n: int) -> float:
    """k_n = max(log n, 1)."""
    return max(math.log(n), 1.0)


@dataclass(frozen=True)
class MarginalConfig:
    """Settings of the marginal estimator and of the neighborhood V_n(x)."""

    grid_size: int = DEFAULT_MARGINAL_GRID_SIZE
    tuning_constant: float = DEFAULT_MARGINAL_TUNING
    neighborhood_halfwidth_A: float = DEFAULT_NEIGHBORHOOD_A
    k_n_rule: Callable[[int], float] = default_k_n
    neighborhood_grid_points: int = DEFAULT_NEIGHBORHOOD_POINTS
    delta_floor: Optional[float] = None  # None means 1 / n

    def __post_init__(self) -> None:
        """Validate the configuration."""
        if self.grid_size < 2:
            raise ConfigurationError("Marginal bandwidth grid needs at least 2 values")
        if self.tuning_constant <= 0:
            raise ConfigurationError("Tuning constant must be positive")
        if self.neighborhood_halfwidth_A <= 0:
            raise ConfigurationError("Neighborhood constant A must be positive")
        if self.neighborhood_grid_points < 1:
            raise ConfigurationError("Neighborhood grid needs at least one point")
        if self.delta_floor is not None and self.delta_floor <= 0:
            raise ConfigurationError("delta_floor must be positive")

    def floor_for(self, n: int) -> float:
        """Lower clamp applied to delta_hat."""
        return self.delta_floor if self.delta_floor is not None else 1.0 / n

    def neighborhood_halfwidth(self, n: int) -> float:
        """Half width 2A / k_n of V_n(x)."""
        return 2.0 * self.neighborhood_halfwidth_A / self.k_n_rule(n)


@dataclass(frozen=True)
class MarginalEstimate:
    """An estimate (or the truth) of f_X together with its V_n(x) statistics."""

    density: Callable[[np.ndarray], np.ndarray]
    delta_hat: float
    sup_hat: float
    floor: float
    selected_bandwidth_h0: Optional[float] = None
    trace: Optional[SelectionTrace[float]] = None
    known: bool = False

    def evaluate(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """f_X estimate at every point of t."""
        return np.asarray(self.density(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)


def rule_of_thumb_bandwidth(xs: Sequence[float]) -> float:
    """Silverman's rule 1.06 * min(sd, IQR / 1.34) * n^(-1/5)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2 or np.unique(xs).size < 2:
        raise EstimationError("Rule of thumb needs at least two distinct values")
    sd = float(np.std(xs, ddof=1))
    iqr = float(np.subtract(*np.percentile(xs, [75, 25])))
    spread = min(sd, iqr / ROT_IQR_SCALE) if iqr > 0 else sd
    if spread <= 0:
        raise EstimationError("Rule of thumb undefined for a sample with zero spread")
    return ROT_FACTOR * spread * xs.size**ROT_EXPONENT


def marginal_penalty(n: int, h: float, f_tilde: float, tuning_constant: float = DEFAULT_MARGINAL_TUNING) -> float:
    """pen(n, h) = c ||K||_2 (1 + ||K||_1) sqrt(|log h| f~(x) / (n h))."""
    if n <= 0 or h <= 0:
        raise ArgumentError("pen(n, h) needs n > 0 and h > 0")
    return (
        tuning_constant
        * GAUSSIAN_L2_NORM_1D
        * (1.0 + GAUSSIAN_L1_NORM)
        * math.sqrt(abs(math.log(h)) * max(f_tilde, 0.0) / (n * h))
    )


def neighborhood_grid(x: float, n: int, cfg: MarginalConfig) -> np.ndarray:
    """Uniform evaluation grid over V_n(x)."""
    half = cfg.neighborhood_halfwidth(n)
    if cfg.neighborhood_grid_points == 1:
        return np.array([x], dtype=float)
    return np.linspace(x - half, x + half, cfg.neighborhood_grid_points)


def _neighborhood_extremes(values: np.ndarray, floor: float, clamp_positive_only: bool):
    """(delta_hat, sup_hat) from density values on the V_n(x) grid."""
    magnitudes = np.abs(values)
    delta = float(magnitudes.min())
    sup = float(magnitudes.max())
    if not clamp_positive_only or delta <= 0.0:
        if delta < floor:
            _LOGGER.warning("delta_hat %.3g clamped to floor %.3g", delta, floor)
        delta = max(delta, floor)
    return delta, max(sup, delta)


def gl_select_marginal(
    xs: Sequence[float],
    x: float,
    cfg: Optional[MarginalConfig] = None,
    bandwidths: Optional[Sequence[float]] = None,
) -> MarginalEstimate:
    """Select a bandwidth h0 at x and return f_{h0} with its V_n(x) statistics."""
    cfg = cfg or MarginalConfig()
    data = np.asarray(xs, dtype=float)
    if data.size == 0:
        raise ArgumentError("Marginal estimation needs a nonempty sample")
    n = data.size

    h_rot = rule_of_thumb_bandwidth(data)
    if bandwidths is None:
        grid = np.geomspace(h_rot / MARGINAL_GRID_SPREAD, h_rot * MARGINAL_GRID_SPREAD, cfg.grid_size)
    else:
        grid = np.asarray(bandwidths, dtype=float)
    if grid.size == 0:
        raise ConfigurationError("Empty marginal bandwidth grid")
    if np.any(grid <= 0):
        raise ConfigurationError("Marginal bandwidths must be positive")

    f_tilde = float(kernel_density(x, data, h_rot)[0])
    single = {float(h): float(kernel_density(x, data, h)[0]) for h in grid}
    penalties = [marginal_penalty(n, float(h), f_tilde, cfg.tuning_constant) for h in grid]

    a_values = []
    for h in grid:
        excess = [
            abs(float(kernel_density(x, data, convolved_bandwidth(h, h_prime))[0]) - single[float(h_prime)])
            - pen_prime
            for h_prime, pen_prime in zip(grid, penalties)
        ]
        a_values.append(max(max(excess), 0.0))

    # ties go to the largest bandwidth
    trace = select_minimum([float(h) for h in grid], penalties, a_values, tie_key=lambda h: -h)
    h0 = trace.chosen
    _LOGGER.debug("Marginal GL at x=%.4f: h_rot=%.5f, h0=%.5f", x, h_rot, h0)

    def density(t: np.ndarray) -> np.ndarray:
        return kernel_density(t, data, h0)

    floor = cfg.floor_for(n)
    values = density(neighborhood_grid(x, n, cfg))
    delta_hat, sup_hat = _neighborhood_extremes(values, floor, clamp_positive_only=False)
    return MarginalEstimate(
        density=density,
        delta_hat=delta_hat,
        sup_hat=sup_hat,
        floor=floor,
        selected_bandwidth_h0=h0,
        trace=trace,
    )


def oracle_marginal(
    example: Union[ExampleId, str],
    x: float,
    n: int,
    cfg: Optional[MarginalConfig] = None,
) -> MarginalEstimate:
    """Wrap the true f_X; delta and sup come from the true density on V_n(x)."""
    cfg = cfg or MarginalConfig()
    example = ExampleId.parse(example)

    def density(t: np.ndarray) -> np.ndarray:
        return np.asarray(true_marginal_density(example, t), dtype=float)

    floor = cfg.floor_for(n)
    values = density(neighborhood_grid(x, n, cfg))
    delta, sup = _neighborhood_extremes(values, floor, clamp_positive_only=True)
    return MarginalEstimate(density=density, delta_hat=delta, sup_hat=sup, floor=floor, known=True)
