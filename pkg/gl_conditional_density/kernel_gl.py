"""Adaptive kernel estimation of a conditional density at a fixed x.

Every estimate is a Gaussian mixture in y, so single and double smoothed
estimates, their L2(dy) distances and the penalties all have closed forms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .const import (
    CURVE_RESOLUTION_FRACTION,
    DEFAULT_PER_AXIS,
    EVALUATE_CHUNK_SIZE,
    GAUSSIAN_L1_NORM,
    GAUSSIAN_L2_NORM_2D,
    GAUSSIAN_WINDOW_SDS,
    MIN_ETA,
    MIN_GRID_SAMPLE_SIZE,
    RELAXED_BANDWIDTH_EXPONENT,
    RELAXED_BANDWIDTH_MAX,
)
from .exceptions import ArgumentError, ConfigurationError
from .kernels import convolved_bandwidth, gaussian, scaled_gaussian
from .marginal import MarginalEstimate, default_k_n
from .sampling import ObservationSet
from .selection import SelectionTrace, select_minimum

_LOGGER = logging.getLogger(__name__)

GRID_MODE_PRACTICE = "practice"
GRID_MODE_STRICT = "strict"


@dataclass(frozen=True, order=True)
class Bandwidth2:
    """Bandwidth in the x direction (h1) and the y direction (h2)."""

    h1: float
    h2: float

    def __post_init__(self) -> None:
        """Reject nonpositive or non-finite bandwidths."""
        for value in (self.h1, self.h2):
            if not (math.isfinite(value) and value > 0):
                raise ArgumentError(f"Bandwidths must be positive, got ({self.h1}, {self.h2})")

    @property
    def volume(self) -> float:
        """h1 * h2."""
        return self.h1 * self.h2

    def convolve(self, other: "Bandwidth2") -> "Bandwidth2":
        """Bandwidth of K_self * K_other."""
        return Bandwidth2(convolved_bandwidth(self.h1, other.h1), convolved_bandwidth(self.h2, other.h2))

    def as_dict(self) -> Dict[str, float]:
        """Plain representation."""
        return {"h1": self.h1, "h2": self.h2}


@dataclass(frozen=True)
class BandwidthGrid:
    """Candidate bandwidths with a record of how they were built."""

    pairs: Tuple[Bandwidth2, ...]
    n: int
    delta_hat: float
    mode: str = GRID_MODE_PRACTICE
    relaxed_x: bool = False
    relaxed_y: bool = False

    def __post_init__(self) -> None:
        """A grid is never empty."""
        if not self.pairs:
            raise ConfigurationError("Bandwidth grid is empty")

    @property
    def relaxed(self) -> bool:
        """True when an axis fell back to the relaxed range."""
        return self.relaxed_x or self.relaxed_y

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Bandwidth2]:
        return iter(self.pairs)


def _relaxed_axis(n: int, count: int) -> np.ndarray:
    """Geometric bandwidths on [1 / n^0.9, 0.5]."""
    return np.geomspace(n ** (-RELAXED_BANDWIDTH_EXPONENT), RELAXED_BANDWIDTH_MAX, count)


def _integer_reciprocal_axis(inv_low: float, inv_high: float, count: int) -> Optional[np.ndarray]:
    """Bandwidths 1/k for integers k in [inv_low, inv_high]; None when empty."""
    low = math.ceil(inv_low - 1e-12)
    high = math.floor(inv_high + 1e-12)
    low = max(low, 1)
    if low > high:
        return None
    inverses = np.unique(np.round(np.geomspace(low, high, count)))
    return np.sort(1.0 / inverses)


def build_bandwidth_grid(
    n: int,
    delta_hat: float,
    per_axis: int = DEFAULT_PER_AXIS,
    strict: bool = False,
    k_n: Optional[float] = None,
) -> BandwidthGrid:
    """Build the bandwidth set H_n.

    Practice mode uses per_axis free geometric values on the relaxed range for
    both axes. Strict mode applies the theoretical bandwidth bounds with integer
    reciprocal bandwidths and falls back per axis when an interval is empty.
    """
    if n < MIN_GRID_SAMPLE_SIZE:
        raise ConfigurationError(f"Sample size {n} is too small for a bandwidth grid")
    if per_axis < 1:
        raise ConfigurationError("per_axis must be at least 1")
    if delta_hat <= 0:
        raise ArgumentError("delta_hat must be positive")

    relaxed_x = relaxed_y = False
    if strict:
        log_n = math.log(n)
        k = k_n if k_n is not None else default_k_n(n)
        axis_x = _integer_reciprocal_axis(k, delta_hat * n / log_n**3, per_axis)
        axis_y = _integer_reciprocal_axis(log_n**2, float(n), per_axis)
        if axis_x is None:
            relaxed_x = True
            axis_x = _relaxed_axis(n, per_axis)
        if axis_y is None:
            relaxed_y = True
            axis_y = _relaxed_axis(n, per_axis)
        if relaxed_x or relaxed_y:
            _LOGGER.warning(
                "Bandwidth bounds empty at n=%d (x relaxed: %s, y relaxed: %s)", n, relaxed_x, relaxed_y
            )
        mode = GRID_MODE_STRICT
    else:
        axis_x = axis_y = _relaxed_axis(n, per_axis)
        mode = GRID_MODE_PRACTICE

    pairs = tuple(Bandwidth2(float(h1), float(h2)) for h1 in axis_x for h2 in axis_y)
    _LOGGER.debug("Bandwidth grid (%s): %d pairs at n=%d", mode, len(pairs), n)
    return BandwidthGrid(
        pairs=pairs,
        n=n,
        delta_hat=delta_hat,
        mode=mode,
        relaxed_x=relaxed_x,
        relaxed_y=relaxed_y,
    )


@dataclass(frozen=True, eq=False)
class KernelCurve:
    """f(x, y) estimate as a Gaussian mixture sum_i w_i phi_{s}(y - c_i)."""

    weights: np.ndarray
    centers: np.ndarray
    y_scale: float
    x: float
    clamp_nonneg: bool = False

    def evaluate(self, y) -> np.ndarray:
        """Curve values at every point of y."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(y.shape, dtype=float)
        flat_y = y.ravel()
        flat_out = out.ravel()
        for start in range(0, flat_y.size, EVALUATE_CHUNK_SIZE):
            chunk = flat_y[start : start + EVALUATE_CHUNK_SIZE]
            kernel = scaled_gaussian(chunk[:, None] - self.centers[None, :], self.y_scale)
            flat_out[start : start + EVALUATE_CHUNK_SIZE] = kernel @ self.weights
        if self.clamp_nonneg:
            np.maximum(out, 0.0, out=out)
        return out

    def integral(self) -> float:
        """Total mass over y (before any clamping)."""
        return float(np.sum(self.weights))

    def squared_norm(self) -> float:
        """Exact integral of the squared curve over y."""
        if self.clamp_nonneg:
            raise ArgumentError("No closed form for a clamped curve")
        return _mixture_inner(self.weights, self.centers, self.y_scale, self.weights, self.centers, self.y_scale)

    def support_intervals(self) -> List[Tuple[float, float]]:
        """Merged intervals outside of which the curve is negligible."""
        active = self.centers[self.weights != 0.0]
        if active.size == 0:
            return []
        width = GAUSSIAN_WINDOW_SDS * self.y_scale
        starts = np.sort(active) - width
        ends = starts + 2.0 * width
        intervals: List[Tuple[float, float]] = []
        low, high = starts[0], ends[0]
        for start, end in zip(starts[1:], ends[1:]):
            if start > high:
                intervals.append((float(low), float(high)))
                low = start
            high = max(high, end)
        intervals.append((float(low), float(high)))
        return intervals

    def breakpoints(self) -> List[float]:
        """Kernel curves are smooth."""
        return []

    def resolution(self) -> float:
        """Length scale a quadrature must resolve."""
        return self.y_scale * CURVE_RESOLUTION_FRACTION

    def clamped(self) -> "KernelCurve":
        """Nonnegative view of the curve."""
        return replace(self, clamp_nonneg=True)


def _mixture_inner(
    wa: np.ndarray, ca: np.ndarray, sa: float, wb: np.ndarray, cb: np.ndarray, sb: float
) -> float:
    """Integral of two Gaussian mixtures' product, via phi_s * phi_t = phi_{sqrt(s^2+t^2)}."""
    if wa.size == 0 or wb.size == 0:
        return 0.0
    scale = math.hypot(sa, sb)
    cross = scaled_gaussian(ca[:, None] - cb[None, :], scale)
    return float(wa @ cross @ wb)


def _check_marginal(fX: MarginalEstimate) -> None:
    if fX.delta_hat <= 0:
        raise ArgumentError("delta_hat must be positive")


def kernel_estimate(
    obs: ObservationSet,
    fX: MarginalEstimate,
    h: Bandwidth2,
    x: float,
    clamp_nonneg: bool = False,
) -> KernelCurve:
    """f_h(x, .) = (1/n) sum_i K_h(x - X_i, . - Y_i) / f_X(X_i)."""
    _check_marginal(fX)
    n = obs.n
    denominators = np.maximum(fX.evaluate(obs.x), fX.floor)
    weights = scaled_gaussian(x - obs.x, h.h1) / (n * denominators)
    return KernelCurve(
        weights=weights,
        centers=np.asarray(obs.y, dtype=float),
        y_scale=h.h2,
        x=float(x),
        clamp_nonneg=clamp_nonneg,
    )


def double_smoothed_estimate(
    obs: ObservationSet,
    fX: MarginalEstimate,
    h: Bandwidth2,
    h_prime: Bandwidth2,
    x: float,
) -> KernelCurve:
    """K_h' * f_h, which for Gaussian kernels is f at the convolved bandwidth."""
    return kernel_estimate(obs, fX, h.convolve(h_prime), x)


def l2_distance_y(a: KernelCurve, b: KernelCurve) -> float:
    """Exact ||a - b|| in L2(dy)."""
    if a.x != b.x:
        raise ArgumentError("Curves must be sections at the same x")
    if a.clamp_nonneg or b.clamp_nonneg:
        raise ArgumentError("No closed form for clamped curves")
    squared = (
        _mixture_inner(a.weights, a.centers, a.y_scale, a.weights, a.centers, a.y_scale)
        + _mixture_inner(b.weights, b.centers, b.y_scale, b.weights, b.centers, b.y_scale)
        - 2.0 * _mixture_inner(a.weights, a.centers, a.y_scale, b.weights, b.centers, b.y_scale)
    )
    return math.sqrt(max(squared, 0.0))


def sigma_kernel(h: Bandwidth2, delta_hat: float, n: int, eta: float) -> float:
    """sigma(h) = chi / sqrt(delta_hat n h1 h2), chi = (1 + eta)(1 + ||K||_1)||K||_2."""
    if delta_hat <= 0 or n <= 0:
        raise ArgumentError("sigma(h) needs delta_hat > 0 and n > 0")
    if eta <= MIN_ETA:
        raise ArgumentError(f"eta must exceed {MIN_ETA}, got {eta}")
    chi = (1.0 + eta) * (1.0 + GAUSSIAN_L1_NORM) * GAUSSIAN_L2_NORM_2D
    return chi / math.sqrt(delta_hat * n * h.h1 * h.h2)


class _SharedCenterGram:
    """Inner products of kernel curves that share the centres Y_i.

    A curve with bandwidth (g1, s) has weights w(g1) and scale s, so
    <curve(g1, s), curve(g1', s')> = w(g1)' Phi_t w(g1') with
    t = sqrt(s^2 + s'^2) and Phi_t[i, j] = phi_t(Y_i - Y_j).
    """

    def __init__(self, obs: ObservationSet, fX: MarginalEstimate, x: float):
        """Cache the data-dependent pieces."""
        self._x = x
        self._n = obs.n
        self._x_data = np.asarray(obs.x, dtype=float)
        self._denominators = np.maximum(fX.evaluate(obs.x), fX.floor)
        centers = np.asarray(obs.y, dtype=float)
        self._squared_gaps = (centers[:, None] - centers[None, :]) ** 2
        self._weights: Dict[float, np.ndarray] = {}

    def weights(self, g1: float) -> np.ndarray:
        """Curve weights for x bandwidth g1."""
        if g1 not in self._weights:
            self._weights[g1] = scaled_gaussian(self._x - self._x_data, g1) / (self._n * self._denominators)
        return self._weights[g1]

    def evaluate(self, requests: List[Tuple[float, float, float]]) -> Dict[Tuple[float, float, float], float]:
        """Compute w(g_left)' Phi_t w(g_right) for every (g_left, g_right, t)."""
        by_scale: Dict[float, set] = {}
        for left, right, t in requests:
            by_scale.setdefault(t, set()).add((left, right))
        results: Dict[Tuple[float, float, float], float] = {}
        for t in sorted(by_scale):
            phi = float(gaussian(0.0)) / t * np.exp(self._squared_gaps * (-0.5 / (t * t)))
            rights = sorted({right for _, right in by_scale[t]})
            projected = phi @ np.column_stack([self.weights(right) for right in rights])
            column = {right: index for index, right in enumerate(rights)}
            for left, right in sorted(by_scale[t]):
                results[(left, right, t)] = float(self.weights(left) @ projected[:, column[right]])
        return results


def pairwise_distances(
    obs: ObservationSet,
    fX: MarginalEstimate,
    pairs: Tuple[Bandwidth2, ...],
    x: float,
) -> np.ndarray:
    """D[i, j] = ||f_{h_j} - f_{h_i, h_j}||_{x,2} for all grid pairs."""
    _check_marginal(fX)
    gram = _SharedCenterGram(obs, fX, x)
    root2 = math.sqrt(2.0)

    def norm_key(h: Bandwidth2) -> Tuple[float, float, float]:
        return (h.h1, h.h1, root2 * h.h2)

    requests = []
    for h in pairs:
        for h_prime in pairs:
            smoothed = h.convolve(h_prime)
            requests.append(norm_key(h_prime))
            requests.append(norm_key(smoothed))
            requests.append((h_prime.h1, smoothed.h1, math.hypot(h_prime.h2, smoothed.h2)))
    values = gram.evaluate(requests)

    distances = np.empty((len(pairs), len(pairs)), dtype=float)
    for i, h in enumerate(pairs):
        for j, h_prime in enumerate(pairs):
            smoothed = h.convolve(h_prime)
            squared = (
                values[norm_key(h_prime)]
                + values[norm_key(smoothed)]
                - 2.0 * values[(h_prime.h1, smoothed.h1, math.hypot(h_prime.h2, smoothed.h2))]
            )
            distances[i, j] = math.sqrt(max(squared, 0.0))
    return distances


def _bandwidth_tie_key(h: Bandwidth2):
    """Largest h1 * h2 first, then lexicographic."""
    return (-h.volume, h.h1, h.h2)


def gl_select_bandwidth(
    obs: ObservationSet,
    fX: MarginalEstimate,
    grid: BandwidthGrid,
    x: float,
    eta: float,
    clamp_nonneg: bool = False,
) -> Tuple[KernelCurve, SelectionTrace[Bandwidth2]]:
    """Goldenshluger-Lepski choice h = argmin{A(h) + sigma(h)}."""
    if len(grid) == 0:
        raise ConfigurationError("Bandwidth grid is empty")
    pairs = tuple(grid.pairs)
    sigmas = np.array([sigma_kernel(h, fX.delta_hat, obs.n, eta) for h in pairs])
    distances = pairwise_distances(obs, fX, pairs, x)
    a_values = np.maximum((distances - sigmas[None, :]).max(axis=1), 0.0)

    trace = select_minimum(pairs, sigmas.tolist(), a_values.tolist(), tie_key=_bandwidth_tie_key)
    chosen = trace.chosen
    _LOGGER.info(
        "Kernel GL at x=%.4f: selected h=(%.5f, %.5f) among %d pairs", x, chosen.h1, chosen.h2, len(pairs)
    )
    return kernel_estimate(obs, fX, chosen, x, clamp_nonneg=clamp_nonneg), trace
