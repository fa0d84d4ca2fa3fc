"""Monte Carlo risk evaluation of the adaptive estimators."""

from __future__ import annotations

import asyncio
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .const import (
    DEFAULT_BASE_SEED,
    DEFAULT_DEGREE_X,
    DEFAULT_DEGREE_Y,
    DEFAULT_ETA,
    DEFAULT_PER_AXIS,
    DEFAULT_PROJECTION_A,
    DEFAULT_QUADRATURE_POINTS,
    DEFAULT_REPLICATIONS,
    ESTIMATOR_KERNEL,
    ESTIMATOR_PROJECTION,
    ESTIMATORS,
    MIN_ETA,
    MIN_GRID_SAMPLE_SIZE,
    MIN_QUADRATURE_POINTS,
    MIXTURE_EXP_SHIFT,
)
from .exceptions import ConditionalDensityError, ConfigurationError, EvaluationError, ReplicationError
from .kernel_gl import Bandwidth2, build_bandwidth_grid, gl_select_bandwidth, kernel_estimate
from .marginal import MarginalConfig, MarginalEstimate, gl_select_marginal, oracle_marginal
from .projection_gl import BasisSpec, ModelIndex, build_model_grid, fit_projection, gl_select_model
from .sampling import ExampleId, ObservationSet, conditional_window, generate, true_conditional_density
from .selection import SelectionTrace

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RiskConfig:
    """One cell of a simulation table."""

    example: ExampleId
    estimator: str
    x: float
    n: int
    eta: float = DEFAULT_ETA
    fx_known: bool = False
    replications: int = DEFAULT_REPLICATIONS
    base_seed: int = DEFAULT_BASE_SEED
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS
    heavy_tailed: bool = False
    strict_grid: bool = False
    clamp_nonneg: bool = False
    per_axis: int = DEFAULT_PER_AXIS
    projection_A: float = DEFAULT_PROJECTION_A
    degree_x: int = DEFAULT_DEGREE_X
    degree_y: int = DEFAULT_DEGREE_Y
    simplified_penalty: bool = True
    marginal: MarginalConfig = field(default_factory=MarginalConfig)

    def __post_init__(self) -> None:
        """Normalise the example and validate every field."""
        try:
            object.__setattr__(self, "example", ExampleId.parse(self.example))
        except ConditionalDensityError as err:
            raise ConfigurationError(str(err)) from err
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"Unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        if self.n < MIN_GRID_SAMPLE_SIZE:
            raise ConfigurationError(f"n must be at least {MIN_GRID_SAMPLE_SIZE}, got {self.n}")
        if self.eta <= MIN_ETA:
            raise ConfigurationError(f"eta must exceed {MIN_ETA}, got {self.eta}")
        if self.replications < 1:
            raise ConfigurationError("At least one replication is required")
        if self.base_seed < 0:
            raise ConfigurationError("base_seed must be nonnegative")
        if self.quadrature_points < MIN_QUADRATURE_POINTS or self.quadrature_points % 2:
            raise ConfigurationError(
                f"quadrature_points must be even and >= {MIN_QUADRATURE_POINTS}, got {self.quadrature_points}"
            )
        if self.heavy_tailed and self.example is not ExampleId.EX1:
            raise ConfigurationError("The heavy-tailed variant only exists for Example 1")
        if self.projection_A <= 0 or self.degree_x < 0 or self.degree_y < 0 or self.per_axis < 1:
            raise ConfigurationError("Invalid grid or basis settings")

    @property
    def seeds(self) -> List[int]:
        """Seeds base_seed + 1 .. base_seed + N."""
        return [self.base_seed + rep for rep in range(1, self.replications + 1)]

    def as_dict(self) -> Dict[str, Any]:
        """Flat representation used by manifests."""
        values = asdict(self)
        values["example"] = self.example.value
        values.pop("marginal")
        marginal = self.marginal
        values.update(
            marginal_grid_size=marginal.grid_size,
            marginal_tuning_constant=marginal.tuning_constant,
            neighborhood_halfwidth_A=marginal.neighborhood_halfwidth_A,
            neighborhood_grid_points=marginal.neighborhood_grid_points,
        )
        return values

    def with_overrides(self, **changes: Any) -> "RiskConfig":
        """Copy with some fields replaced."""
        return replace(self, **changes)


@dataclass(frozen=True)
class RiskReport:
    """Aggregated MSE of one cell."""

    config: RiskConfig
    per_replication: Tuple[float, ...]
    seeds: Tuple[int, ...]
    mse_mean: float
    mse_stderr: float
    stderr_defined: bool

    @classmethod
    def from_values(cls, config: RiskConfig, values: Sequence[float], seeds: Sequence[int]) -> "RiskReport":
        """Aggregate per-replication risks."""
        array = np.asarray(values, dtype=float)
        stderr_defined = array.size > 1
        stderr = float(np.std(array, ddof=1) / math.sqrt(array.size)) if stderr_defined else 0.0
        return cls(
            config=config,
            per_replication=tuple(float(v) for v in array),
            seeds=tuple(int(s) for s in seeds),
            mse_mean=float(np.mean(array)),
            mse_stderr=stderr,
            stderr_defined=stderr_defined,
        )

    @property
    def replications(self) -> int:
        """N."""
        return len(self.per_replication)


class TrueDensityCurve:
    """The true section y -> f(x, y) behind the same interface as the estimates."""

    def __init__(self, example: Union[ExampleId, str], x: float, heavy_tailed: bool = False):
        """Initialize the true section."""
        self.example = ExampleId.parse(example)
        self.x = float(x)
        self.heavy_tailed = heavy_tailed

    def evaluate(self, y) -> np.ndarray:
        """f(x, y) at every point of y."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.asarray(true_conditional_density(self.example, self.x, y, self.heavy_tailed))

    def support_intervals(self) -> List[Tuple[float, float]]:
        """The effective support."""
        return [conditional_window(self.example, self.x, self.heavy_tailed)]

    def breakpoints(self) -> List[float]:
        """The exponential branch starts with a jump."""
        return [MIXTURE_EXP_SHIFT] if self.example.mixture_response else []


def _evaluator(curve: Any) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(curve, "evaluate"):
        return curve.evaluate
    if callable(curve):
        return lambda y: np.broadcast_to(np.asarray(curve(y), dtype=float), y.shape)
    value = float(curve)
    return lambda y: np.full(y.shape, value)


def _merge(intervals: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged: List[Tuple[float, float]] = []
    for low, high in sorted(intervals):
        if merged and low <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], high))
        else:
            merged.append((low, high))
    return merged


def _pieces(
    intervals: Sequence[Tuple[float, float]], breakpoints: Sequence[float], step: float
) -> List[np.ndarray]:
    """Simpson grids with an even number of steps, split at every breakpoint."""
    grids = []
    cuts = np.unique(np.asarray(breakpoints, dtype=float))
    for low, high in intervals:
        inner = cuts[(cuts > low) & (cuts < high)]
        edges = np.concatenate(([low], inner, [high]))
        for left, right in zip(edges[:-1], edges[1:]):
            steps = max(2, int(math.ceil((right - left) / step)))
            steps += steps % 2
            grids.append(np.linspace(left, right, steps + 1))
    return grids


def mse(
    curve: Any,
    example: Union[ExampleId, str],
    x: float,
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
    heavy_tailed: bool = False,
) -> float:
    """Integral over y of (curve(y) - f(x, y))^2 by composite Simpson.

    The range is the true density's effective support joined with the
    curve's own support; every piece is split at the known jumps of both
    functions and is resolved at least as finely as the curve requires.
    """
    truth = TrueDensityCurve(example, x, heavy_tailed)
    window = truth.support_intervals()[0]
    intervals = list(truth.support_intervals())
    if hasattr(curve, "support_intervals"):
        intervals.extend(curve.support_intervals())
    intervals = _merge(intervals)
    breakpoints = list(truth.breakpoints())
    if hasattr(curve, "breakpoints"):
        breakpoints.extend(curve.breakpoints())

    step = (window[1] - window[0]) / quadrature_points
    if hasattr(curve, "resolution"):
        step = min(step, curve.resolution())

    evaluate = _evaluator(curve)
    total = 0.0
    for grid in _pieces(intervals, breakpoints, step):
        # one-sided limits at the piece ends
        nodes = grid.copy()
        nodes[0] = np.nextafter(grid[0], np.inf)
        nodes[-1] = np.nextafter(grid[-1], -np.inf)
        estimate = np.asarray(evaluate(nodes), dtype=float)
        if not np.all(np.isfinite(estimate)):
            raise EvaluationError(f"Non-finite curve values on [{grid[0]}, {grid[-1]}]")
        total += float(integrate.simpson((estimate - truth.evaluate(nodes)) ** 2, x=grid))
    return max(total, 0.0)


@dataclass(frozen=True, eq=False)
class EstimateResult:
    """Everything one pipeline pass produced."""

    config: RiskConfig
    seed: int
    observations: ObservationSet
    marginal: MarginalEstimate
    curve: Any
    trace: SelectionTrace
    basis: Optional[BasisSpec] = None

    @property
    def candidates(self) -> List[Hashable]:
        """The grid the selection ran over."""
        return self.trace.candidates

    def candidate_curve(self, candidate: Hashable) -> Any:
        """Estimate built with a fixed grid candidate."""
        cfg = self.config
        if cfg.estimator == ESTIMATOR_KERNEL:
            assert isinstance(candidate, Bandwidth2)
            return kernel_estimate(self.observations, self.marginal, candidate, cfg.x, cfg.clamp_nonneg)
        assert isinstance(candidate, ModelIndex) and self.basis is not None
        return fit_projection(self.observations, candidate, self.basis, cfg.x, self.marginal.delta_hat, cfg.eta)

    def risk(self, quadrature_points: Optional[int] = None) -> float:
        """MSE of the selected estimate."""
        cfg = self.config
        return mse(self.curve, cfg.example, cfg.x, quadrature_points or cfg.quadrature_points, cfg.heavy_tailed)


def estimate_once(cfg: RiskConfig, seed: int) -> EstimateResult:
    """Draw a sample, estimate f_X and run the configured GL selection."""
    obs = generate(cfg.example, cfg.n, seed, heavy_tailed=cfg.heavy_tailed)
    if cfg.fx_known:
        marginal = oracle_marginal(cfg.example, cfg.x, cfg.n, cfg.marginal)
    else:
        marginal = gl_select_marginal(obs.marginal_x, cfg.x, cfg.marginal)

    if cfg.estimator == ESTIMATOR_PROJECTION:
        spec = BasisSpec.from_observations(obs, cfg.x, A=cfg.projection_A, r=cfg.degree_x, r_y=cfg.degree_y)
        grid = build_model_grid(cfg.n, marginal.delta_hat, spec)
        curve, trace = gl_select_model(
            obs, marginal, grid, spec, cfg.x, cfg.eta, simplified_penalty=cfg.simplified_penalty
        )
        return EstimateResult(cfg, seed, obs, marginal, curve, trace, basis=spec)

    grid = build_bandwidth_grid(cfg.n, marginal.delta_hat, cfg.per_axis, strict=cfg.strict_grid)
    curve, trace = gl_select_bandwidth(obs, marginal, grid, cfg.x, cfg.eta, clamp_nonneg=cfg.clamp_nonneg)
    return EstimateResult(cfg, seed, obs, marginal, curve, trace)


def _replication_risk(cfg: RiskConfig, replication: int, seed: int) -> float:
    try:
        return estimate_once(cfg, seed).risk()
    except ConditionalDensityError as err:
        _LOGGER.error("Replication %d (seed %d) of %s failed: %s", replication, seed, cfg.example.value, err)
        raise ReplicationError(replication, seed, str(err)) from err


def run_cell(cfg: RiskConfig, max_workers: int = 1) -> RiskReport:
    """MSE over N replications with seeds base_seed + 1 .. base_seed + N.

    Replications may run on a thread pool; results keep replication order.
    """
    seeds = cfg.seeds
    replications = range(1, cfg.replications + 1)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            values = list(pool.map(lambda rep, seed: _replication_risk(cfg, rep, seed), replications, seeds))
    else:
        values = [_replication_risk(cfg, rep, seed) for rep, seed in zip(replications, seeds)]
    report = RiskReport.from_values(cfg, values, seeds)
    _LOGGER.info(
        "Cell %s/%s x=%s n=%d eta=%s fx_known=%s: mse=%.6g (N=%d)",
        cfg.example.value,
        cfg.estimator,
        cfg.x,
        cfg.n,
        cfg.eta,
        cfg.fx_known,
        report.mse_mean,
        report.replications,
    )
    return report


def oracle_ratio(cfg: RiskConfig) -> float:
    """Median over replications of MSE(selected) / min over the grid of MSE(candidate)."""
    ratios = []
    for replication, seed in enumerate(cfg.seeds, start=1):
        try:
            result = estimate_once(cfg, seed)
            selected = result.risk()
            oracle = min(
                mse(result.candidate_curve(c), cfg.example, cfg.x, cfg.quadrature_points, cfg.heavy_tailed)
                for c in result.candidates
            )
        except ConditionalDensityError as err:
            _LOGGER.error("Oracle replication %d (seed %d) failed: %s", replication, seed, err)
            raise ReplicationError(replication, seed, str(err)) from err
        if oracle > 0.0:
            ratios.append(selected / oracle)
        else:
            ratios.append(1.0 if selected == 0.0 else math.inf)
        _LOGGER.debug("Replication %d: selected %.6g, oracle %.6g", replication, selected, oracle)
    return float(np.median(ratios))


async def async_run_cells(configs: Sequence[RiskConfig], max_workers: Optional[int] = None) -> List[RiskReport]:
    """Run several cells concurrently; reports come back in input order."""
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        tasks = [loop.run_in_executor(pool, run_cell, cfg) for cfg in configs]
        return list(await asyncio.gather(*tasks))
