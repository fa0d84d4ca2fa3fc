"""Simulation examples with reproducible sampling and exact density oracles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

import numpy as np
from scipy import stats

from .const import (
    CAUCHY_WINDOW_SCALES,
    DESIGN_MIXTURE,
    EX1_VARIANCE_OFFSET,
    EX3_VARIANCE_OFFSET,
    GAUSSIAN_WINDOW_SDS,
    MIXTURE_EXP_RATE,
    MIXTURE_EXP_SHIFT,
    MIXTURE_NORMAL_WEIGHT,
)
from .exceptions import ArgumentError, DomainError

_LOGGER = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class ExampleId(str, Enum):
    """The four simulation examples."""

    EX1 = "ex1"
    EX2 = "ex2"
    EX3 = "ex3"
    EX4 = "ex4"

    @classmethod
    def parse(cls, value: Union["ExampleId", str, int]) -> "ExampleId":
        """Accept an ExampleId, 'ex1'..'ex4' (any case) or 1..4."""
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text.isdigit():
            text = f"ex{text}"
        try:
            return cls(text)
        except ValueError as err:
            raise ArgumentError(f"Unknown example: {value!r}") from err

    @property
    def uniform_design(self) -> bool:
        """Examples 1 and 2 draw X uniformly on [0, 1]."""
        return self in (ExampleId.EX1, ExampleId.EX2)

    @property
    def mixture_response(self) -> bool:
        """Examples 2 and 4 share the normal/exponential mixture for Y."""
        return self in (ExampleId.EX2, ExampleId.EX4)


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """2n draws split into an estimation half and a marginal-estimation half."""

    x: np.ndarray
    y: np.ndarray
    marginal_x: np.ndarray
    seed: int
    example: ExampleId
    heavy_tailed: bool = False

    def __post_init__(self) -> None:
        """Freeze the arrays and check the halves."""
        for name in ("x", "y", "marginal_x"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ArgumentError("Estimation half must be two 1-d arrays of equal length")

    @property
    def n(self) -> int:
        """Size of the estimation half."""
        return int(self.x.size)

    @property
    def estimation_pairs(self) -> List[Tuple[float, float]]:
        """The (X_i, Y_i) pairs of the estimation half."""
        return list(zip(self.x.tolist(), self.y.tolist()))


def _generator(seed_sequence: np.random.SeedSequence) -> np.random.Generator:
    """Counter-based generator for one stream."""
    return np.random.Generator(np.random.Philox(seed_sequence))


def _draw_design(example: ExampleId, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n design points X_i."""
    if example.uniform_design:
        return rng.uniform(0.0, 1.0, size=n)
    (w0, mean0, sd0), (_, mean1, sd1) = DESIGN_MIXTURE
    first = rng.uniform(size=n) < w0
    return np.where(first, rng.normal(mean0, sd0, size=n), rng.normal(mean1, sd1, size=n))


def _draw_response(
    example: ExampleId, xs: np.ndarray, rng: np.random.Generator, heavy_tailed: bool
) -> np.ndarray:
    """Draw Y_i given X_i."""
    n = xs.size
    if example.mixture_response:
        normal_branch = rng.uniform(size=n) < MIXTURE_NORMAL_WEIGHT
        normal = rng.normal(size=n) * (2.0 + xs)
        shifted_exp = MIXTURE_EXP_SHIFT + rng.exponential(1.0 / MIXTURE_EXP_RATE, size=n)
        return np.where(normal_branch, normal, shifted_exp)

    noise = rng.standard_cauchy(size=n) if heavy_tailed else rng.normal(size=n)
    if example is ExampleId.EX1:
        return 2.0 * xs**2 + 5.0 + noise * np.sqrt(EX1_VARIANCE_OFFSET - np.abs(xs))
    return xs**2 + 1.0 + noise * np.sqrt(EX3_VARIANCE_OFFSET + np.abs(xs))


def generate(
    example: Union[ExampleId, str],
    n: int,
    seed: int,
    heavy_tailed: bool = False,
) -> ObservationSet:
    """Draw 2n observations of an example.

    The estimation half and the marginal half come from two child streams of
    the same seed sequence, so they are independent and each is reproducible.
    """
    example = ExampleId.parse(example)
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ArgumentError(f"Sample size must be an integer >= 2, got {n!r}")
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ArgumentError(f"Seed must be an unsigned integer, got {seed!r}")
    if heavy_tailed and example is not ExampleId.EX1:
        raise ArgumentError("The heavy-tailed variant only exists for Example 1")
    n, seed = int(n), int(seed)

    estimation_seq, marginal_seq = np.random.SeedSequence(seed).spawn(2)
    estimation_rng = _generator(estimation_seq)
    marginal_rng = _generator(marginal_seq)

    xs = _draw_design(example, n, estimation_rng)
    ys = _draw_response(example, xs, estimation_rng, heavy_tailed)
    marginal_xs = _draw_design(example, n, marginal_rng)
    _LOGGER.debug("Generated %s with n=%d, seed=%d", example.value, n, seed)
    return ObservationSet(
        x=xs,
        y=ys,
        marginal_x=marginal_xs,
        seed=seed,
        example=example,
        heavy_tailed=heavy_tailed,
    )


def _conditional_location_scale(example: ExampleId, x: float) -> Tuple[float, float]:
    """Mean and scale of the location-scale examples (1 and 3)."""
    if example is ExampleId.EX1:
        variance = EX1_VARIANCE_OFFSET - abs(x)
        if variance <= 0.0:
            raise DomainError(f"Example 1 is undefined at |x| >= {EX1_VARIANCE_OFFSET} (x={x})")
        return 2.0 * x * x + 5.0, math.sqrt(variance)
    return x * x + 1.0, math.sqrt(EX3_VARIANCE_OFFSET + abs(x))


def _mixture_normal_sd(x: float) -> float:
    """Standard deviation of the normal branch of examples 2 and 4."""
    sd = 2.0 + x
    if sd <= 0.0:
        raise DomainError(f"Mixture examples need 2 + x > 0 (x={x})")
    return sd


def true_conditional_density(
    example: Union[ExampleId, str],
    x: float,
    y: ArrayLike,
    heavy_tailed: bool = False,
) -> ArrayLike:
    """Exact density of Y given X = x, vectorised over y."""
    example = ExampleId.parse(example)
    y_arr = np.asarray(y, dtype=float)
    if example.mixture_response:
        sd = _mixture_normal_sd(x)
        shifted = y_arr - MIXTURE_EXP_SHIFT
        exp_part = np.where(
            shifted >= 0.0,
            MIXTURE_EXP_RATE * np.exp(-MIXTURE_EXP_RATE * np.maximum(shifted, 0.0)),
            0.0,
        )
        values = MIXTURE_NORMAL_WEIGHT * stats.norm.pdf(y_arr, 0.0, sd) + (
            1.0 - MIXTURE_NORMAL_WEIGHT
        ) * exp_part
    else:
        if heavy_tailed and example is not ExampleId.EX1:
            raise ArgumentError("The heavy-tailed variant only exists for Example 1")
        mean, scale = _conditional_location_scale(example, x)
        if heavy_tailed:
            values = stats.cauchy.pdf(y_arr, mean, scale)
        else:
            values = stats.norm.pdf(y_arr, mean, scale)
    if np.ndim(y) == 0:
        return float(values)
    return values


def true_marginal_density(example: Union[ExampleId, str], x: ArrayLike) -> ArrayLike:
    """Exact design density f_X, vectorised over x."""
    example = ExampleId.parse(example)
    x_arr = np.asarray(x, dtype=float)
    if example.uniform_design:
        values = ((x_arr >= 0.0) & (x_arr <= 1.0)).astype(float)
    else:
        values = sum(
            weight * stats.norm.pdf(x_arr, mean, sd) for weight, mean, sd in DESIGN_MIXTURE
        )
    if np.ndim(x) == 0:
        return float(values)
    return values


def conditional_window(
    example: Union[ExampleId, str], x: float, heavy_tailed: bool = False
) -> Tuple[float, float]:
    """Interval of y outside which f(x, .) is negligible."""
    example = ExampleId.parse(example)
    if example.mixture_response:
        sd = _mixture_normal_sd(x)
        exp_sd = 1.0 / MIXTURE_EXP_RATE
        low = min(-GAUSSIAN_WINDOW_SDS * sd, MIXTURE_EXP_SHIFT)
        high = max(GAUSSIAN_WINDOW_SDS * sd, MIXTURE_EXP_SHIFT + GAUSSIAN_WINDOW_SDS * exp_sd)
        return low, high
    mean, scale = _conditional_location_scale(example, x)
    width = (CAUCHY_WINDOW_SCALES if heavy_tailed else GAUSSIAN_WINDOW_SDS) * scale
    return mean - width, mean + width
