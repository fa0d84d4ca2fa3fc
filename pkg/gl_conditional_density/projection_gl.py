"""Adaptive least-squares projection estimation on piecewise Legendre bases.

The x system lives on [x - 2A, x + 2A] split into 2^m1 cells, the y system on
B split into 2^m2 cells; both carry Legendre polynomials up to degrees r and
r_y. Only the Gram block of the x cell containing the evaluation point is
ever assembled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import legendre
from scipy import special

from .const import (
    DEFAULT_DEGREE_X,
    DEFAULT_DEGREE_Y,
    DEFAULT_PROJECTION_A,
    MIN_ETA,
    MIN_GRID_SAMPLE_SIZE,
    RELAXED_MAX_DIM_X_FRACTION,
    RELAXED_MIN_DIM_X,
    RELAXED_MIN_DIM_Y,
    Y_RANGE_PADDING,
)
from .exceptions import ArgumentError, ConfigurationError
from .marginal import MarginalEstimate, default_k_n
from .sampling import ObservationSet
from .selection import SelectionTrace, select_minimum

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ModelIndex:
    """Dyadic resolutions (m1, m2) of the x and y systems."""

    m1: int
    m2: int

    def __post_init__(self) -> None:
        """Resolutions are nonnegative integers."""
        for value in (self.m1, self.m2):
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise ArgumentError(f"Model resolutions must be nonnegative integers, got ({self.m1}, {self.m2})")

    def meet(self, other: "ModelIndex") -> "ModelIndex":
        """m ^ m' = (min(m1, m1'), min(m2, m2'))."""
        return ModelIndex(min(self.m1, other.m1), min(self.m2, other.m2))

    def dimensions(self, spec: "BasisSpec") -> Tuple[int, int]:
        """(D_m1, D_m2)."""
        return (spec.r + 1) * 2**self.m1, (spec.r_y + 1) * 2**self.m2

    def as_dict(self) -> Dict[str, int]:
        """Plain representation."""
        return {"m1": self.m1, "m2": self.m2}


@dataclass(frozen=True)
class BasisSpec:
    """Geometry and degrees of the x and y systems."""

    A: float
    x_center: float
    y_low: float
    y_high: float
    r: int = DEFAULT_DEGREE_X
    r_y: int = DEFAULT_DEGREE_Y

    def __post_init__(self) -> None:
        """Validate the geometry."""
        if self.A <= 0:
            raise ArgumentError("A must be positive")
        if not self.y_high > self.y_low:
            raise ArgumentError(f"Empty y range B=[{self.y_low}, {self.y_high}]")
        if self.r < 0 or self.r_y < 0:
            raise ArgumentError("Polynomial degrees must be nonnegative")

    @classmethod
    def from_observations(
        cls,
        obs: ObservationSet,
        x: float,
        A: float = DEFAULT_PROJECTION_A,
        r: int = DEFAULT_DEGREE_X,
        r_y: int = DEFAULT_DEGREE_Y,
        y_range: Optional[Tuple[float, float]] = None,
    ) -> "BasisSpec":
        """Centre the x system at x; B is the padded range of the Y_i unless given."""
        if y_range is None:
            low, high = float(np.min(obs.y)), float(np.max(obs.y))
            pad = Y_RANGE_PADDING * (high - low) if high > low else 1.0
            y_range = (low - pad, high + pad)
        return cls(A=A, x_center=float(x), y_low=float(y_range[0]), y_high=float(y_range[1]), r=r, r_y=r_y)

    @property
    def B(self) -> Tuple[float, float]:
        """The y range."""
        return self.y_low, self.y_high

    @property
    def y_length(self) -> float:
        """|B|."""
        return self.y_high - self.y_low

    @property
    def phi1(self) -> float:
        """Bound constant of the x system: sum_j phi_j^2 <= phi1 D_m1."""
        return (self.r + 1) / (4.0 * self.A)

    @property
    def phi2(self) -> float:
        """Bound constant of the y system: sum_k psi_k^2 <= phi2 D_m2."""
        return (self.r_y + 1) / self.y_length

    def x_cell(self, m1: int, cell: int) -> Tuple[float, float]:
        """Left end and width of I_l; the cell starting at x_center is exact."""
        cells = 2**m1
        width = 4.0 * self.A / cells
        return self.x_center + (cell - 1 - cells / 2.0) * width, width

    def y_cell(self, m2: int, cell: int) -> Tuple[float, float]:
        """Left end and width of B_k."""
        width = self.y_length / 2**m2
        return self.y_low + (cell - 1) * width, width

    def x_cell_of(self, m1: int, u: float) -> int:
        """Index l of the cell containing u (the centre cell when u = x_center)."""
        if u == self.x_center:
            return 2 ** (m1 - 1) + 1 if m1 >= 1 else 1
        low = self.x_center - 2.0 * self.A
        if not low <= u <= self.x_center + 2.0 * self.A:
            raise ArgumentError(f"{u} lies outside [x - 2A, x + 2A]")
        cells = 2**m1
        return min(int(math.floor((u - low) / (4.0 * self.A / cells))) + 1, cells)

    def compatible_with(self, other: "BasisSpec") -> bool:
        """True when two fits live in the same family of spaces."""
        return (
            self.A == other.A
            and self.x_center == other.x_center
            and self.B == other.B
            and self.r == other.r
            and self.r_y == other.r_y
        )


def _legendre_piece(left: float, width: float, degree: int, u: np.ndarray, indicator: bool = True) -> np.ndarray:
    """sqrt(1/width) sqrt(2d+1) P_d(T(u)) on [left, left + width)."""
    t = 2.0 * (u - left) / width - 1.0
    values = math.sqrt((2 * degree + 1) / width) * special.eval_legendre(degree, t)
    if indicator:
        inside = (u >= left) & (u < left + width)
        values = np.where(inside, values, 0.0)
    return values


def _as_output(values: np.ndarray, like) -> Union[float, np.ndarray]:
    return float(values) if np.ndim(like) == 0 else values


def legendre_basis_eval(spec: BasisSpec, m1: int, l: int, d: int, u) -> Union[float, np.ndarray]:
    """phi_{l,d}(u) of the x system."""
    if not 1 <= l <= 2**m1:
        raise ArgumentError(f"Cell index {l} outside 1..{2 ** m1}")
    if not 0 <= d <= spec.r:
        raise ArgumentError(f"Degree {d} outside 0..{spec.r}")
    left, width = spec.x_cell(m1, l)
    return _as_output(_legendre_piece(left, width, d, np.asarray(u, dtype=float)), u)


def y_basis_eval(spec: BasisSpec, m2: int, k: int, e: int, v) -> Union[float, np.ndarray]:
    """psi_{k,e}(v) of the y system (histograms when r_y = 0)."""
    if not 1 <= k <= 2**m2:
        raise ArgumentError(f"Cell index {k} outside 1..{2 ** m2}")
    if not 0 <= e <= spec.r_y:
        raise ArgumentError(f"Degree {e} outside 0..{spec.r_y}")
    left, width = spec.y_cell(m2, k)
    return _as_output(_legendre_piece(left, width, e, np.asarray(v, dtype=float)), v)


def _y_design(spec: BasisSpec, m2: int, ys: np.ndarray) -> np.ndarray:
    """Matrix psi_k(Y_i), columns ordered (cell, degree)."""
    cells = 2**m2
    width = spec.y_length / cells
    design = np.zeros((ys.size, cells * (spec.r_y + 1)), dtype=float)
    inside = (ys >= spec.y_low) & (ys < spec.y_high)
    rows = np.flatnonzero(inside)
    if rows.size == 0:
        return design
    cell = np.minimum(np.floor((ys[rows] - spec.y_low) / width).astype(int), cells - 1)
    t = 2.0 * (ys[rows] - (spec.y_low + cell * width)) / width - 1.0
    for e in range(spec.r_y + 1):
        design[rows, cell * (spec.r_y + 1) + e] = math.sqrt((2 * e + 1) / width) * special.eval_legendre(e, t)
    return design


def _min_eigenvalue(gram: np.ndarray) -> float:
    """Smallest eigenvalue; closed form up to 2x2."""
    size = gram.shape[0]
    if size == 1:
        return float(gram[0, 0])
    if size == 2:
        a, b, c = gram[0, 0], gram[0, 1], gram[1, 1]
        return float((a + c) / 2.0 - math.hypot((a - c) / 2.0, b))
    return float(np.linalg.eigvalsh(gram)[0])


@dataclass(frozen=True, eq=False)
class ProjectionFit:
    """Coefficient block of the x cell containing x, evaluable as a function of y."""

    model: ModelIndex
    spec: BasisSpec
    x: float
    cell_index: int
    coefficients: np.ndarray
    gram: np.ndarray
    gram_min_eig: float
    threshold: float
    thresholded: bool

    def x_values(self) -> np.ndarray:
        """phi_{l,d}(x) for d = 0..r."""
        left, width = self.spec.x_cell(self.model.m1, self.cell_index)
        point = np.array([self.x])
        inside = left <= self.x < left + width
        return np.array(
            [
                float(_legendre_piece(left, width, d, point, indicator=False)[0]) if inside else 0.0
                for d in range(self.spec.r + 1)
            ]
        )

    def section_coefficients(self) -> np.ndarray:
        """Coefficients of f_m(x, .) in the y basis."""
        return self.x_values() @ self.coefficients

    def evaluate(self, y) -> np.ndarray:
        """f_m(x, y) at every point of y."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        design = _y_design(self.spec, self.model.m2, y.ravel())
        return (design @ self.section_coefficients()).reshape(y.shape)

    def squared_norm(self) -> float:
        """Exact integral over y of the squared section."""
        return float(np.sum(self.section_coefficients() ** 2))

    def breakpoints(self) -> List[float]:
        """Cell edges of the y partition."""
        return np.linspace(self.spec.y_low, self.spec.y_high, 2**self.model.m2 + 1).tolist()

    def support_intervals(self) -> List[Tuple[float, float]]:
        """The section vanishes outside B."""
        return [self.spec.B]

    def resolution(self) -> float:
        """Polynomial pieces need no extra resolution."""
        return math.inf


def fit_projection(
    obs: ObservationSet,
    m: ModelIndex,
    spec: BasisSpec,
    x: float,
    delta_hat: float,
    eta: float,
) -> ProjectionFit:
    """Solve the block system G A = Z of the cell containing x, or return the zero fit."""
    if delta_hat <= 0:
        raise ArgumentError("delta_hat must be positive")
    if eta <= MIN_ETA:
        raise ArgumentError(f"eta must exceed {MIN_ETA}, got {eta}")
    cell = spec.x_cell_of(m.m1, x)
    left, width = spec.x_cell(m.m1, cell)
    n = obs.n
    xs = np.asarray(obs.x, dtype=float)
    rows = np.flatnonzero((xs >= left) & (xs < left + width))

    x_design = np.column_stack([_legendre_piece(left, width, d, xs[rows]) for d in range(spec.r + 1)])
    y_design = _y_design(spec, m.m2, np.asarray(obs.y, dtype=float)[rows])
    gram = x_design.T @ x_design / n
    cross = x_design.T @ y_design / n

    min_eig = _min_eigenvalue(gram)
    threshold = (1.0 + eta) ** (-0.4) * delta_hat
    _, d2 = m.dimensions(spec)
    if min_eig > threshold:
        coefficients = np.linalg.solve(gram, cross)
        thresholded = False
    else:
        coefficients = np.zeros((spec.r + 1, d2), dtype=float)
        thresholded = True
        _LOGGER.debug(
            "Model (%d, %d): min eigenvalue %.3g <= %.3g, zero fit", m.m1, m.m2, min_eig, threshold
        )
    return ProjectionFit(
        model=m,
        spec=spec,
        x=float(x),
        cell_index=cell,
        coefficients=coefficients,
        gram=gram,
        gram_min_eig=min_eig,
        threshold=threshold,
        thresholded=thresholded,
    )


def ratio_form_fit(obs: ObservationSet, m: ModelIndex, spec: BasisSpec, x: float) -> ProjectionFit:
    """Closed form for r = 0: a_k = sum_i phi(X_i) psi_k(Y_i) / sum_i phi(X_i)^2.

    No spectral threshold is applied; an empty cell gives the zero fit.
    """
    if spec.r != 0:
        raise ArgumentError("The ratio form only exists for r = 0")
    cell = spec.x_cell_of(m.m1, x)
    left, width = spec.x_cell(m.m1, cell)
    phi = _legendre_piece(left, width, 0, np.asarray(obs.x, dtype=float))
    psi = _y_design(spec, m.m2, np.asarray(obs.y, dtype=float))
    squared = float(np.sum(phi**2))
    if squared == 0.0:
        coefficients = np.zeros((1, psi.shape[1]))
    else:
        coefficients = (phi @ psi / squared)[None, :]
    gram_value = squared / obs.n
    return ProjectionFit(
        model=m,
        spec=spec,
        x=float(x),
        cell_index=cell,
        coefficients=coefficients,
        gram=np.array([[gram_value]]),
        gram_min_eig=gram_value,
        threshold=0.0,
        thresholded=squared == 0.0,
    )


def sigma_projection(
    m: ModelIndex,
    delta_hat: float,
    sup_hat: float,
    n: int,
    eta: float,
    spec: BasisSpec,
    simplified: bool = True,
) -> float:
    """sigma(m) = chi sqrt(D_m1 D_m2 / (delta_hat n)).

    chi^2 = (1+eta)^2 4 phi1 phi2 (r+1) sup_hat / delta_hat in general, and
    chi = (1+eta) sqrt(4 phi1 phi2) when r = 0 and the simplified penalty is on.
    """
    if delta_hat <= 0 or sup_hat <= 0 or n <= 0:
        raise ArgumentError("sigma(m) needs positive delta_hat, sup_hat and n")
    if eta <= MIN_ETA:
        raise ArgumentError(f"eta must exceed {MIN_ETA}, got {eta}")
    if simplified and spec.r == 0:
        chi = (1.0 + eta) * math.sqrt(4.0 * spec.phi1 * spec.phi2)
    else:
        chi = (1.0 + eta) * math.sqrt(4.0 * spec.phi1 * spec.phi2 * (spec.r + 1) * sup_hat / delta_hat)
    d1, d2 = m.dimensions(spec)
    return chi * math.sqrt(d1 * d2 / (delta_hat * n))


def l2_distance_y_pp(a: ProjectionFit, b: ProjectionFit, x: Optional[float] = None) -> float:
    """Exact L2(dy) distance of two sections, by Gauss-Legendre on the finer partition."""
    if not a.spec.compatible_with(b.spec):
        raise ArgumentError("Fits come from different basis systems")
    if a.x != b.x or (x is not None and a.x != x):
        raise ArgumentError("Fits must be sections at the same x")
    spec = a.spec
    cells = 2 ** max(a.model.m2, b.model.m2)
    width = spec.y_length / cells
    nodes, weights = legendre.leggauss(spec.r_y + 1)
    lefts = spec.y_low + width * np.arange(cells)
    points = (lefts[:, None] + width * (nodes[None, :] + 1.0) / 2.0).ravel()
    gaps = a.evaluate(points) - b.evaluate(points)
    squared = float(np.sum(np.tile(weights, cells) * gaps**2) * width / 2.0)
    return math.sqrt(max(squared, 0.0))


@dataclass(frozen=True)
class ModelGrid:
    """Candidate models with a record of relaxed axes."""

    models: Tuple[ModelIndex, ...]
    n: int
    delta_hat: float
    relaxed_x: bool = False
    relaxed_y: bool = False

    def __post_init__(self) -> None:
        """A grid is never empty."""
        if not self.models:
            raise ConfigurationError("Model grid is empty")

    @property
    def relaxed(self) -> bool:
        """True when an axis fell back to the relaxed range."""
        return self.relaxed_x or self.relaxed_y

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self) -> Iterator[ModelIndex]:
        return iter(self.models)


def _dyadic_levels(factor: int, low: float, high: float) -> List[int]:
    """Levels m with low <= factor * 2^m <= high."""
    levels = []
    m = 0
    while factor * 2**m <= high:
        if factor * 2**m >= low:
            levels.append(m)
        m += 1
    return levels


def build_model_grid(
    n: int,
    delta_hat: float,
    spec: BasisSpec,
    k_n: Optional[float] = None,
) -> ModelGrid:
    """Dyadic models inside the dimension bounds, relaxing an axis whose interval is empty.

    A relaxed x axis keeps the lower bound D_m1 >= k_n (r + 1), so x cells stay
    at most 4A / k_n wide, and only moves the upper bound to n / 4.
    """
    if n < MIN_GRID_SAMPLE_SIZE:
        raise ConfigurationError(f"Sample size {n} is too small for a model grid")
    if delta_hat <= 0:
        raise ArgumentError("delta_hat must be positive")
    log_n = math.log(n)
    k = k_n if k_n is not None else default_k_n(n)

    min_dim_x = k * (spec.r + 1)
    max_dim_x = RELAXED_MAX_DIM_X_FRACTION * n
    levels_x = _dyadic_levels(spec.r + 1, min_dim_x, delta_hat * n / log_n**3)
    levels_y = _dyadic_levels(spec.r_y + 1, log_n**2, n)
    relaxed_x = not levels_x
    relaxed_y = not levels_y
    if relaxed_x:
        levels_x = (
            _dyadic_levels(spec.r + 1, min_dim_x, max_dim_x)
            or _dyadic_levels(spec.r + 1, RELAXED_MIN_DIM_X, max_dim_x)
            or [0]
        )
    if relaxed_y:
        levels_y = _dyadic_levels(spec.r_y + 1, RELAXED_MIN_DIM_Y, n) or [0]
    if relaxed_x or relaxed_y:
        _LOGGER.warning("Model dimension bounds empty at n=%d (x relaxed: %s, y relaxed: %s)", n, relaxed_x, relaxed_y)

    models = tuple(ModelIndex(m1, m2) for m1 in levels_x for m2 in levels_y)
    _LOGGER.debug("Model grid: %d models at n=%d", len(models), n)
    return ModelGrid(models=models, n=n, delta_hat=delta_hat, relaxed_x=relaxed_x, relaxed_y=relaxed_y)


def _model_tie_key(spec: BasisSpec):
    def key(m: ModelIndex):
        d1, d2 = m.dimensions(spec)
        return (d1 * d2, m.m1, m.m2)

    return key


def gl_select_model(
    obs: ObservationSet,
    fX: MarginalEstimate,
    grid: ModelGrid,
    spec: BasisSpec,
    x: float,
    eta: float,
    simplified_penalty: bool = True,
) -> Tuple[ProjectionFit, SelectionTrace[ModelIndex]]:
    """Goldenshluger-Lepski choice m = argmin{A(m) + sigma(m)} with the m ^ m' device."""
    models = tuple(grid)
    if not models:
        raise ConfigurationError("Model grid is empty")
    fits: Dict[ModelIndex, ProjectionFit] = {}

    def fit(model: ModelIndex) -> ProjectionFit:
        if model not in fits:
            fits[model] = fit_projection(obs, model, spec, x, fX.delta_hat, eta)
        return fits[model]

    sigmas = [
        sigma_projection(m, fX.delta_hat, fX.sup_hat, obs.n, eta, spec, simplified=simplified_penalty)
        for m in models
    ]
    a_values = []
    for m in models:
        excess = [
            l2_distance_y_pp(fit(m_prime), fit(m_prime.meet(m)), x) - sigma_prime
            for m_prime, sigma_prime in zip(models, sigmas)
        ]
        a_values.append(max(max(excess), 0.0))

    # zero fits compete only when every model is thresholded
    trace = select_minimum(
        models,
        sigmas,
        a_values,
        tie_key=_model_tie_key(spec),
        eligible=lambda model: not fit(model).thresholded,
    )
    chosen = fit(trace.chosen)
    if chosen.thresholded:
        _LOGGER.warning("Selected model (%d, %d) is thresholded to zero", trace.chosen.m1, trace.chosen.m2)
    _LOGGER.info(
        "Projection GL at x=%.4f: selected m=(%d, %d) among %d models", x, trace.chosen.m1, trace.chosen.m2, len(models)
    )
    return chosen, trace
