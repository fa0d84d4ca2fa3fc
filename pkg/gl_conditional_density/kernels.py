"""Gaussian kernel helpers shared by the marginal and conditional estimators."""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy import integrate

from .const import GAUSSIAN_L1_NORM, GAUSSIAN_L2_NORM_1D, GAUSSIAN_L2_NORM_2D

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian(u: np.ndarray) -> np.ndarray:
    """Standard normal density."""
    u = np.asarray(u, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def scaled_gaussian(u: np.ndarray, h: float) -> np.ndarray:
    """K_h(u) = K(u / h) / h for the standard Gaussian K."""
    return gaussian(np.asarray(u, dtype=float) / h) / h


def convolved_bandwidth(h: float, h_prime: float) -> float:
    """Bandwidth of K_h * K_h' for Gaussian K (root sum of squares)."""
    return math.hypot(h, h_prime)


def kernel_density(points: np.ndarray, data: np.ndarray, h: float) -> np.ndarray:
    """Kernel density estimate (1/n) sum K_h(t - X_i) at every point t."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    data = np.asarray(data, dtype=float)
    values = scaled_gaussian(points[:, None] - data[None, :], h)
    return values.mean(axis=1)


def numerical_kernel_norms() -> Tuple[float, float, float]:
    """Return (||K||_1, ||K||_2 in 1-d, ||K||_2 of the 2-d product kernel) by quadrature.

    These mirror the analytic constants used in the penalties and exist so
    that the constants can be checked independently.
    """
    l1, _ = integrate.quad(lambda u: abs(gaussian(u)), -np.inf, np.inf, epsabs=1e-13)
    sq, _ = integrate.quad(lambda u: gaussian(u) ** 2, -np.inf, np.inf, epsabs=1e-13)
    return l1, math.sqrt(sq), sq


def analytic_kernel_norms() -> Tuple[float, float, float]:
    """Analytic counterpart of numerical_kernel_norms."""
    return GAUSSIAN_L1_NORM, GAUSSIAN_L2_NORM_1D, GAUSSIAN_L2_NORM_2D
