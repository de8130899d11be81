"""Numeric primitives: bracketed golden-section search and kink-aware quadrature."""
from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate

from core.config import TOLERANCES
from core.errors import QuadratureFailure

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARED = (3 - math.sqrt(5)) / 2

QUAD_LIMIT = 200


def golden_section_max(
    func: Callable[[np.ndarray], np.ndarray],
    a: np.ndarray | float,
    b: np.ndarray | float,
    tol: float = TOLERANCES.golden_section,
) -> Tuple[np.ndarray, np.ndarray]:
    """Maximize a unimodal function on every bracket [a_k, b_k] at once.

    ``func`` receives an array of abscissae (one per bracket) and returns the
    values at them. Returns the abscissa of the best bracket endpoint or trial point
    together with its value, so a maximum sitting on a bracket edge is kept.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float)).copy()
    b = np.atleast_1d(np.asarray(b, dtype=float)).copy()
    lo, hi = a.copy(), b.copy()
    h = b - a
    widest = float(h.max()) if h.size else 0.0
    if widest > tol:
        steps = int(math.ceil(math.log(tol / widest) / math.log(INV_PHI)))
        c = a + INV_PHI_SQUARED * h
        d = a + INV_PHI * h
        yc = func(c)
        yd = func(d)
        for _ in range(max(steps - 1, 0)):
            left = yc > yd
            h = INV_PHI * h
            # Keep [a, d] where the left trial point wins, [c, b] otherwise.
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            new_c = a + INV_PHI_SQUARED * h
            new_d = a + INV_PHI * h
            c, d = np.where(left, new_c, d), np.where(left, c, new_d)
            trial = np.where(left, c, d)
            fresh = func(trial)
            yc, yd = np.where(left, fresh, yd), np.where(left, yc, fresh)
        interior = np.where(yc > yd, c, d)
    else:
        interior = (a + b) / 2
    candidates = np.stack([lo, interior, hi])
    values = np.stack([func(row) for row in candidates])
    best = np.argmax(values, axis=0)
    cols = np.arange(candidates.shape[1])
    return candidates[best, cols], values[best, cols]


def golden_section_min(
    func: Callable[[np.ndarray], np.ndarray],
    a: np.ndarray | float,
    b: np.ndarray | float,
    tol: float = TOLERANCES.golden_section,
) -> Tuple[np.ndarray, np.ndarray]:
    x, value = golden_section_max(lambda t: -func(t), a, b, tol)
    return x, -value


def golden_section_max_scalar(
    func: Callable[[float], float], a: float, b: float, tol: float = TOLERANCES.golden_section
) -> Tuple[float, float]:
    x, value = golden_section_max(
        lambda t: np.array([func(float(v)) for v in t]), a, b, tol
    )
    return float(x[0]), float(value[0])


def piece_edges(breakpoints: Iterable[float], lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    inner = [float(v) for v in breakpoints if lo < v < hi]
    return np.unique(np.asarray([lo, *inner, hi], dtype=float))


def integrate_kinked(
    func: Callable[[float], float],
    breakpoints: Iterable[float],
    tol: float = TOLERANCES.quadrature,
) -> float:
    """Integrate ``func`` over [0, 1], splitting at every kink.

    Each smooth piece goes through ``scipy.integrate.quad``; the summed error
    estimate must stay within ``tol``.
    """
    edges = piece_edges(breakpoints)
    pieces = len(edges) - 1
    total = 0.0
    error = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for left, right in zip(edges[:-1], edges[1:]):
            try:
                value, err = integrate.quad(
                    func, left, right, epsabs=tol / (4 * pieces), epsrel=0.0, limit=QUAD_LIMIT
                )
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(f"Quadrature failed on [{left:g}, {right:g}]: {exc}") from exc
            total += value
            error += err
    if error > tol:
        raise QuadratureFailure(f"Quadrature error {error:.3g} exceeds {tol:g}")
    return total
