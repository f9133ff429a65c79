"""
Maps between conditionally negative definite and positive definite
matrix-valued functions.

All transforms act entrywise on a base function ``gamma`` and return new
matrix-valued function objects that plug into :mod:`pseudovario.definiteness`.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .definiteness import check_pd, random_configs
from .models import Composed, MatrixFunction, as_lags

__all__ = [
    "SchoenbergTransform",
    "LaplaceTransform",
    "GeneralLaplaceTransform",
    "InverseSchoenbergResidual",
    "HadamardProduct",
    "CkKernel",
    "schoenberg_map",
    "laplace_map",
    "general_laplace_map",
    "inverse_schoenberg_residual",
    "bernstein_compose",
    "build_ck_kernel",
    "converse_schoenberg_search",
]


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return float(value)


class SchoenbergTransform(MatrixFunction):
    """``h -> exp(-t gamma_ij(h))``."""

    def __init__(self, base: MatrixFunction, t: float):
        self.base = base
        self.t = _positive("t", t)
        self.m, self.dim = base.m, base.dim

    def evaluate(self, lags) -> np.ndarray:
        return np.exp(-self.t * self.base.evaluate(lags))


class LaplaceTransform(MatrixFunction):
    """``h -> (1 + t gamma_ij(h))**(-lam)``; requires non-negative entries."""

    def __init__(self, base: MatrixFunction, t: float, lam: float):
        self.base = base
        self.t = _positive("t", t)
        self.lam = _positive("lam", lam)
        self.m, self.dim = base.m, base.dim

    def evaluate(self, lags) -> np.ndarray:
        G = self.base.evaluate(lags)
        if np.any(G < 0):
            raise ValueError("Laplace transforms need gamma_ij >= 0 everywhere; "
                             f"found {G.min():.6g}")
        return (1.0 + self.t * G) ** (-self.lam)


class GeneralLaplaceTransform(MatrixFunction):
    """Monte Carlo Laplace transform ``h -> E exp(-S t gamma_ij(h))``, ``S ~ mu``.

    The ``draws`` samples of ``S`` are taken once at construction. Repeated
    values are merged with their multiplicity, so a point-mass measure gives
    exactly the Schoenberg transform at ``t * c``.
    """

    def __init__(self, base: MatrixFunction, t: float, measure, draws: int,
                 rng: np.random.Generator):
        if draws < 1:
            raise ValueError("draws must be >= 1")
        self.base = base
        self.t = _positive("t", t)
        self.m, self.dim = base.m, base.dim
        s = np.atleast_1d(np.asarray(measure.sample(rng, size=draws), dtype=float))
        self.atoms, counts = np.unique(s, return_counts=True)
        self.weights = counts / draws
        self.draws = draws

    def _terms(self, lags):
        G = self.base.evaluate(lags)
        if np.any(G < 0):
            raise ValueError("Laplace transforms need gamma_ij >= 0 everywhere")
        return np.exp(-self.t * self.atoms[:, None, None, None] * G[None])

    def evaluate(self, lags) -> np.ndarray:
        return np.tensordot(self.weights, self._terms(lags), axes=1)

    def standard_error(self, lags) -> np.ndarray:
        terms = self._terms(lags)
        mean = np.tensordot(self.weights, terms, axes=1)
        var = np.tensordot(self.weights, (terms - mean) ** 2, axes=1)
        if self.draws > 1:
            var = var * self.draws / (self.draws - 1)
        return np.sqrt(var / self.draws)


class InverseSchoenbergResidual(MatrixFunction):
    """``h -> (1 - exp(-t gamma_ij(h))) / t``, which tends to ``gamma`` as ``t -> 0``."""

    def __init__(self, base: MatrixFunction, t: float):
        self.base = base
        self.t = _positive("t", t)
        self.m, self.dim = base.m, base.dim

    def evaluate(self, lags) -> np.ndarray:
        return -np.expm1(-self.t * self.base.evaluate(lags)) / self.t


class HadamardProduct(MatrixFunction):
    def __init__(self, first: MatrixFunction, second: MatrixFunction):
        if (first.m, first.dim) != (second.m, second.dim):
            raise ValueError("factors must share m and dim")
        self.first, self.second = first, second
        self.m, self.dim = first.m, first.dim

    def evaluate(self, lags) -> np.ndarray:
        return self.first.evaluate(lags) * self.second.evaluate(lags)


class CkKernel:
    """Kernel ``C_k(x, y)_ij = gamma_ik(x) + gamma_jk(y) - gamma_ij(x - y) - [flag] gamma_kk(0)``.

    Positive definite for every ``k`` exactly when ``gamma`` is conditionally
    negative definite. With ``k = 0`` and ``gamma_00(0) = 0`` this is the
    covariance of ``Z_i(x) - Z_0(0)`` for a field with pseudo-variogram
    ``gamma``.
    """

    def __init__(self, base: MatrixFunction, k: int = 0, subtract_diagonal: bool = True):
        if not 0 <= k < base.m:
            raise IndexError(f"k must lie in [0, {base.m}), got {k}")
        self.base = base
        self.k = k
        self.subtract_diagonal = subtract_diagonal
        self.m, self.dim = base.m, base.dim
        self._offset = float(base(np.zeros(base.dim))[k, k]) if subtract_diagonal else 0.0

    def evaluate_pairs(self, xs, ys) -> np.ndarray:
        xs = as_lags(xs, self.dim)
        ys = as_lags(ys, self.dim)
        gx = self.base.evaluate(xs)[:, :, self.k]         # gamma_ik(x)
        gy = self.base.evaluate(ys)[:, :, self.k]         # gamma_jk(y)
        return (gx[:, :, None] + gy[:, None, :] - self.base.evaluate(xs - ys)
                - self._offset)

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluate_pairs(np.atleast_1d(x)[None], np.atleast_1d(y)[None])[0]


def schoenberg_map(gamma: MatrixFunction, t: float) -> SchoenbergTransform:
    return SchoenbergTransform(gamma, t)


def laplace_map(gamma: MatrixFunction, t: float, lam: float) -> LaplaceTransform:
    return LaplaceTransform(gamma, t, lam)


def general_laplace_map(gamma: MatrixFunction, t: float, measure, draws: int,
                        rng: np.random.Generator) -> GeneralLaplaceTransform:
    return GeneralLaplaceTransform(gamma, t, measure, draws, rng)


def inverse_schoenberg_residual(gamma: MatrixFunction, t: float) -> InverseSchoenbergResidual:
    return InverseSchoenbergResidual(gamma, t)


def bernstein_compose(g, gamma: MatrixFunction, require_pseudo: bool = True) -> Composed:
    """Compose a Bernstein function entrywise with ``gamma``.

    With ``require_pseudo`` the result is meant to be a pseudo-variogram
    again, which needs ``g(0) = 0``.
    """
    if require_pseudo and float(g(0.0)) != 0.0:
        raise ValueError(f"g(0) = {float(g(0.0))} != 0; composition is not a pseudo-variogram")
    return Composed(g, gamma)


def build_ck_kernel(gamma: MatrixFunction, k: int = 0, subtract_diagonal: bool = True) -> CkKernel:
    return CkKernel(gamma, k, subtract_diagonal)


def converse_schoenberg_search(gamma: MatrixFunction, ts=None, configs=None,
                               rng: Optional[np.random.Generator] = None):
    """Look for ``t`` and a configuration where ``exp(-t gamma)`` is not positive definite.

    Returns ``(t, report)`` for the first failure found, or ``None``. A hit
    is evidence that ``gamma`` is not conditionally negative definite.
    """
    if ts is None:
        ts = [1e-3, 1e-2, 1e-1, 1.0, 10.0]
    if configs is None:
        rng = np.random.default_rng(0) if rng is None else rng
        grids = [np.linspace(0, span, n).reshape(-1, 1) * np.eye(gamma.dim)[:1]
                 for span in (1.0, 3.0, 10.0) for n in (4, 8, 12)]
        configs = grids + random_configs(rng, 20, gamma.dim, max_points=12, min_points=3)
    for t in ts:
        f = SchoenbergTransform(gamma, t)
        for pts in configs:
            rep = check_pd(f, pts)
            if not rep.passed:
                return t, rep
    return None
