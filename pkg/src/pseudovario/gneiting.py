"""
Gneiting-type space-time covariance models.

Three variants are provided:

* :class:`OriginalGneiting`, the univariate class
  ``psi(u**2)**(-d/2) * phi(||h||**2 / psi(u**2))``;
* :class:`MultivariateExtendedGneiting`,
  ``G_ij(h, u) = (1 + gamma_ij(u))**(-r) * phi(||h||**2 / (1 + gamma_ij(u)))``
  for a pseudo-variogram ``gamma`` and ``r >= d/2``;
* :class:`StieltjesGneiting`,
  ``G_ij(h, u) = f_ij(u)**(-r) * S_ij(g_ij(h) / f_ij(u))`` for generalized
  Stieltjes functions of order ``lam <= r``.

Models evaluate batches: ``evaluate(h_lags, u_lags)`` with shapes ``(k, d)``
and ``(k, l)`` returns ``(k, m, m)``.
"""

from __future__ import annotations

import numpy as np

from .definiteness import _blocks_to_matrix, _check_symmetric, as_points
from .models import BoxStieltjes, MatrixFunction, as_lags

__all__ = [
    "OriginalGneiting",
    "MultivariateExtendedGneiting",
    "StieltjesGneiting",
    "OffsetFunction",
    "eval_gneiting",
    "assemble_spacetime_cov",
]


class OffsetFunction(MatrixFunction):
    """``c * 1 1^T + gamma``: a strictly positive CND function when ``c > 0``."""

    def __init__(self, base: MatrixFunction, c: float):
        if not c > 0:
            raise ValueError("offset must be positive")
        self.base = base
        self.c = float(c)
        self.m, self.dim = base.m, base.dim

    def evaluate(self, lags) -> np.ndarray:
        return self.c + self.base.evaluate(lags)

    def to_config(self) -> dict:
        return {"variant": "Offset", "c": self.c, "base": self.base.to_config()}


def _sqnorm(h: np.ndarray) -> np.ndarray:
    return np.sum(np.square(h), axis=-1)


class OriginalGneiting:
    m = 1
    temporal_dim = 1

    def __init__(self, phi, psi, d: int):
        if not float(psi(0.0)) > 0:
            raise ValueError("psi(0) must be positive")
        self.phi, self.psi, self.d = phi, psi, int(d)
        self.spatial_dim = self.d

    def evaluate(self, h, u) -> np.ndarray:
        h = as_lags(h, self.spatial_dim)
        u = as_lags(u, 1)
        p = self.psi(u[:, 0] ** 2)
        out = p ** (-self.d / 2) * self.phi(_sqnorm(h) / p)
        return out[:, None, None]

    def to_config(self) -> dict:
        return {"variant": "Original", "phi": self.phi.to_config(),
                "psi": self.psi.to_config(), "d": self.d}


class MultivariateExtendedGneiting:
    def __init__(self, phi, gamma: MatrixFunction, r: float, d: int):
        if r < d / 2:
            raise ValueError(f"r must be >= d/2 = {d / 2}, got {r}")
        self.phi, self.gamma, self.r, self.d = phi, gamma, float(r), int(d)
        self.m = gamma.m
        self.spatial_dim = self.d
        self.temporal_dim = gamma.dim

    def evaluate(self, h, u) -> np.ndarray:
        h = as_lags(h, self.spatial_dim)
        u = as_lags(u, self.temporal_dim)
        denom = 1.0 + self.gamma.evaluate(u)
        return denom ** (-self.r) * self.phi(_sqnorm(h)[:, None, None] / denom)

    def to_config(self) -> dict:
        return {"variant": "MultivariateExtended", "phi": self.phi.to_config(),
                "gamma": self.gamma.to_config(), "r": self.r, "d": self.d}


class StieltjesGneiting:
    """``f_ij(u)**(-r) * S_ij(g_ij(h) / f_ij(u))`` with ``r >= order of S``.

    ``g`` must be non-negative and CND on ``R^d``; ``f`` strictly positive and
    CND on ``R^l``. :class:`OffsetFunction` builds a valid ``f`` from any
    catalog pseudo-variogram.
    """

    def __init__(self, S: BoxStieltjes, g: MatrixFunction, f: MatrixFunction, r: float):
        if r < S.order:
            raise ValueError(f"r must be >= order {S.order}, got {r}")
        if not (S.m == g.m == f.m):
            raise ValueError("S, g and f must share m")
        self.S, self.g, self.f, self.r = S, g, f, float(r)
        self.m = S.m
        self.spatial_dim = g.dim
        self.temporal_dim = f.dim
        self.d = g.dim

    def evaluate(self, h, u) -> np.ndarray:
        G = self.g.evaluate(as_lags(h, self.spatial_dim))
        F = self.f.evaluate(as_lags(u, self.temporal_dim))
        if np.any(F <= 0):
            raise ValueError(f"f must be strictly positive; found {F.min():.6g}")
        if np.any(G < 0):
            raise ValueError(f"g must be non-negative; found {G.min():.6g}")
        return F ** (-self.r) * self.S.evaluate_entries(G / F)

    def to_config(self) -> dict:
        return {"variant": "Stieltjes", "S": self.S.to_config(), "g": self.g.to_config(),
                "f": self.f.to_config(), "r": self.r}


def eval_gneiting(model, i: int, j: int, h, u) -> float:
    """Pointwise ``G_ij(h, u)`` with zero-based component indices."""
    if not (0 <= i < model.m and 0 <= j < model.m):
        raise IndexError(f"component index out of range for m={model.m}")
    h = np.atleast_1d(np.asarray(h, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if h.shape != (model.spatial_dim,) or u.shape != (model.temporal_dim,):
        raise ValueError("dimension mismatch between lags and model")
    return float(model.evaluate(h[None], u[None])[0, i, j])


def assemble_spacetime_cov(model, spatial, temporal, check_symmetry: bool = True) -> np.ndarray:
    """Covariance matrix over the product grid ``spatial x temporal``.

    Rows are ordered by ``(space, time, component)`` with the component
    varying fastest, matching :func:`pseudovario.definiteness.assemble_gamma_block`.
    """
    xs = as_points(spatial, model.spatial_dim)
    ts = as_points(temporal, model.temporal_dim)
    ns, nt = xs.shape[0], ts.shape[0]
    nodes_x = np.repeat(xs, nt, axis=0)
    nodes_t = np.tile(ts, (ns, 1))
    n = ns * nt
    h = (nodes_x[:, None, :] - nodes_x[None, :, :]).reshape(n * n, -1)
    u = (nodes_t[:, None, :] - nodes_t[None, :, :]).reshape(n * n, -1)
    M = _blocks_to_matrix(model.evaluate(h, u).reshape(n, n, model.m, model.m))
    if check_symmetry:
        _check_symmetric(M)
    return M
