"""
Model catalogs: univariate variograms, stationary covariances, matrix-valued
pseudo-variograms that are valid by construction, and the scalar function
families (completely monotone, Bernstein, generalized Stieltjes) used by the
transforms and the space-time models.

Every matrix-valued object exposes ``evaluate(lags)`` which maps an array of
``k`` lags of shape ``(k, dim)`` to an array of shape ``(k, m, m)``. Component
indices are zero-based throughout the Python API.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "PowerVariogram",
    "ExponentialCovariance",
    "ExpCM",
    "InversePowerCM",
    "PowerBernstein",
    "LogBernstein",
    "BoundedExpBernstein",
    "AffineBernstein",
    "BernsteinRepresentation",
    "BoxStieltjes",
    "MatrixFunction",
    "PseudoVariogramModel",
    "Shift",
    "NoisyCommon",
    "LMCFactor",
    "DelayedLMC",
    "Composed",
    "Tabulated",
    "ConstantFunction",
    "eval_pseudo_variogram",
    "eval_scalar",
    "sample_laplace_measure",
]


def as_lags(lags, dim: int) -> np.ndarray:
    """Coerce ``lags`` to a float array of shape ``(k, dim)``.

    A 1-D input is read as ``k`` scalar lags when ``dim == 1`` and as a
    single lag vector otherwise.
    """
    arr = np.asarray(lags, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"lags must have shape (k, {dim}), got {np.shape(lags)}")
    return arr


def _as_lag(h, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(h, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"lag must be a vector of length {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("lag must be finite")
    return arr


def _check_nonneg(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("argument must be non-negative")
    return x


# ---------------------------------------------------------------------------
# univariate building blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerVariogram:
    """Power variogram ``c * ||h||**alpha`` with ``alpha`` in (0, 2].

    ``scale == 0`` is accepted and yields the zero variogram.
    """

    scale: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be finite and >= 0, got {self.scale}")
        if not (0 < self.exponent <= 2):
            raise ValueError(f"exponent must lie in (0, 2], got {self.exponent}")

    def evaluate(self, lags: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(np.square(lags), axis=-1))
        return self.scale * r ** self.exponent

    def to_config(self) -> dict:
        return {"variant": "Power", "scale": self.scale, "exponent": self.exponent}


@dataclass(frozen=True)
class ExponentialCovariance:
    """Stationary covariance ``sill * exp(-||h|| / range)``."""

    sill: float = 1.0
    range: float = 1.0

    def __post_init__(self):
        if not self.sill > 0:
            raise ValueError("sill must be positive")
        if not self.range > 0:
            raise ValueError("range must be positive")

    def evaluate(self, lags: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(np.square(lags), axis=-1))
        return self.sill * np.exp(-r / self.range)

    def to_config(self) -> dict:
        return {"variant": "Exponential", "sill": self.sill, "range": self.range}


# ---------------------------------------------------------------------------
# completely monotone functions with sampleable Laplace measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpCM:
    """``phi(x) = exp(-c x)``; representing measure is the point mass at ``c``."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")

    def __call__(self, x):
        return np.exp(-self.c * np.asarray(x, dtype=float))

    def sample(self, rng: np.random.Generator, size=None):
        # point mass: no draw is consumed from the stream
        if size is None:
            return float(self.c)
        return np.full(size, float(self.c))

    @property
    def measure_mean(self) -> float:
        return float(self.c)

    @property
    def is_degenerate(self) -> bool:
        return True

    def to_config(self) -> dict:
        return {"variant": "Exp", "c": self.c}


@dataclass(frozen=True)
class InversePowerCM:
    """``phi(x) = (1 + c x)**(-lam)``; measure is Gamma(shape=lam, rate=1/c)."""

    c: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    def __call__(self, x):
        return (1.0 + self.c * np.asarray(x, dtype=float)) ** (-self.lam)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.lam, self.c, size=size)

    @property
    def measure_mean(self) -> float:
        return self.lam * self.c

    @property
    def is_degenerate(self) -> bool:
        return False

    def to_config(self) -> dict:
        return {"variant": "InversePower", "c": self.c, "lam": self.lam}


# ---------------------------------------------------------------------------
# Bernstein functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernsteinRepresentation:
    """Levy-Khintchine data ``g(x) = a + b x + int (1 - exp(-x t)) nu(dt)``.

    ``nu`` is given by an optional density on ``(0, inf)`` plus point masses.
    """

    a: float
    b: float
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    atoms: tuple = ()


@dataclass(frozen=True)
class PowerBernstein:
    alpha: float = 0.5

    def __post_init__(self):
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must lie in (0, 1]")

    def __call__(self, x):
        return np.asarray(x, dtype=float) ** self.alpha

    def representation(self) -> BernsteinRepresentation:
        if self.alpha == 1:
            return BernsteinRepresentation(0.0, 1.0)
        alpha = self.alpha
        coef = alpha / special.gamma(1 - alpha)
        return BernsteinRepresentation(0.0, 0.0, lambda t: coef * t ** (-1 - alpha))

    def to_config(self) -> dict:
        return {"variant": "Power", "alpha": self.alpha}


@dataclass(frozen=True)
class LogBernstein:
    def __call__(self, x):
        return np.log1p(np.asarray(x, dtype=float))

    def representation(self) -> BernsteinRepresentation:
        return BernsteinRepresentation(0.0, 0.0, lambda t: np.exp(-t) / t)

    def to_config(self) -> dict:
        return {"variant": "Log"}


@dataclass(frozen=True)
class BoundedExpBernstein:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")

    def __call__(self, x):
        return -np.expm1(-self.c * np.asarray(x, dtype=float))

    def representation(self) -> BernsteinRepresentation:
        return BernsteinRepresentation(0.0, 0.0, atoms=((self.c, 1.0),))

    def to_config(self) -> dict:
        return {"variant": "BoundedExp", "c": self.c}


@dataclass(frozen=True)
class AffineBernstein:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be non-negative")

    def __call__(self, x):
        return self.a + self.b * np.asarray(x, dtype=float)

    def representation(self) -> BernsteinRepresentation:
        return BernsteinRepresentation(float(self.a), float(self.b))

    def to_config(self) -> dict:
        return {"variant": "Affine", "a": self.a, "b": self.b}


# ---------------------------------------------------------------------------
# generalized Stieltjes functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoxStieltjes:
    """Matrix of generalized Stieltjes functions of order ``order``.

    The Stieltjes measure of entry ``(i, j)`` has density
    ``B[i, j] * 1[v_lo <= v <= v_hi]``, which gives a closed form for
    ``S_ij(x) = a + int (x + v)**(-order) B_ij dv``.
    """

    order: float
    B: np.ndarray
    v_lo: float
    v_hi: float
    a: float = 0.0

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "B", B)
        if not self.order > 0:
            raise ValueError("order must be positive")
        if not (0 < self.v_lo < self.v_hi):
            raise ValueError("need 0 < v_lo < v_hi")
        if self.a < 0:
            raise ValueError("a must be non-negative")
        if B.shape[0] != B.shape[1]:
            raise ValueError("B must be square")
        if not np.allclose(B, B.T, rtol=0, atol=1e-12 * max(1.0, np.abs(B).max())):
            raise ValueError("B must be symmetric")
        if np.linalg.eigvalsh(B).min() < -1e-12 * max(1.0, np.abs(B).max()):
            raise ValueError("B must be positive semi-definite")

    @property
    def m(self) -> int:
        return self.B.shape[0]

    def _box_integral(self, x):
        lam = self.order
        if lam == 1:
            return np.log((x + self.v_hi) / (x + self.v_lo))
        return ((x + self.v_lo) ** (1 - lam) - (x + self.v_hi) ** (1 - lam)) / (lam - 1)

    def entry(self, i: int, j: int, x):
        x = _check_nonneg(x)
        return self.a + self.B[i, j] * self._box_integral(x)

    def evaluate_entries(self, x: np.ndarray) -> np.ndarray:
        """Evaluate ``S_ij`` at ``x[..., i, j]`` for an array of shape ``(..., m, m)``."""
        x = _check_nonneg(x)
        return self.a + self.B * self._box_integral(x)

    def to_config(self) -> dict:
        return {"variant": "BoxDensity", "order": self.order, "B": self.B.tolist(),
                "v_lo": self.v_lo, "v_hi": self.v_hi, "a": self.a}


# ---------------------------------------------------------------------------
# matrix-valued functions
# ---------------------------------------------------------------------------

class MatrixFunction:
    """A function ``R^dim -> R^{m x m}`` evaluated in batches of lags."""

    m: int
    dim: int

    def evaluate(self, lags) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, h) -> np.ndarray:
        return self.evaluate(_as_lag(h, self.dim)[None, :])[0]

    def entry(self, i: int, j: int, h) -> float:
        if not (0 <= i < self.m and 0 <= j < self.m):
            raise IndexError(f"component index out of range for m={self.m}: ({i}, {j})")
        return float(self(h)[i, j])


class PseudoVariogramModel(MatrixFunction):
    """Catalog pseudo-variogram; each variant has an explicit Gaussian construction."""

    def to_config(self) -> dict:
        raise NotImplementedError


def _as_delays(delays, dim: Optional[int]) -> np.ndarray:
    arr = np.asarray(delays, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if (dim is None or dim == 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError("delays must be an (m, dim) array")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"delays must have {dim} columns")
    if not np.all(np.isfinite(arr)):
        raise ValueError("delays must be finite")
    return arr


class Shift(PseudoVariogramModel):
    """``gamma_ij(h) = gamma0(h + tau_i - tau_j)``.

    Realized by ``Z_i(x) = W(x + tau_i)`` for a single intrinsic field ``W``
    with variogram ``gamma0``.
    """

    def __init__(self, base: PowerVariogram, delays):
        self.base = base
        self.delays = _as_delays(delays, None)
        self.m, self.dim = self.delays.shape

    def evaluate(self, lags) -> np.ndarray:
        lags = as_lags(lags, self.dim)
        shifted = (lags[:, None, None, :] + self.delays[None, :, None, :]
                   - self.delays[None, None, :, :])
        return self.base.evaluate(shifted)

    def to_config(self) -> dict:
        return {"variant": "Shift", "base": self.base.to_config(),
                "delays": self.delays.tolist()}


class NoisyCommon(PseudoVariogramModel):
    """Common variogram plus independent white-noise nuggets per component.

    ``gamma_ij(h) = gamma0(h) + (s_i + s_j) / 2`` unless ``i == j`` and
    ``h`` is exactly zero.
    """

    def __init__(self, base: PowerVariogram, noise: Sequence[float], dim: int = 1):
        self.base = base
        self.noise = np.asarray(noise, dtype=float).ravel()
        if np.any(self.noise < 0) or not np.all(np.isfinite(self.noise)):
            raise ValueError("noise variances must be finite and >= 0")
        self.m = self.noise.size
        self.dim = int(dim)

    def evaluate(self, lags) -> np.ndarray:
        lags = as_lags(lags, self.dim)
        k = lags.shape[0]
        nugget = 0.5 * (self.noise[:, None] + self.noise[None, :])
        off = ~np.eye(self.m, dtype=bool)
        nonzero = np.any(lags != 0, axis=1)
        mask = off[None, :, :] | nonzero[:, None, None]
        out = np.broadcast_to(self.base.evaluate(lags)[:, None, None], (k, self.m, self.m))
        return out + np.where(mask, nugget[None, :, :], 0.0)

    def to_config(self) -> dict:
        return {"variant": "NoisyCommon", "base": self.base.to_config(),
                "noise": self.noise.tolist(), "dim": self.dim}


@dataclass(eq=False)
class LMCFactor:
    covariance: ExponentialCovariance
    loadings: np.ndarray
    delays: np.ndarray

    def __post_init__(self):
        self.loadings = np.asarray(self.loadings, dtype=float).ravel()
        self.delays = _as_delays(self.delays, None)
        if self.delays.shape[0] != self.loadings.size:
            raise ValueError("one delay per component is required")

    def to_config(self) -> dict:
        return {"covariance": self.covariance.to_config(),
                "loadings": self.loadings.tolist(), "delays": self.delays.tolist()}


class DelayedLMC(PseudoVariogramModel):
    """Linear model of coregionalization with component-specific delays.

    ``Z_i(x) = sum_k A_ik Y_k(x + tau_ik)`` for independent stationary ``Y_k``.
    """

    def __init__(self, factors: Sequence[LMCFactor]):
        if not factors:
            raise ValueError("at least one factor is required")
        self.factors = list(factors)
        self.m = self.factors[0].loadings.size
        self.dim = self.factors[0].delays.shape[1]
        for f in self.factors:
            if f.loadings.size != self.m or f.delays.shape[1] != self.dim:
                raise ValueError("factors disagree on m or dim")

    def evaluate(self, lags) -> np.ndarray:
        lags = as_lags(lags, self.dim)
        out = np.zeros((lags.shape[0], self.m, self.m))
        zero = np.zeros((1, self.dim))
        for f in self.factors:
            A, tau = f.loadings, f.delays
            c0 = f.covariance.evaluate(zero)[0]
            sq = A ** 2 * c0
            shifted = lags[:, None, None, :] + tau[None, :, None, :] - tau[None, None, :, :]
            cross = np.outer(A, A)[None] * f.covariance.evaluate(shifted)
            out += 0.5 * (sq[:, None] + sq[None, :])[None] - cross
        return out

    def to_config(self) -> dict:
        return {"variant": "DelayedLMC", "factors": [f.to_config() for f in self.factors]}


class Composed(PseudoVariogramModel):
    """Entrywise Bernstein composition ``g(gamma_ij(h))``."""

    def __init__(self, g, base: MatrixFunction):
        self.g = g
        self.base = base
        self.m, self.dim = base.m, base.dim

    def evaluate(self, lags) -> np.ndarray:
        return self.g(self.base.evaluate(lags))

    def to_config(self) -> dict:
        return {"variant": "Composed", "g": self.g.to_config(), "base": self.base.to_config()}


# names available to Tabulated expressions
_EXPR_FUNCS = {
    "abs": np.abs, "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "log1p": np.log1p,
    "expm1": np.expm1, "sin": np.sin, "cos": np.cos, "minimum": np.minimum,
    "maximum": np.maximum, "where": np.where, "sign": np.sign,
}
_EXPR_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Compare, ast.BoolOp, ast.IfExp,
    ast.Call, ast.Name, ast.Load, ast.Constant, ast.Subscript, ast.Index, ast.Slice,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.USub, ast.UAdd,
    ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.And, ast.Or, ast.Not,
    ast.Tuple,
)


def _compile_expression(expr: str):
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise ValueError(f"disallowed syntax in expression {expr!r}: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _EXPR_FUNCS and node.id not in ("h", "r", "pi"):
            raise ValueError(f"unknown name {node.id!r} in expression {expr!r}")
    return compile(tree, "<tabulated>", "eval")


class Tabulated(MatrixFunction):
    """Explicit matrix-valued evaluator, used for candidates of unknown validity.

    ``func`` maps one lag vector of length ``dim`` to an ``(m, m)`` array.
    Nothing is assumed about the result; this is the object the definiteness
    checks exist to reject.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], m: int, dim: int = 1,
                 expressions=None):
        self.func = func
        self.m = int(m)
        self.dim = int(dim)
        self.expressions = expressions

    @classmethod
    def from_expressions(cls, entries, dim: int = 1) -> "Tabulated":
        """Build from an ``m x m`` nested list of expression strings.

        Expressions see the lag vector ``h`` (so ``h[0]`` is its first
        coordinate), its Euclidean norm ``r``, ``pi`` and a few numpy
        functions such as ``abs``, ``sqrt`` and ``exp``.
        """
        m = len(entries)
        if any(len(row) != m for row in entries):
            raise ValueError("entries must form a square table")
        codes = [[_compile_expression(str(e)) for e in row] for row in entries]

        def func(h):
            scope = dict(_EXPR_FUNCS, h=h, r=float(np.sqrt(h @ h)), pi=math.pi)
            return np.array([[np.asarray(eval(c, {"__builtins__": {}}, scope), dtype=float).item()
                              for c in row] for row in codes])

        return cls(func, m, dim, expressions=[[str(e) for e in row] for row in entries])

    def evaluate(self, lags) -> np.ndarray:
        lags = as_lags(lags, self.dim)
        out = np.empty((lags.shape[0], self.m, self.m))
        for k, h in enumerate(lags):
            out[k] = np.asarray(self.func(h), dtype=float).reshape(self.m, self.m)
        return out

    def to_config(self) -> dict:
        if self.expressions is None:
            raise ValueError("only expression-based Tabulated models can be serialized")
        return {"variant": "Tabulated", "dim": self.dim, "entries": self.expressions}


class ConstantFunction(MatrixFunction):
    def __init__(self, matrix, dim: int = 1):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.m = self.matrix.shape[0]
        self.dim = dim

    def evaluate(self, lags) -> np.ndarray:
        lags = as_lags(lags, self.dim)
        return np.broadcast_to(self.matrix, (lags.shape[0], self.m, self.m)).copy()


# ---------------------------------------------------------------------------
# operation-level entry points
# ---------------------------------------------------------------------------

def eval_pseudo_variogram(model: MatrixFunction, i: int, j: int, h) -> float:
    """Return ``gamma_ij(h)`` with zero-based component indices."""
    return model.entry(i, j, h)


def eval_scalar(spec, x, i: Optional[int] = None, j: Optional[int] = None):
    """Evaluate a completely monotone, Bernstein or Stieltjes function at ``x >= 0``."""
    x = _check_nonneg(x)
    if isinstance(spec, BoxStieltjes):
        if i is None or j is None:
            raise ValueError("Stieltjes evaluation needs an entry (i, j)")
        out = spec.entry(i, j, x)
    else:
        out = spec(x)
    return float(out) if np.ndim(out) == 0 else out


def sample_laplace_measure(spec, rng: np.random.Generator, size=None):
    """Draw from the Laplace representing measure of ``spec``."""
    return spec.sample(rng, size)
