"""
Simulation of multivariate random fields.

Two samplers live here:

* an exact Gaussian sampler for a field with a prescribed pseudo-variogram,
  using the pinned covariance ``gamma_p0(x) + gamma_q0(y) - gamma_pq(x - y)``
  of ``Z_p(x) - Z_0(0)`` and a Cholesky factor;
* the spectral cosine construction

  ``Z_i(x, t) = sqrt(-2 log U) cos(sqrt(2R) <Omega, x> + ||Omega|| / sqrt(2) W_i(t) + Phi)``

  whose cross-covariance is the multivariate extended Gneiting model with
  ``r = d/2``.

Reproducibility contract: replicate ``n`` of a run with master seed ``s``
always uses the stream ``default_rng([s, n])``. Replicates are processed in
fixed-size chunks and chunk results are reduced in chunk order, so outputs
are bitwise identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .definiteness import as_points, assemble_gamma_block
from .models import MatrixFunction
from .transforms import CkKernel

__all__ = [
    "CovarianceAssemblyError",
    "SimulationPlan",
    "SpectralDraw",
    "FieldSample",
    "SimulationResult",
    "GaussianPseudoSampler",
    "cholesky_with_jitter",
    "sample_gaussian_pseudo",
    "replicate_rng",
    "draw_spectral",
    "simulate_spectral_replicate",
    "run_simulation",
]

JITTER_START = 1e-12
JITTER_STOP = 1e-6


class CovarianceAssemblyError(RuntimeError):
    """The pinned covariance could not be factorized; gamma is likely invalid."""


@dataclass
class SimulationPlan:
    """Space-time grid, replicate count and master seed of a spectral run."""

    spatial: np.ndarray
    temporal: np.ndarray
    replicates: int
    seed: int
    normalize: bool = False
    chunk_size: int = 4096

    def __post_init__(self):
        self.spatial = np.asarray(self.spatial, dtype=float)
        self.temporal = np.asarray(self.temporal, dtype=float)
        if self.spatial.ndim == 1:
            self.spatial = self.spatial.reshape(-1, 1)
        if self.temporal.ndim == 1:
            self.temporal = self.temporal.reshape(-1, 1)
        if self.spatial.shape[0] < 1 or self.temporal.shape[0] < 1:
            raise ValueError("grids must be non-empty")
        if not (np.all(np.isfinite(self.spatial)) and np.all(np.isfinite(self.temporal))):
            raise ValueError("grid coordinates must be finite")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def d(self) -> int:
        return self.spatial.shape[1]

    @property
    def l(self) -> int:
        return self.temporal.shape[1]


@dataclass
class SpectralDraw:
    R: float
    omega: np.ndarray
    U: float
    phase: float
    W: np.ndarray  # (n_time, m)


@dataclass
class FieldSample:
    """Replicated field values with layout ``(replicate, component, space, time)``."""

    values: np.ndarray
    spatial: np.ndarray
    temporal: np.ndarray

    @classmethod
    def from_points(cls, values: np.ndarray, points) -> "FieldSample":
        """Wrap exact-sampler output of shape ``(N, n, m)`` on a point configuration.

        The points become the spatial axis; the temporal axis is a single
        dummy node at the origin.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(values.transpose(0, 2, 1)[..., None], pts, np.zeros((1, 1)))

    @property
    def replicates(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass
class SimulationResult:
    samples: FieldSample
    covariance: np.ndarray  # (m, ns, nt, m, ns, nt), second moments across replicates
    normalized: Optional[np.ndarray] = None  # (m, ns, nt)


# ---------------------------------------------------------------------------
# exact Gaussian sampling
# ---------------------------------------------------------------------------

def cholesky_with_jitter(K: np.ndarray, start: float = JITTER_START,
                         stop: float = JITTER_STOP) -> np.ndarray:
    """Lower Cholesky factor of ``K + eps * s * I`` for the smallest working ``eps``.

    ``eps`` runs from ``start`` to ``stop`` in factors of ten and ``s`` is
    ``max(1, max diag K)``. Rows whose diagonal and off-diagonal entries are
    all exactly zero (a pinned node, or a zero model) get zero factor rows
    instead of jitter, so degenerate coordinates sample as exact zeros.
    """
    K = np.asarray(K, dtype=float)
    diag = np.diag(K)
    keep = ~((diag == 0) & np.all(K == 0, axis=1))
    L = np.zeros_like(K)
    if not np.any(keep):
        return L
    sub = K[np.ix_(keep, keep)]
    scale = max(1.0, float(np.max(np.diag(sub))))
    eye = np.eye(sub.shape[0])
    eps = start
    while eps <= stop * (1 + 1e-9):
        try:
            L[np.ix_(keep, keep)] = np.linalg.cholesky(sub + eps * scale * eye)
            return L
        except np.linalg.LinAlgError:
            eps *= 10
    raise CovarianceAssemblyError(
        f"covariance is not positive semi-definite even with jitter {stop:g}; "
        "the pseudo-variogram is probably invalid")


class GaussianPseudoSampler:
    """Exact sampler for a centred Gaussian field with pseudo-variogram ``gamma``.

    The covariance is that of ``Z_p(x) - Z_0(0)``, so the first component is
    pinned to zero at the origin; increments have the right law.
    """

    def __init__(self, gamma: MatrixFunction, points):
        self.gamma = gamma
        self.points = as_points(points, gamma.dim)
        kernel = CkKernel(gamma, k=0, subtract_diagonal=False)
        self.covariance = assemble_gamma_block(kernel, self.points)
        self.factor = cholesky_with_jitter(self.covariance)
        self.n = self.points.shape[0]
        self.m = gamma.m

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Draw values of shape ``(n, m)``, or ``(size, n, m)``."""
        if size is None:
            z = rng.standard_normal(self.n * self.m)
            return (self.factor @ z).reshape(self.n, self.m)
        z = rng.standard_normal((size, self.n * self.m))
        return (z @ self.factor.T).reshape(size, self.n, self.m)


def sample_gaussian_pseudo(gamma: MatrixFunction, points, rng: np.random.Generator,
                           size: Optional[int] = None) -> np.ndarray:
    return GaussianPseudoSampler(gamma, points).sample(rng, size)


# ---------------------------------------------------------------------------
# spectral construction
# ---------------------------------------------------------------------------

def replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def draw_spectral(rng: np.random.Generator, phi, d: int,
                  sampler: GaussianPseudoSampler) -> SpectralDraw:
    # draw order is part of the reproducibility contract
    R = float(phi.sample(rng))
    omega = rng.standard_normal(d)
    U = 1.0 - rng.random()  # in (0, 1]
    phase = 2.0 * math.pi * rng.random()
    W = sampler.sample(rng)
    return SpectralDraw(R, omega, U, phase, W)


def _evaluate_draws(draws, spatial: np.ndarray) -> np.ndarray:
    R = np.array([dr.R for dr in draws])
    omega = np.array([dr.omega for dr in draws])           # (k, d)
    amp = np.sqrt(-2.0 * np.log(np.array([dr.U for dr in draws])))
    phase = np.array([dr.phase for dr in draws])
    W = np.array([dr.W for dr in draws]).transpose(0, 2, 1)  # (k, m, nt)

    # explicit accumulation keeps results independent of the batch size
    proj = np.zeros((len(draws), spatial.shape[0]))
    sq = np.zeros(len(draws))
    for c in range(spatial.shape[1]):
        proj += omega[:, c, None] * spatial[None, :, c]
        sq += omega[:, c] ** 2
    spatial_term = (np.sqrt(2.0 * R)[:, None] * proj)[:, None, :, None]
    temporal_term = (np.sqrt(sq) / math.sqrt(2.0))[:, None, None] * W
    arg = spatial_term + temporal_term[:, :, None, :] + phase[:, None, None, None]
    return amp[:, None, None, None] * np.cos(arg)


def simulate_spectral_replicate(plan: SimulationPlan, gamma: MatrixFunction, phi,
                                rng: np.random.Generator,
                                sampler: Optional[GaussianPseudoSampler] = None) -> FieldSample:
    """One replicate of the spectral field on the plan's grid."""
    if sampler is None:
        sampler = GaussianPseudoSampler(gamma, plan.temporal)
    draw = draw_spectral(rng, phi, plan.d, sampler)
    return FieldSample(_evaluate_draws([draw], plan.spatial), plan.spatial, plan.temporal)


def _run_chunk(plan: SimulationPlan, phi, sampler: GaussianPseudoSampler, start: int, stop: int):
    draws = [draw_spectral(replicate_rng(plan.seed, n), phi, plan.d, sampler)
             for n in range(start, stop)]
    values = _evaluate_draws(draws, plan.spatial)
    flat = values.reshape(values.shape[0], -1)
    return values, flat.T @ flat, flat.sum(axis=0)


def _chunk_worker(args):
    return _run_chunk(*args)


def run_simulation(plan: SimulationPlan, gamma: MatrixFunction, phi,
                   workers: int = 1) -> SimulationResult:
    """Run ``plan.replicates`` independent spectral replicates.

    The empirical covariance is the second-moment tensor
    ``mean_n Z_i(x, t) Z_j(y, s)`` (the field is centred). With
    ``plan.normalize`` the scaled sum ``N**-0.5 * sum_n Z^(n)`` is returned
    too; it is approximately Gaussian for large ``N``.
    """
    if gamma.dim != plan.l:
        raise ValueError("temporal grid dimension does not match gamma")
    sampler = GaussianPseudoSampler(gamma, plan.temporal)
    N = plan.replicates
    bounds = [(s, min(s + plan.chunk_size, N)) for s in range(0, N, plan.chunk_size)]
    jobs = [(plan, phi, sampler, s, e) for s, e in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_worker, jobs))
    else:
        parts = [_chunk_worker(job) for job in jobs]

    values = np.concatenate([p[0] for p in parts])
    second = parts[0][1].copy()
    total = parts[0][2].copy()
    for p in parts[1:]:
        second += p[1]
        total += p[2]
    shape = values.shape[1:]
    cov = (second / N).reshape(shape + shape)
    normalized = (total / math.sqrt(N)).reshape(shape) if plan.normalize else None
    return SimulationResult(FieldSample(values, plan.spatial, plan.temporal), cov, normalized)
