"""
Finite-configuration tests of conditional negative definiteness and positive
definiteness for matrix-valued functions.

Block matrices are laid out site-major: row ``i * m + p`` belongs to site
``x_i`` and component ``p``. Two constraint sets are supported for the
quadratic forms ``sum_ij a_i^T gamma(x_i - x_j) a_j``:

``"global-sum"``
    the sum of *all* entries of the stacked vector vanishes. This is the
    strong notion that characterizes pseudo-variograms.
``"per-component-sum"``
    each of the ``m`` component sums vanishes separately (almost negative
    definiteness, the cross-variogram condition).

A finite configuration can only falsify these properties; passing reports
are evidence, not proof.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .models import as_lags

__all__ = [
    "SymmetryError",
    "Verdict",
    "DefinitenessReport",
    "SqrtInequalityReport",
    "IntersectionReport",
    "as_points",
    "random_configs",
    "default_tolerance",
    "global_projector",
    "component_projector",
    "assemble_gamma_block",
    "quadratic_form",
    "check_cnd",
    "check_almost_nd",
    "check_pd",
    "check_psd_matrix",
    "check_pseudo_variogram",
    "check_sqrt_inequality",
    "check_intersection_triviality",
    "brute_force_qf_search",
]

GLOBAL_SUM = "global-sum"
PER_COMPONENT_SUM = "per-component-sum"
DIAGONAL_ZERO_TOL = 1e-12


class SymmetryError(ValueError):
    """The assembled block matrix is not symmetric, i.e. gamma_ij(h) != gamma_ji(-h)."""


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class DefinitenessReport:
    verdict: Verdict
    extremal_eigenvalue: float
    tolerance: float
    check: str = ""
    min_eigenvalue: float = 0.0
    max_eigenvalue: float = 0.0
    witness: Optional[np.ndarray] = None
    constraint: Optional[str] = None
    witness_qf: Optional[float] = None
    points: Optional[np.ndarray] = None
    reason: str = ""
    configs_checked: int = 1

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class SqrtInequalityReport:
    passed: bool
    worst_margin: float
    kind: str = "ok"  # "ok", "violation" or "negative-entry"
    worst_case: Optional[tuple] = None


@dataclass
class IntersectionReport:
    verdict: Verdict
    in_pseudo: bool
    in_cross: bool
    failed: list = field(default_factory=list)
    deviation: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


# ---------------------------------------------------------------------------
# configurations and matrices
# ---------------------------------------------------------------------------

def as_points(points, dim: int) -> np.ndarray:
    pts = as_lags(points, dim)
    if pts.shape[0] < 1:
        raise ValueError("a configuration needs at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("configuration points must be finite")
    return pts


def random_configs(rng: np.random.Generator, count: int, dim: int, max_points: int = 8,
                   min_points: int = 1, spread: float = 3.0) -> list:
    """Draw ``count`` configurations of uniform points in ``[-spread, spread]^dim``."""
    out = []
    for _ in range(count):
        n = int(rng.integers(min_points, max_points + 1))
        out.append(rng.uniform(-spread, spread, size=(n, dim)))
    return out


def default_tolerance(M: np.ndarray) -> float:
    return 1e-8 * max(1.0, float(np.abs(M).max(initial=0.0)))


def global_projector(n: int, m: int) -> np.ndarray:
    """Orthogonal projector onto ``{a in R^{nm} : sum(a) = 0}``."""
    nm = n * m
    return np.eye(nm) - np.full((nm, nm), 1.0 / nm)


def component_projector(n: int, m: int) -> np.ndarray:
    """Orthogonal projector that centers each component across the ``n`` sites."""
    return np.eye(n * m) - np.kron(np.full((n, n), 1.0 / n), np.eye(m))


def _projector(constraint: str, n: int, m: int) -> np.ndarray:
    if constraint == GLOBAL_SUM:
        return global_projector(n, m)
    if constraint == PER_COMPONENT_SUM:
        return component_projector(n, m)
    raise ValueError(f"unknown constraint {constraint!r}")


def _check_symmetric(M: np.ndarray):
    asym = float(np.abs(M - M.T).max(initial=0.0))
    if asym > 1e-10 * max(1.0, float(np.abs(M).max(initial=0.0))):
        raise SymmetryError(f"block matrix is not symmetric (max asymmetry {asym:.3g})")


def _blocks_to_matrix(blocks: np.ndarray) -> np.ndarray:
    # blocks[i, j, p, q] -> M[i*m + p, j*m + q]
    n, _, m, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m)


def assemble_gamma_block(func, points, check_symmetry: bool = True) -> np.ndarray:
    """Return the ``nm x nm`` matrix with blocks ``func(x_i - x_j)``.

    ``func`` may also be a kernel (an object with ``evaluate_pairs``), in which
    case the blocks are ``func(x_i, x_j)``.
    """
    pts = as_points(points, func.dim)
    n = pts.shape[0]
    m = func.m
    if hasattr(func, "evaluate_pairs"):
        xs = np.repeat(pts, n, axis=0)
        ys = np.tile(pts, (n, 1))
        vals = func.evaluate_pairs(xs, ys)
    else:
        lags = (pts[:, None, :] - pts[None, :, :]).reshape(n * n, -1)
        vals = func.evaluate(lags)
    M = _blocks_to_matrix(np.asarray(vals, dtype=float).reshape(n, n, m, m))
    if check_symmetry:
        _check_symmetric(M)
    return M


def quadratic_form(M: np.ndarray, a: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    return float(a @ M @ a)


def _normalize_witness(v: np.ndarray, P: Optional[np.ndarray]) -> np.ndarray:
    """Project ``v``, then scale so the smallest significant entry has magnitude one.

    Simple violations then come out with integer-looking coordinates, e.g.
    ``(1, -2, 1)`` for a second difference. The first nonzero coordinate is
    made positive.
    """
    if P is not None:
        v = P @ v
    big = np.abs(v).max()
    if big == 0:
        return v
    significant = np.abs(v) > 1e-3 * big
    v = v / np.abs(v[significant]).min()
    first = v[np.flatnonzero(significant)[0]]
    if first < 0:
        v = -v
    if P is not None:
        # re-apply the projector to remove rounding drift introduced by scaling
        v = P @ v
    return v


def _eigen_check(M, P, tol, sign, constraint, points, check_name) -> DefinitenessReport:
    A = M if P is None else P @ M @ P
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    lo, hi = float(w[0]), float(w[-1])
    if sign > 0:
        # conditional negative definiteness: all eigenvalues <= tol
        extremal, ok, vec = hi, hi <= tol, V[:, -1]
    else:
        extremal, ok, vec = lo, lo >= -tol, V[:, 0]
    report = DefinitenessReport(
        verdict=Verdict.PASS if ok else Verdict.FAIL, extremal_eigenvalue=extremal,
        tolerance=tol, check=check_name, min_eigenvalue=lo, max_eigenvalue=hi,
        constraint=constraint, points=None if points is None else np.array(points, copy=True))
    if not ok:
        a = _normalize_witness(vec, P)
        report.witness = a
        report.witness_qf = quadratic_form(M, a)
        report.reason = f"{check_name}: eigenvalue {extremal:.6g} beyond tolerance {tol:.3g}"
    return report


# ---------------------------------------------------------------------------
# definiteness checks
# ---------------------------------------------------------------------------

def _constrained_check(func, points, tol, constraint, name) -> DefinitenessReport:
    pts = as_points(points, func.dim)
    M = assemble_gamma_block(func, pts)
    P = _projector(constraint, pts.shape[0], func.m)
    if tol is None:
        tol = default_tolerance(M)
    return _eigen_check(M, P, tol, +1, constraint, pts, name)


def check_cnd(func, points, tol: Optional[float] = None) -> DefinitenessReport:
    """Conditional negative definiteness under the single constraint ``1^T a = 0``.

    Passes iff every eigenvalue of ``P M P`` is at most ``tol``; on failure the
    witness is the projected top eigenvector.
    """
    return _constrained_check(func, points, tol, GLOBAL_SUM, "cnd")


def check_almost_nd(func, points, tol: Optional[float] = None) -> DefinitenessReport:
    """Almost negative definiteness: each component sum of the test vectors vanishes."""
    return _constrained_check(func, points, tol, PER_COMPONENT_SUM, "almost-nd")


def check_pd(func, points, tol: Optional[float] = None) -> DefinitenessReport:
    """Positive semi-definiteness of the block matrix of a function or kernel."""
    pts = as_points(points, func.dim)
    M = assemble_gamma_block(func, pts)
    if tol is None:
        tol = default_tolerance(M)
    return _eigen_check(M, None, tol, -1, None, pts, "pd")


def check_psd_matrix(M: np.ndarray, tol: Optional[float] = None) -> DefinitenessReport:
    """Positive semi-definiteness of an explicit symmetric matrix."""
    M = np.asarray(M, dtype=float)
    _check_symmetric(M)
    if tol is None:
        tol = default_tolerance(M)
    return _eigen_check(M, None, tol, -1, None, None, "pd")


def _diagonal_at_zero(func) -> np.ndarray:
    return np.diagonal(func(np.zeros(func.dim)))


def check_pseudo_variogram(func, configs: Sequence, tol: Optional[float] = None) -> DefinitenessReport:
    """Necessary-condition certificate for being a pseudo-variogram.

    Checks ``gamma_ii(0) = 0`` and conditional negative definiteness on every
    supplied configuration. Returns the first failing report, or a passing
    report aggregating the eigenvalue range over all configurations. Never
    returns an inconclusive verdict.
    """
    diag = _diagonal_at_zero(func)
    bad = np.flatnonzero(np.abs(diag) > DIAGONAL_ZERO_TOL)
    if bad.size:
        i = int(bad[0])
        return DefinitenessReport(
            Verdict.FAIL, float(diag[i]), DIAGONAL_ZERO_TOL, check="diagonal-at-zero",
            reason=f"diagonal-at-zero: gamma_{{{i + 1},{i + 1}}}(0) = {diag[i]:.6g} != 0")
    lo, hi, worst_tol = np.inf, -np.inf, 0.0
    for pts in configs:
        rep = check_cnd(func, pts, tol)
        if not rep.passed:
            return rep
        lo, hi = min(lo, rep.min_eigenvalue), max(hi, rep.max_eigenvalue)
        worst_tol = max(worst_tol, rep.tolerance)
    return DefinitenessReport(Verdict.PASS, hi, worst_tol, check="pseudo-variogram",
                              min_eigenvalue=lo, max_eigenvalue=hi,
                              constraint=GLOBAL_SUM, configs_checked=len(configs))


def check_sqrt_inequality(func, lags, slack: float = 1e-12) -> SqrtInequalityReport:
    """Check ``(sqrt(gamma_ii(h)) - sqrt(gamma_ij(h)))**2 <= gamma_ij(0)`` over lags and pairs."""
    lags = as_lags(lags, func.dim)
    G = func.evaluate(lags)
    G0 = func(np.zeros(func.dim))
    m = func.m
    neg = np.argwhere(G < 0)
    if neg.size:
        k, i, j = neg[0]
        return SqrtInequalityReport(False, float(G[k, i, j]), "negative-entry",
                                    (int(i), int(j), lags[k].copy()))
    diag = np.sqrt(G[:, np.arange(m), np.arange(m)])            # (k, m)
    lhs = (diag[:, :, None] - np.sqrt(G)) ** 2                    # (k, i, j)
    margin = G0[None, :, :] + slack - lhs
    k, i, j = np.unravel_index(np.argmin(margin), margin.shape)
    worst = float(margin[k, i, j])
    ok = worst >= 0
    return SqrtInequalityReport(ok, worst, "ok" if ok else "violation",
                                (int(i), int(j), lags[k].copy()))


def check_intersection_triviality(func, configs: Sequence, tol: float = 1e-12,
                                  probe_lags=None) -> IntersectionReport:
    """Decide membership in both the pseudo- and the cross-variogram sets.

    Members of both sets must have all entries equal to ``gamma_11``; the
    report gives the largest entrywise deviation over ``probe_lags``.
    """
    if probe_lags is None:
        probe_lags = np.concatenate([np.asarray(c, dtype=float).reshape(-1, func.dim)
                                     for c in configs])
    lags = as_lags(probe_lags, func.dim)
    failed = []

    pseudo = check_pseudo_variogram(func, configs)
    in_pseudo = pseudo.passed
    if not in_pseudo:
        failed.append(f"pseudo-variogram: {pseudo.reason}")

    cross_reasons = []
    G0 = func(np.zeros(func.dim))
    if np.abs(G0).max() > DIAGONAL_ZERO_TOL:
        i, j = np.unravel_index(np.argmax(np.abs(G0)), G0.shape)
        cross_reasons.append(f"gamma(0) != 0 (gamma_{{{i + 1},{j + 1}}}(0) = {G0[i, j]:.6g})")
    G = func.evaluate(lags)
    Gm = func.evaluate(-lags)
    sym_scale = max(1.0, float(np.abs(G).max(initial=0.0)))
    if np.abs(G - Gm).max(initial=0.0) > tol * sym_scale:
        cross_reasons.append("gamma(h) != gamma(-h)")
    if np.abs(G - G.transpose(0, 2, 1)).max(initial=0.0) > tol * sym_scale:
        cross_reasons.append("gamma(h) != gamma(h)^T")
    if not cross_reasons:
        for pts in configs:
            rep = check_almost_nd(func, pts)
            if not rep.passed:
                cross_reasons.append(rep.reason)
                break
    in_cross = not cross_reasons
    failed.extend(f"cross-variogram: {r}" for r in cross_reasons)

    if not (in_pseudo and in_cross):
        return IntersectionReport(Verdict.FAIL, in_pseudo, in_cross, failed)
    dev = float(np.abs(G - G[:, :1, :1]).max(initial=0.0))
    verdict = Verdict.PASS if dev <= tol else Verdict.FAIL
    if verdict is Verdict.FAIL:
        failed.append(f"entries differ from gamma_11 by {dev:.3g}")
    return IntersectionReport(verdict, True, True, failed, dev)


def brute_force_qf_search(func, points, constraint: str = GLOBAL_SUM, trials: int = 10_000,
                          rng: Optional[np.random.Generator] = None):
    """Random search for the largest normalized constrained quadratic form.

    Gaussian vectors are projected onto the constraint subspace, normalized to
    unit length, and ``a^T M a`` is maximized over the sample. This is an
    eigen-free oracle for :func:`check_cnd` and :func:`check_almost_nd`.

    Returns
    -------
    best : float
        largest quadratic form found
    argmax : ndarray
        the unit vector attaining it
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    pts = as_points(points, func.dim)
    M = assemble_gamma_block(func, pts)
    P = _projector(constraint, pts.shape[0], func.m)
    a = rng.standard_normal((trials, M.shape[0])) @ P
    norms = np.linalg.norm(a, axis=1)
    keep = norms > 1e-12
    if not np.any(keep):
        # constraint subspace is {0}, e.g. a single site with m = 1
        return 0.0, np.zeros(M.shape[0])
    a = a[keep] / norms[keep, None]
    qf = np.einsum("ki,ij,kj->k", a, M, a)
    k = int(np.argmax(qf))
    return float(qf[k]), a[k]
