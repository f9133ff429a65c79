"""
Empirical estimators on replicated, gridded field samples and comparison
against model values.

Lags are grid-index lags ``(space_lag, time_lag)``: the pair set of a lag
``(a, b)`` contains all node pairs ``((s + a, t + b), (s, t))`` inside the
grid. Fields are assumed centred, so no mean is removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .simulate import FieldSample

__all__ = [
    "CompareRow",
    "CompareReport",
    "lag_pairs",
    "empirical_pseudo_variogram",
    "empirical_cross_covariance",
    "model_lag_value",
    "model_covariance_tensor",
    "lag_table",
    "compare_report",
]


def _as_lag(lag) -> tuple:
    if np.ndim(lag) == 0:
        return int(lag), 0
    lag = tuple(int(v) for v in lag)
    if len(lag) == 1:
        return lag[0], 0
    if len(lag) != 2:
        raise ValueError("lag must be an int or a (space_lag, time_lag) pair")
    return lag


def lag_pairs(n: int, lag: int):
    """Index arrays ``(a, b)`` with ``a = b + lag``, ordered by ``min(a, b)``."""
    if lag >= 0:
        b = np.arange(0, n - lag)
        return b + lag, b
    a = np.arange(0, n + lag)
    return a, a - lag


def _pair_values(samples: FieldSample, i: int, j: int, space_lag: int, time_lag: int):
    m = samples.m
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"component index out of range for m={m}")
    if samples.replicates < 2:
        raise ValueError("at least two replicates are required")
    _, _, ns, nt = samples.values.shape
    sa, sb = lag_pairs(ns, space_lag)
    ta, tb = lag_pairs(nt, time_lag)
    if sa.size == 0 or ta.size == 0:
        raise ValueError(f"no grid pairs at lag ({space_lag}, {time_lag})")
    V = samples.values
    first = V[:, i][:, sa[:, None], ta[None, :]]
    second = V[:, j][:, sb[:, None], tb[None, :]]
    return first, second


def empirical_pseudo_variogram(samples: FieldSample, i: int, j: int, lag) -> float:
    """``1 / (2 N |P|) * sum (Z_i(x + h) - Z_j(x))**2`` over replicates and pairs."""
    ls, lt = _as_lag(lag)
    first, second = _pair_values(samples, i, j, ls, lt)
    return float(0.5 * np.mean((first - second) ** 2))


def empirical_cross_covariance(samples: FieldSample, i: int, j: int, space_lag: int = 0,
                               time_lag: int = 0) -> float:
    """Mean of ``Z_i(x + h, t + u) * Z_j(x, t)`` over replicates and pairs."""
    first, second = _pair_values(samples, i, j, int(space_lag), int(time_lag))
    return float(np.mean(first * second))


def model_lag_value(model, spatial, temporal, i: int, j: int, space_lag: int,
                    time_lag: int) -> float:
    """Average of the model covariance ``G_ij`` over the pair set of a grid lag.

    On regular grids this is just ``G_ij`` at the physical lag.
    """
    spatial = np.asarray(spatial, dtype=float).reshape(len(spatial), -1)
    temporal = np.asarray(temporal, dtype=float).reshape(len(temporal), -1)
    sa, sb = lag_pairs(spatial.shape[0], space_lag)
    ta, tb = lag_pairs(temporal.shape[0], time_lag)
    if sa.size == 0 or ta.size == 0:
        raise ValueError(f"no grid pairs at lag ({space_lag}, {time_lag})")
    h = np.repeat(spatial[sa] - spatial[sb], ta.size, axis=0)
    u = np.tile(temporal[ta] - temporal[tb], (sa.size, 1))
    return float(np.mean(model.evaluate(h, u)[:, i, j]))


def model_covariance_tensor(model, spatial, temporal) -> np.ndarray:
    """Model covariances on all node pairs, shape ``(m, ns, nt, m, ns, nt)``.

    Entry ``[i, a, c, j, b, e]`` is ``G_ij(x_a - x_b, t_c - t_e)``, matching
    :attr:`pseudovario.simulate.SimulationResult.covariance`.
    """
    xs = np.asarray(spatial, dtype=float).reshape(len(spatial), -1)
    ts = np.asarray(temporal, dtype=float).reshape(len(temporal), -1)
    ns, nt, m = xs.shape[0], ts.shape[0], model.m
    h = np.broadcast_to(xs[:, None, None, None, :] - xs[None, None, :, None, :],
                        (ns, nt, ns, nt, xs.shape[1])).reshape(-1, xs.shape[1])
    u = np.broadcast_to(ts[None, :, None, None, :] - ts[None, None, None, :, :],
                        (ns, nt, ns, nt, ts.shape[1])).reshape(-1, ts.shape[1])
    G = model.evaluate(h, u).reshape(ns, nt, ns, nt, m, m)
    return G.transpose(4, 0, 1, 5, 2, 3)


@dataclass
class CompareRow:
    index: tuple
    empirical: float
    model: float
    diff: float
    passed: bool


@dataclass
class CompareReport:
    rows: list = field(default_factory=list)
    abs_tol: float = 0.0
    rel_tol: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def worst(self) -> Optional[CompareRow]:
        if not self.rows:
            return None
        return max(self.rows, key=lambda r: r.diff)

    @property
    def max_diff(self) -> float:
        return 0.0 if not self.rows else self.worst.diff


def compare_report(empirical, model, abs_tol: float, rel_tol: float = 0.0,
                   index: Optional[Sequence[tuple]] = None) -> CompareReport:
    """Entrywise verdicts ``|e - m| <= max(abs_tol, rel_tol * |m|)``.

    ``empirical`` and ``model`` must have identical shapes; ``index`` labels
    the flattened entries and defaults to their array indices.
    """
    e = np.asarray(empirical, dtype=float)
    mod = np.asarray(model, dtype=float)
    if e.shape != mod.shape:
        raise ValueError(f"misaligned inputs: {e.shape} vs {mod.shape}")
    if index is None:
        index = list(np.ndindex(e.shape))
    elif len(index) != e.size:
        raise ValueError("index labels do not match the number of entries")
    report = CompareReport(abs_tol=abs_tol, rel_tol=rel_tol)
    for label, ev, mv in zip(index, e.ravel(), mod.ravel()):
        diff = abs(float(ev) - float(mv))
        ok = diff <= max(abs_tol, rel_tol * abs(float(mv)))
        report.rows.append(CompareRow(tuple(label), float(ev), float(mv), diff, ok))
    return report


def lag_table(samples: FieldSample, model=None, statistic: str = "cross-covariance"):
    """Empirical (and model) values for every component pair and grid lag.

    Returns ``(index, empirical, model_values)`` where ``index`` holds
    zero-based ``(i, j, space_lag, time_lag)`` tuples. For
    ``statistic="pseudo-variogram"`` the model value of a unit-variance
    field is ``1 - G_ij``.
    """
    if statistic not in ("cross-covariance", "pseudo-variogram"):
        raise ValueError(f"unknown statistic {statistic!r}")
    _, m, ns, nt = samples.values.shape
    index, emp, mod = [], [], []
    for i in range(m):
        for j in range(m):
            for ls in range(-(ns - 1), ns):
                for lt in range(-(nt - 1), nt):
                    index.append((i, j, ls, lt))
                    if statistic == "cross-covariance":
                        emp.append(empirical_cross_covariance(samples, i, j, ls, lt))
                    else:
                        emp.append(empirical_pseudo_variogram(samples, i, j, (ls, lt)))
                    if model is not None:
                        g = model_lag_value(model, samples.spatial, samples.temporal, i, j, ls, lt)
                        mod.append(g if statistic == "cross-covariance" else 1.0 - g)
    return index, np.array(emp), (np.array(mod) if model is not None else None)
