"""Acceptance criteria A1-A9.

Each test carries ``@pytest.mark.acceptance("Ak")``; ``conftest.py`` prints
one PASS/FAIL line per criterion at the end of the run.
"""

import math
import time

import numpy as np
import pytest

from pseudovario.definiteness import (GLOBAL_SUM, PER_COMPONENT_SUM, assemble_gamma_block,
                                      brute_force_qf_search, check_almost_nd, check_cnd,
                                      check_intersection_triviality, check_pd, check_psd_matrix,
                                      check_pseudo_variogram, check_sqrt_inequality,
                                      quadratic_form, random_configs)
from pseudovario.estimate import empirical_pseudo_variogram, model_covariance_tensor
from pseudovario.gneiting import (MultivariateExtendedGneiting, OffsetFunction,
                                  StieltjesGneiting, assemble_spacetime_cov)
from pseudovario.models import (BoxStieltjes, ExpCM, InversePowerCM, NoisyCommon,
                                PowerVariogram, Shift)
from pseudovario.simulate import FieldSample, SimulationPlan, run_simulation, sample_gaussian_pseudo
from pseudovario.transforms import (build_ck_kernel, general_laplace_map,
                                    inverse_schoenberg_residual, laplace_map, schoenberg_map)

from catalog import adversarial, catalog, cubic, negative_cross, noisy_1d, shift_1d

CATALOG = catalog()
SEED = 20240611


def configs_for(model, count=20, seed=SEED):
    return random_configs(np.random.default_rng(seed), count, model.dim, max_points=8)


@pytest.mark.acceptance("A1")
def test_a1_pseudo_variogram_checks():
    start = time.perf_counter()
    for name, model in CATALOG.items():
        assert model.m <= 3 and model.dim <= 3
        rep = check_pseudo_variogram(model, configs_for(model))
        assert rep.passed, name

    lattice = np.array([[0.0], [1.0], [2.0]])
    cub = check_pseudo_variogram(cubic(), [lattice] + configs_for(cubic()))
    assert not cub.passed
    np.testing.assert_array_equal(cub.points, lattice)
    np.testing.assert_allclose(cub.witness, [1.0, -2.0, 1.0], atol=1e-12)
    qf = quadratic_form(assemble_gamma_block(cubic(), cub.points), cub.witness)
    assert qf == pytest.approx(8.0, rel=1e-12)

    neg = check_pseudo_variogram(negative_cross(), [np.array([[0.0], [1.0]])]
                                 + configs_for(negative_cross()))
    assert not neg.passed
    assert abs(neg.witness.sum()) <= 1e-12
    assert quadratic_form(assemble_gamma_block(negative_cross(), neg.points), neg.witness) > 1
    assert time.perf_counter() - start < 5


@pytest.mark.acceptance("A2")
def test_a2_spectral_simulation():
    plan = SimulationPlan([0.0, 0.5, 1.0], [0.0, 1.0], 200_000, SEED)
    gamma, phi = shift_1d(), ExpCM(1.0)
    start = time.perf_counter()
    result = run_simulation(plan, gamma, phi, workers=1)
    elapsed = time.perf_counter() - start
    assert elapsed < 60

    model = MultivariateExtendedGneiting(phi, gamma, 0.5, 1)
    G = model_covariance_tensor(model, plan.spatial, plan.temporal)
    assert np.abs(result.covariance - G).max() <= 0.02
    # Cov(Z_1(0, t + 1), Z_2(0, t)) and Cov(Z_1(0, t), Z_2(0, t))
    assert result.covariance[0, 0, 1, 1, 0, 0] == pytest.approx(1.0, abs=0.02)
    for t in range(2):
        assert result.covariance[0, 0, t, 1, 0, t] == pytest.approx(0.70711, abs=0.02)

    again = run_simulation(plan, gamma, phi, workers=4)
    assert again.samples.values.tobytes() == result.samples.values.tobytes()
    assert again.covariance.tobytes() == result.covariance.tobytes()


@pytest.mark.acceptance("A3")
def test_a3_schoenberg_and_residual():
    start = time.perf_counter()
    for name, model in CATALOG.items():
        configs = configs_for(model)
        for t in (0.1, 1.0, 10.0):
            f = schoenberg_map(model, t)
            for pts in configs:
                rep = check_pd(f, pts)
                assert rep.min_eigenvalue >= -1e-8 * max(1.0, np.abs(assemble_gamma_block(f, pts)).max()), name
        lags = np.random.default_rng(SEED).uniform(-4, 4, (1000, model.dim))
        G = model.evaluate(lags)
        for t in (0.01, 0.001):
            R = inverse_schoenberg_residual(model, t).evaluate(lags)
            assert np.abs(G - R).max() <= t * G.max() ** 2 / 2
    assert time.perf_counter() - start < 10


@pytest.mark.acceptance("A4")
def test_a4_laplace_transforms():
    for name, model in CATALOG.items():
        configs = configs_for(model)
        for t in (0.5, 1.0, 2.0):
            for lam in (0.5, 1.0, 2.0):
                f = laplace_map(model, t, lam)
                for pts in configs:
                    assert check_pd(f, pts).passed, (name, t, lam)

    c, lam, t = 1.5, 2.0, 0.7
    mu = InversePowerCM(c, lam)
    f = general_laplace_map(shift_1d(), t, mu, 100_000, np.random.default_rng(SEED))
    probes = np.linspace(-2.5, 2.5, 10)
    est = f.evaluate(probes)[:, 0, 1]
    se = f.standard_error(probes)[:, 0, 1]
    exact = (1 + c * t * shift_1d().evaluate(probes)[:, 0, 1]) ** (-lam)
    np.testing.assert_array_less(np.abs(est - exact), 3 * se)


@pytest.mark.acceptance("A5")
@pytest.mark.parametrize("model", [shift_1d(), noisy_1d()], ids=["shift", "noisy-common"])
def test_a5_exact_sampler(model):
    N = 50_000
    points = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    values = sample_gaussian_pseudo(model, points, np.random.default_rng(SEED), N)
    samples = FieldSample.from_points(values, points)
    for i in range(model.m):
        for j in range(model.m):
            for lag in range(-4, 5):
                gamma = model.entry(i, j, float(lag))
                emp = empirical_pseudo_variogram(samples, i, j, lag)
                assert abs(emp - gamma) <= 4 / math.sqrt(N) * (1 + gamma), (i, j, lag)
    for k in range(model.m):
        for flag in (True, False):
            assert check_pd(build_ck_kernel(model, k, flag), points).passed


@pytest.mark.acceptance("A6")
def test_a6_sqrt_inequality():
    rng = np.random.default_rng(SEED)
    for name, model in CATALOG.items():
        rep = check_sqrt_inequality(model, rng.uniform(-5, 5, (1000, model.dim)), slack=1e-12)
        assert rep.passed, (name, rep)


@pytest.mark.acceptance("A7")
def test_a7_intersection():
    configs = configs_for(CATALOG["common"], count=5)
    rep = check_intersection_triviality(CATALOG["common"], configs)
    assert rep.passed and rep.deviation <= 1e-12
    for model in (shift_1d(), noisy_1d(), NoisyCommon(PowerVariogram(1.0, 1.0), [1.0, 1.0])):
        rep = check_intersection_triviality(model, configs)
        assert not rep.passed
        assert rep.in_pseudo and not rep.in_cross
        assert rep.failed and rep.failed[0].startswith("cross-variogram: gamma(0) != 0")


def _random_grid(rng, d, l, m):
    while True:
        ns, nt = int(rng.integers(1, 11)), int(rng.integers(1, 11))
        if ns * nt * m <= 60:
            return rng.uniform(-2, 2, (ns, d)), rng.uniform(-2, 2, (nt, l))


@pytest.mark.acceptance("A8")
def test_a8_space_time_models():
    rng = np.random.default_rng(SEED)
    d = 2
    models = []
    for gamma in (CATALOG["shift-1d"], CATALOG["lmc-2d"], CATALOG["noisy-3d-m3"]):
        for r in (d / 2, d / 2 + 1):
            models.append(MultivariateExtendedGneiting(InversePowerCM(1.0, 1.5), gamma, r, d))
    B = np.array([[1.0, 0.6, 0.2], [0.6, 1.0, 0.3], [0.2, 0.3, 0.5]])
    for order in (0.5, 1.0, 2.0):
        g = Shift(PowerVariogram(1.0, 1.5), np.zeros((3, d)))
        f = OffsetFunction(CATALOG["lmc-1d-m3"], 0.5)
        models.append(StieltjesGneiting(BoxStieltjes(order, B, 0.5, 3.0), g, f, order + 0.5))
    for model in models:
        for _ in range(20):
            xs, ts = _random_grid(rng, model.spatial_dim, model.temporal_dim, model.m)
            assert check_psd_matrix(assemble_spacetime_cov(model, xs, ts)).passed

    for gamma in (CATALOG["shift-1d"], CATALOG["lmc-2d"], CATALOG["noisy-3d-m3"]):
        phi = InversePowerCM(1.0, 1.5)
        low = MultivariateExtendedGneiting(phi, gamma, d / 2, d)
        high = MultivariateExtendedGneiting(phi, gamma, d / 2 + 1, d)
        h = rng.uniform(-3, 3, (500, d))
        u = rng.uniform(-3, 3, (500, gamma.dim))
        diff = high.evaluate(h, u) - low.evaluate(h, u) * laplace_map(gamma, 1.0, 1.0).evaluate(u)
        assert np.abs(diff).max() <= 1e-12


@pytest.mark.acceptance("A9")
def test_a9_oracle_agreement():
    rng = np.random.default_rng(SEED)
    models = dict(CATALOG, **adversarial())
    disagreements = []
    for name, model in models.items():
        max_n = 6 // model.m
        configs = [np.array([[0.0], [1.0], [2.0]])[:max_n] * np.eye(model.dim)[:1]]
        configs += random_configs(rng, 15, model.dim, max_points=max_n)
        for pts in configs:
            for constraint, check in ((GLOBAL_SUM, check_cnd), (PER_COMPONENT_SUM, check_almost_nd)):
                rep = check(model, pts)
                best, _ = brute_force_qf_search(model, pts, constraint, 10_000, rng)
                if rep.passed:
                    agree = best <= rep.tolerance * (1 + 1e-6)
                else:
                    agree = best > rep.tolerance
                if not agree:
                    disagreements.append((name, constraint, pts.ravel().tolist(), best))
    assert not disagreements
