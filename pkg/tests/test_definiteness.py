import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudovario.definiteness import (GLOBAL_SUM, PER_COMPONENT_SUM, SymmetryError, Verdict,
                                      assemble_gamma_block, brute_force_qf_search,
                                      check_almost_nd, check_cnd, check_intersection_triviality,
                                      check_pd, check_pseudo_variogram, check_sqrt_inequality,
                                      component_projector, global_projector, quadratic_form,
                                      random_configs)
from pseudovario.models import ConstantFunction, NoisyCommon, PowerVariogram, Tabulated
from pseudovario.transforms import schoenberg_map

from catalog import (catalog, cubic, diagonal_offset, negative_cross, odd_cross, shift_1d,
                     zero_model)

CATALOG = catalog()
SHIFT_BLOCK = np.array([[0, 1, 1, 2], [1, 0, 0, 1], [1, 0, 0, 1], [2, 1, 1, 0]], dtype=float)


def _constraint_ok(a, constraint, n, m):
    if constraint == GLOBAL_SUM:
        return abs(a.sum()) <= 1e-12
    return np.all(np.abs(a.reshape(n, m).sum(axis=0)) <= 1e-12)


class TestAssemble:
    def test_shift_block(self):
        np.testing.assert_array_equal(assemble_gamma_block(shift_1d(), [0.0, 1.0]), SHIFT_BLOCK)

    def test_zero(self):
        assert np.all(assemble_gamma_block(zero_model(3, 2), np.ones((4, 2))) == 0)

    def test_odd_cross_is_symmetric_but_negative(self):
        M = assemble_gamma_block(odd_cross(), [0.0, 1.0])
        np.testing.assert_array_equal(M, M.T)
        # row (site 1, comp 1), column (site 2, comp 2): gamma_12(0 - 1)
        assert M[0, 3] == -1.0

    def test_symmetry_violation_raises(self):
        bad = Tabulated.from_expressions([["abs(h)", "1 + h"], ["1 + h", "abs(h)"]])
        with pytest.raises(SymmetryError):
            assemble_gamma_block(bad, [0.0, 1.0])

    def test_site_major_layout(self):
        pts = np.array([[0.2], [-1.0], [1.7]])
        M = assemble_gamma_block(CATALOG["lmc-1d-m3"], pts)
        model = CATALOG["lmc-1d-m3"]
        for i in range(3):
            for j in range(3):
                for p in range(3):
                    for q in range(3):
                        assert M[3 * i + p, 3 * j + q] == model.entry(p, q, pts[i] - pts[j])


class TestProjectors:
    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 8), m=st.integers(1, 4))
    def test_idempotent(self, n, m):
        for P in (global_projector(n, m), component_projector(n, m)):
            assert np.abs(P @ P - P).max() <= 1e-14
            np.testing.assert_allclose(P, P.T, atol=0)

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 6), m=st.integers(1, 3))
    def test_ranges(self, n, m):
        v = np.arange(1.0, n * m + 1) ** 1.5
        assert abs((global_projector(n, m) @ v).sum()) <= 1e-10
        w = (component_projector(n, m) @ v).reshape(n, m)
        np.testing.assert_allclose(w.sum(axis=0), 0, atol=1e-10)


class TestCheckCnd:
    def test_shift_passes(self):
        rep = check_cnd(shift_1d(), [0.0, 0.5, 1.0, 2.0])
        assert rep.verdict is Verdict.PASS
        assert rep.witness is None

    def test_cubic_witness(self):
        rep = check_cnd(cubic(), [0.0, 1.0, 2.0])
        assert rep.verdict is Verdict.FAIL
        np.testing.assert_allclose(rep.witness, [1.0, -2.0, 1.0], atol=1e-12)
        assert rep.witness_qf == pytest.approx(8.0, rel=1e-12)
        assert rep.constraint == GLOBAL_SUM

    def test_zero_passes(self):
        rep = check_cnd(zero_model(), np.arange(4.0))
        assert rep.passed and rep.extremal_eigenvalue == 0.0

    def test_negative_cross(self):
        pts = [0.0, 1.0]
        assert check_almost_nd(negative_cross(), pts).passed
        rep = check_cnd(negative_cross(), pts)
        assert not rep.passed
        # re-evaluate from scratch
        M = assemble_gamma_block(negative_cross(), pts)
        assert quadratic_form(M, rep.witness) == pytest.approx(rep.witness_qf)
        assert rep.witness_qf > 1
        assert abs(rep.witness.sum()) <= 1e-12
        # hand witness a_1 = e_1, a_2 = -e_2
        assert quadratic_form(M, np.array([1.0, 0.0, 0.0, -1.0])) == pytest.approx(2.0)

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_catalog_passes_and_implies_almost_nd(self, name, rng):
        model = CATALOG[name]
        for pts in random_configs(rng, 10, model.dim):
            assert check_cnd(model, pts).passed
            assert check_almost_nd(model, pts).passed

    @pytest.mark.parametrize("model", [cubic(), negative_cross(), odd_cross()],
                             ids=["cubic", "negative-cross", "odd-cross"])
    def test_witness_validity(self, model, rng):
        for pts in random_configs(rng, 30, model.dim, min_points=2):
            for check, constraint in ((check_cnd, GLOBAL_SUM), (check_almost_nd, PER_COMPONENT_SUM)):
                rep = check(model, pts)
                if rep.passed:
                    continue
                n = np.shape(pts)[0]
                assert _constraint_ok(rep.witness, constraint, n, model.m)
                M = assemble_gamma_block(model, pts)
                assert quadratic_form(M, rep.witness) > rep.tolerance

    def test_pointwise_necessity(self, rng):
        # a pass on {0, h} forces gamma_ij(h) >= -tol
        for name, model in CATALOG.items():
            h = rng.uniform(-3, 3, size=model.dim)
            pts = np.stack([np.zeros(model.dim), h])
            rep = check_cnd(model, pts)
            assert rep.passed
            assert model(h).min() >= -rep.tolerance


class TestCheckPd:
    def test_all_ones(self):
        assert check_pd(ConstantFunction(np.ones((2, 2))), [0.0, 1.0, 5.0]).passed

    def test_schoenberg_of_shift(self):
        rep = check_pd(schoenberg_map(shift_1d(), 1.0), [0.0, 1.0])
        assert rep.passed
        w = np.linalg.eigvalsh(np.exp(-SHIFT_BLOCK))
        assert rep.min_eigenvalue == pytest.approx(w[0], abs=1e-14)
        assert abs(rep.min_eigenvalue) < 1e-14

    def test_indefinite_constant(self):
        rep = check_pd(ConstantFunction([[1.0, 1.5], [1.5, 1.0]]), [0.0])
        assert not rep.passed
        assert rep.min_eigenvalue == pytest.approx(-0.5)


class TestCheckPseudoVariogram:
    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_catalog(self, name, rng):
        model = CATALOG[name]
        rep = check_pseudo_variogram(model, random_configs(rng, 20, model.dim))
        assert rep.verdict is Verdict.PASS
        assert rep.configs_checked == 20

    def test_diagonal_gate(self):
        rep = check_pseudo_variogram(diagonal_offset(), [[0.0, 1.0]])
        assert rep.verdict is Verdict.FAIL
        assert rep.check == "diagonal-at-zero"
        assert "gamma_{1,1}(0)" in rep.reason

    def test_cubic_fails(self):
        rep = check_pseudo_variogram(cubic(), [[0.0, 1.0, 2.0]])
        assert rep.verdict is Verdict.FAIL

    def test_never_inconclusive(self, rng):
        for model in list(CATALOG.values()) + [cubic(), negative_cross()]:
            rep = check_pseudo_variogram(model, random_configs(rng, 3, model.dim))
            assert rep.verdict in (Verdict.PASS, Verdict.FAIL)


class TestSqrtInequality:
    def test_shift_example(self):
        rep = check_sqrt_inequality(shift_1d(), [2.0])
        assert rep.passed
        G = shift_1d()(2.0)
        assert (np.sqrt(G[0, 0]) - np.sqrt(G[0, 1])) ** 2 == pytest.approx(0.171572875, abs=1e-9)

    def test_noisy(self, rng):
        model = NoisyCommon(PowerVariogram(1.0, 1.0), [1.0, 4.0])
        assert check_sqrt_inequality(model, rng.uniform(-5, 5, 1000)).passed

    def test_negative_entry_kind(self):
        rep = check_sqrt_inequality(negative_cross(), [1.0])
        assert not rep.passed and rep.kind == "negative-entry"

    def test_violation_kind(self):
        # gamma_12 vanishes while gamma_11 grows: margin = 0 - |h|
        f = Tabulated.from_expressions([["abs(h)", "0"], ["0", "abs(h)"]])
        rep = check_sqrt_inequality(f, [2.0])
        assert rep.kind == "violation"
        assert rep.worst_margin == pytest.approx(-2.0, abs=1e-11)


class TestIntersection:
    def test_common(self, rng):
        configs = random_configs(rng, 5, 1)
        rep = check_intersection_triviality(CATALOG["common"], configs)
        assert rep.passed and rep.in_pseudo and rep.in_cross
        assert rep.deviation <= 1e-12

    def test_shift_not_in_intersection(self, rng):
        rep = check_intersection_triviality(shift_1d(), random_configs(rng, 5, 1))
        assert not rep.passed
        assert rep.in_pseudo and not rep.in_cross
        assert any("cross-variogram" in f and "gamma(0) != 0" in f for f in rep.failed)

    def test_noisy_not_in_intersection(self, rng):
        model = NoisyCommon(PowerVariogram(1.0, 1.0), [1.0, 1.0])
        rep = check_intersection_triviality(model, random_configs(rng, 5, 1))
        assert not rep.in_cross
        assert "gamma_{1,2}(0) = 1" in rep.failed[0]

    def test_cross_but_not_pseudo(self, rng):
        rep = check_intersection_triviality(negative_cross(), [[0.0, 1.0]])
        assert rep.in_cross and not rep.in_pseudo
        assert rep.failed[0].startswith("pseudo-variogram")


class TestBruteForce:
    def test_cubic(self):
        best, a = brute_force_qf_search(cubic(), [0.0, 1.0, 2.0], GLOBAL_SUM, 10_000,
                                        np.random.default_rng(0))
        assert best >= 8 / 6 - 1e-3
        assert np.linalg.norm(a) == pytest.approx(1.0)
        assert abs(a.sum()) < 1e-12

    def test_zero(self):
        best, _ = brute_force_qf_search(zero_model(), [0.0, 1.0], GLOBAL_SUM, 100,
                                        np.random.default_rng(0))
        assert best == 0.0

    def test_trivial_subspace(self):
        best, a = brute_force_qf_search(cubic(), [0.0], GLOBAL_SUM, 10, np.random.default_rng(0))
        assert best == 0.0 and np.all(a == 0)

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            brute_force_qf_search(cubic(), [0.0, 1.0], GLOBAL_SUM, 0)

    def test_shift_never_exceeds_tol(self, rng):
        pts = [0.0, 0.5, 1.0, 2.0]
        rep = check_cnd(shift_1d(), pts)
        best, _ = brute_force_qf_search(shift_1d(), pts, GLOBAL_SUM, 10_000, rng)
        assert best <= rep.tolerance * (1 + 1e-6)

    @pytest.mark.parametrize("constraint", [GLOBAL_SUM, PER_COMPONENT_SUM])
    def test_bounded_by_top_eigenvalue(self, constraint, rng):
        model = negative_cross()
        pts = [0.0, 0.7, 2.0]
        check = check_cnd if constraint == GLOBAL_SUM else check_almost_nd
        rep = check(model, pts)
        best, _ = brute_force_qf_search(model, pts, constraint, 5000, rng)
        assert best <= rep.max_eigenvalue + 1e-12
