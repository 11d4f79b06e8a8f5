import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from favard.cantor import CantorConfig, direction_from_t
from favard.exceptions import ResolutionTooLow
from favard.riesz import (PhiFunction, PhiProduct, RieszSpec, nu_hat, nu_hat_atoms, phi_eval,
                          plancherel_check, psi_function, riesz_integral, ssv_detect)
from favard.cantor import stacking_parameters

FOUR = CantorConfig.corner(2)
SETS = [(0, 3), (0, 2, 3, 4, 6), (0, 1, 2, 5, 10, 11, 15, 17, 20, 21, 25), (0, 1, 3, 4), (0, 4, 8)]

# golden: four-corner, t=1, scales 0..3, over [1/16, 1]; independent 10^7-point oracle gave
# 0.017497922163987
GOLDEN_RIESZ = 0.017497922164


def brute_phi(A, xi):
    return np.exp(2j * np.pi * np.multiply.outer(xi, np.array(A))).sum(axis=-1) / len(A)


class TestPhi:
    def test_examples(self):
        phi = PhiFunction((0, 3), base=4)
        assert phi_eval(phi, 0.0) == pytest.approx(1)
        assert abs(phi_eval(phi, 1 / 6)) < 1e-15

    @pytest.mark.parametrize("A", SETS)
    def test_bounded_periodic_and_matches_sum(self, A):
        xi = np.random.default_rng(0).random(100_000) * 10 - 5
        phi = PhiFunction(A)
        v = phi(xi)
        assert np.abs(v).max() <= 1 + 1e-12
        assert np.allclose(v, brute_phi(A, xi), atol=1e-12)
        assert np.allclose(v, phi(xi + 1), atol=1e-9)

    @pytest.mark.parametrize("A", SETS)
    def test_prime_double_prime_product(self, A):
        xi = np.random.default_rng(1).random(2000)
        full, p, pp = (PhiFunction(A, s) for s in ("full", "prime", "double-prime"))
        assert p(0.0) == pytest.approx(1) and pp(0.0) == pytest.approx(1)
        assert np.allclose(full(xi), p(xi) * pp(xi), atol=1e-10)

    def test_bad_selection(self):
        with pytest.raises(ValueError):
            PhiFunction((0, 3), "third")

    def test_product_factorisation(self):
        rng = np.random.default_rng(2)
        cfg = CantorConfig(3, 8, ((0, 7), (0, 7), (0, 7)))
        for _ in range(10_000 // 500):
            t = tuple(rng.random(2))
            xi = rng.random(500) * 20 - 10
            prod = PhiProduct(cfg, t)
            direct = (brute_phi((0, 7), xi) * brute_phi((0, 7), t[0] * xi) * brute_phi((0, 7), t[1] * xi))
            assert np.allclose(np.abs(prod(xi)), np.abs(direct), atol=1e-12)

    def test_product_needs_parameters(self):
        with pytest.raises(ValueError):
            PhiProduct(FOUR, (1.0, 2.0))


class TestRieszIntegral:
    def test_empty_range(self):
        r = riesz_integral(RieszSpec(PhiFunction((0, 3), base=4), 3, 2), 0.2, 0.7)
        assert r.value == pytest.approx(0.5) and r.error == 0

    def test_periodicity_oracle(self):
        spec = RieszSpec(PhiFunction((0, 3), base=4), 2, 4, normalized=False)
        r = riesz_integral(spec, 0, 4 ** -2)
        assert r.value == pytest.approx(2 ** 3 * 4 ** -2, rel=1e-9)

    @given(st.sampled_from([(0, 3), (0, 1), (0, 2)]), st.integers(1, 3), st.integers(0, 2),
           st.floats(0, 1))
    def test_diagonal_count_any_period(self, A, m, extra, u0):
        s = m + extra
        spec = RieszSpec(PhiFunction(A, base=4), m, s, normalized=False)
        r = riesz_integral(spec, u0, u0 + 4.0 ** -m)
        assert r.value == pytest.approx(len(A) ** (s - m + 1) * 4.0 ** -m, rel=1e-9)

    def test_golden(self):
        r = riesz_integral(RieszSpec(PhiProduct(FOUR, (1.0,)), 0, 3), 1 / 16, 1)
        assert r.value == pytest.approx(GOLDEN_RIESZ, rel=1e-8)

    def test_resolution_guard(self):
        spec = RieszSpec(PhiFunction((0, 3), base=4), 0, 3)
        with pytest.raises(ResolutionTooLow):
            riesz_integral(spec, 0, 1, resolution=100)

    def test_rejects(self):
        with pytest.raises(ValueError):
            RieszSpec(PhiFunction((0, 3), base=4), -1, 2)
        with pytest.raises(ValueError):
            riesz_integral(RieszSpec(PhiFunction((0, 3), base=4), 0, 1), 1, 0)


class TestFourierSide:
    @pytest.mark.parametrize("t", [0.0, 0.37, 1.0])
    def test_duality(self, t):
        d = direction_from_t([t])
        xi = np.random.default_rng(3).random(1000) * 400 - 200
        for N in range(4):
            a = nu_hat(FOUR, N, d.theta, xi)
            assert np.allclose(a, nu_hat_atoms(FOUR, N, d.theta, xi), atol=1e-9)
            prod = np.ones(xi.shape)
            for k in range(1, N + 1):
                prod = prod * np.abs(PhiProduct(FOUR, (t,))(d.T[0] * xi / 4 ** k))
            assert np.allclose(np.abs(a) / 4 ** N, prod, atol=1e-12)

    def test_level_zero(self):
        assert plancherel_check(FOUR, 0, [0.0]).relative_error < 1e-6

    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_level_three(self, t):
        assert plancherel_check(FOUR, 3, [t]).relative_error < 0.01

    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_refinement(self, t):
        r = math.sqrt(2) / 2 / 64
        errs = [plancherel_check(FOUR, 3, [t], cutoff=c / r).relative_error for c in (5, 10, 20, 40)]
        assert errs == sorted(errs, reverse=True)

    def test_resolution_guard(self):
        with pytest.raises(ResolutionTooLow):
            plancherel_check(FOUR, 1, [1.0], resolution=1.0)


class TestPsi:
    def test_examples(self):
        assert psi_function(3, 1, "ssv", 4) == 4.0 ** -3
        assert psi_function(3, 1, "square-ssv", 4) == 4.0 ** -9
        with pytest.raises(ValueError):
            psi_function(0, 1)
        with pytest.raises(ValueError):
            psi_function(2, 1, "other")

    @given(st.integers(3, 40), st.floats(0.1, 5))
    def test_log_dominates(self, m, c1):
        assert psi_function(m, c1, "log-ssv") <= psi_function(m, c1, "ssv")

    @pytest.mark.parametrize("N", [10 ** 3, 10 ** 4, 10 ** 5])
    @pytest.mark.parametrize("c1", [1.0, 2.0])
    def test_threshold_matches_stacking_scale(self, N, c1):
        eps0 = 0.25
        _, m = stacking_parameters(N, eps0, "ssv", L=4)
        psi = psi_function(m, c1, "ssv", 4)
        lo = N ** (-c1 * math.sqrt(eps0)) * 4.0 ** -c1
        hi = N ** (-(c1 / 2) * math.sqrt(eps0))
        assert lo <= psi <= hi


class TestSsv:
    def test_trivial_product(self):
        # A'' = 1 for the four-corner digits, so this phi is identically 1
        cov = ssv_detect(PhiFunction((0, 3), "double-prime", base=4), 2, threshold=0.5)
        assert cov.count == 0 and cov.cover.measure == 0

    def test_zeros_of_two_point_set(self):
        cov = ssv_detect(PhiFunction((0, 3), base=4), 1, threshold=0.1)
        assert cov.count == 3
        for (lo, hi), z in zip(cov.cover, (1 / 6, 1 / 2, 5 / 6)):
            assert lo < z < hi and hi - lo < 0.05

    def test_cover_contains_every_small_grid_point(self):
        phi = PhiFunction((0, 3), base=4)
        cov = ssv_detect(phi, 3, c1=1.0)
        xi = (np.arange(int(round(1 / cov.grid_step))) + 0.5) * cov.grid_step
        vals = np.abs(phi(xi) * phi(4 * xi) * phi(16 * xi))
        assert cov.cover.contains(xi[vals <= cov.threshold]).all()

    def test_growth(self):
        phi = PhiFunction((0, 3), base=4)
        counts = [ssv_detect(phi, m, c1=1.0).count for m in (2, 3, 4)]
        assert counts[0] < counts[1] < counts[2]
        ratio = max(b / a for a, b in zip(counts, counts[1:]))
        c2 = max(ssv_detect(phi, m, c1=1.0).c2 for m in (2, 3, 4))
        assert ratio <= 4 ** c2 * 4

    def test_guards(self):
        with pytest.raises(ValueError):
            ssv_detect(PhiFunction((0, 3), base=4), 2)
        with pytest.raises(ResolutionTooLow):
            ssv_detect(PhiFunction((0, 3), base=4), 2, c1=1, resolution=10)
