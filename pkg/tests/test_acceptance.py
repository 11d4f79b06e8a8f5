"""Acceptance criteria, one test each.

Every test prints a line ``ACCEPTANCE <n> PASS|FAIL <seconds>s <detail>`` so the
suite doubles as a readable checklist in ``pytest -v`` output.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import DATA
from favard.cantor import (CantorConfig, cantor_iterate, direction_from_t, exact_projection_mass,
                           exponent_calculator, favard_estimate, rational_direction)
from favard.cli import main
from favard.experiments import ExperimentConfig, fit_power_law, favard_series, run_analyze
from favard.fibering import (AssignmentFunction, check_theorem_hypotheses, fib_value,
                             find_fibered_subset, is_sigma_fibered, long_fiber_plane, min_fib)
from favard.mask_poly import MaskPolynomial, cyclotomic, cyclotomic_factorization, divisors
from favard.riesz import PhiFunction, RieszSpec, plancherel_check, riesz_integral
from favard.slv import cluster_partition, gamma_single, separation, sigma_set, witness_function

FIBERED_EXAMPLE = (0, 10, 20, 1, 11, 21, 5, 15, 25, 2, 17)
FOUR = CantorConfig.corner(2)

# pinned tolerances
TOL_RIESZ_REL = 1e-3
TOL_PLANCHEREL_REL = 1e-2
TOL_EXPONENT = 1e-9
TOL_WITNESS_FFT = 1e-9
TOL_NORM = 1e-14


@contextmanager
def criterion(capsys, number, detail=""):
    info = {"detail": detail}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'} {elapsed:8.3f}s {info['detail']}")
        info["elapsed"] = elapsed


def test_01_worked_example_factorization(capsys):
    with criterion(capsys, 1) as c:
        fact = cyclotomic_factorization((0, 2, 3, 4, 6))
        rep = run_analyze(ExperimentConfig(digit_sets=((0, 2, 3, 4, 6),) * 2, L=25))
        c["detail"] = f"S1={sorted(fact.s1_indices)} S2={sorted(fact.s2_indices)}"
        assert fact.s1_indices == {5} and fact.s2_indices == {6}
        assert rep["digit_sets"][0]["S1"] == [5] and rep["digit_sets"][0]["S2"] == [6]
    assert c["elapsed"] < 1


def test_02_four_corner_algebra(capsys):
    with criterion(capsys, 2) as c:
        fact = cyclotomic_factorization((0, 3))
        rep = run_analyze(ExperimentConfig(digit_sets=((0, 3), (0, 3)), L=4))
        one = MaskPolynomial.one()
        c["detail"] = f"A={fact.polynomial} S2={sorted(fact.s2_indices)} branch={rep['branch']}"
        assert fact.polynomial == cyclotomic(2) * cyclotomic(6)
        assert fact.s1_indices == {2, 6} and not fact.s2_indices
        assert fact.a3_factor == one and fact.a4_factor == one
        assert rep["branch"] == "N^-eps"
    assert c["elapsed"] < 1


def test_03_fibered_example(capsys):
    with criterion(capsys, 3) as c:
        rep = check_theorem_hypotheses(FIBERED_EXAMPLE)
        S = rep.factorization.s2_indices
        sigma3 = AssignmentFunction({6: 3, 30: 3})
        w = find_fibered_subset(FIBERED_EXAMPLE, sigma=sigma3)
        c["detail"] = (f"#A={rep.cardinality} S2={sorted(S)} conds={rep.small_cardinality},"
                       f"{rep.two_primes},{rep.fibered_subset} witness={w.subset} "
                       f"min_fib={min_fib(S)[0].fib_value} fib(3)={fib_value(S, sigma3).fib_value}")
        assert rep.cardinality == 11 and S == {6, 30}
        assert (rep.small_cardinality, rep.two_primes, rep.fibered_subset) == (False, False, True)
        assert w.subset == (0, 10, 20)
        assert min_fib(S)[0].fib_value == 2 and fib_value(S, sigma3).fib_value == 3
    assert c["elapsed"] < 5


def test_04_long_fiber_plane(capsys):
    with criterion(capsys, 4) as c:
        lf = long_fiber_plane([2], 3, 1)
        S = cyclotomic_factorization(lf.digits).s2_indices
        c["detail"] = f"M={lf.modulus} #A={len(lf.digits)} S2={sorted(S)}"
        assert lf.modulus == 18 and S == {6, 18}
        assert all(math.gcd(len(lf.digits), s) == 1 for s in S)
        assert is_sigma_fibered(lf.long_fiber, AssignmentFunction({s: 3 for s in S}))
        assert is_sigma_fibered(lf.plane, AssignmentFunction({s: 2 for s in S}))
    assert c["elapsed"] < 5


def test_05_slv_certificate(capsys):
    import dataclasses

    with criterion(capsys, 5) as c:
        rho = F(1, 50)
        cluster = dataclasses.replace(cluster_partition({6, 30}, AssignmentFunction({6: 3, 30: 3}))[0],
                                      width=rho)
        gamma = gamma_single(cluster)
        sep = separation(gamma, sigma_set({6, 30}))
        h = witness_function(gamma.window(0, 1))
        n, period = 2 ** 16, 4.0
        x = (np.arange(n) - n // 2) * (period / n)
        hx = h(x)
        spec_min = float((np.fft.fft(np.fft.ifftshift(hx)).real * (period / n)).min())
        c["detail"] = f"Q={cluster.Q} measure={gamma.measure} separation={sep} min_hat_h={spec_min:.3e}"
        assert gamma.measure == cluster.Q * rho
        assert sep >= F(1, 30) - rho
        assert h.exact(F(0)) == 1 and hx.min() >= 0 and hx.max() <= 1
        assert spec_min >= -TOL_WITNESS_FFT
    assert c["elapsed"] < 10


def test_06_projection_mass(capsys):
    with criterion(capsys, 6) as c:
        rng = np.random.default_rng(6)
        two_c_squared = F(4 * FOUR.d, 4)  # (2c)^2 = d
        exact = 0
        for _ in range(100):
            N = int(rng.integers(0, 7))
            u = F(int(rng.integers(-50, 51)), int(rng.integers(1, 50)))
            m = exact_projection_mass(cantor_iterate(FOUR, N), rational_direction([u]))
            exact += m.rational == 0 and m.coefficient ** 2 * m.r_squared == two_c_squared
        c["detail"] = f"{exact}/100 exact"
        assert exact == 100


def test_07_unit_square_favard(capsys):
    with criterion(capsys, 7) as c:
        est = favard_estimate(FOUR, 0, n_directions=100_000, seed=7)
        z = (est.value - 4 / math.pi) / est.stderr
        c["detail"] = f"value={est.value:.6f} 4/pi={4 / math.pi:.6f} z={z:.2f}"
        assert abs(z) <= 3
    assert c["elapsed"] < 10


def test_08_power_law(capsys):
    with criterion(capsys, 8) as c:
        s2 = favard_series(FOUR, range(1, 8), 10_000, seed=42)
        s3 = favard_series(CantorConfig.corner(3), range(1, 5), 10_000, seed=42)
        slope = fit_power_law(s2).slope
        c["detail"] = (f"d=2 slope={slope:.4f} decreasing={s2.strictly_decreasing()} "
                       f"d=3 decreasing={s3.strictly_decreasing()}")
        assert s2.strictly_decreasing() and s3.strictly_decreasing()
        assert -1.2 <= slope <= -0.2
        assert s2.to_csv() == (DATA / "four_corner_seed42.csv").read_text()
        assert s3.to_csv() == (DATA / "corner3_seed42.csv").read_text()
    assert c["elapsed"] < 600


def test_09_riesz_periodicity(capsys):
    with criterion(capsys, 9) as c:
        spec = RieszSpec(PhiFunction((0, 3), base=4), 2, 4, normalized=False)
        got = riesz_integral(spec, 0.0, 4.0 ** -2).value
        want = 2 ** 3 * 4.0 ** -2
        c["detail"] = f"quadrature={got:.12f} oracle={want}"
        assert abs(got - want) <= TOL_RIESZ_REL * want


def test_10_plancherel(capsys):
    with criterion(capsys, 10) as c:
        errs = [plancherel_check(FOUR, 3, [t]).relative_error for t in (0.0, 1.0)]
        c["detail"] = "rel errors " + ", ".join(f"{e:.2e}" for e in errs)
        assert max(errs) < TOL_PLANCHEREL_REL


def test_11_exponent(capsys):
    with criterion(capsys, 11) as c:
        delta = exponent_calculator(1, 0, 1 - 1e-12, 3 + 1e-12)
        c["detail"] = f"delta={delta!r}"
        assert abs(delta - 0.25) <= TOL_EXPONENT


def test_12_property_suites(capsys, tmp_path):
    with criterion(capsys, 12) as c:
        X = MaskPolynomial((0, 1))
        cyclo_ok = True
        for n in range(1, 201):
            prod = MaskPolynomial.one()
            for d in divisors(n):
                prod = prod * cyclotomic(d)
            cyclo_ok &= prod == X ** n - MaskPolynomial.one()
        worst = 0.0
        for d in (2, 3, 4):
            for t in np.random.default_rng(d).random((10_000, d - 1)):
                worst = max(worst, abs(np.linalg.norm(direction_from_t(t).theta) - 1))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            main(["favard", "--seed", "12", "--samples", "1000", "--out", str(p)])
        same = a.read_bytes() == b.read_bytes()
        c["detail"] = f"cyclotomic={cyclo_ok} max||theta|-1|={worst:.1e} identical_csv={same}"
        assert cyclo_ok and worst <= TOL_NORM and same
