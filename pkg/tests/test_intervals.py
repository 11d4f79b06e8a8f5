from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from favard.intervals import IntervalSet, PiecewiseLinear, StepFunction, autocorrelation

GRID = np.linspace(-0.5, 3.5, 40001)


def raw_intervals(max_size=6):
    pair = st.tuples(st.integers(0, 40), st.integers(1, 15)).map(lambda p: (F(p[0], 20), F(p[0] + p[1], 20)))
    return st.lists(pair, min_size=1, max_size=max_size)


def indicator(pairs, x):
    out = np.zeros_like(x, dtype=bool)
    for lo, hi in pairs:
        out |= (x >= float(lo)) & (x <= float(hi))
    return out


class TestIntervalSet:
    def test_normalisation_merges_touching(self):
        s = IntervalSet(((0, 1), (1, 2), (3, 4), (3.5, 5)))
        assert s.components == ((0, 2), (3, 5))

    def test_periodic_folding(self):
        s = IntervalSet(((F(-1, 10), F(1, 10)),), periodic=True)
        assert s.components == ((F(0), F(1, 10)), (F(9, 10), F(1)))
        assert s.measure == F(1, 5)

    def test_comb(self):
        g = IntervalSet.comb(10, F(1, 50))
        assert g.measure == F(1, 5) and len(g) == 11
        assert IntervalSet.comb(1, F(1, 10)).components == ((0, F(1, 20)), (F(19, 20), 1))

    @given(raw_intervals(), raw_intervals())
    def test_measures_against_grid_oracle(self, a, b):
        A, B = IntervalSet(tuple(a)), IntervalSet(tuple(b))
        h = GRID[1] - GRID[0]
        ia, ib = indicator(a, GRID), indicator(b, GRID)
        assert abs(float(A.measure) - ia.sum() * h) < 40 * h
        assert abs(float((A & B).measure) - (ia & ib).sum() * h) < 40 * h
        assert abs(float((A | B).measure) - (ia | ib).sum() * h) < 40 * h
        assert (A & B).measure <= min(A.measure, B.measure)
        assert (A | B).measure <= A.measure + B.measure

    @given(raw_intervals())
    def test_contains_matches_exact_membership(self, a):
        A = IntervalSet(tuple(a))
        xs = [F(k, 40) for k in range(-5, 100)]
        got = A.contains(np.array([float(x) for x in xs]))
        assert list(got) == [x in A for x in xs]

    def test_difference_set_and_distance(self):
        g = IntervalSet.comb(10, F(1, 50))
        d = g.difference_set()
        assert d.measure == F(2, 5)
        assert d.distance_to_point(F(1, 30)) == F(1, 30) - F(1, 50)

    def test_window_of_periodic(self):
        g = IntervalSet.comb(2, F(1, 10))
        w = g.window(0, 2)
        assert w.measure == F(2, 5)
        assert not w.periodic

    def test_sample_stays_inside(self):
        s = IntervalSet(((0.0, 0.1), (0.5, 0.75)))
        x = s.sample(1000, np.random.default_rng(0))
        assert s.contains(x).all()
        assert abs(np.mean(x > 0.3) - 0.25 / 0.35) < 0.05


class TestStepFunction:
    def test_indicator_sum(self):
        f = StepFunction.indicator_sum([0, 0.5], [1, 2])
        assert list(f.values) == [1, 2, 1]
        assert f.integral() == 2.5
        assert f(0.7) == 2 and f(-1) == 0 and f(3) == 0

    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0.01, 3)), min_size=1, max_size=30))
    def test_integral_is_total_length(self, pairs):
        lo = np.array([p[0] for p in pairs])
        hi = lo + np.array([p[1] for p in pairs])
        f = StepFunction.indicator_sum(lo, hi)
        assert abs(f.integral() - (hi - lo).sum()) < 1e-9
        mids = f.midpoints()
        brute = ((lo[None, :] <= mids[:, None]) & (mids[:, None] < hi[None, :])).sum(axis=1)
        assert np.array_equal(f(mids), brute)

    def test_superlevel_and_maximum(self):
        f = StepFunction.indicator_sum([0, 0.5], [1, 2])
        g = StepFunction(np.array([0.25, 0.6]), np.array([3]))
        m = f.maximum(g)
        assert m(0.3) == 3 and m(0.7) == 2 and m(1.5) == 1
        assert f.superlevel_measure(2) == 0.5
        assert f.superlevel_set(2).components == ((0.5, 1.0),)

    def test_zero(self):
        z = StepFunction.zero()
        assert z.integral() == 0 and z.max() == 0


class TestAutocorrelation:
    def test_triangle(self):
        h = autocorrelation(IntervalSet.interval(F(0), F(1, 4)))
        assert h.exact(F(0)) == F(1, 4)
        assert h.exact(F(1, 8)) == F(1, 8)
        assert h.exact(F(-1, 8)) == F(1, 8)
        assert h.exact(F(1, 2)) == 0

    @given(raw_intervals(4), st.integers(-60, 60))
    def test_against_direct_overlap(self, a, k):
        A = IntervalSet(tuple(a))
        xi = F(k, 20)
        direct = (A & A.translate(xi)).measure
        assert autocorrelation(A).exact(xi) == direct
