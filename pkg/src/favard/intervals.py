"""Finite unions of closed intervals, step functions and piecewise-linear functions.

Interval endpoints may be ``Fraction`` (exact) or ``float``; the two are never
mixed silently inside one set.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np


def _merge(pairs) -> tuple:
    pairs = sorted((lo, hi) for lo, hi in pairs if hi > lo)
    out = []
    for lo, hi in pairs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _floor(x):
    return math.floor(x) if not isinstance(x, Fraction) else x.numerator // x.denominator


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint closed intervals, optionally extended 1-periodically.

    When ``periodic`` is true the components describe one period and lie in
    ``[0, 1]``; the set is their translate by every integer.
    """

    components: tuple = ()
    periodic: bool = False

    def __post_init__(self):
        comps = _merge(self.components)
        if self.periodic:
            folded = []
            for lo, hi in comps:
                if hi - lo >= 1:
                    folded = [(lo * 0, lo * 0 + 1)]
                    break
                k = _floor(lo)
                lo, hi = lo - k, hi - k
                if hi > 1:
                    folded += [(lo, lo * 0 + 1), (lo * 0, hi - 1)]
                else:
                    folded.append((lo, hi))
            comps = _merge(folded)
        object.__setattr__(self, "components", comps)

    # construction ---------------------------------------------------
    @classmethod
    def interval(cls, lo, hi) -> "IntervalSet":
        return cls(((lo, hi),))

    @classmethod
    def comb(cls, Q: int, width, offset=0) -> "IntervalSet":
        """Periodic set of points within ``width / 2`` of ``offset + j / Q``."""
        half = width / 2
        comps = []
        for j in range(Q):
            c = offset + Fraction(j, Q) if isinstance(width, Fraction) else offset + j / Q
            comps.append((c - half, c + half))
        return cls(tuple(comps), periodic=True)

    # basic queries --------------------------------------------------
    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def is_empty(self) -> bool:
        return not self.components

    @property
    def measure(self):
        """Total length (per period for periodic sets)."""
        return sum((hi - lo for lo, hi in self.components), 0)

    @property
    def lows(self) -> np.ndarray:
        return np.array([float(lo) for lo, _ in self.components])

    @property
    def highs(self) -> np.ndarray:
        return np.array([float(hi) for _, hi in self.components])

    def contains(self, x) -> np.ndarray:
        """Vectorised membership test (floating point)."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            x = x - np.floor(x)
        if not self.components:
            return np.zeros(x.shape, dtype=bool)
        lows, highs = self.lows, self.highs
        idx = np.searchsorted(lows, x, side="right") - 1
        ok = idx >= 0
        inside = np.zeros(x.shape, dtype=bool)
        inside[ok] = x[ok] <= highs[idx[ok]]
        if self.periodic:
            inside |= (x == 0) & (highs[-1] >= 1)
        return inside

    def __contains__(self, x):
        if self.periodic:
            x = x - _floor(x)
        i = bisect_right([lo for lo, _ in self.components], x) - 1
        return i >= 0 and x <= self.components[i][1]

    # transformations ------------------------------------------------
    def window(self, a, b) -> "IntervalSet":
        """The non-periodic set ``self ∩ [a, b]``."""
        if not self.periodic:
            return IntervalSet(tuple((max(lo, a), min(hi, b)) for lo, hi in self.components
                                     if hi > a and lo < b))
        out = []
        for k in range(_floor(a) - 1, _floor(b) + 1):
            for lo, hi in self.components:
                lo2, hi2 = max(lo + k, a), min(hi + k, b)
                if hi2 > lo2:
                    out.append((lo2, hi2))
        return IntervalSet(tuple(out))

    def translate(self, tau) -> "IntervalSet":
        return IntervalSet(tuple((lo + tau, hi + tau) for lo, hi in self.components), self.periodic)

    def scale(self, factor) -> "IntervalSet":
        """Image under ``x -> factor * x`` (drops periodicity)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        if self.periodic:
            raise ValueError("scale a window of a periodic set instead")
        return IntervalSet(tuple((lo * factor, hi * factor) for lo, hi in self.components))

    def to_float(self) -> "IntervalSet":
        return IntervalSet(tuple((float(lo), float(hi)) for lo, hi in self.components), self.periodic)

    # set algebra ----------------------------------------------------
    def union(self, other: "IntervalSet") -> "IntervalSet":
        if self.periodic != other.periodic:
            raise ValueError("cannot mix periodic and non-periodic sets")
        return IntervalSet(self.components + other.components, self.periodic)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        if self.periodic != other.periodic:
            raise ValueError("cannot mix periodic and non-periodic sets")
        a, b = self.components, other.components
        i = j = 0
        out = []
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if hi > lo:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out), self.periodic)

    __and__ = intersection
    __or__ = union

    def difference_set(self) -> "IntervalSet":
        """``self - self``; folded mod 1 for periodic sets."""
        pairs = [(c[0] - d[1], c[1] - d[0]) for c in self.components for d in self.components]
        return IntervalSet(tuple(pairs), self.periodic)

    def distance_to_point(self, x):
        """Distance from ``x`` to the set (mod 1 when periodic)."""
        if not self.components:
            return math.inf
        if self.periodic:
            x = x - _floor(x)
            cands = [x - 1, x, x + 1]
        else:
            cands = [x]
        best = None
        for y in cands:
            for lo, hi in self.components:
                d = lo - y if y < lo else (y - hi if y > hi else y * 0)
                if best is None or d < best:
                    best = d
        return best

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` points uniform with respect to length on a non-periodic set."""
        if self.periodic:
            raise ValueError("sample a window of a periodic set")
        lows, highs = self.lows, self.highs
        lengths = highs - lows
        cum = np.cumsum(lengths)
        u = rng.random(n) * cum[-1]
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(lows) - 1)
        offset = u - (cum[idx] - lengths[idx])
        return lows[idx] + offset


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function with compact support.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i + 1])`` and the
    function vanishes outside ``[breakpoints[0], breakpoints[-1])``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values)
        if b.ndim != 1 or v.ndim != 1:
            raise ValueError("breakpoints and values must be 1-d")
        if len(b) and len(v) != len(b) - 1:
            raise ValueError("need len(values) == len(breakpoints) - 1")
        if np.any(np.diff(b) < 0):
            raise ValueError("breakpoints must be sorted")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def indicator_sum(cls, lows, highs) -> "StepFunction":
        """``sum_j 1_[lows_j, highs_j]`` built by an endpoint sweep."""
        lows = np.asarray(lows, dtype=float).ravel()
        highs = np.asarray(highs, dtype=float).ravel()
        if lows.size == 0:
            return cls.zero()
        b = np.unique(np.concatenate([lows, highs]))
        ls, hs = np.sort(lows), np.sort(highs)
        counts = np.searchsorted(ls, b[:-1], side="right") - np.searchsorted(hs, b[:-1], side="right")
        return cls(b, counts.astype(np.int64))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.values.size == 0:
            return np.zeros(x.shape, dtype=self.values.dtype if self.values.size else float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(x.shape, dtype=self.values.dtype)
        out[inside] = self.values[idx[inside]]
        return out

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def integral(self) -> float:
        return float(np.sum(self.values * self.lengths)) if self.values.size else 0.0

    def integral_of_square(self) -> float:
        return float(np.sum(self.values.astype(float) ** 2 * self.lengths)) if self.values.size else 0.0

    def max(self):
        return self.values.max() if self.values.size else 0

    def superlevel_measure(self, level) -> float:
        """Length of ``{x : f(x) >= level}``."""
        if not self.values.size:
            return 0.0
        return float(np.sum(self.lengths[self.values >= level]))

    def superlevel_set(self, level) -> IntervalSet:
        mask = self.values >= level
        b = self.breakpoints
        return IntervalSet(tuple((b[i], b[i + 1]) for i in np.flatnonzero(mask)))

    def support(self) -> IntervalSet:
        return self.superlevel_set(np.nextafter(0, 1)) if self.values.dtype.kind == "f" \
            else self.superlevel_set(1)

    def support_measure(self) -> float:
        return float(np.sum(self.lengths[self.values != 0])) if self.values.size else 0.0

    def midpoints(self) -> np.ndarray:
        b = self.breakpoints
        return 0.5 * (b[:-1] + b[1:])

    def maximum(self, *others: "StepFunction") -> "StepFunction":
        """Pointwise maximum with other step functions."""
        funcs = (self,) + others
        pts = [f.breakpoints for f in funcs if f.breakpoints.size]
        if not pts:
            return StepFunction.zero()
        b = np.unique(np.concatenate(pts))
        if b.size < 2:
            return StepFunction.zero()
        left = b[:-1]
        vals = np.max(np.stack([f(left) for f in funcs]), axis=0)
        return StepFunction(b, vals)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function, zero outside ``[knots[0], knots[-1]]``."""

    knots: tuple
    values: tuple

    def __call__(self, x):
        xs = np.array([float(k) for k in self.knots])
        ys = np.array([float(v) for v in self.values])
        return np.interp(np.asarray(x, dtype=float), xs, ys, left=0.0, right=0.0)

    def exact(self, x):
        """Exact evaluation at a single point (Fractions in, Fractions out)."""
        k = self.knots
        if x < k[0] or x > k[-1]:
            return 0 * x
        i = bisect_right(list(k), x) - 1
        if i >= len(k) - 1:
            return self.values[-1]
        x0, x1 = k[i], k[i + 1]
        y0, y1 = self.values[i], self.values[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    @property
    def support(self) -> IntervalSet:
        pieces = []
        for i in range(len(self.knots) - 1):
            if self.values[i] != 0 or self.values[i + 1] != 0:
                pieces.append((self.knots[i], self.knots[i + 1]))
        return IntervalSet(tuple(pieces))


def overlap_length(a: IntervalSet, b: IntervalSet):
    """``|a ∩ b|`` for non-periodic sets."""
    return a.intersection(b).measure


def autocorrelation(gamma: IntervalSet) -> PiecewiseLinear:
    """``xi -> |gamma ∩ (gamma + xi)|`` exactly, as a piecewise-linear function."""
    # each pair of components contributes a trapezoid; track slope jumps
    jumps: dict = {}
    for a0, a1 in gamma.components:
        for b0, b1 in gamma.components:
            for x, s in ((a0 - b1, 1), (a0 - b0, -1), (a1 - b1, -1), (a1 - b0, 1)):
                jumps[x] = jumps.get(x, 0) + s
    knots = sorted(jumps)
    if not knots:
        return PiecewiseLinear((0,), (0,))
    values = [knots[0] * 0]
    slope = 0
    for i in range(1, len(knots)):
        slope += jumps[knots[i - 1]]
        values.append(values[-1] + slope * (knots[i] - knots[i - 1]))
    return PiecewiseLinear(tuple(knots), tuple(values))
