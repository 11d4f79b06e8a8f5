"""Rational product Cantor sets, their projections and Favard length.

Level-``N`` cells are the cubes ``z + [0, L**-N]^d`` with ``z`` in ``A^N``.
Counting functions use the circumscribed ball of each cube, radius
``c * L**-N`` with ``c = sqrt(d)/2``, so each projected interval is
``pi(z + h/2) +- c*h``. Favard length uses the cube shadows themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.stats import binomtest

from .exceptions import BudgetExceeded
from .intervals import StepFunction
from .mask_poly import DigitSet

DEFAULT_BUDGET = 10_000_000
RHO_MULT_DEFAULT = 3.5


@dataclass(frozen=True)
class CantorConfig:
    """Dimension ``d``, base ``L`` and per-axis digit sets.

    ``prod(#A_i) == L`` is enforced unless ``allow_nonunit_dimension`` is set.
    """

    d: int
    L: int
    digit_sets: tuple
    allow_nonunit_dimension: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension d must be at least 2")
        sets = tuple(tuple(DigitSet(A, self.L).digits) for A in self.digit_sets)
        if len(sets) != self.d:
            raise ValueError(f"need {self.d} digit sets, got {len(sets)}")
        object.__setattr__(self, "digit_sets", sets)
        if not self.allow_nonunit_dimension and math.prod(map(len, sets)) != self.L:
            raise ValueError(f"prod #A_i = {math.prod(map(len, sets))} differs from L = {self.L}; "
                             "pass allow_nonunit_dimension=True to override")

    @classmethod
    def corner(cls, d: int) -> "CantorConfig":
        """The ``2^d``-corner set: ``L = 2^d`` and ``A_i = {0, L-1}``."""
        L = 2 ** d
        return cls(d, L, tuple((0, L - 1) for _ in range(d)))

    @property
    def vitali_constant(self) -> float:
        return math.sqrt(self.d) / 2

    @property
    def cells_per_level(self) -> int:
        return math.prod(len(A) for A in self.digit_sets)

    @property
    def dimension(self) -> float:
        return sum(math.log(len(A)) for A in self.digit_sets) / math.log(self.L)

    def digit_set(self, i: int) -> DigitSet:
        return DigitSet(self.digit_sets[i], self.L)


def _axis_numerators(A: Sequence[int], L: int, N: int) -> np.ndarray:
    vals = np.zeros(1, dtype=np.int64 if L ** N < 2 ** 62 else object)
    for _ in range(N):
        vals = (vals[:, None] * L + np.asarray(A, dtype=vals.dtype)[None, :]).ravel()
    return vals


@dataclass(frozen=True)
class CantorIterate:
    """Level-``N`` cells, stored as integer corner numerators over ``L**N``."""

    config: CantorConfig
    N: int
    numerators: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return self.numerators.shape[0]

    @property
    def denominator(self) -> int:
        return self.config.L ** self.N

    @property
    def side(self) -> float:
        return float(self.config.L) ** -self.N

    @property
    def radius(self) -> float:
        return self.config.vitali_constant * self.side

    @cached_property
    def corners(self) -> np.ndarray:
        return self.numerators.astype(float) / self.denominator

    @property
    def centers(self) -> np.ndarray:
        return self.corners + self.side / 2

    def exact_corners(self) -> list:
        D = self.denominator
        return [tuple(Fraction(int(v), D) for v in row) for row in self.numerators]


def cantor_iterate(config: CantorConfig, N: int, budget: int = DEFAULT_BUDGET) -> CantorIterate:
    """All level-``N`` cells ``A^N = sum_n L**-n A``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    count = config.cells_per_level ** N
    if count > budget:
        raise BudgetExceeded(f"{count} cells at N={N} exceed the budget {budget}")
    axes = [_axis_numerators(A, config.L, N) for A in config.digit_sets]
    grids = np.meshgrid(*axes, indexing="ij")
    nums = np.stack([g.ravel() for g in grids], axis=1)
    return CantorIterate(config, N, nums)


# directions ------------------------------------------------------------------


@dataclass(frozen=True)
class DirectionParam:
    """A unit direction ``theta``, optionally with its parameters ``t``.

    For ``t`` given, ``theta = diag(T) (1, t_1, ..., t_{d-1})`` with
    ``T_1 = prod_j (1 + t_j^2)^(-1/2)`` and ``T_{i+1} = prod_{j >= i} (1 + t_j^2)^(-1/2)``,
    i.e. spherical coordinates with angles ``arctan t_j``.
    """

    theta: np.ndarray
    t: Optional[tuple] = None
    T: Optional[np.ndarray] = None

    @property
    def d(self) -> int:
        return len(self.theta)


def direction_from_t(t: Sequence[float]) -> DirectionParam:
    t = tuple(float(x) for x in np.atleast_1d(t))
    inv = 1.0 / np.sqrt(1.0 + np.square(t))
    d = len(t) + 1
    T = np.empty(d)
    T[0] = np.prod(inv)
    for i in range(1, d):
        T[i] = np.prod(inv[i - 1:])
    theta = T * np.concatenate([[1.0], t])
    return DirectionParam(theta, t, T)


def direction_from_theta(theta: Sequence[float]) -> DirectionParam:
    theta = np.asarray(theta, dtype=float)
    return DirectionParam(theta / np.linalg.norm(theta))


def _theta(direction) -> np.ndarray:
    if isinstance(direction, DirectionParam):
        return direction.theta
    return np.asarray(direction, dtype=float)


def random_directions(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` directions uniform on ``S^{d-1}``."""
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def rational_direction(u: Sequence[Fraction]) -> tuple:
    """Exact rational unit vector by inverse stereographic projection of ``u``."""
    u = [Fraction(x) for x in u]
    s = sum(x * x for x in u)
    return tuple(2 * x / (1 + s) for x in u) + ((1 - s) / (1 + s),)


def sphere_area(d: int) -> float:
    """Surface area of ``S^{d-1}``."""
    return 2 * math.pi ** (d / 2) / gamma_fn(d / 2)


# projections -------------------------------------------------------------------


def projection_profile(it: CantorIterate, direction):
    """Counting function ``f`` and its shadow for one direction.

    Returns ``(StepFunction, IntervalSet)``.
    """
    theta = _theta(direction)
    p = it.centers @ theta
    r = it.radius
    f = StepFunction.indicator_sum(p - r, p + r)
    return f, f.support()


def cube_shadow_lengths(it: CantorIterate, thetas: np.ndarray, batch: int = 0) -> np.ndarray:
    """Length of the union of projected cubes, one value per row of ``thetas``.

    All projected cubes in one direction share the length ``h * sum|theta_i|``,
    so the union length is ``ell + sum(min(gap, ell))`` over sorted left ends.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    h = it.side
    ell = h * np.abs(thetas).sum(axis=1)
    low = h * np.minimum(thetas, 0).sum(axis=1)
    out = np.empty(len(thetas))
    n = it.count
    if batch <= 0:
        batch = max(1, min(len(thetas), 2 ** 24 // max(n, 1)))
    corners = it.corners
    for start in range(0, len(thetas), batch):
        sl = slice(start, start + batch)
        proj = np.sort(corners @ thetas[sl].T, axis=0) + low[sl]
        gaps = np.diff(proj, axis=0)
        out[sl] = ell[sl] + np.minimum(gaps, ell[sl]).sum(axis=0)
    return out


@dataclass(frozen=True)
class ExactMass:
    """``integral f = rational + coefficient * r`` with ``r**2 == r_squared``."""

    rational: Fraction
    coefficient: int
    r_squared: Fraction

    def __float__(self):
        return float(self.rational) + self.coefficient * math.sqrt(self.r_squared)


def exact_projection_mass(it: CantorIterate, theta: Sequence[Fraction]) -> ExactMass:
    """Integrate the counting function in exact arithmetic for a rational ``theta``.

    Endpoints are ``q -+ r`` with ``q`` rational and ``r = c * L**-N`` possibly
    irrational. Both endpoint lists are sorted integers over a common
    denominator and merged with an exact comparator (``r**2`` is rational).
    """
    theta = [Fraction(x) for x in theta]
    if sum(x * x for x in theta) != 1:
        raise ValueError("theta must be an exact unit vector")
    den_theta = math.lcm(*(x.denominator for x in theta))
    weights = [int(x * den_theta) for x in theta]
    D = 2 * it.denominator * den_theta
    # 2 * L^N * den * (corner + h/2) . theta, as exact integers
    nums = it.numerators.astype(object)
    q = sorted(int(v) for v in nums @ np.array(weights, dtype=object) * 2 + sum(weights))
    r2 = Fraction(it.config.d, 4) / Fraction(it.config.L) ** (2 * it.N)  # r = sqrt(d)/2 * L^-N
    s2 = r2 * D * D  # (r*D)^2
    # merge: lows are q_i - rD, highs q_j + rD; low_i < high_j iff q_i - q_j < 2rD
    def low_before_high(qi, qj):
        diff = qi - qj
        return diff <= 0 or diff * diff < 4 * s2

    events = []  # (q, sign) with sign -1 for a low endpoint, +1 for a high endpoint
    i = j = 0
    n = len(q)
    while i < n or j < n:
        if j >= n or (i < n and low_before_high(q[i], q[j])):
            events.append((q[i], -1))
            i += 1
        else:
            events.append((q[j], 1))
            j += 1
    rational = Fraction(0)
    coef = 0
    count = 0
    for (qa, sa), (qb, sb) in zip(events, events[1:]):
        count += 1 if sa < 0 else -1
        if count:
            rational += count * Fraction(qb - qa, D)
            coef += count * (sb - sa)  # in units of r
    return ExactMass(rational, coef, r2)


def max_counting(config: CantorConfig, N: int, direction, budget: int = DEFAULT_BUDGET) -> StepFunction:
    """``f* = max_{1 <= n <= N} f_n`` for one direction."""
    if N < 1:
        raise ValueError("N must be at least 1")
    profiles = [projection_profile(cantor_iterate(config, n, budget), direction)[0]
                for n in range(1, N + 1)]
    return profiles[0].maximum(*profiles[1:])


def parent_child_violation(config: CantorConfig, N: int, direction,
                           budget: int = DEFAULT_BUDGET) -> float:
    """Length of ``{x : 0 < f_{N+1}(x) < f_N(x)}``.

    Zero means the counting functions satisfy the parent-child inequality.
    """
    fN = projection_profile(cantor_iterate(config, N, budget), direction)[0]
    fM = projection_profile(cantor_iterate(config, N + 1, budget), direction)[0]
    b = np.unique(np.concatenate([fN.breakpoints, fM.breakpoints]))
    mid = 0.5 * (b[:-1] + b[1:])
    a, c = fN(mid), fM(mid)
    bad = (c > 0) & (c < a)
    return float(np.sum(np.diff(b)[bad]))


# stacking and multiplicity -------------------------------------------------------


def stacking_parameters(N: int, eps0: float, ssv_class: str = "ssv", L: int = 4):
    """Stacking parameter ``K`` and scale count ``m``.

    ``ssv_class="ssv"`` (all ``A_i^(3) = 1``) gives ``K = N**eps0`` and
    ``m = ceil(sqrt(eps0) log_L N)``; ``"log-ssv"`` divides both exponents by
    ``log_L log_L N``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if not 0 < eps0 < 1:
        raise ValueError("eps0 must lie in (0, 1)")
    logN = math.log(N, L)
    if ssv_class == "ssv":
        return N ** eps0, math.ceil(math.sqrt(eps0) * logN)
    if ssv_class == "log-ssv":
        ll = math.log(logN, L)
        if ll <= 0:
            raise ValueError("log-ssv branch needs log_L log_L N > 0")
        return N ** (eps0 / ll), math.ceil(math.sqrt(eps0) * logN / ll)
    raise ValueError(f"unknown ssv_class {ssv_class!r}")


@dataclass
class MultiplicityReport:
    """Directions classified into ``E_{N,K} = {theta : |{f* >= K}| <= K**-rho}``."""

    N: int
    K: float
    rho_mult: float
    g_measures: np.ndarray = field(repr=False)
    in_exceptional: np.ndarray = field(repr=False)
    fraction: float
    ci: tuple
    sphere_measure: float
    thetas: np.ndarray = field(default=None, repr=False)

    @property
    def exceptional_directions(self) -> np.ndarray:
        return self.thetas[self.in_exceptional]

    @property
    def count(self) -> int:
        return int(self.in_exceptional.sum())


def g_measure(config: CantorConfig, N: int, theta, K: float, iterates=None) -> float:
    """``|{x : f*_{N,theta}(x) >= K}|``, exact from the superlevel sets."""
    if iterates is None:
        iterates = [cantor_iterate(config, n) for n in range(1, N + 1)]
    fstar = max_counting_from(iterates, theta)
    return fstar.superlevel_measure(K)


def max_counting_from(iterates, theta) -> StepFunction:
    profiles = [projection_profile(it, theta)[0] for it in iterates]
    return profiles[0].maximum(*profiles[1:])


def multiplicity_report(config: CantorConfig, N: int, K: float, rho_mult: float = RHO_MULT_DEFAULT,
                        n_directions: int = 1000, seed: int = 0, allow_rho: bool = False,
                        budget: int = DEFAULT_BUDGET) -> MultiplicityReport:
    """Monte Carlo estimate of the measure of low-multiplicity directions."""
    if rho_mult <= 3 and not allow_rho:
        raise ValueError("rho_mult must exceed 3 (pass allow_rho=True to override)")
    rng = np.random.default_rng(seed)
    thetas = random_directions(config.d, n_directions, rng)
    iterates = [cantor_iterate(config, n, budget) for n in range(1, N + 1)]
    g = np.array([max_counting_from(iterates, th).superlevel_measure(K) for th in thetas])
    inside = g <= K ** (-rho_mult)
    k = int(inside.sum())
    ci = binomtest(k, n_directions).proportion_ci(0.95, method="wilson")
    frac = k / n_directions
    return MultiplicityReport(N, K, rho_mult, g, inside, frac, (ci.low, ci.high),
                              frac * sphere_area(config.d), thetas)


@dataclass
class L2BoundReport:
    K: float
    l2_norms: np.ndarray = field(repr=False)
    constant: float


def verify_l2_bound(config: CantorConfig, N: int, K: float, thetas,
                    budget: int = DEFAULT_BUDGET) -> L2BoundReport:
    """``C = max over directions and n <= N of (integral f_n^2) / K``."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    iterates = [cantor_iterate(config, n, budget) for n in range(1, N + 1)]
    norms = np.array([max(projection_profile(it, th)[0].integral_of_square() for it in iterates)
                      for th in thetas]) if len(thetas) else np.empty(0)
    return L2BoundReport(K, norms, float(norms.max() / K) if norms.size else 0.0)


# Favard length ------------------------------------------------------------------


@dataclass(frozen=True)
class FavardEstimate:
    """Normalised mean shadow length with standard error and 95% interval.

    ``raw`` is the unnormalised integral over the sphere.
    """

    N: int
    value: float
    stderr: float
    ci: tuple
    raw: float
    cells: int
    method: str
    samples: int


def _t_grid(d: int, n: int):
    """Midpoint grid on ``[0, 1]^{d-1}`` with surface-element weights."""
    u = (np.arange(n) + 0.5) / n
    mesh = np.meshgrid(*([u] * (d - 1)), indexing="ij")
    t = np.stack([m.ravel() for m in mesh], axis=1)
    rho = np.arctan(t)
    # d(rho)/dt = 1/(1+t^2); sphere element prod_j cos(rho_j)^(j-1)
    w = np.prod(1.0 / (1.0 + t ** 2), axis=1)
    for j in range(1, d - 1):
        w = w * np.cos(rho[:, j]) ** j
    thetas = np.array([direction_from_t(row).theta for row in t])
    return thetas, w / w.sum()


def favard_estimate(config: CantorConfig, N: int, n_directions: int = 10_000, seed: int = 0,
                    method: str = "sphere", budget: int = DEFAULT_BUDGET,
                    thetas: Optional[np.ndarray] = None) -> FavardEstimate:
    """Average shadow length of the level-``N`` cube union.

    ``method="sphere"`` samples directions uniformly; ``method="t-grid"`` uses
    a midpoint grid in ``t`` with ``n_directions`` points per axis. The
    ``t``-cube covers the angles ``[0, pi/4]^{d-1}``, which is a fundamental
    domain of the square's symmetry group only for ``d = 2``.
    """
    it = cantor_iterate(config, N, budget)
    area = sphere_area(config.d)
    if method == "sphere":
        if thetas is None:
            thetas = random_directions(config.d, n_directions, np.random.default_rng(seed))
        lengths = cube_shadow_lengths(it, thetas)
        mean = float(lengths.mean())
        se = float(lengths.std(ddof=1) / math.sqrt(len(lengths))) if len(lengths) > 1 else math.inf
        return FavardEstimate(N, mean, se, (mean - 1.96 * se, mean + 1.96 * se), mean * area,
                              it.count, method, len(lengths))
    if method == "t-grid":
        grid, w = _t_grid(config.d, n_directions)
        lengths = cube_shadow_lengths(it, grid)
        mean = float(np.dot(w, lengths))
        return FavardEstimate(N, mean, 0.0, (mean, mean), mean * area, it.count, method, len(grid))
    raise ValueError(f"unknown method {method!r}")


def exponent_calculator(c1: float, C1: float, beta: float, rho_mult: float) -> float:
    """``delta = 1 / ((c1 + C1)^2 + rho_mult / beta)``."""
    if c1 < 1 or C1 < 0 or not 0 < beta <= 1 or rho_mult < 3:
        raise ValueError("need c1 >= 1, C1 >= 0, beta in (0, 1], rho_mult >= 3")
    return 1.0 / ((c1 + C1) ** 2 + rho_mult / beta)
