"""Sets of large values: zero sets, cluster combs, translation search and the
multiscale construction.

A set ``Gamma`` is useful when ``Gamma - Gamma`` stays away from the zeros of
the cyclotomic part ``A''`` of a mask polynomial, so ``|A''|`` is bounded below
there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import SearchFailed, VerificationFailed
from .fibering import AssignmentFunction, check_theorem_hypotheses
from .intervals import IntervalSet, PiecewiseLinear, autocorrelation
from .mask_poly import DigitSet, MaskPolynomial, cyclotomic_factorization, lcm_all, p_adic_valuation

MAX_REFINEMENT_DEPTH = 8
SAMPLE_TOL = 1e-10


@dataclass(frozen=True)
class ZeroSet:
    """Angles ``k/s`` in ``[0, 1)`` of primitive roots of unity."""

    points: tuple

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in self.points


def sigma_set(S: Iterable[int]) -> ZeroSet:
    """Angles of all primitive ``s``-th roots of unity for ``s`` in ``S``."""
    pts = set()
    for s in S:
        if s < 2:
            raise ValueError(f"scales must be at least 2, got {s}")
        pts.update(Fraction(k, s) for k in range(1, s) if math.gcd(k, s) == 1)
    return ZeroSet(tuple(sorted(pts)))


@dataclass(frozen=True)
class ClusterPlan:
    """Scales sharing a direction prime ``p`` and exponent ``alpha``.

    ``Q = p**(alpha-1) * lcm(q_j)`` where ``s_j = p**alpha * q_j``, and the
    comb width must satisfy ``0 < width < 1 / (Q * T)`` with ``T = p``.
    """

    members: tuple
    prime: int
    alpha: int
    Q: int
    T: int
    width: Fraction

    @property
    def max_width(self) -> Fraction:
        return Fraction(1, self.Q * self.T)


def cluster_partition(S: Iterable[int], sigma: AssignmentFunction,
                      width_fraction: Fraction = Fraction(19, 20)) -> list:
    """Group ``S`` by ``(sigma(s), v_p(s))`` and compute each cluster's comb.

    The comb width is ``width_fraction / (Q * T)``.
    """
    width_fraction = Fraction(width_fraction)
    if not 0 < width_fraction < 1:
        raise ValueError("width_fraction must lie in (0, 1)")
    groups: dict = {}
    for s in sorted(set(S)):
        p = sigma(s)
        groups.setdefault((p, p_adic_valuation(s, p)), []).append(s)
    plans = []
    for (p, alpha), members in sorted(groups.items()):
        qs = [s // p ** alpha for s in members]
        Q = p ** (alpha - 1) * lcm_all(qs)
        plans.append(ClusterPlan(tuple(members), p, alpha, Q, p, width_fraction / (Q * p)))
    return plans


def gamma_single(plan: ClusterPlan) -> IntervalSet:
    """Periodic comb of width ``plan.width`` centred on ``Z / Q``."""
    width = Fraction(plan.width)
    if not 0 < width < plan.max_width:
        raise ValueError(f"width {width} outside (0, 1/(Q*T)) = (0, {plan.max_width})")
    return IntervalSet.comb(plan.Q, width)


def separation(gamma: IntervalSet, zeros: ZeroSet):
    """Distance from ``zeros`` to ``gamma - gamma`` (mod 1 for periodic sets)."""
    diff = gamma.difference_set()
    if not len(zeros):
        return math.inf
    return min(diff.distance_to_point(z) for z in zeros)


# translation search ----------------------------------------------------------


def _grid_search(objective, period, step, depth: int, target, strict: bool):
    """Best ``tau`` on ``[0, period)`` at step ``step``, halving until ``target`` is met."""
    for level in range(depth + 1):
        n = math.ceil(period / step)
        best_tau, best_val = None, None
        for j in range(n):
            tau = j * step
            val = objective(tau)
            if best_val is None or val > best_val:  # first maximiser wins ties
                best_tau, best_val = tau, val
        if best_val > target or (not strict and best_val >= target):
            return best_tau, best_val, level
        step = step / 2
    raise SearchFailed(f"best value {float(best_val):.6g} does not reach target "
                       f"{float(target):.6g} after {depth} refinements")


@dataclass(frozen=True)
class IntersectionResult:
    translations: tuple
    gamma: IntervalSet
    measure: object
    target: object


def gamma_intersect_translated(sets: Sequence[IntervalSet], target=None,
                               depth: int = MAX_REFINEMENT_DEPTH) -> IntersectionResult:
    """Translate periodic sets so that their intersection beats ``prod(measures)``.

    Translations are chosen greedily: each new set is shifted to maximise the
    overlap with the running intersection. Since the mean overlap over one
    period equals the product of the measures, a maximiser always keeps the
    running measure at or above the product.
    """
    if not sets:
        raise ValueError("need at least one set")
    if any(not g.periodic for g in sets):
        raise ValueError("inputs must be 1-periodic")
    lambdas = [g.measure for g in sets]
    if target is None:
        target = math.prod(lambdas)
    exact = all(isinstance(lo, Fraction) for g in sets for lo, _ in g.components)
    current = sets[0]
    taus = [Fraction(0) if exact else 0.0]
    q_max = max(len(g) for g in sets)
    step = Fraction(1, 8 * q_max * len(sets)) if exact else 1.0 / (8 * q_max * len(sets))
    for g in sets[1:]:
        if g.measure >= 1:
            taus.append(taus[0])
            continue
        running_target = current.measure * g.measure
        tau, _, _ = _grid_search(lambda t: (current & g.translate(t)).measure, 1, step, depth,
                                 running_target, strict=False)
        taus.append(tau)
        current = current & g.translate(tau)
    measure = current.measure
    if len(sets) > 1 and not measure > target:
        raise SearchFailed(f"intersection measure {measure} does not exceed {target}")
    return IntersectionResult(tuple(taus), current, measure, target)


# certificates ----------------------------------------------------------------


@dataclass
class SlvCertificate:
    """Outcome of an SLV construction.

    ``gamma`` is periodic for a single scale and a subset of ``[0, 1]`` for the
    multiscale construction. ``C1``, ``C2`` and ``eta`` are the constants
    actually achieved, with ``C2 = 1``.
    """

    gamma: IntervalSet
    measure: float
    measure_lower_bound: float
    separation: float
    C1: float
    C2: float
    eta: float
    m: int = 1
    translations: tuple = ()
    notes: list = field(default_factory=list)
    digit_sets: list = field(default_factory=list)


@dataclass
class SingleScaleSlv:
    """Single-scale ``Gamma_A`` for one digit set, with exact separation."""

    digits: tuple
    base: int
    gamma: IntervalSet
    clusters: list
    zeros: ZeroSet
    separation: Fraction
    lower_bound: Fraction
    sigma: Optional[AssignmentFunction]
    phi_lower: float
    exceeds_inverse_cardinality: bool
    notes: list = field(default_factory=list)

    @property
    def measure(self):
        return self.gamma.measure


def _double_prime(A) -> MaskPolynomial:
    return cyclotomic_factorization(A).a_double_prime


def _trig_abs(poly: MaskPolynomial, xi) -> np.ndarray:
    z = np.exp(2j * np.pi * np.asarray(xi, dtype=float))
    return np.abs(np.polyval(np.array(poly.coeffs[::-1], dtype=float), z))


def phi_lower_bound(poly: MaskPolynomial, region: IntervalSet, step: float = 1e-4) -> float:
    """Rigorous lower bound of ``|P(e(xi))| / P(1)`` over a periodic ``region``.

    Uses a grid through every component plus the Lipschitz constant of the
    trigonometric polynomial.
    """
    norm = float(poly(1))
    lip = 2 * math.pi * sum(k * abs(c) for k, c in enumerate(poly.coeffs)) / abs(norm)
    if lip == 0:
        return 1.0
    comps = region.to_float().components
    while True:
        pts = [np.linspace(lo, hi, max(2, math.ceil((hi - lo) / step) + 1)) for lo, hi in comps]
        grid_min = float(np.min(_trig_abs(poly, np.concatenate(pts)))) / abs(norm)
        bound = grid_min - lip * step / 2
        if bound >= 0.99 * grid_min or step < 1e-8:
            return max(bound, 0.0)
        step = step / 4


def single_scale_slv(A, sigma: Optional[AssignmentFunction] = None,
                     width_fraction: Fraction = Fraction(19, 20)) -> SingleScaleSlv:
    """Build ``Gamma_A`` from the clusters of ``(S^(2), sigma)``.

    ``sigma`` defaults to the assignment minimising ``FIB``.
    """
    digits = A.digits if isinstance(A, DigitSet) else tuple(sorted(A))
    base = A.base if isinstance(A, DigitSet) else max(3, digits[-1] + 1)
    report = check_theorem_hypotheses(digits)
    S = report.factorization.s2_indices
    notes = []
    if not S:
        full = IntervalSet(((Fraction(0), Fraction(1)),), periodic=True)
        return SingleScaleSlv(digits, base, full, [], ZeroSet(()), Fraction(1), Fraction(1),
                              None, 1.0, True, ["S2 empty: A'' = 1, vacuous"])
    if sigma is None:
        sigma = report.min_fib_sigma
    plans = cluster_partition(S, sigma, width_fraction)
    combs = [gamma_single(c) for c in plans]
    inter = gamma_intersect_translated(combs)
    zeros = sigma_set(S)
    sep = separation(inter.gamma, zeros)
    if not sep > 0:
        raise VerificationFailed(f"separation {sep} is not positive")
    poly = report.factorization.a_double_prime
    lower = phi_lower_bound(poly, inter.gamma.difference_set())
    exceeds = inter.measure > Fraction(1, len(digits))
    if not report.fibered_subset:
        notes.append("no fibered subset: cluster comb used, external construction assumed "
                     "for the cardinality bound")
    if not exceeds:
        notes.append("measure does not exceed 1/#A")
    return SingleScaleSlv(digits, base, inter.gamma, plans, zeros, sep, inter.target, sigma,
                          lower, exceeds, notes)


# multiscale -------------------------------------------------------------------


def _piece_window(gamma: IntervalSet, factor: float, tau: float) -> IntervalSet:
    """``([0, 1] + tau) ∩ factor * gamma``, shifted back by ``-tau``."""
    base = gamma.window(tau / factor, (1 + tau) / factor)
    return IntervalSet(tuple((lo * factor - tau, hi * factor - tau) for lo, hi in base.components))


def multiscale_slv(config, t: Sequence[float], m: int, width_fraction=Fraction(19, 20),
                   samples: int = 100_000, seed: int = 0,
                   depth: int = MAX_REFINEMENT_DEPTH) -> SlvCertificate:
    """Intersect translated, rescaled copies of each ``Gamma_i`` inside ``[0, 1]``.

    Digit set ``i`` enters at scales ``L**-k / t_{i-1}`` for ``k < m`` (with
    ``t_0 = 1``); digit sets whose parameter vanishes contribute nothing.
    Each piece is translated over one of its periods to maximise the overlap
    with the running intersection.

    Parameters
    ----------
    config : CantorConfig
    t : sequence of float
        Direction parameters ``t_1 .. t_{d-1}``.
    m : int
        Number of scales.
    samples : int
        Number of random points of ``Gamma - Gamma`` used to check the lower
        bound on ``phi''``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    t = [float(x) for x in t]
    if len(t) != config.d - 1:
        raise ValueError(f"need {config.d - 1} direction parameters, got {len(t)}")
    L = config.L
    scales = [1.0] + t
    singles = [single_scale_slv(DigitSet(A, L), width_fraction=width_fraction)
               for A in config.digit_sets]
    notes = []
    current = IntervalSet(((0.0, 1.0),))
    taus = []
    lower = 1.0
    active = []
    for i, (ss, ti) in enumerate(zip(singles, scales)):
        notes.extend(f"digit set {i}: {n}" for n in ss.notes)
        if ti == 0 or not ss.clusters:
            continue
        active.append(i)
        g = ss.gamma.to_float()
        nu = float(ss.measure)
        for k in range(m):
            factor = L ** (-k) / ti
            q = max(c.Q for c in ss.clusters)
            step = factor / (8 * q * m)
            target = current.measure * nu
            tau, _, _ = _grid_search(lambda tau: (current & _piece_window(g, factor, tau)).measure,
                                     factor, step, depth, target * (1 - 1e-12), strict=False)
            current = current & _piece_window(g, factor, tau)
            taus.append((i, k, tau))
            lower *= nu
    measure = current.measure
    if measure <= 0:
        raise SearchFailed("multiscale intersection is empty")
    c_prod = math.prod(singles[i].phi_lower for i in active)
    C1 = -math.log(c_prod, L) if active else 0.0
    eta = 1 + math.log(measure, L) / m
    if active:
        _verify_phi(config, singles, scales, active, m, current, C1, samples, seed)
    sep = min((float(singles[i].separation) for i in active), default=math.inf)
    return SlvCertificate(current, measure, lower, sep, C1, 1.0, eta, m, tuple(taus), notes, singles)


def _verify_phi(config, singles, scales, active, m, gamma, C1, samples, seed):
    rng = np.random.default_rng(seed)
    xi = gamma.sample(samples, rng) - gamma.sample(samples, rng)
    log_prod = np.zeros(samples)
    for i in active:
        poly = _double_prime(singles[i].digits)
        norm = float(poly(1))
        for k in range(m):
            log_prod += np.log(_trig_abs(poly, scales[i] * config.L ** k * xi) / norm)
    bound = -C1 * m * math.log(config.L)
    worst = float(np.min(log_prod))
    if worst < bound + math.log1p(-SAMPLE_TOL):
        raise VerificationFailed(f"sampled log|phi''| {worst:.6g} below bound {bound:.6g}")


def witness_function(gamma: IntervalSet) -> PiecewiseLinear:
    """``h = (1_Gamma * 1_{-Gamma}) / |Gamma|``, exact and piecewise linear.

    A periodic input is restricted to ``[0, 1]`` first.
    """
    if gamma.periodic:
        gamma = gamma.window(0, 1)
    mu = gamma.measure
    if not mu > 0:
        raise ValueError("witness function needs a set of positive measure")
    auto = autocorrelation(gamma)
    return PiecewiseLinear(auto.knots, tuple(v / mu for v in auto.values))
