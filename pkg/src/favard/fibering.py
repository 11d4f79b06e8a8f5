"""Fibers, fibering tests, fibered-subset search and the FIB cardinality bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .exceptions import SearchBudgetExceeded
from .mask_poly import (
    CyclotomicFactorization,
    DigitSet,
    WeightVector,
    cyclotomic_factorization,
    factorize,
    lcm_all,
    p_adic_valuation,
    prime_divisors,
    weight_vector,
)

#: Sets up to this size are searched exhaustively (meet-in-the-middle).
EXHAUSTIVE_LIMIT = 24


def _is_prime(p: int) -> bool:
    return p >= 2 and factorize(p) == {p: 1}


def fiber(s: int, p: int, M: Optional[int] = None) -> WeightVector:
    """The ``s``-fiber in the ``p`` direction, as a weight vector on ``Z_M``.

    Weight one at ``j * s / p`` for ``j = 0, ..., p - 1``.
    """
    M = s if M is None else M
    if not _is_prime(p) or s % p or M % s:
        raise ValueError(f"need prime p | s | M, got p={p}, s={s}, M={M}")
    w = [0] * M
    for j in range(p):
        w[j * (s // p)] += 1
    return WeightVector(M, tuple(w))


def is_fibered(w, s: int, p: int) -> bool:
    """True iff ``w mod s`` is invariant under translation by ``s / p``.

    ``w`` may be a :class:`WeightVector` whose modulus is a multiple of ``s``,
    or a set of integers.
    """
    if s % p:
        raise ValueError(f"{p} does not divide {s}")
    red = w.reduce(s) if isinstance(w, WeightVector) else weight_vector(w, s)
    step = s // p
    ws = red.weights
    return all(ws[y] == ws[(y + step) % s] for y in range(s))


@dataclass(frozen=True)
class AssignmentFunction:
    """A choice of prime direction ``sigma(s) | s`` for every scale ``s`` in ``S``."""

    mapping: tuple  # sorted ((s, p), ...)

    def __init__(self, mapping: Mapping[int, int]):
        items = tuple(sorted((int(s), int(p)) for s, p in dict(mapping).items()))
        for s, p in items:
            if not _is_prime(p) or s % p:
                raise ValueError(f"sigma({s}) = {p} is not a prime divisor of {s}")
        object.__setattr__(self, "mapping", items)

    @property
    def domain(self) -> frozenset:
        return frozenset(s for s, _ in self.mapping)

    def __call__(self, s: int) -> int:
        return dict(self.mapping)[s]

    def as_dict(self) -> dict:
        return dict(self.mapping)

    def key(self) -> tuple:
        return tuple(p for _, p in self.mapping)


def all_assignments(S: Iterable[int]):
    """Every valid assignment on ``S``, in lexicographic order of prime choices."""
    scales = sorted(set(S))
    for choice in itertools.product(*(prime_divisors(s) for s in scales)):
        yield AssignmentFunction(dict(zip(scales, choice)))


@dataclass(frozen=True)
class FibReport:
    """Exponent sets ``EXP_p``, their sizes ``E_p`` and ``FIB = prod p**E_p``."""

    exponents: dict = field(compare=False)
    fib_value: int

    @property
    def cardinalities(self) -> dict:
        return {p: len(v) for p, v in self.exponents.items()}


def fib_value(S: Iterable[int], sigma: AssignmentFunction) -> FibReport:
    S = set(S)
    if not S <= sigma.domain:
        raise ValueError("sigma is not defined on all of S")
    exps = {}
    for s in S:
        p = sigma(s)
        exps.setdefault(p, set()).add(p_adic_valuation(s, p))
    value = 1
    for p, e in exps.items():
        value *= p ** len(e)
    return FibReport({p: frozenset(e) for p, e in sorted(exps.items())}, value)


def min_fib(S: Iterable[int]):
    """Minimise ``FIB(S, sigma)`` over all assignments.

    Returns ``(FibReport, AssignmentFunction)``; ties go to the
    lexicographically smallest assignment.
    """
    best = None
    for sigma in all_assignments(S):
        rep = fib_value(S, sigma)
        if best is None or rep.fib_value < best[0].fib_value:
            best = (rep, sigma)
    if best is None:  # S empty
        return FibReport({}, 1), AssignmentFunction({})
    return best


# fibered-subset search ------------------------------------------------------


def _constraint_vector(a: int, sigma: AssignmentFunction) -> tuple:
    # Per scale s: entry y counts w(y) - w(y + s/p); fibered iff the sum is zero.
    vec = []
    for s, p in sigma.mapping:
        step = s // p
        block = [0] * s
        block[a % s] += 1
        block[(a - step) % s] -= 1
        vec.extend(block)
    return tuple(vec)


def _add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def _half_sums(items, vectors):
    # Best (smallest, then lexicographic) subset of `items` for every sum vector,
    # plus the best nonempty subset summing to zero (the empty one shadows it).
    zero = tuple(0 for _ in vectors[0]) if vectors else ()
    table = {zero: ()}
    zero_nonempty = None
    for r in range(1, len(items) + 1):
        for combo in itertools.combinations(range(len(items)), r):
            vec = zero
            for i in combo:
                vec = _add(vec, vectors[i])
            subset = tuple(items[i] for i in combo)
            if vec not in table:
                table[vec] = subset
            elif vec == zero and zero_nonempty is None:
                zero_nonempty = subset
    return table, zero_nonempty


def _smallest_fibered_subset(digits: tuple, sigma: AssignmentFunction) -> Optional[tuple]:
    vectors = [_constraint_vector(a, sigma) for a in digits]
    half = len(digits) // 2
    left, left_zero = _half_sums(digits[:half], vectors[:half])
    right, right_zero = _half_sums(digits[half:], vectors[half:])
    cands = [c for c in (left_zero, right_zero) if c]
    for vec, rsub in right.items():
        lsub = left.get(tuple(-x for x in vec))
        if lsub is not None and (lsub or rsub):
            cands.append(tuple(sorted(lsub + rsub)))
    return min(cands, key=lambda c: (len(c), c), default=None)


def _greedy_fibered_subset(digits: tuple, sigma: AssignmentFunction) -> Optional[tuple]:
    # Close a seed under the missing fiber translates, taking the smallest
    # available element each time.
    pool = set(digits)
    for seed in digits:
        chosen = {seed}
        for _ in range(len(digits)):
            deficit = None
            for s, p in sigma.mapping:
                step = s // p
                w = weight_vector(chosen, s).weights
                for y in range(s):
                    if w[y] > w[(y + step) % s]:
                        deficit = (s, (y + step) % s)
                        break
                if deficit:
                    break
            if deficit is None:
                return tuple(sorted(chosen))
            s, target = deficit
            options = sorted(a for a in pool - chosen if a % s == target)
            if not options:
                break
            chosen.add(options[0])
    return None


@dataclass(frozen=True)
class FiberedWitness:
    """A nonempty ``(S, sigma)``-fibered subset of a digit set."""

    subset: tuple
    sigma: AssignmentFunction
    vacuous: bool = False


def fibered_witnesses(A, factorization: Optional[CyclotomicFactorization] = None,
                      max_exhaustive: int = EXHAUSTIVE_LIMIT) -> list:
    """Smallest fibered subset for every assignment on ``S_A^(2)`` that has one."""
    digits = A.digits if isinstance(A, DigitSet) else tuple(sorted(A))
    fact = factorization or cyclotomic_factorization(digits)
    S = fact.s2_indices
    if not S:
        return [FiberedWitness((digits[0],), AssignmentFunction({}), vacuous=True)]
    exhaustive = len(digits) <= max_exhaustive
    out = []
    for sigma in all_assignments(S):
        if exhaustive:
            sub = _smallest_fibered_subset(digits, sigma)
        else:
            sub = _greedy_fibered_subset(digits, sigma)
        if sub:
            out.append(FiberedWitness(sub, sigma))
    if not out and not exhaustive:
        raise SearchBudgetExceeded(
            f"#A = {len(digits)} exceeds the exhaustive limit {max_exhaustive} "
            "and the structured search found no witness"
        )
    return out


def find_fibered_subset(A, factorization: Optional[CyclotomicFactorization] = None,
                        max_exhaustive: int = EXHAUSTIVE_LIMIT,
                        sigma: Optional[AssignmentFunction] = None) -> Optional[FiberedWitness]:
    """Return a fibered subset witness, or ``None`` if none exists.

    When ``S_A^(2)`` is empty the condition is vacuous and the singleton
    ``{min A}`` is returned. Otherwise assignments are tried in lexicographic
    order and the smallest subset for the first successful one is returned.

    Raises
    ------
    SearchBudgetExceeded
        If ``#A`` is above ``max_exhaustive`` and the structured search fails,
        so nonexistence cannot be certified.

    With ``sigma`` given, only that assignment is tried.
    """
    found = fibered_witnesses(A, factorization, max_exhaustive)
    if sigma is not None:
        found = [w for w in found if w.sigma == sigma]
    return found[0] if found else None


def is_sigma_fibered(w, sigma: AssignmentFunction) -> bool:
    """True iff ``w`` is fibered in direction ``sigma(s)`` at every scale ``s``."""
    return all(is_fibered(w, s, p) for s, p in sigma.mapping)


# theorem hypotheses ---------------------------------------------------------


@dataclass
class HypothesisReport:
    """Which of the three digit-set conditions hold, plus the exponent branch."""

    cardinality: int
    s_A: int
    small_cardinality: bool
    two_primes: bool
    fibered_subset: Optional[bool]
    pure_roots_of_unity: bool
    witness: Optional[FiberedWitness] = None
    witnesses: list = field(default_factory=list)
    min_fib: Optional[FibReport] = None
    min_fib_sigma: Optional[AssignmentFunction] = None
    factorization: Optional[CyclotomicFactorization] = None

    @property
    def satisfied(self) -> bool:
        return bool(self.small_cardinality or self.two_primes or self.fibered_subset)


def check_theorem_hypotheses(A, max_exhaustive: int = EXHAUSTIVE_LIMIT) -> HypothesisReport:
    """Evaluate conditions (1) ``#A <= 10``, (2) ``s_A`` has at most two prime
    factors, (3) ``A`` admits a fibered subset.

    Condition (3) is ``None`` when the search budget is exceeded.
    """
    digits = A.digits if isinstance(A, DigitSet) else tuple(sorted(A))
    fact = cyclotomic_factorization(digits)
    s_A = fact.s_A
    try:
        witnesses = fibered_witnesses(digits, fact, max_exhaustive)
        cond3 = bool(witnesses)
    except SearchBudgetExceeded:
        witnesses, cond3 = [], None
    rep, sigma = min_fib(fact.s2_indices)
    return HypothesisReport(
        cardinality=len(digits),
        s_A=s_A,
        small_cardinality=len(digits) <= 10,
        two_primes=len(factorize(s_A)) <= 2,
        fibered_subset=cond3,
        pure_roots_of_unity=fact.pure_roots_of_unity,
        witness=witnesses[0] if witnesses else None,
        witnesses=witnesses,
        min_fib=rep,
        min_fib_sigma=sigma,
        factorization=fact,
    )


# worked constructions -------------------------------------------------------


def lift_multiset(w: WeightVector) -> tuple:
    """A genuine set of integers whose reduction mod ``M`` is the multiset ``w``.

    The ``j``-th copy of residue ``y`` is lifted to ``y + j * M``.
    """
    if not w.is_nonnegative():
        raise ValueError("only nonnegative multisets lift to sets")
    M = w.modulus
    return tuple(sorted(y + j * M for y, c in enumerate(w.weights) for j in range(c)))


@dataclass(frozen=True)
class LongFiberPlane:
    """The long-fiber-plus-plane digit set and its two fibered pieces."""

    modulus: int
    long_fiber: WeightVector
    plane: WeightVector
    digits: tuple
    q: int
    primes: tuple


def long_fiber_plane(primes: Iterable[int], q: int, R: int) -> LongFiberPlane:
    """Build ``B + D mod X^M - 1`` with ``M = p_1 ... p_{K-1} q^(R+1)``.

    ``B`` is the long fiber ``prod_{r=0}^{R} F_q^{M/q^r}`` and ``D = X * prod F_{p_k}^M``.
    Residues hit twice are lifted by ``M`` so the result is a set.
    """
    primes = tuple(primes)
    if R < 1 or not primes or any(not _is_prime(p) for p in primes + (q,)):
        raise ValueError("need R >= 1 and primes p_1..p_{K-1}, q")
    if len(set(primes + (q,))) != len(primes) + 1:
        raise ValueError("primes must be distinct")
    M = math.prod(primes) * q ** (R + 1)
    B = _product_of_fibers([(M // q ** r, q) for r in range(R + 1)], M)
    D = _product_of_fibers([(M, p) for p in primes], M).shift(1)
    return LongFiberPlane(M, B, D, lift_multiset(B + D), q, primes)


def _product_of_fibers(pairs, M) -> WeightVector:
    out = WeightVector(M, (1,) + (0,) * (M - 1))
    for s, p in pairs:
        f = fiber(s, p, M)
        acc = [0] * M
        for y, wy in enumerate(out.weights):
            if wy:
                for z, wz in enumerate(f.weights):
                    if wz:
                        acc[(y + z) % M] += wy * wz
        out = WeightVector(M, tuple(acc))
    return out


__all__ = [
    "AssignmentFunction",
    "FibReport",
    "FiberedWitness",
    "HypothesisReport",
    "LongFiberPlane",
    "all_assignments",
    "check_theorem_hypotheses",
    "fib_value",
    "fiber",
    "fibered_witnesses",
    "find_fibered_subset",
    "is_fibered",
    "is_sigma_fibered",
    "lift_multiset",
    "long_fiber_plane",
    "min_fib",
]
