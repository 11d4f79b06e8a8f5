"""Exact integer polynomial arithmetic and cyclotomic factorization of digit sets.

Polynomials are stored as tuples of Python integers indexed by degree, so every
divisibility test is bit-exact regardless of coefficient growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .exceptions import UnitCircleAmbiguous

#: Default tolerance on ``| |z| - 1 |`` for declaring a root unimodular.
UNIT_CIRCLE_TOL = 1e-9
# Roots this close to the circle but outside UNIT_CIRCLE_TOL are reported, not classified.
_AMBIGUITY_WINDOW = 1e-6


def _strip(coeffs: Sequence[int]) -> tuple:
    n = len(coeffs)
    while n and coeffs[n - 1] == 0:
        n -= 1
    return tuple(coeffs[:n])


@dataclass(frozen=True)
class MaskPolynomial:
    """Univariate polynomial with exact integer coefficients.

    ``coeffs[k]`` is the coefficient of ``X**k``. Trailing zeros are stripped,
    and the zero polynomial is the empty tuple.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        coeffs = []
        for c in self.coeffs:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValueError("MaskPolynomial coefficients must be integers")
                c = c.numerator
            elif isinstance(c, (float, np.floating)):
                if not float(c).is_integer():
                    raise ValueError("MaskPolynomial coefficients must be integers")
            coeffs.append(int(c))
        object.__setattr__(self, "coeffs", _strip(coeffs))

    # constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, power: int, coeff: int = 1) -> "MaskPolynomial":
        return cls((0,) * power + (coeff,))

    @classmethod
    def one(cls) -> "MaskPolynomial":
        return cls((1,))

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "MaskPolynomial":
        """Sum of ``X**a`` over ``exponents``; repeated exponents accumulate."""
        exponents = [int(a) for a in exponents]
        if not exponents:
            return cls()
        if min(exponents) < 0:
            raise ValueError("exponents must be nonnegative")
        coeffs = [0] * (max(exponents) + 1)
        for a in exponents:
            coeffs[a] += 1
        return cls(tuple(coeffs))

    # basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.leading == 1

    def support(self) -> tuple:
        return tuple(k for k, c in enumerate(self.coeffs) if c)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        res = list(a)
        for i, c in enumerate(b):
            res[i] += c
        return MaskPolynomial(tuple(res))

    __radd__ = __add__

    def __neg__(self):
        return MaskPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return MaskPolynomial()
        res = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    res[i + j] += a * b
        return MaskPolynomial(tuple(res))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = MaskPolynomial.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        """Integer long division; the divisor must be monic (or +-1 leading)."""
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lead = other.leading
        if lead not in (1, -1):
            q, r = _divmod_rational(self, other)
            if any(c.denominator != 1 for c in q + r):
                raise ValueError("division is not exact over the integers")
            return MaskPolynomial(tuple(q)), MaskPolynomial(tuple(r))
        rem = list(self.coeffs)
        db = other.degree
        if len(rem) - 1 < db:
            return MaskPolynomial(), self
        quo = [0] * (len(rem) - db)
        bc = other.coeffs
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k] * lead
            if c:
                quo[k - db] = c
                for j in range(db + 1):
                    rem[k - db + j] -= c * bc[j]
        return MaskPolynomial(tuple(quo)), MaskPolynomial(tuple(rem[:db]))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def divides(self, other: "MaskPolynomial") -> bool:
        """True iff ``self`` divides ``other`` exactly."""
        _, r = _divmod_rational(_as_poly(other), self)
        return all(c == 0 for c in r)

    def exact_div(self, other) -> "MaskPolynomial":
        q, r = _divmod_rational(self, _as_poly(other))
        if any(r):
            raise ValueError("division is not exact")
        return MaskPolynomial(tuple(q))

    def reduce_mod(self, M: int) -> "MaskPolynomial":
        """Reduce modulo ``X**M - 1`` (fold exponents mod ``M``)."""
        if M < 1:
            raise ValueError("M must be positive")
        res = [0] * M
        for k, c in enumerate(self.coeffs):
            res[k % M] += c
        return MaskPolynomial(tuple(res))

    def reverse(self) -> "MaskPolynomial":
        """Reciprocal polynomial ``X**deg * P(1/X)``."""
        return MaskPolynomial(tuple(reversed(self.coeffs)))

    def primitive(self) -> "MaskPolynomial":
        """Divide out the content and make the leading coefficient positive."""
        if not self.coeffs:
            return self
        g = reduce(math.gcd, self.coeffs)
        if self.leading < 0:
            g = -g
        return MaskPolynomial(tuple(c // g for c in self.coeffs))

    # evaluation -------------------------------------------------------
    def __call__(self, x):
        """Horner evaluation; works for ints, Fractions, floats, complex and arrays."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def roots(self) -> np.ndarray:
        """Numerical roots via companion-matrix eigenvalues."""
        if self.degree < 1:
            return np.empty(0, dtype=complex)
        return np.roots([float(c) for c in reversed(self.coeffs)]).astype(complex)

    def __eq__(self, other):
        if isinstance(other, int):
            other = MaskPolynomial((other,))
        if not isinstance(other, MaskPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                xk = "X" if k == 1 else f"X^{k}"
                body = xk if mag == 1 else f"{mag}*{xk}"
            terms.append(("-" if c < 0 else "+", body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"MaskPolynomial({self.coeffs!r})"


def _as_poly(p) -> MaskPolynomial:
    if isinstance(p, MaskPolynomial):
        return p
    if isinstance(p, int):
        return MaskPolynomial((p,))
    raise TypeError(f"cannot interpret {type(p).__name__} as a polynomial")


def _divmod_rational(a, b):
    """Long division over the rationals on coefficient sequences (or polynomials)."""
    a = a.coeffs if isinstance(a, MaskPolynomial) else a
    b = b.coeffs if isinstance(b, MaskPolynomial) else b
    b = _strip(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = [Fraction(c) for c in a]
    db = len(b) - 1
    if len(rem) - 1 < db:
        return [], list(_strip(rem))
    lead = Fraction(b[-1])
    quo = [Fraction(0)] * (len(rem) - db)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k] / lead
        if c:
            quo[k - db] = c
            for j, bj in enumerate(b):
                rem[k - db + j] -= c * bj
    return quo, list(_strip(rem[:db]))


def poly_gcd(a: MaskPolynomial, b: MaskPolynomial) -> MaskPolynomial:
    """Greatest common divisor over the rationals, returned primitive in Z[X]."""
    x = [Fraction(c) for c in a.coeffs]
    y = [Fraction(c) for c in b.coeffs]
    while y:
        _, r = _divmod_rational(x, y)
        x, y = y, r
    if not x:
        return MaskPolynomial()
    den = lcm_all(c.denominator for c in x)
    return MaskPolynomial(tuple(c * den for c in x)).primitive()


# number-theoretic helpers -------------------------------------------------


def factorize(n: int) -> dict:
    """Prime factorization of a positive integer as ``{prime: exponent}``."""
    if n < 1:
        raise ValueError("n must be positive")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n: int) -> tuple:
    return tuple(sorted(factorize(n)))


def totient(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def lcm_all(values: Iterable[int]) -> int:
    """Least common multiple, with ``lcm() == 1``."""
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def p_adic_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# cyclotomic polynomials ----------------------------------------------------


def _times_binomial(c: list, d: int) -> list:
    # c * (X^d - 1)
    out = [0] * (len(c) + d)
    for i, v in enumerate(c):
        out[i + d] += v
        out[i] -= v
    return out


def _div_binomial(c: list, d: int) -> list:
    # exact c / (X^d - 1), solved top-down
    n = len(c) - 1
    q = [0] * (n - d + 1)
    work = list(c)
    for i in range(n, d - 1, -1):
        qi = work[i]
        q[i - d] = qi
        work[i - d] += qi
        work[i] = 0
    if any(work[:d]):
        raise ArithmeticError("binomial division was not exact")
    return q


@lru_cache(maxsize=4096)
def cyclotomic(s: int) -> MaskPolynomial:
    """The ``s``-th cyclotomic polynomial ``Phi_s``.

    Built exactly as the Moebius product of binomials ``(X^d - 1)^mu(s/d)``
    over the divisors ``d`` of ``s``.
    """
    if s < 1:
        raise ValueError("s must be a positive integer")
    num, den = [], []
    for d in divisors(s):
        mu = mobius(s // d)
        if mu == 1:
            num.append(d)
        elif mu == -1:
            den.append(d)
    poly = [1]
    for d in num:
        poly = _times_binomial(poly, d)
    for d in den:
        poly = _div_binomial(poly, d)
    # the product carries sign (-1)^(#num) * (-1)^(#den) relative to monic
    p = MaskPolynomial(tuple(poly))
    return p if p.leading > 0 else -p


# digit sets -----------------------------------------------------------------


@dataclass(frozen=True)
class DigitSet:
    """A digit set ``A`` inside ``{0, ..., L-1}`` with ``#A >= 2``.

    Parameters
    ----------
    digits : iterable of int
        Distinct nonnegative integers; stored sorted.
    base : int, optional
        The base ``L``. Defaults to ``max(3, max(digits) + 1)``.
    """

    digits: tuple
    base: int = None

    def __post_init__(self):
        digits = tuple(sorted(int(a) for a in self.digits))
        if len(set(digits)) != len(digits):
            raise ValueError(f"digits must be distinct, got {digits}")
        if len(digits) < 2:
            raise ValueError("a digit set needs at least two digits")
        if digits[0] < 0:
            raise ValueError("digits must be nonnegative")
        base = self.base if self.base is not None else max(3, digits[-1] + 1)
        base = int(base)
        if base < 3:
            raise ValueError("base L must be at least 3")
        if digits[-1] > base - 1:
            raise ValueError(f"digit {digits[-1]} is outside [0, {base - 1}]")
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "base", base)

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __contains__(self, a):
        return a in self.digits

    @property
    def size(self) -> int:
        return len(self.digits)


def _digits_of(A) -> tuple:
    if isinstance(A, DigitSet):
        return A.digits
    return tuple(sorted(int(a) for a in A))


def mask_polynomial(A) -> MaskPolynomial:
    """Mask polynomial ``A(X) = sum_{a in A} X^a``.

    Accepts a :class:`DigitSet` or any iterable of nonnegative integers
    (singletons are allowed here for internal use).
    """
    digits = _digits_of(A)
    if len(set(digits)) != len(digits):
        raise ValueError("a set mask polynomial needs distinct elements")
    return MaskPolynomial.from_exponents(digits)


def _as_mask(A) -> MaskPolynomial:
    return A if isinstance(A, MaskPolynomial) else mask_polynomial(A)


def divisor_search_bound(degree: int) -> int:
    """Upper bound on ``s`` with ``phi(s) <= degree`` (from ``phi(s) >= sqrt(s/2)``)."""
    return max(2, 2 * degree * degree)


def cyclotomic_multiplicity(P: MaskPolynomial, s: int) -> int:
    """Largest ``k`` with ``Phi_s^k | P`` (``P`` nonzero)."""
    phi = cyclotomic(s)
    k = 0
    q, r = divmod(P, phi)
    while r.is_zero() and not q.is_zero():
        k += 1
        P = q
        q, r = divmod(P, phi)
    return k


def cyclotomic_divisors(A) -> frozenset:
    """The set ``S_A = {s : Phi_s | A(X)}``.

    Every ``s`` up to ``2 * deg(A)**2`` with ``phi(s) <= deg(A)`` is tested by
    exact division after folding ``A`` modulo ``X^s - 1``.
    """
    P = _as_mask(A)
    deg = P.degree
    if deg < 1:
        return frozenset()
    found = set()
    for s in range(1, divisor_search_bound(deg) + 1):
        if totient(s) > deg:
            continue
        folded = P.reduce_mod(s) if s <= deg else P
        if (folded % cyclotomic(s)).is_zero():
            found.add(s)
    return frozenset(found)


@dataclass(frozen=True)
class CyclotomicFactorization:
    """Four-way split ``A = A1 * A2 * A3 * A4`` of a mask polynomial.

    ``s1_indices`` and ``s2_indices`` are the cyclotomic divisors with
    ``gcd(s, #A) != 1`` and ``== 1`` respectively. ``multiplicity`` records
    how often each ``Phi_s`` divides ``A`` so the product is exact.
    """

    polynomial: MaskPolynomial
    cardinality: int
    s1_indices: frozenset
    s2_indices: frozenset
    a3_factor: MaskPolynomial
    a4_factor: MaskPolynomial
    multiplicity: dict = field(default_factory=dict, compare=False)

    @property
    def s_A(self) -> int:
        return lcm_all(self.s2_indices)

    def _phi_product(self, indices) -> MaskPolynomial:
        out = MaskPolynomial.one()
        for s in sorted(indices):
            out = out * cyclotomic(s) ** self.multiplicity.get(s, 1)
        return out

    @property
    def a1_factor(self) -> MaskPolynomial:
        return self._phi_product(self.s1_indices)

    @property
    def a2_factor(self) -> MaskPolynomial:
        return self._phi_product(self.s2_indices)

    @property
    def a_prime(self) -> MaskPolynomial:
        """``A' = A1 * A3 * A4``."""
        return self.a1_factor * self.a3_factor * self.a4_factor

    @property
    def a_double_prime(self) -> MaskPolynomial:
        """The accumulating factor ``A'' = A2``."""
        return self.a2_factor

    @property
    def pure_roots_of_unity(self) -> bool:
        """True iff ``A3 == 1``, i.e. all unimodular roots are roots of unity."""
        return self.a3_factor == MaskPolynomial.one()

    def product(self) -> MaskPolynomial:
        return self.a1_factor * self.a2_factor * self.a3_factor * self.a4_factor


def _unit_circle_distance(P: MaskPolynomial) -> float:
    r = P.roots()
    if r.size == 0:
        return math.inf
    return float(np.min(np.abs(np.abs(r) - 1.0)))


def cyclotomic_factorization(A, tol: float = UNIT_CIRCLE_TOL) -> CyclotomicFactorization:
    """Split ``A(X)`` into accumulating and non-accumulating parts.

    Parameters
    ----------
    A : DigitSet, iterable of int, or MaskPolynomial
        The digit set (or a multiset mask polynomial with ``A(1) > 0``).
    tol : float
        Tolerance on ``| |z| - 1 |`` for unimodular roots.

    Raises
    ------
    UnitCircleAmbiguous
        If a root of the non-cyclotomic remainder is numerically close to the
        unit circle but the exact reciprocal-gcd test cannot account for it.
    """
    P = _as_mask(A)
    card = P(1)
    if card <= 0:
        raise ValueError("cardinality A(1) must be positive")
    S = cyclotomic_divisors(P)
    mult = {s: cyclotomic_multiplicity(P, s) for s in S}
    cyc = MaskPolynomial.one()
    for s in sorted(S):
        cyc = cyc * cyclotomic(s) ** mult[s]
    B = P.exact_div(cyc)
    a3 = MaskPolynomial.one()
    if B.degree >= 1:
        G = poly_gcd(B, B.reverse())
        if G.degree >= 1:
            a3 = _unimodular_part(B, G, tol)
        elif _unit_circle_distance(B) < _AMBIGUITY_WINDOW:
            raise UnitCircleAmbiguous(
                f"{B} has a root near the unit circle but gcd(B, reverse(B)) is trivial"
            )
    a4 = B.exact_div(a3)
    if _unit_circle_distance(a4) < _AMBIGUITY_WINDOW:
        raise UnitCircleAmbiguous(f"remainder {a4} has a root within {_AMBIGUITY_WINDOW} of |z|=1")
    s1 = frozenset(s for s in S if math.gcd(s, card) != 1)
    s2 = frozenset(s for s in S if math.gcd(s, card) == 1)
    return CyclotomicFactorization(P, card, s1, s2, a3, a4, mult)


def _unimodular_part(B: MaskPolynomial, G: MaskPolynomial, tol: float) -> MaskPolynomial:
    # Irreducible factors with a unimodular root are self-reciprocal, so they
    # all divide G; only G is factored.
    import sympy

    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(sympy.Poly(list(reversed(G.coeffs)), x))
    a3 = MaskPolynomial.one()
    for f, _ in factors:
        fp = MaskPolynomial(tuple(int(c) for c in reversed(f.all_coeffs())))
        if fp.degree < 1:
            continue
        rev = fp.reverse()
        if rev != fp and rev != -fp:
            continue
        dist = _unit_circle_distance(fp)
        if dist < tol:
            a3 = a3 * fp ** _multiplicity(B, fp)
        elif dist < _AMBIGUITY_WINDOW:
            raise UnitCircleAmbiguous(f"factor {fp} has a root at distance {dist:.2e} from |z|=1")
    return a3


def _multiplicity(P: MaskPolynomial, f: MaskPolynomial) -> int:
    k = 0
    while f.divides(P):
        P = P.exact_div(f)
        k += 1
    return k


# weights and residues -------------------------------------------------------


@dataclass(frozen=True)
class WeightVector:
    """Weights ``w : Z_M -> Z``; a multiset on ``Z_M``."""

    modulus: int
    weights: tuple

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        weights = tuple(int(w) for w in self.weights)
        if len(weights) != self.modulus:
            raise ValueError(f"expected {self.modulus} weights, got {len(weights)}")
        object.__setattr__(self, "weights", weights)

    @property
    def total(self) -> int:
        return sum(self.weights)

    def is_nonnegative(self) -> bool:
        return all(w >= 0 for w in self.weights)

    def reduce(self, s: int) -> "WeightVector":
        """Push the weights forward to ``Z_s`` for a divisor ``s`` of the modulus."""
        if self.modulus % s:
            raise ValueError(f"{s} does not divide modulus {self.modulus}")
        out = [0] * s
        for y, w in enumerate(self.weights):
            out[y % s] += w
        return WeightVector(s, tuple(out))

    def polynomial(self) -> MaskPolynomial:
        return MaskPolynomial(self.weights)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")
        return WeightVector(self.modulus, tuple(a + b for a, b in zip(self.weights, other.weights)))

    def shift(self, k: int) -> "WeightVector":
        """Translate the multiset by ``k`` (multiply the polynomial by ``X^k``)."""
        M = self.modulus
        out = [0] * M
        for y, w in enumerate(self.weights):
            out[(y + k) % M] += w
        return WeightVector(M, tuple(out))


def weight_vector(A, M: int) -> WeightVector:
    """``w_A^M(y) = #{a in A : a = y mod M}``."""
    if M < 2:
        raise ValueError("M must be at least 2")
    out = [0] * M
    for a in _digits_of(A):
        out[a % M] += 1
    return WeightVector(M, tuple(out))


def mask_mod(A, M: int) -> MaskPolynomial:
    """The mask polynomial of ``A mod M`` (degree below ``M``)."""
    return weight_vector(A, M).polynomial()
