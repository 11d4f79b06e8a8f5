"""Trigonometric factors ``phi``, Riesz products, their quadrature and
sets of small values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cantor import DEFAULT_BUDGET, CantorConfig, cantor_iterate, direction_from_t, projection_profile
from .exceptions import ResolutionTooLow
from .intervals import IntervalSet
from .mask_poly import DigitSet, MaskPolynomial, cyclotomic_factorization

SELECTIONS = ("full", "prime", "double-prime")
PSI_CLASSES = ("ssv", "log-ssv", "square-ssv")
CHUNK = 1 << 20


def _factor_polynomial(digits: tuple, selection: str) -> MaskPolynomial:
    if selection == "full":
        return MaskPolynomial.from_exponents(digits)
    fact = cyclotomic_factorization(digits)
    if selection == "prime":
        return fact.a_prime
    if selection == "double-prime":
        return fact.a_double_prime
    raise ValueError(f"selection must be one of {SELECTIONS}")


@dataclass(frozen=True)
class PhiFunction:
    """``phi(xi) = P(e^{2 pi i xi}) / P(1)`` for ``P`` one of ``A``, ``A'``, ``A''``.

    With ``selection="full"`` this is ``A(e(xi)) / #A``. Both ``A'(1)`` and
    ``A''(1)`` are positive, so every selection satisfies ``phi(0) = 1`` and
    ``phi = phi' * phi''`` holds with residual constant 1.
    """

    digits: tuple
    selection: str = "full"
    base: Optional[int] = None

    def __post_init__(self):
        ds = DigitSet(self.digits, self.base)
        object.__setattr__(self, "digits", ds.digits)
        object.__setattr__(self, "base", ds.base)
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")

    @property
    def polynomial(self) -> MaskPolynomial:
        return _factor_polynomial(self.digits, self.selection)

    @property
    def normalization(self) -> int:
        return int(self.polynomial(1))

    @property
    def max_frequency(self) -> int:
        return self.polynomial.degree

    def __call__(self, xi) -> np.ndarray:
        return phi_eval(self, xi)


def _trig(coeffs: Sequence[int], xi: np.ndarray) -> np.ndarray:
    z = np.exp(2j * np.pi * xi)
    return np.polyval(np.asarray(coeffs[::-1], dtype=float), z)


def phi_eval(phi: PhiFunction, xi):
    """Evaluate ``phi`` at ``xi`` (scalar or array)."""
    poly = phi.polynomial
    xi = np.asarray(xi, dtype=float)
    return _trig(poly.coeffs, xi) / float(poly(1))


@dataclass(frozen=True)
class PhiProduct:
    """``phi_t(xi) = prod_i phi_{A_i}(t_{i-1} xi)`` with ``t_0 = 1``."""

    config: CantorConfig
    t: tuple
    selection: str = "full"

    def __post_init__(self):
        t = tuple(float(x) for x in np.atleast_1d(self.t))
        if len(t) != self.config.d - 1:
            raise ValueError(f"need {self.config.d - 1} direction parameters")
        object.__setattr__(self, "t", t)

    @property
    def factors(self) -> list:
        return [PhiFunction(A, self.selection, self.config.L) for A in self.config.digit_sets]

    @property
    def scales(self) -> tuple:
        return (1.0,) + self.t

    @property
    def base(self) -> int:
        return self.config.L

    @property
    def max_frequency(self) -> float:
        return sum(abs(s) * f.max_frequency for s, f in zip(self.scales, self.factors))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape, dtype=complex)
        for s, f in zip(self.scales, self.factors):
            if s != 0:
                out = out * phi_eval(f, s * xi)
        return out


@dataclass(frozen=True)
class RieszSpec:
    """``prod_{k=k_lo}^{k_hi} |phi(L^k xi)|^2`` for a ``PhiFunction`` or ``PhiProduct``.

    An empty range (``k_hi < k_lo``) is the constant 1.
    """

    phi: object
    k_lo: int
    k_hi: int
    normalized: bool = True

    def __post_init__(self):
        if self.k_lo < 0:
            raise ValueError("k_lo must be nonnegative")

    @property
    def base(self) -> int:
        return self.phi.base

    @property
    def band_limit(self) -> float:
        """Largest frequency present in the integrand."""
        if self.k_hi < self.k_lo:
            return 0.0
        L = self.base
        return 2 * self.phi.max_frequency * sum(L ** k for k in range(self.k_lo, self.k_hi + 1))

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape)
        L = self.base
        for k in range(self.k_lo, self.k_hi + 1):
            out *= np.abs(self.phi(L ** k * xi)) ** 2
        if not self.normalized:
            out *= self._norm2 ** (self.k_hi - self.k_lo + 1)
        return out

    @property
    def _norm2(self) -> float:
        if isinstance(self.phi, PhiFunction):
            return float(self.phi.normalization) ** 2
        return float(math.prod(f.normalization for s, f in zip(self.phi.scales, self.phi.factors)
                               if s != 0)) ** 2


@dataclass(frozen=True)
class RieszResult:
    value: float
    error: float
    resolution: int
    coarse: float


def _midpoint(f, a: float, b: float, n: int) -> float:
    h = (b - a) / n
    total = 0.0
    for start in range(0, n, CHUNK):  # fixed panel order
        idx = np.arange(start, min(n, start + CHUNK))
        total += float(np.sum(f(a + (idx + 0.5) * h)))
    return total * h


def riesz_integral(spec: RieszSpec, a: float, b: float,
                   resolution: Optional[int] = None) -> RieszResult:
    """Composite midpoint rule with one dyadic refinement and Richardson extrapolation.

    ``resolution`` counts points per unit length. It must be at least
    ``8 * L**k_hi``; the default also covers eight points per period of the
    highest frequency actually present.
    """
    if b < a:
        raise ValueError("need a <= b")
    if spec.k_hi < spec.k_lo:
        return RieszResult(b - a, 0.0, 0, b - a)
    guard = 8 * spec.base ** spec.k_hi
    if resolution is None:
        resolution = max(guard, int(math.ceil(8 * spec.band_limit)))
    if resolution < guard:
        raise ResolutionTooLow(f"resolution {resolution} below {guard} points per unit")
    n = max(1, int(math.ceil(resolution * (b - a))))
    coarse = _midpoint(spec, a, b, n)
    fine = _midpoint(spec, a, b, 2 * n)
    value = (4 * fine - coarse) / 3
    return RieszResult(value, abs(fine - coarse), resolution, coarse)


# Fourier-side check ----------------------------------------------------------------


@dataclass(frozen=True)
class PlancherelResult:
    time_side: float
    fourier_side: float
    relative_error: float
    cutoff: float
    tail: float


def nu_hat(config: CantorConfig, N: int, theta: np.ndarray, xi) -> np.ndarray:
    """``sum_j e^{-2 pi i xi x_j}`` over projected cell centres, by the product formula."""
    xi = np.asarray(xi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    h = float(config.L) ** -N
    out = np.exp(-1j * np.pi * xi * h * theta.sum())
    for n in range(1, N + 1):
        s = float(config.L) ** -n
        for i, A in enumerate(config.digit_sets):
            out = out * np.exp(-2j * np.pi * np.multiply.outer(xi * s * theta[i], np.array(A))).sum(axis=-1)
    return out


def nu_hat_atoms(config: CantorConfig, N: int, theta: np.ndarray, xi) -> np.ndarray:
    """Same as ``nu_hat`` but summed over the explicit list of projected centres."""
    it = cantor_iterate(config, N)
    x = it.centers @ np.asarray(theta, dtype=float)
    return np.exp(-2j * np.pi * np.multiply.outer(np.asarray(xi, dtype=float), x)).sum(axis=-1)


def plancherel_check(config: CantorConfig, N: int, t: Sequence[float],
                     resolution: Optional[float] = None, cutoff: Optional[float] = None,
                     budget: int = DEFAULT_BUDGET) -> PlancherelResult:
    """Compare ``integral f_N^2`` with ``integral |nu_hat * box_hat|^2``.

    The Fourier side is integrated by the midpoint rule on ``[0, X]`` (the
    integrand is even) and a tail estimate ``2 * mean|nu_hat|^2 / (2 pi^2 X)``
    is added.
    """
    direction = direction_from_t(t)
    it = cantor_iterate(config, N, budget)
    f, _ = projection_profile(it, direction)
    time_side = f.integral_of_square()
    r = it.radius
    spread = float(np.abs(direction.theta).sum()) + 2 * r
    if cutoff is None:
        cutoff = 200.0 / r
    if resolution is None:
        resolution = 16 * max(spread, 2 * r)
    if resolution < 8 * spread:
        raise ResolutionTooLow(f"resolution {resolution} below {8 * spread} points per unit")
    n = int(math.ceil(cutoff * resolution))

    def integrand(xi):
        nh = np.abs(nu_hat(config, N, direction.theta, xi)) ** 2
        box = np.where(xi == 0, 2 * r, np.sin(2 * np.pi * r * xi) / (np.pi * np.where(xi == 0, 1, xi)))
        return nh * box ** 2

    main = 2 * _midpoint(integrand, 0.0, cutoff, n)
    probe = np.linspace(cutoff / 2, cutoff, 4096)
    mean_nu = float(np.mean(np.abs(nu_hat(config, N, direction.theta, probe)) ** 2))
    tail = 2 * mean_nu / (2 * np.pi ** 2 * cutoff)
    fourier = main + tail
    return PlancherelResult(time_side, fourier, abs(fourier - time_side) / time_side, cutoff, tail)


# sets of small values -----------------------------------------------------------------


def psi_function(m: int, c1: float, cls: str = "ssv", L: int = 4) -> float:
    """Threshold ``L^{-c1 m}``, ``L^{-c1 m log m}`` or ``L^{-c1 m^2}``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if cls == "ssv":
        return float(L) ** (-c1 * m)
    if cls == "log-ssv":
        return float(L) ** (-c1 * m * math.log(m))
    if cls == "square-ssv":
        return float(L) ** (-c1 * m * m)
    raise ValueError(f"class must be one of {PSI_CLASSES}")


@dataclass
class SsvCover:
    """Maximal intervals of ``[0, 1]`` where ``|prod_{k<m} phi(L^k xi)| <= threshold``."""

    threshold: float
    cover: IntervalSet
    count: int
    max_width: float
    m: int
    psi_class: str
    c1: float
    c2: float
    c3: float
    grid_step: float
    flags: list = field(default_factory=list)


def ssv_detect(phi, m: int, c1: Optional[float] = None, cls: str = "ssv",
               threshold: Optional[float] = None, resolution: Optional[int] = None,
               merge_gap: int = 2) -> SsvCover:
    """Grid search for the set of small values of a finite Riesz product.

    Either ``c1`` (with ``cls``) or an explicit ``threshold`` fixes the level.
    Grid points below the level are merged when fewer than ``merge_gap`` steps
    apart; each run is padded by half a step. Fitted constants are
    ``c2 = log_L(count) / m`` and ``c3 = -log_L(max width) / m``.
    """
    L = phi.base
    if threshold is None:
        if c1 is None:
            raise ValueError("give c1 or threshold")
        threshold = psi_function(m, c1, cls, L)
    top = max(1.0, phi.max_frequency) * L ** (m - 1)
    guard = int(math.ceil(64 * top))
    if resolution is None:
        resolution = guard
    if resolution < 8 * top:
        raise ResolutionTooLow(f"resolution {resolution} below {8 * top} points per unit")
    step = 1.0 / resolution
    xi = (np.arange(resolution) + 0.5) * step
    vals = np.ones(resolution)
    for k in range(m):
        vals *= np.abs(phi(L ** k * xi))
    idx = np.flatnonzero(vals <= threshold)
    comps = []
    if idx.size:
        breaks = np.flatnonzero(np.diff(idx) >= merge_gap)
        starts = np.concatenate([[idx[0]], idx[breaks + 1]])
        ends = np.concatenate([idx[breaks], [idx[-1]]])
        comps = [(max(0.0, xi[s] - step / 2), min(1.0, xi[e] + step / 2)) for s, e in zip(starts, ends)]
    cover = IntervalSet(tuple(comps))
    count = len(cover)
    widths = [hi - lo for lo, hi in cover]
    max_width = max(widths, default=0.0)
    c2 = math.log(count, L) / m if count else 0.0
    c3 = -math.log(max_width, L) / m if max_width > 0 else math.inf
    flags = []
    if count and c2 > 0 and c3 / c2 < 2:
        flags.append("c3/c2 < 2")
    if count and max_width <= 2 * step:
        flags.append("cover intervals at grid resolution")
    return SsvCover(threshold, cover, count, max_width, m, cls, c1 if c1 is not None else math.nan,
                    c2, c3, step, flags)
