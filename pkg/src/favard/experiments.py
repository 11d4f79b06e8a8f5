"""Experiment configuration, orchestration, reports and decay tables."""

from __future__ import annotations

import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.stats import linregress

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .cantor import (CantorConfig, cantor_iterate, cube_shadow_lengths, random_directions,
                     sphere_area)
from .exceptions import BudgetExceeded, ConfigError
from .fibering import check_theorem_hypotheses, fib_value
from .mask_poly import DigitSet

TASKS = ("analyze", "favard", "riesz", "slv", "report")
FORMATS = ("csv", "json-lines")
FAVARD_COLUMNS = ("N", "fav_norm", "fav_raw", "ci_lo", "ci_hi", "cells", "seconds")
STOCHASTIC = ("favard", "slv", "report")
REPORT_MARKER = "--- structured ---"

_KEYS = {
    "task": str, "d": int, "L": int, "digits": list, "N": int, "N_min": int, "N_max": int,
    "seed": int, "samples": int, "budget": int, "out": str, "format": str, "t": list,
    "m": int, "n": int, "k_lo": int, "k_hi": int, "eps0": (str, float), "method": str,
    "width_fraction": (str, float), "timing": bool, "allow_nonunit_dimension": bool,
}


def _locate(text: str, key: str) -> str:
    for lineno, line in enumerate(text.splitlines(), 1):
        m = re.match(rf"\s*{re.escape(key)}\s*=\s*", line)
        if m:
            return f"line {lineno}, column {m.end() + 1}"
    return "unknown location"


def parse_rational(value) -> Fraction:
    """Accept ints, floats and ``"p/q"`` strings."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12)
    return Fraction(str(value).strip())


@dataclass
class ExperimentConfig:
    """Everything one CLI run needs.

    Digit sets are required; ``d`` defaults to their number and ``L`` to the
    product of their sizes.
    """

    digit_sets: tuple
    L: Optional[int] = None
    d: Optional[int] = None
    task: str = "report"
    N_min: int = 1
    N_max: int = 7
    seed: Optional[int] = None
    samples: int = 10_000
    budget: int = 10_000_000
    out: Optional[str] = None
    format: str = "csv"
    t: tuple = ()
    m: int = 2
    n: int = 4
    k_lo: Optional[int] = None
    k_hi: Optional[int] = None
    eps0: Fraction = Fraction(1, 4)
    method: str = "sphere"
    width_fraction: Fraction = Fraction(19, 20)
    timing: bool = False
    allow_nonunit_dimension: bool = False

    def __post_init__(self):
        if not self.digit_sets:
            raise ConfigError("digits: at least one digit set is required")
        sets = []
        for A in self.digit_sets:
            if not A:
                raise ConfigError("digits: empty digit set")
            try:
                sets.append(DigitSet(A, self.L).digits)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"digits: {exc}") from None
        self.digit_sets = tuple(sets)
        if self.d is None:
            self.d = len(sets)
        if self.L is None:
            self.L = max(math.prod(len(A) for A in sets), max(A[-1] for A in sets) + 1, 3)
        if self.task not in TASKS:
            raise ConfigError(f"task: must be one of {TASKS}")
        if self.format not in FORMATS:
            raise ConfigError(f"format: must be one of {FORMATS}")
        if not 0 <= self.N_min <= self.N_max:
            raise ConfigError("N range: need 0 <= N_min <= N_max")
        if self.samples < 2:
            raise ConfigError("samples: need at least 2")
        self.t = tuple(parse_rational(x) for x in self.t)
        self.eps0 = parse_rational(self.eps0)
        self.width_fraction = parse_rational(self.width_fraction)

    @property
    def cantor(self) -> CantorConfig:
        try:
            return CantorConfig(self.d, self.L, self.digit_sets, self.allow_nonunit_dimension)
        except ValueError as exc:
            raise ConfigError(f"cantor configuration: {exc}") from None

    @property
    def levels(self) -> list:
        return list(range(self.N_min, self.N_max + 1))

    @property
    def direction_params(self) -> tuple:
        if self.t:
            return tuple(float(x) for x in self.t)
        return (1.0,) * (self.d - 1)

    def require_seed(self):
        if self.seed is None:
            raise ConfigError(f"seed: mandatory for the stochastic task {self.task!r}")

    @classmethod
    def from_toml(cls, text: str, **overrides) -> "ExperimentConfig":
        """Parse a flat key/value file; errors carry line and column."""
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            msg = str(exc)
            if "end of document" in msg:
                lines = text.splitlines() or [""]
                msg = msg.replace("end of document",
                                  f"line {len(lines)}, column {len(lines[-1]) + 1}, end of document")
            raise ConfigError(f"config syntax error: {msg}") from None
        kwargs = {}
        for key, value in raw.items():
            if key not in _KEYS:
                raise ConfigError(f"unknown key {key!r} at {_locate(text, key)}")
            if not isinstance(value, _KEYS[key]) or (_KEYS[key] is int and isinstance(value, bool)):
                raise ConfigError(f"key {key!r} at {_locate(text, key)} has the wrong type")
            kwargs[key] = value
        if "N" in kwargs:
            kwargs["N_min"] = kwargs["N_max"] = kwargs.pop("N")
        digits = kwargs.pop("digits", None)
        if digits is None:
            raise ConfigError("missing required key 'digits'")
        if digits and all(isinstance(a, int) for a in digits):
            digits = [digits] * int(kwargs.get("d", 1))
        if not digits or not all(isinstance(A, list) for A in digits):
            raise ConfigError(f"key 'digits' at {_locate(text, 'digits')} must be an array of "
                              "integer arrays")
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(digit_sets=tuple(tuple(A) for A in digits), **kwargs)
        except ConfigError as exc:
            key = str(exc).split(":")[0].split()[0]
            raise ConfigError(f"{exc} (at {_locate(text, key)})") from None
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str, **overrides) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read(), **overrides)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one named stream of ``seed``."""
    ss = np.random.SeedSequence(seed).spawn(stream + 1)[stream]
    return np.random.Generator(np.random.Philox(ss))


# analysis report ---------------------------------------------------------------------


def analyze_digit_set(digits: Sequence[int]) -> dict:
    """Factorisation, theorem conditions and fibered-subset witnesses, JSON-ready."""
    rep = check_theorem_hypotheses(digits)
    fact = rep.factorization
    S2 = sorted(fact.s2_indices)
    witnesses = [{"subset": list(w.subset), "sigma": {str(s): p for s, p in w.sigma.mapping},
                  "vacuous": w.vacuous} for w in rep.witnesses]
    fib_table = []
    if S2:
        from .fibering import all_assignments
        for sigma in all_assignments(S2):
            fib_table.append({"sigma": {str(s): p for s, p in sigma.mapping},
                              "fib": fib_value(S2, sigma).fib_value})
    return {
        "digits": list(digits),
        "cardinality": rep.cardinality,
        "mask_polynomial": str(fact.polynomial),
        "cyclotomic_multiplicity": {str(s): k for s, k in sorted(fact.multiplicity.items())},
        "S1": sorted(fact.s1_indices),
        "S2": S2,
        "s_A": rep.s_A,
        "A3": str(fact.a3_factor),
        "A4": str(fact.a4_factor),
        "pure_roots_of_unity": rep.pure_roots_of_unity,
        "conditions": {"small_cardinality": rep.small_cardinality,
                       "two_primes": rep.two_primes,
                       "fibered_subset": rep.fibered_subset},
        "satisfied": rep.satisfied,
        "min_fib": rep.min_fib.fib_value,
        "min_fib_sigma": {str(s): p for s, p in rep.min_fib_sigma.mapping},
        "fib_table": fib_table,
        "witnesses": witnesses,
    }


def run_analyze(config: ExperimentConfig) -> dict:
    sets = [analyze_digit_set(A) for A in config.digit_sets]
    pure = all(s["pure_roots_of_unity"] for s in sets)
    return {
        "tool": "favard",
        "version": __version__,
        "L": config.L,
        "d": config.d,
        "dimension": sum(math.log(len(A)) for A in config.digit_sets) / math.log(config.L),
        "digit_sets": sets,
        "all_conditions_hold": all(s["satisfied"] for s in sets),
        "branch": "N^-eps" if pure else "N^-eps/loglogN",
    }


def render_report(report: dict) -> str:
    """Human-readable summary followed by the structured block."""
    lines = [f"favard {report.get('version', __version__)} report", ""]
    if "digit_sets" in report:
        lines.append(f"L = {report['L']}, d = {report['d']}, dimension = {report['dimension']:.6f}")
        for s in report["digit_sets"]:
            cond = s["conditions"]
            lines += [
                "",
                f"A = {{{', '.join(map(str, s['digits']))}}}  (#A = {s['cardinality']})",
                f"  A(X) = {s['mask_polynomial']}",
                f"  cyclotomic divisors (s: multiplicity) = {s['cyclotomic_multiplicity']}",
                f"  S1 = {s['S1']}, S2 = {s['S2']}, s_A = {s['s_A']}",
                f"  A3 = {s['A3']}, A4 = {s['A4']}",
                f"  conditions: #A <= 10: {cond['small_cardinality']}, "
                f"s_A has <= 2 primes: {cond['two_primes']}, fibered subset: {cond['fibered_subset']}",
                f"  min FIB = {s['min_fib']} at sigma = {s['min_fib_sigma']}",
            ]
            for w in s["witnesses"]:
                lines.append(f"  witness {w['subset']} for sigma {w['sigma']}"
                             + (" (vacuous)" if w["vacuous"] else ""))
        lines += ["", f"predicted branch: {report['branch']}"]
    if "favard" in report:
        fav = report["favard"]
        lines += ["", "N  fav_norm  ci_lo  ci_hi"]
        for row in fav["rows"]:
            if row["fav_norm"] is None:
                lines.append(f"{row['N']}  skipped")
            else:
                lines.append(f"{row['N']}  {row['fav_norm']:.6f}  {row['ci_lo']:.6f}  {row['ci_hi']:.6f}")
        if fav.get("fit"):
            lines.append(f"log-log slope {fav['fit']['slope']:.4f} (r^2 = {fav['fit']['r2']:.4f})")
    lines += ["", REPORT_MARKER, json.dumps(report, sort_keys=True, indent=1)]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Recover the structured block of a rendered report."""
    if REPORT_MARKER not in text:
        raise ValueError("no structured block in report")
    return json.loads(text.split(REPORT_MARKER, 1)[1])


# Favard decay tables -------------------------------------------------------------------


@dataclass
class DecayRow:
    N: int
    fav_norm: Optional[float]
    fav_raw: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    cells: int
    seconds: Optional[float] = None

    @property
    def skipped(self) -> bool:
        return self.fav_norm is None


@dataclass
class DecaySeries:
    """One Favard estimate per level, with a 95% normal interval."""

    rows: list
    seed: Optional[int] = None
    samples: int = 0
    lengths: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        Ns = [r.N for r in self.rows]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("N must be strictly increasing")
        for r in self.rows:
            if not r.skipped and not r.ci_lo <= r.fav_norm <= r.ci_hi:
                raise ValueError(f"row N={r.N}: value outside its interval")

    @property
    def valid_rows(self) -> list:
        return [r for r in self.rows if not r.skipped]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# favard {__version__} seed={self.seed} samples={self.samples} schema=1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FAVARD_COLUMNS)
        for r in self.rows:
            w.writerow([r.N] + [_fmt(getattr(r, c)) for c in FAVARD_COLUMNS[1:]])
        return buf.getvalue()

    def to_json_lines(self) -> str:
        head = {"tool": "favard", "version": __version__, "seed": self.seed, "samples": self.samples}
        lines = [json.dumps(head, sort_keys=True)]
        lines += [json.dumps({c: getattr(r, c) for c in FAVARD_COLUMNS}, sort_keys=True) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "DecaySeries":
        lines = text.splitlines()
        meta = {}
        if lines and lines[0].startswith("#"):
            meta = dict(kv.split("=", 1) for kv in lines[0][1:].split() if "=" in kv)
            lines = lines[1:]
        reader = csv.DictReader(lines)
        rows = []
        for rec in reader:
            vals = {c: (None if rec[c] == "" else float(rec[c])) for c in FAVARD_COLUMNS}
            rows.append(DecayRow(int(vals["N"]), vals["fav_norm"], vals["fav_raw"], vals["ci_lo"],
                                 vals["ci_hi"], int(vals["cells"]), vals["seconds"]))
        seed = meta.get("seed")
        return cls(rows, None if seed in (None, "None") else int(seed), int(meta.get("samples", 0)))

    def strictly_decreasing(self) -> bool:
        """Each interval lies strictly below the previous one."""
        rows = self.valid_rows
        return all(b.ci_hi < a.ci_lo for a, b in zip(rows, rows[1:]))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def favard_series(config: CantorConfig, levels: Sequence[int], n_directions: int, seed: int,
                  budget: int = 10_000_000, timing: bool = False) -> DecaySeries:
    """Favard estimates for each level, all using the same random directions."""
    thetas = random_directions(config.d, n_directions, make_rng(seed, 0))
    area = sphere_area(config.d)
    rows, lengths = [], {}
    for N in levels:
        start = time.perf_counter()
        try:
            it = cantor_iterate(config, N, budget)
        except BudgetExceeded:
            rows.append(DecayRow(N, None, None, None, None, config.cells_per_level ** N))
            continue
        vals = cube_shadow_lengths(it, thetas)
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(len(vals)))
        seconds = round(time.perf_counter() - start, 6) if timing else None
        rows.append(DecayRow(N, mean, mean * area, mean - 1.96 * se, mean + 1.96 * se, it.count, seconds))
        lengths[N] = vals
    return DecaySeries(rows, seed, n_directions, lengths)


def run_favard(config: ExperimentConfig) -> DecaySeries:
    config.require_seed()
    return favard_series(config.cantor, config.levels, config.samples, config.seed,
                         config.budget, config.timing)


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r2: float

    def predict(self, N):
        return np.exp(self.intercept) * np.asarray(N, dtype=float) ** self.slope


def fit_power_law(series, values=None) -> PowerLawFit:
    """Least squares line through ``(log N, log value)``.

    Accepts a ``DecaySeries`` or two sequences.
    """
    if isinstance(series, DecaySeries):
        rows = series.valid_rows
        N = np.array([r.N for r in rows], dtype=float)
        v = np.array([r.fav_norm for r in rows], dtype=float)
    else:
        N = np.asarray(series, dtype=float)
        v = np.asarray(values, dtype=float)
    if N.shape != v.shape or N.size < 3:
        raise ValueError("need at least 3 matching points")
    if np.any(N <= 0) or np.any(v <= 0):
        raise ValueError("power-law fit needs positive N and values")
    x, y = np.log(N), np.log(v)
    if np.ptp(y) == 0:
        return PowerLawFit(0.0, float(y[0]), 1.0)
    res = linregress(x, y)
    return PowerLawFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2))


# other tasks ----------------------------------------------------------------------------


def run_riesz(config: ExperimentConfig) -> list:
    """Riesz-product integral over ``[L^-m, 1]`` and Plancherel checks per level."""
    from .riesz import PhiProduct, RieszSpec, plancherel_check, riesz_integral

    cc = config.cantor
    t = config.direction_params
    k_lo = config.k_lo if config.k_lo is not None else 0
    k_hi = config.k_hi if config.k_hi is not None else config.n - 1
    spec = RieszSpec(PhiProduct(cc, t), k_lo, k_hi)
    res = riesz_integral(spec, float(cc.L) ** -config.m, 1.0)
    records = [{"quantity": "riesz_integral", "m": config.m, "k_lo": k_lo, "k_hi": k_hi,
                "t": list(t), "value": res.value, "error": res.error}]
    for N in config.levels:
        if N > 4:
            break
        pc = plancherel_check(cc, N, t, budget=config.budget)
        records.append({"quantity": "plancherel", "N": N, "t": list(t), "time_side": pc.time_side,
                        "fourier_side": pc.fourier_side, "relative_error": pc.relative_error})
    return records


def run_slv(config: ExperimentConfig) -> list:
    from .slv import multiscale_slv

    config.require_seed()
    cert = multiscale_slv(config.cantor, config.direction_params, config.m,
                          width_fraction=config.width_fraction, samples=config.samples,
                          seed=config.seed)
    rec = {"quantity": "multiscale_slv", "m": cert.m, "t": list(config.direction_params),
           "measure": cert.measure, "measure_lower_bound": cert.measure_lower_bound,
           "separation": cert.separation, "C1": cert.C1, "C2": cert.C2, "eta": cert.eta,
           "components": len(cert.gamma), "notes": cert.notes}
    rows = [rec]
    for i, ss in enumerate(cert.digit_sets):
        rows.append({"quantity": "single_scale_slv", "digit_set": i, "digits": list(ss.digits),
                     "measure": str(ss.measure), "separation": str(ss.separation),
                     "phi_lower": ss.phi_lower,
                     "exceeds_inverse_cardinality": ss.exceeds_inverse_cardinality})
    return rows


def run_report(config: ExperimentConfig) -> dict:
    report = run_analyze(config)
    series = run_favard(config)
    fav = {"seed": series.seed, "samples": series.samples,
           "rows": [{c: getattr(r, c) for c in FAVARD_COLUMNS} for r in series.rows]}
    if len(series.valid_rows) >= 3:
        fit = fit_power_law(series)
        fav["fit"] = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}
        fav["strictly_decreasing"] = series.strictly_decreasing()
    report["favard"] = fav
    return report


def records_to_text(records: list, fmt: str) -> str:
    if fmt == "json-lines":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    keys = []
    for r in records:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    buf.write(f"# favard {__version__} schema=1\n")
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()
