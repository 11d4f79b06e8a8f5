"""Scikit-learn style wrappers, so the pipeline composes with sklearn tooling.

Only the parts with a natural fit/transform shape are wrapped: power-law
regression, Favard decay over levels, per-direction projection features and
cyclotomic features of digit sets.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (check_config, check_digit_sets, check_directions, check_levels,
                          check_positive_pairs)
from .cantor import DEFAULT_BUDGET, cantor_iterate, cube_shadow_lengths, projection_profile
from .experiments import favard_series, fit_power_law
from .fibering import check_theorem_hypotheses


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Fit ``y = exp(intercept) * x**slope`` by least squares in log-log space."""

    def fit(self, X, y):
        x, y = check_positive_pairs(X, y)
        fit = fit_power_law(x, y)
        self.coef_ = fit.slope
        self.intercept_ = fit.intercept
        self.r2_ = fit.r2
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        x = check_levels(X).astype(float)
        return np.exp(self.intercept_) * x ** self.coef_


class FavardDecay(BaseEstimator):
    """Estimate Favard length at each level in ``X`` and fit a power law.

    Parameters
    ----------
    config : CantorConfig or (d, L, digit_sets), optional
        Defaults to the four-corner set.
    n_directions : int
    random_state : int
    budget : int
    """

    def __init__(self, config=None, n_directions=10_000, random_state=0, budget=DEFAULT_BUDGET):
        self.config = config
        self.n_directions = n_directions
        self.random_state = random_state
        self.budget = budget

    def fit(self, X, y=None):
        levels = check_levels(X)
        cfg = check_config(self.config)
        self.series_ = favard_series(cfg, sorted(set(levels.tolist())), self.n_directions,
                                     self.random_state, self.budget)
        rows = [r for r in self.series_.valid_rows if r.N > 0]
        self.regressor_ = None
        if len(rows) >= 3:
            self.regressor_ = PowerLawRegressor().fit([r.N for r in rows], [r.fav_norm for r in rows])
            self.slope_ = self.regressor_.coef_
        return self

    def predict(self, X):
        check_is_fitted(self, "series_")
        if self.regressor_ is None:
            raise ValueError("fewer than three positive levels were fitted")
        return self.regressor_.predict(X)


class ProjectionFeatures(TransformerMixin, BaseEstimator):
    """Map directions (rows of ``X``) to projection statistics at level ``N``.

    Columns: cube-shadow length, ``integral f``, ``integral f^2``, ``max f``.
    """

    def __init__(self, config=None, N=3, budget=DEFAULT_BUDGET):
        self.config = config
        self.N = N
        self.budget = budget

    def fit(self, X=None, y=None):
        self.config_ = check_config(self.config)
        self.iterate_ = cantor_iterate(self.config_, self.N, self.budget)
        self.n_features_in_ = self.config_.d
        return self

    def transform(self, X):
        check_is_fitted(self, "iterate_")
        thetas = check_directions(X, self.config_.d)
        shadow = cube_shadow_lengths(self.iterate_, thetas)
        stats = []
        for th in thetas:
            f, _ = projection_profile(self.iterate_, th)
            stats.append((f.integral(), f.integral_of_square(), float(f.max())))
        return np.column_stack([shadow, np.array(stats).reshape(len(thetas), 3)])

    def get_feature_names_out(self, input_features=None):
        return np.array(["shadow_length", "mass", "l2_mass", "max_multiplicity"], dtype=object)


class CyclotomicFeatures(TransformerMixin, BaseEstimator):
    """Map digit sets to ``[#A, |S1|, |S2|, s_A, cond1, cond2, cond3, pure, min FIB]``."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        rows = []
        for A in check_digit_sets(X):
            rep = check_theorem_hypotheses(A)
            f = rep.factorization
            rows.append([rep.cardinality, len(f.s1_indices), len(f.s2_indices), rep.s_A,
                         rep.small_cardinality, rep.two_primes, bool(rep.fibered_subset),
                         rep.pure_roots_of_unity, rep.min_fib.fib_value])
        return np.array(rows, dtype=float).reshape(len(rows), 9)

    def get_feature_names_out(self, input_features=None):
        return np.array(["cardinality", "n_s1", "n_s2", "s_A", "small_cardinality", "two_primes",
                         "fibered_subset", "pure_roots_of_unity", "min_fib"], dtype=object)
