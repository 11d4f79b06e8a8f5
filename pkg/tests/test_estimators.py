import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from favard.cantor import CantorConfig, cantor_iterate, random_directions
from favard.estimators import CyclotomicFeatures, FavardDecay, PowerLawRegressor, ProjectionFeatures
from favard.experiments import favard_series


def test_power_law_regressor():
    N = np.arange(1, 10)
    reg = PowerLawRegressor().fit(N, 2.0 * N ** -0.75)
    assert reg.coef_ == pytest.approx(-0.75, abs=1e-12)
    assert np.allclose(reg.predict([[20], [30]]), 2.0 * np.array([20, 30]) ** -0.75)
    assert reg.score(N, 2.0 * N ** -0.75) == pytest.approx(1)


def test_power_law_validation():
    with pytest.raises(NotFittedError):
        PowerLawRegressor().predict([1, 2])
    with pytest.raises(ValueError):
        PowerLawRegressor().fit([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        PowerLawRegressor().fit([0, 1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        PowerLawRegressor().fit([1.5, 2, 3], [1, 2, 3])


def test_favard_decay_matches_series():
    est = FavardDecay(n_directions=400, random_state=7).fit([[1], [2], [3], [4]])
    ref = favard_series(CantorConfig.corner(2), [1, 2, 3, 4], 400, seed=7)
    assert [r.fav_norm for r in est.series_.rows] == [r.fav_norm for r in ref.rows]
    assert -1.2 < est.slope_ < 0
    assert est.predict([5]).shape == (1,)


def test_favard_decay_params_and_clone():
    est = FavardDecay(config=(3, 8, ((0, 7),) * 3), n_directions=50, random_state=1)
    params = est.get_params()
    assert params == {"config": (3, 8, ((0, 7),) * 3), "n_directions": 50, "random_state": 1,
                      "budget": 10_000_000}
    twin = clone(est).set_params(n_directions=60)
    assert twin.n_directions == 60 and est.n_directions == 50
    with pytest.raises(NotFittedError):
        twin.predict([1])
    with pytest.raises(ValueError):
        FavardDecay(n_directions=50).fit([0, 1]).predict([2])


def test_projection_features():
    thetas = random_directions(2, 20, np.random.default_rng(0))
    tr = ProjectionFeatures(N=3).fit()
    F = tr.transform(thetas)
    assert F.shape == (20, 4)
    assert np.allclose(F[:, 1], math.sqrt(2))
    assert np.all(F[:, 2] >= F[:, 1] - 1e-12)  # f >= 1 on its support
    assert np.all(F[:, 3] >= 1) and np.all(F[:, 3] <= cantor_iterate(CantorConfig.corner(2), 3).count)
    assert list(tr.get_feature_names_out()) == ["shadow_length", "mass", "l2_mass", "max_multiplicity"]
    Z = make_pipeline(ProjectionFeatures(N=2), StandardScaler()).fit_transform(thetas)
    assert Z.shape == (20, 4)
    with pytest.raises(ValueError):
        tr.transform(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        tr.transform(np.ones((2, 3)))


def test_cyclotomic_features():
    X = [[0, 3], [0, 2, 3, 4, 6], [0, 1, 2, 5, 10, 11, 15, 17, 20, 21, 25]]
    F = CyclotomicFeatures().fit_transform(X)
    assert F.shape == (3, 9)
    assert list(F[0, :4]) == [2, 2, 0, 1]
    assert list(F[1, :3]) == [5, 1, 1]
    assert list(F[2, :3]) == [11, 0, 2] and F[2, 6] == 1
    with pytest.raises(ValueError):
        CyclotomicFeatures().transform([[1, 1]])
