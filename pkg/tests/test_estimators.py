import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from evenodd import ConfigError, CriticalPointError, InstabilityError
from evenodd.estimators import ExactSpinEntanglement, GaussianEntanglement, RpaEntanglement


def test_clone_and_params():
    est = GaussianEntanglement(sizes=(8,), delta_minus=0.2, base="2")
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin.set_params(delta_minus=0.1).delta_minus == 0.1


@pytest.mark.parametrize("X", [[2.0, 3.0], np.array([[2.0], [3.0]]), (2.0, 3.0)])
def test_input_shapes(X):
    out = GaussianEntanglement(sizes=(8,)).fit().transform(X)
    assert out.shape == (2, 2)


def test_scalar_input():
    assert GaussianEntanglement(sizes=(8,)).fit().transform(2.0).shape == (1, 2)


def test_scales_agree():
    ratio = GaussianEntanglement(sizes=(8,), scale="ratio").fit()
    excess = GaussianEntanglement(sizes=(8,), scale="excess").fit()
    absolute = GaussianEntanglement(sizes=(8,), scale="absolute").fit()
    lam = 2.0 * ratio.lambda_c_
    np.testing.assert_allclose(ratio.transform([2.0]), excess.transform([1.0]))
    np.testing.assert_allclose(ratio.transform([2.0]), absolute.transform([lam]))


def test_feature_names():
    est = RpaEntanglement(selectors=("even_comb", "block:4")).fit()
    assert list(est.get_feature_names_out()) == ["rpa:even_comb", "rpa:block:4"]


def test_not_fitted():
    with pytest.raises(NotFittedError):
        GaussianEntanglement().transform([2.0])


@pytest.mark.parametrize(
    "params",
    [{"scale": "log"}, {"base": 10}, {"sizes": (1,)}, {"selectors": ()}, {"selectors": ("block:40",)}],
)
def test_bad_hyperparameters(params):
    with pytest.raises(ConfigError):
        GaussianEntanglement(sizes=(8,)).set_params(**params).fit()


@pytest.mark.parametrize("X", [[[1.0, 2.0]], [np.nan], [[2.0, 3.0], [4.0, 5.0]]])
def test_bad_input(X):
    est = GaussianEntanglement(sizes=(8,)).fit()
    with pytest.raises((ConfigError, ValueError)):
        est.transform(X)


def test_unstable_values():
    est = GaussianEntanglement(sizes=(8,)).fit()
    out = est.transform([0.5, 2.0])
    assert np.isnan(out[0]).all() and np.isfinite(out[1]).all()
    with pytest.raises(InstabilityError):
        est.set_params(on_unstable="raise").fit().transform([0.5])


def test_rpa_critical_window():
    est = RpaEntanglement().fit()
    assert math.isnan(est.transform([1.0])[0, 0])
    with pytest.raises(CriticalPointError):
        est.set_params(on_critical="raise").fit().transform([1.0])


def test_exact_shift():
    raw = ExactSpinEntanglement(sizes=(6,), base="2").fit()
    shifted = ExactSpinEntanglement(sizes=(6,), base="2", shifted=True).fit()
    diff = raw.transform([0.3, 1.2]) - shifted.transform([0.3, 1.2])
    np.testing.assert_allclose(diff[:, 0], [1.0, 0.0])


def test_exact_and_rpa_converge_at_strong_field():
    fields = [2.0, 4.0, 8.0]
    ed = ExactSpinEntanglement(sizes=(8,)).fit().transform(fields)[:, 0]
    rpa = RpaEntanglement(sizes=(8,)).fit().transform(fields)[:, 0]
    rel = np.abs(ed - rpa) / ed
    assert rel[0] > rel[1] > rel[2]
    assert rel[2] < 0.05


def test_fit_transform():
    est = GaussianEntanglement(sizes=(6, 6), selectors=("block:3",))
    assert est.fit_transform([1.5]).shape == (1, 1)
