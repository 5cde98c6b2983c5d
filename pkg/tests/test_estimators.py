from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fsoarq.channels import DEFAULT_GAMMA_GAMMA, DEFAULT_RICIAN
from fsoarq.clt import RoundParams, phi_clt
from fsoarq.estimators import FailureProbabilityModel
from fsoarq.exceptions import ConfigError

X = np.array([[2.0, 5.0, 5.0], [1.0, 2.0, 2.0], [3.0, 20.0, 20.0]])


def test_params_roundtrip_and_clone():
    m = FailureProbabilityModel(n_fso=64, engine="clt_exactq")
    params = m.get_params()
    assert params["n_fso"] == 64 and params["engine"] == "clt_exactq"
    c = clone(m).set_params(n_fso=8)
    assert c.n_fso == 8 and m.n_fso == 64


def test_predict_matches_engine():
    m = FailureProbabilityModel(rf_model="rician", n_fso=32).fit(X)
    ref = [phi_clt(DEFAULT_GAMMA_GAMMA, DEFAULT_RICIAN, RoundParams(*row, 32)) for row in X]
    assert m.predict(X) == pytest.approx(ref)
    assert m.n_features_in_ == 3


def test_engines_agree_roughly():
    preds = {
        e: FailureProbabilityModel(n_fso=2, engine=e, trials=20_000).fit(X).predict(X)
        for e in ("clt_exactq", "minkowski", "montecarlo")
    }
    assert np.all(preds["minkowski"] >= preds["montecarlo"] - 0.02)


def test_validation():
    with pytest.raises(NotFittedError):
        FailureProbabilityModel().predict(X)
    with pytest.raises(ValueError):
        FailureProbabilityModel().fit(X[:, :2])
    with pytest.raises(ValueError):
        FailureProbabilityModel().fit([[0.0, 1.0, 1.0]])
    with pytest.raises(ValueError):
        FailureProbabilityModel().fit([[1.0, np.nan, 1.0]])
    with pytest.raises(ConfigError):
        FailureProbabilityModel(engine="x").fit(X)


def test_score_is_r2():
    m = FailureProbabilityModel(n_fso=32).fit(X)
    assert m.score(X, m.predict(X)) == pytest.approx(1.0)
