"""scikit-learn style wrapper around the per-round failure probability.

The model has no trainable state: ``fit`` validates the configuration and
the feature layout, ``predict`` evaluates the chosen engine row by row.
Columns of ``X`` are ``[rate, p_rf, p_fso]``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bound import BoundConfig, phi_upper_bound
from .channels import GammaGammaParams, Rayleigh, RicianParams
from .clt import RoundParams, phi_clt
from .exceptions import ConfigError
from .montecarlo import McConfig, simulate_phi

__all__ = ["FailureProbabilityModel"]

_ENGINES = ("clt", "clt_exactq", "minkowski", "montecarlo")


class FailureProbabilityModel(RegressorMixin, BaseEstimator):
    """Per-round decoding failure probability of a hybrid RF/FSO link.

    Parameters
    ----------
    a, b : float
        Gamma-Gamma shape parameters of the FSO gain.
    rf_model : {"rayleigh", "rician"}
        RF fading law. ``nu`` and ``omega`` are used for ``"rician"``.
    n_fso : int
        FSO realizations per RF block.
    engine : {"clt", "clt_exactq", "minkowski", "montecarlo"}
    simplified_slope : bool
        Rician CLT only: use the simplified linearization slope.
    trials, seed : int
        Monte Carlo only.

    Examples
    --------
    >>> m = FailureProbabilityModel(n_fso=64).fit([[2.0, 5.0, 5.0]])
    >>> float(m.predict([[2.0, 5.0, 5.0]])[0]) < 0.1
    True
    """

    def __init__(self, a=4.3939, b=2.5636, rf_model="rayleigh", nu=0.0995, omega=0.7036,
                 n_fso=32, engine="clt", simplified_slope=False, trials=100_000, seed=0):
        self.a = a
        self.b = b
        self.rf_model = rf_model
        self.nu = nu
        self.omega = omega
        self.n_fso = n_fso
        self.engine = engine
        self.simplified_slope = simplified_slope
        self.trials = trials
        self.seed = seed

    def _validate_X(self, X, reset):
        X = check_array(X, dtype=np.float64, ensure_min_features=3)
        if X.shape[1] != 3:
            raise ValueError(f"X must have 3 columns [rate, p_rf, p_fso], got {X.shape[1]}")
        if reset:
            self.n_features_in_ = 3
        if np.any(X[:, 0] <= 0) or np.any(X[:, 1:] < 0) or np.any(X[:, 1:].sum(axis=1) <= 0):
            raise ValueError("rates must be positive and powers non-negative with a positive total")
        return X

    def fit(self, X, y=None):
        if self.engine not in _ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.rf_model not in ("rayleigh", "rician"):
            raise ConfigError(f"unknown rf_model {self.rf_model!r}")
        self._validate_X(X, reset=True)
        self.gamma_gamma_ = GammaGammaParams(self.a, self.b)
        self.rf_ = Rayleigh() if self.rf_model == "rayleigh" else RicianParams(self.nu, self.omega)
        return self

    def _phi(self, row):
        rp = RoundParams(row[0], row[1], row[2], int(self.n_fso))
        if self.engine == "montecarlo":
            return simulate_phi(self.gamma_gamma_, self.rf_, rp, McConfig(int(self.trials), int(self.seed))).mean
        if self.engine == "minkowski" and rp.p_fso > 0:
            return phi_upper_bound(self.gamma_gamma_, self.rf_, rp, BoundConfig())
        return phi_clt(self.gamma_gamma_, self.rf_, rp, self.engine == "clt_exactq", self.simplified_slope)

    def predict(self, X):
        check_is_fitted(self, "gamma_gamma_")
        X = self._validate_X(X, reset=False)
        return np.array([self._phi(row) for row in X])
