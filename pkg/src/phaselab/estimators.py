"""Scikit-learn estimator fronts for the phase and matrix solvers.

``fit(X, y)`` takes the measurement vectors as the rows of X and the observed
measurements as y, mirroring the (design matrix, response) convention so the
solvers compose with scikit-learn tooling (clone, pipelines, grid search).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .ensembles import amplitude_op, intensity_op, measurement_rows, rank_one_op
from .exceptions import ConfigError
from .geometry import FullSet, FullSymmetricSet
from .solvers import SolverConfig, lq_norm, solve_matrix, solve_phase
from .validation import check_measurements


def _as_config(params: dict) -> SolverConfig:
    return SolverConfig(
        q=params["q"],
        max_iters=params["max_iters"],
        step0=params["step0"],
        step_decay=params["step_decay"],
        restarts=params["restarts"],
        tol=params["tol"],
        init=params["init"],
    )


class PhaseRetrieval(BaseEstimator):
    """Signal recovery from magnitude or squared-magnitude measurements.

    Parameters
    ----------
    ell : int, default=2
        1 fits amplitude data |<phi_k, x>|, 2 fits intensity data
        |<phi_k, x>|^2.
    q : float, default=2.0
        Residual norm exponent of the objective ||A(x) - y||_q, 1 <= q < inf.
    constraint : set descriptor or None, default=None
        Vector constraint set; None means the full ambient space.
    max_iters, step0, step_decay, restarts, tol : solver knobs.
    init : {"spectral", "random"} or array, default="spectral"
        Starting point of the first restart.
    random_state : int, default=0
        Seed for the restart streams.

    Attributes
    ----------
    estimate_ : ndarray of shape (n,)
        Recovered signal (defined up to a global phase).
    report_ : SolverReport
        Objective value, iteration count and restart index of the winner.
    n_features_in_ : int
        Signal dimension seen during fit.
    """

    def __init__(self, ell=2, q=2.0, constraint=None, max_iters=1000, step0=0.2,
                 step_decay=0.99, restarts=5, tol=1e-12, init="spectral", random_state=0):
        self.ell = ell
        self.q = q
        self.constraint = constraint
        self.max_iters = max_iters
        self.step0 = step0
        self.step_decay = step_decay
        self.restarts = restarts
        self.tol = tol
        self.init = init
        self.random_state = random_state

    def fit(self, X, y):
        """Recover a signal whose phaseless measurements under X match y."""
        rows = measurement_rows(X)
        y = check_measurements(y, rows.shape[0], name="y")
        constraint = self.constraint if self.constraint is not None else FullSet(rows.shape[1])
        cfg = _as_config(self.get_params())
        self.report_ = solve_phase(self.ell, rows, y, constraint, cfg,
                                   seed=self.random_state)
        self.estimate_ = self.report_.estimate
        self.n_features_in_ = rows.shape[1]
        return self

    def predict(self, X):
        """Phaseless measurements of the fitted signal under new rows X."""
        self._check_fitted()
        op = amplitude_op if self.ell == 1 else intensity_op
        return op(X, self.estimate_)

    def score(self, X, y):
        """Negative normalized residual -||predict(X) - y||_q / m^(1/q)."""
        self._check_fitted()
        rows = measurement_rows(X)
        y = check_measurements(y, rows.shape[0], name="y")
        resid = self.predict(rows) - y
        return -lq_norm(resid, float(self.q)) / rows.shape[0] ** (1.0 / float(self.q))

    def _check_fitted(self):
        if not hasattr(self, "estimate_"):
            raise ConfigError("estimator is not fitted; call fit(X, y) first")


class MatrixRecovery(BaseEstimator):
    """Symmetric matrix recovery from signed rank-one measurements.

    Fits ``min || A(X_mat) - y ||_q`` where A collects phi_k^* X_mat phi_k
    over the rows phi_k of the design matrix.  See PhaseRetrieval for the
    shared solver parameters.

    Attributes
    ----------
    estimate_ : ndarray of shape (n, n)
        Recovered symmetric matrix.
    report_ : SolverReport
    n_features_in_ : int
    """

    def __init__(self, q=2.0, constraint=None, max_iters=1000, step0=0.2,
                 step_decay=0.99, restarts=5, tol=1e-12, init="spectral", random_state=0):
        self.q = q
        self.constraint = constraint
        self.max_iters = max_iters
        self.step0 = step0
        self.step_decay = step_decay
        self.restarts = restarts
        self.tol = tol
        self.init = init
        self.random_state = random_state

    def fit(self, X, y):
        rows = measurement_rows(X)
        y = check_measurements(y, rows.shape[0], name="y")
        constraint = (self.constraint if self.constraint is not None
                      else FullSymmetricSet(rows.shape[1]))
        cfg = _as_config(self.get_params())
        self.report_ = solve_matrix(rows, y, constraint, cfg, seed=self.random_state)
        self.estimate_ = self.report_.estimate
        self.n_features_in_ = rows.shape[1]
        return self

    def predict(self, X):
        """Rank-one measurements of the fitted matrix under new rows X."""
        if not hasattr(self, "estimate_"):
            raise ConfigError("estimator is not fitted; call fit(X, y) first")
        return rank_one_op(X, self.estimate_)

    def score(self, X, y):
        rows = measurement_rows(X)
        y = check_measurements(y, rows.shape[0], name="y")
        resid = self.predict(rows) - y
        return -lq_norm(resid, float(self.q)) / rows.shape[0] ** (1.0 / float(self.q))
