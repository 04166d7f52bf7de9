"""Estimator-style facade: ``fit`` runs the design flow, ``predict`` evaluates the response."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .milp import SolveOptions
from .spec import FilterSpec
from .validate import design, normalized_response


class MultiplierlessFIR(BaseEstimator):
    """Minimum-adder FIR design for a :class:`FilterSpec`.

    Parameters mirror the command line: ``method`` is ``"ilp1"`` or ``"ilp2"``,
    ``ad`` an adder-depth limit or ``"auto"``.
    """

    def __init__(self, method="ilp2", ad="auto", backend="scip", time_limit=None, grid_k=4,
                 candidate_factor=16, force_edges=True, relax_aux=True, max_iter=50, seed=0):
        self.method = method
        self.ad = ad
        self.backend = backend
        self.time_limit = time_limit
        self.grid_k = grid_k
        self.candidate_factor = candidate_factor
        self.force_edges = force_edges
        self.relax_aux = relax_aux
        self.max_iter = max_iter
        self.seed = seed

    def fit(self, X: FilterSpec, y=None):
        if not isinstance(X, FilterSpec):
            raise TypeError("fit expects a FilterSpec")
        opts = SolveOptions(time_limit=self.time_limit, backend=self.backend, seed=self.seed)
        run = design(X, self.method, self.ad, opts, k=self.grid_k, candidate_factor=self.candidate_factor,
                     force_edges=self.force_edges, max_iter=self.max_iter, relax_aux=self.relax_aux)
        self.spec_ = X
        self.solution_ = run.solution
        self.report_ = run.report
        self.coef_ = np.asarray(run.solution.coefficients, dtype=int)
        self.gain_ = run.solution.gain
        self.graph_ = run.solution.graph
        self.n_adders_ = run.solution.total_adders
        return self

    def predict(self, X):
        """Normalized zero-phase response at frequencies ``X`` (radians)."""
        check_is_fitted(self, "coef_")
        x = np.asarray(X, dtype=float) / np.pi
        return normalized_response(self.coef_, self.gain_, self.spec_, x)

    def score(self, X=None, y=None):
        """Negative total adder count (higher is better)."""
        check_is_fitted(self, "coef_")
        return -float(self.n_adders_)
