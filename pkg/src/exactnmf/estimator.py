"""scikit-learn style wrapper around :func:`solve_exact_nmf`."""
import numpy as np
from scipy.optimize import nnls
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import SearchStalled
from .numerics import DEFAULT_TOL, rank
from .reductions import NmfInstance, solve_exact_nmf
from .simplex_search import SearchConfig


class ExactNMF(BaseEstimator, TransformerMixin):
    """Exact nonnegative factorization ``X = W H`` with ``k = rank(X)`` components.

    Parameters
    ----------
    n_components : int or None
        Inner dimension ``k``; must equal the numerical rank of ``X``.  None
        uses the rank.
    tol : float
        Hybrid tolerance shared by rank tests, LPs and verification.
    max_sweeps, restarts : int
        Local search budget.
    random_state : int
        Seed for the restart rotations.

    Attributes
    ----------
    components_ : ndarray (k, n_features)
        The factor ``H``.
    n_components_ : int
    reconstruction_err_ : float
        ``max |X - W H|`` on the training data.
    n_sweeps_, n_restarts_ : int
        Search statistics (0 when no search was needed).
    """

    def __init__(self, n_components=None, tol=DEFAULT_TOL, max_sweeps=200, restarts=3, random_state=0):
        self.n_components = n_components
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.restarts = restarts
        self.random_state = random_state

    def _validate(self, X, reset):
        X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
        if np.min(X) < -self.tol * max(1.0, float(np.max(np.abs(X)))):
            raise ValueError("ExactNMF requires nonnegative input")
        if not reset and X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, the model was fitted with {self.n_features_in_}")
        return np.maximum(X, 0.0)

    def _fit(self, X, H):
        X = self._validate(X, reset=True)
        k = self.n_components if self.n_components is not None else rank(X, self.tol)
        if k < 1:
            raise ValueError("X is numerically zero")
        cfg = SearchConfig(max_sweeps=self.max_sweeps, restarts=self.restarts,
                           rng_seed=self.random_state, tol=self.tol)
        if H is not None:
            H = check_array(H, dtype=np.float64)
        result = solve_exact_nmf(NmfInstance(X, k, self.tol), cfg, warm_start=H, tol=self.tol)
        if not result.solved:
            raise SearchStalled(f"local search stalled: {result.reason}")
        self.n_features_in_ = X.shape[1]
        self.n_components_ = k
        self.components_ = result.factors.H
        self.reconstruction_err_ = result.residual
        search = result.search
        self.n_sweeps_ = search.sweeps if search is not None else 0
        self.n_restarts_ = search.restarts if search is not None else 0
        return result.factors.W

    def fit(self, X, y=None, H=None):
        """Factor ``X``; ``H`` optionally warm-starts the search."""
        self._fit(X, H)
        return self

    def fit_transform(self, X, y=None, H=None):
        return self._fit(X, H)

    def transform(self, X):
        """Nonnegative least-squares coefficients of each row on ``components_``."""
        check_is_fitted(self, "components_")
        X = self._validate(X, reset=False)
        Ht = self.components_.T
        return np.array([nnls(Ht, x)[0] for x in X])

    def inverse_transform(self, W):
        check_is_fitted(self, "components_")
        W = check_array(W, dtype=np.float64)
        return W @ self.components_
