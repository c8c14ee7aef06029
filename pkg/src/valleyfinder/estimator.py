"""sklearn-compatible estimator over the mixture core.

GapMixture wraps em_fit/label_components/crossover_threshold behind the
standard fit/predict surface so the model slots into sklearn pipelines and
model-selection tooling; the functional API underneath stays the source of
truth.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import em, synth
from ._validation import as_sample_array
from .threshold import DbiReport, crossover_threshold, davies_bouldin
from .types import FitConfig, MixtureFit, ThresholdResult


class GapMixture(BaseEstimator):
    """Gaussian mixture over log2 inter-activity gaps.

    Parameters mirror FitConfig; random_state doubles as the deterministic
    restart seed. X is a 1-D array of log2 gaps (an (n, 1) column also works).
    """

    def __init__(
        self,
        k: int = 2,
        max_iter: int = 1000,
        rel_tol: float = 1e-8,
        restarts: int = 10,
        random_state: int = 0,
        sigma_floor: float = 1e-3,
        init_strategy: str = "quantile",
    ):
        self.k = k
        self.max_iter = max_iter
        self.rel_tol = rel_tol
        self.restarts = restarts
        self.random_state = random_state
        self.sigma_floor = sigma_floor
        self.init_strategy = init_strategy

    def _config(self) -> FitConfig:
        return FitConfig(
            k=self.k,
            max_iter=self.max_iter,
            rel_tol=self.rel_tol,
            restarts=self.restarts,
            seed=self.random_state,
            sigma_floor=self.sigma_floor,
            init_strategy=self.init_strategy,
        )

    def fit(self, X, y=None) -> "GapMixture":
        fit = em.label_components(em.em_fit(X, self._config()))
        self.result_: MixtureFit = fit
        self.means_ = np.array([c.mean for c in fit.components])
        self.stddevs_ = np.array([c.stddev for c in fit.components])
        self.weights_ = np.array([c.weight for c in fit.components])
        self.labels_ = tuple(c.label for c in fit.components)
        self.converged_ = fit.converged
        self.n_iter_ = fit.iterations
        self.log_likelihood_ = fit.log_likelihood
        return self

    def _check_fitted(self) -> MixtureFit:
        if not hasattr(self, "result_"):
            raise NotFittedError("GapMixture is not fitted; call fit(X) first")
        return self.result_

    def predict_proba(self, X) -> np.ndarray:
        fit = self._check_fitted()
        return em.responsibilities(X, fit.components)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def score_samples(self, X) -> np.ndarray:
        fit = self._check_fitted()
        arr = as_sample_array(X)
        return np.log(np.maximum(em.weighted_density(fit.components, arr), 1e-300))

    def score(self, X, y=None) -> float:
        arr = as_sample_array(X)
        fit = self._check_fitted()
        return em.log_likelihood(fit.components, arr) / max(1, arr.size)

    def bic(self, X=None) -> float:
        fit = self._check_fitted()
        if X is None:
            return em.bic(fit)
        arr = as_sample_array(X)
        return em.bic_value(fit.k, arr.size, em.log_likelihood(fit.components, arr))

    def inactivity_threshold(self) -> ThresholdResult:
        return crossover_threshold(self._check_fitted())

    def davies_bouldin(self, X) -> DbiReport:
        return davies_bouldin(X, self._check_fitted())

    def sample(self, n: int, seed: int | None = None) -> np.ndarray:
        fit = self._check_fitted()
        return synth.sample_mixture(fit.components, n, self.random_state if seed is None else seed)
