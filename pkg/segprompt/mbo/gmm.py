"""
Full-covariance Gaussian mixtures over unit-interval colors.
"""
import logging
import math
import typing as t

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from segprompt.cfpg.clustering import kmeans_fit
from segprompt.core.exceptions import DegenerateInputError, ModelDegenerateError

logger = logging.getLogger(__name__)

DEFAULT_COMPONENTS = 5
DEFAULT_MAX_ITER = 20
DEFAULT_TOL = 1e-5
DEFAULT_REG_EPS = 1e-4
# pixels per side that a mixture is fitted on during refinement
DEFAULT_FIT_SAMPLES = 20000
STARVED_MASS = 1e-8

_LOG_2PI = math.log(2.0 * math.pi)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


class GmmModel:
    """
    A K-component mixture ``sum_l w_l N(z | mu_l, S_l)``. Covariances are used
    as given; when one is not positive definite the model retries once with
    ``reg_eps`` added to its diagonal before giving up.
    """

    def __init__(self, weights, means, covariances, reg_eps: float = DEFAULT_REG_EPS, *,
                 log_likelihood_history: t.Sequence[float] = (), recoveries: t.Sequence[int] = (),
                 n_iter: int = 0) -> None:
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        means = np.asarray(means, dtype=np.float64)
        covariances = np.asarray(covariances, dtype=np.float64)
        k = weights.shape[0]
        if k < 1:
            raise ValueError('A mixture needs at least one component')
        if means.ndim != 2 or means.shape[0] != k:
            raise ValueError(f'Expected {k} mean vectors, got shape {means.shape}')
        dim = means.shape[1]
        if covariances.shape != (k, dim, dim):
            raise ValueError(f'Expected covariances of shape {(k, dim, dim)}, got {covariances.shape}')
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f'Mixture weights must be non-negative and sum to 1, got {weights.sum()!r}')

        self.reg_eps = float(reg_eps)
        self._weights = _readonly(weights)
        self._means = _readonly(means)
        self._covariances = _readonly(covariances)
        self._cholesky = _readonly(np.stack([self._factor(cov, index) for index, cov in enumerate(covariances)]))
        self.log_likelihood_history = tuple(float(value) for value in log_likelihood_history)
        self.recoveries = tuple(int(value) for value in recoveries)
        self.n_iter = int(n_iter)

    def _factor(self, cov: np.ndarray, index: int) -> np.ndarray:
        try:
            return np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            pass
        try:
            return np.linalg.cholesky(cov + self.reg_eps * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            raise ModelDegenerateError(f'Covariance of component {index} is not positive definite')

    def __repr__(self) -> str:
        return f'GmmModel(k={self.k}, dim={self.dim})'

    @property
    def k(self) -> int:
        return int(self._weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self._means.shape[1])

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def means(self) -> np.ndarray:
        return self._means

    @property
    def covariances(self) -> np.ndarray:
        return self._covariances

    def component_log_prob(self, z) -> np.ndarray:
        """``log w_l + log N(z_i | mu_l, S_l)`` as an (N, K) array."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        out = np.empty((z.shape[0], self.k), dtype=np.float64)
        with np.errstate(divide='ignore'):
            log_weights = np.log(self._weights)
        for index in range(self.k):
            chol = self._cholesky[index]
            solved = solve_triangular(chol, (z - self._means[index]).T, lower=True, check_finite=False)
            mahalanobis = np.einsum('ij,ij->j', solved, solved)
            log_det = 2.0 * np.log(np.diag(chol)).sum()
            out[:, index] = log_weights[index] - 0.5 * (self.dim * _LOG_2PI + log_det + mahalanobis)
        return out

    def log_prob(self, z) -> np.ndarray:
        return logsumexp(self.component_log_prob(z), axis=1)

    def responsibilities(self, z) -> np.ndarray:
        terms = self.component_log_prob(z)
        return np.exp(terms - logsumexp(terms, axis=1, keepdims=True))

    def mean_log_likelihood(self, z) -> float:
        return float(np.mean(self.log_prob(z)))


def log_prob(model: GmmModel, z) -> t.Union[float, np.ndarray]:
    """Mixture log density of one color (a float) or of an (N, 3) batch."""
    single = np.asarray(z).ndim == 1
    values = model.log_prob(z)
    return float(values[0]) if single else values


def posterior(model: GmmModel, z) -> np.ndarray:
    """Component responsibilities of one color (length K) or of an (N, 3) batch."""
    single = np.asarray(z).ndim == 1
    values = model.responsibilities(z)
    return values[0] if single else values


def _initial_model(pixels: np.ndarray, components: int, seed: int, reg_eps: float) -> GmmModel:
    clusters = kmeans_fit(pixels, k=components, seed=seed)
    counts = np.bincount(clusters.assignment, minlength=components).astype(np.float64)
    responsibilities = np.zeros((pixels.shape[0], components), dtype=np.float64)
    responsibilities[np.arange(pixels.shape[0]), clusters.assignment] = 1.0
    weights, means, covariances, starved = _m_step(pixels, responsibilities, reg_eps)
    if starved.any():
        # padded centroids of a degenerate clustering own no pixel
        means[starved] = clusters.centroids[starved]
        weights, covariances = _recover(pixels, None, starved, weights, means, covariances, reg_eps)
    logger.debug('Initial mixture from %d clusters, sizes %s', components, counts.astype(int).tolist())
    return GmmModel(weights, means, covariances, reg_eps)


def _m_step(pixels: np.ndarray, responsibilities: np.ndarray,
            reg_eps: float) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n, dim = pixels.shape
    mass = responsibilities.sum(axis=0)
    starved = mass < STARVED_MASS
    safe = np.where(starved, 1.0, mass)
    weights = mass / n
    means = (responsibilities.T @ pixels) / safe[:, None]
    diff = pixels[None, :, :] - means[:, None, :]
    covariances = np.einsum('nk,kni,knj->kij', responsibilities, diff, diff) / safe[:, None, None]
    covariances += reg_eps * np.eye(dim)[None, :, :]
    return weights, means, covariances, starved


def _recover(pixels: np.ndarray, scores: t.Optional[np.ndarray], starved: np.ndarray, weights: np.ndarray,
             means: np.ndarray, covariances: np.ndarray, reg_eps: float) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Re-seed starved components at the lowest-likelihood pixels, each with an
    isotropic ``reg_eps`` covariance and weight ``1/N`` before renormalizing.
    When ``scores`` is None the component keeps the mean already placed in ``means``.
    """
    n, dim = pixels.shape
    weights = weights.copy()
    order = np.argsort(scores, kind='stable') if scores is not None else None
    for rank, index in enumerate(np.flatnonzero(starved)):
        if order is not None:
            means[index] = pixels[order[rank % n]]
        covariances[index] = reg_eps * np.eye(dim)
        weights[index] = 1.0 / n
    return weights / weights.sum(), covariances


def subsample(pixels: np.ndarray, max_samples: t.Optional[int], seed: int = 0) -> np.ndarray:
    """At most ``max_samples`` rows drawn without replacement, in their original order."""
    n = pixels.shape[0]
    if not max_samples or n <= max_samples:
        return pixels
    rng = np.random.default_rng(seed)
    return pixels[np.sort(rng.choice(n, size=max_samples, replace=False))]


def fit(pixels, components: int = DEFAULT_COMPONENTS, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
        tol: float = DEFAULT_TOL, reg_eps: float = DEFAULT_REG_EPS, init: t.Optional[GmmModel] = None,
        max_samples: t.Optional[int] = None) -> GmmModel:
    """
    EM fit of a ``components``-mixture, started from a KMeans clustering or
    from ``init`` when it has the same component count. With ``max_samples``
    set, larger inputs are fitted on a subsample drawn with ``seed``.

    The mean log-likelihood never decreases across accepted iterations: a step
    that would lower it ends the fit with the previous parameters. Iterations
    that had to re-seed a starved component are listed in ``recoveries``.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise ValueError(f'Expected an (N, D) pixel matrix, got shape {pixels.shape}')
    if components < 1:
        raise ValueError('components must be at least 1')
    if pixels.shape[0] < components:
        raise DegenerateInputError(f'Cannot fit {components} components to {pixels.shape[0]} pixels')
    if max_iter < 1 or tol < 0:
        raise ValueError('EM needs max_iter >= 1 and tol >= 0')
    if max_samples is not None and max_samples < 0:
        raise ValueError('max_samples must be non-negative')
    if max_samples:
        pixels = subsample(pixels, max(max_samples, components), seed)

    if init is not None and init.k == components and init.dim == pixels.shape[1]:
        model = GmmModel(init.weights, init.means, init.covariances, reg_eps)
    else:
        model = _initial_model(pixels, components, seed, reg_eps)

    scores = model.log_prob(pixels)
    likelihood = float(np.mean(scores))
    history = [likelihood]
    recoveries = []
    n_iter = 0

    for iteration in range(1, max_iter + 1):
        weights, means, covariances, starved = _m_step(pixels, model.responsibilities(pixels), reg_eps)
        recovered = bool(starved.any())
        if recovered:
            logger.debug('EM iteration %d: re-seeding %d starved component(s)', iteration, int(starved.sum()))
            weights, covariances = _recover(pixels, scores, starved, weights, means, covariances, reg_eps)

        candidate = GmmModel(weights, means, covariances, reg_eps)
        candidate_scores = candidate.log_prob(pixels)
        candidate_likelihood = float(np.mean(candidate_scores))
        if not recovered and candidate_likelihood < likelihood:
            logger.debug('EM iteration %d would lower the log-likelihood (%.9g < %.9g), stopping',
                         iteration, candidate_likelihood, likelihood)
            break

        improvement = candidate_likelihood - likelihood
        model, scores, likelihood = candidate, candidate_scores, candidate_likelihood
        history.append(likelihood)
        n_iter = iteration
        if recovered:
            recoveries.append(iteration)
        logger.debug('EM iteration %d: mean log-likelihood %.9g', iteration, likelihood)
        if not recovered and improvement < tol:
            break

    return GmmModel(model.weights, model.means, model.covariances, reg_eps,
                    log_likelihood_history=history, recoveries=recoveries, n_iter=n_iter)
