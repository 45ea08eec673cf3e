"""Color models and energy terms: per-label GMMs, data penalties, contrast weights."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridError, GridImage, NeighborhoodSystem, ScribbleSet, offset_pairs

INF = float("inf")
_DENSITY_FLOOR = 1e-30
_COV_REG = 1e-6


@dataclass
class GmmModel:
    """Gaussian mixture over channel space; covariances are regularized SPD."""

    weights: np.ndarray      # (K,)
    means: np.ndarray        # (K, C)
    covariances: np.ndarray  # (K, C, C)
    log_likelihood_path: list = field(default_factory=list, repr=False)

    @property
    def num_components(self) -> int:
        return self.weights.shape[0]

    def log_density(self, x: np.ndarray) -> np.ndarray:
        """Log mixture density at each row of x, shape (N, C) -> (N,)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n, c = x.shape
        comp = np.empty((self.num_components, n))
        for k in range(self.num_components):
            chol = np.linalg.cholesky(self.covariances[k])
            diff = x - self.means[k]
            sol = np.linalg.solve(chol, diff.T)
            maha = (sol * sol).sum(axis=0)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            comp[k] = (math.log(max(self.weights[k], 1e-300))
                       - 0.5 * (c * math.log(2 * math.pi) + logdet + maha))
        m = comp.max(axis=0)
        return m + np.log(np.exp(comp - m).sum(axis=0))

    def density(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.log_density(x))


def _kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(x.shape[0])]]
    for _ in range(1, k):
        d2 = np.min([((x - c) ** 2).sum(axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(x.shape[0])])
            continue
        centers.append(x[rng.choice(x.shape[0], p=d2 / total)])
    return np.array(centers)


def fit_gmm(samples: np.ndarray, k: int, seed: int,
            max_iter: int = 100, tol: float = 1e-6) -> GmmModel:
    """EM fit from a k-means++ start; deterministic for a fixed seed.

    With fewer samples than components, k falls back to the number of distinct
    sample points (at least 1). Covariances get +1e-6*I every M-step.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if x.ndim != 2 or x.shape[0] == 0:
        raise GridError("fit_gmm needs a non-empty (N, C) sample array")
    n, c = x.shape
    if k < 1:
        raise GridError("component count must be >= 1")
    distinct = np.unique(x, axis=0)
    k = max(1, min(k, n, distinct.shape[0]))

    rng = np.random.default_rng(seed)
    centers = distinct if distinct.shape[0] == k else _kmeanspp_centers(x, k, rng)
    assign = np.argmin(((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2), axis=1)
    resp = np.zeros((n, k))
    resp[np.arange(n), assign] = 1.0

    weights = np.full(k, 1.0 / k)
    means = centers.copy()
    covs = np.tile(np.eye(c), (k, 1, 1))
    path: list[float] = []
    eye = np.eye(c)
    for _ in range(max_iter):
        # M-step
        nk = resp.sum(axis=0)
        nonzero = nk > 1e-12
        weights = np.where(nonzero, nk / n, weights * 0)
        weights = weights / weights.sum()
        for j in range(k):
            if not nonzero[j]:
                continue  # empty component keeps its previous parameters
            means[j] = resp[:, j] @ x / nk[j]
            diff = x - means[j]
            covs[j] = (resp[:, j, None] * diff).T @ diff / nk[j] + _COV_REG * eye
        # E-step
        log_comp = np.empty((k, n))
        for j in range(k):
            chol = np.linalg.cholesky(covs[j])
            diff = x - means[j]
            sol = np.linalg.solve(chol, diff.T)
            maha = (sol * sol).sum(axis=0)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            log_comp[j] = (math.log(max(weights[j], 1e-300))
                           - 0.5 * (c * math.log(2 * math.pi) + logdet + maha))
        m = log_comp.max(axis=0)
        lse = m + np.log(np.exp(log_comp - m).sum(axis=0))
        resp = np.exp(log_comp - lse).T
        ll = float(lse.sum())
        path.append(ll)
        if len(path) >= 2 and path[-1] - path[-2] < tol:
            break
    return GmmModel(weights=weights, means=means, covariances=covs,
                    log_likelihood_path=path)


@dataclass
class DataTermTable:
    """Per-pixel per-label penalties; seed pixels carry 0 / inf hard constraints."""

    labels: tuple[int, ...]
    values: np.ndarray  # (num_pixels, num_labels)

    def label_column(self, label: int) -> int:
        return self.labels.index(label)


def data_term(image: GridImage, models: dict[int, "GmmModel | None"],
              scribbles: ScribbleSet, labels: tuple[int, ...]) -> DataTermTable:
    """Negative log density per label, shifted so each pixel's minimum is 0;
    seeds then become hard constraints (0 for the seed label, inf elsewhere).

    A label whose model is None gets the uniform density 1 over channel space.
    """
    flat = image.flat()
    n = flat.shape[0]
    vals = np.empty((n, len(labels)))
    for j, lab in enumerate(labels):
        model = models.get(lab)
        if model is None:
            dens = np.ones(n)
        else:
            dens = model.density(flat)
        vals[:, j] = -np.log(dens + _DENSITY_FLOOR)
    vals -= vals.min(axis=1, keepdims=True)
    for j, lab in enumerate(labels):
        px = scribbles.pixels(lab)
        if px.size:
            vals[px, :] = INF
            vals[px, j] = 0.0
    return DataTermTable(labels=labels, values=vals)


@dataclass
class SmoothnessWeights:
    """Contrast-sensitive weights over unordered neighbor pairs."""

    pairs_p: np.ndarray  # (M,)
    pairs_q: np.ndarray  # (M,)
    weights: np.ndarray  # (M,) w_pq = exp(-|dI|^2 / 2 sigma^2) / |p-q|
    lam: float
    sigma_sq: float


def smoothness_weights(image: GridImage, nbhd: NeighborhoodSystem,
                       lam: float) -> SmoothnessWeights:
    """Weights decrease with intensity contrast; sigma^2 is the mean squared
    intensity difference over all neighbor pairs (1 if the image is constant)."""
    if lam < 0:
        raise GridError("lambda must be >= 0")
    flat = image.flat()
    ps, qs, d2, dist = [], [], [], []
    for k in nbhd.positive_half():
        p_idx, q_idx = offset_pairs(image.dims, nbhd.offsets[k])
        diff = flat[p_idx] - flat[q_idx]
        ps.append(p_idx)
        qs.append(q_idx)
        d2.append((diff * diff).sum(axis=1))
        dist.append(np.full(p_idx.size, nbhd.lengths[k]))
    pairs_p = np.concatenate(ps)
    pairs_q = np.concatenate(qs)
    delta2 = np.concatenate(d2)
    length = np.concatenate(dist)
    sigma_sq = float(delta2.mean()) if delta2.size else 0.0
    if sigma_sq == 0.0:
        sigma_sq = 1.0
    w = np.exp(-delta2 / (2.0 * sigma_sq)) / length
    return SmoothnessWeights(pairs_p=pairs_p, pairs_q=pairs_q, weights=w,
                             lam=float(lam), sigma_sq=sigma_sq)


def gmm_to_json(model: GmmModel) -> str:
    return json.dumps({
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
    })


def gmm_from_json(text: str) -> GmmModel:
    obj = json.loads(text)
    return GmmModel(weights=np.asarray(obj["weights"], dtype=np.float64),
                    means=np.asarray(obj["means"], dtype=np.float64),
                    covariances=np.asarray(obj["covariances"], dtype=np.float64))
