"""Gustafson-Kessel fuzzy clustering with Babuska-style covariance conditioning (GK-B).

The iteration alternates prototype, covariance, distance and membership
updates over an arbitrary n-dimensional feature space. Covariances are
conditioned in two ways: a convex blend toward a scaled identity
(weight ``gamma``) and eigenvalue clipping so the condition number never
exceeds ``beta``. With ``gamma=0`` and a very large ``beta`` the
iteration reduces to plain Gustafson-Kessel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted


class DegenerateClusterError(RuntimeError):
    """A cluster's membership mass underflowed to zero."""


class ConditioningError(RuntimeError):
    """A covariance matrix could not be made positive-definite."""


@dataclass(frozen=True)
class GkbParams:
    """Parameter set for one GK-B fit.

    ``rho`` is the per-cluster volume; ``None`` means all ones.
    """

    c: int = 2
    m: float = 2.0
    epsilon: float = 1e-3
    gamma: float = 0.0
    beta: float = 1e15
    rho: tuple[float, ...] | None = None
    max_iters: int = 300
    seed: int = 0
    paper_exponent: bool = False

    def __post_init__(self):
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")
        if self.m <= 1:
            raise ValueError(f"m must be > 1, got {self.m}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rho is not None:
            if len(self.rho) != self.c:
                raise ValueError("rho must have one entry per cluster")
            if any(r <= 0 for r in self.rho):
                raise ValueError("all rho entries must be > 0")

    def rho_array(self) -> np.ndarray:
        if self.rho is None:
            return np.ones(self.c)
        return np.asarray(self.rho, dtype=float)


@dataclass(frozen=True)
class ClusterModel:
    """Fitted prototypes, conditioned covariances and the induced norm matrices."""

    prototypes: np.ndarray   # (c, n)
    covariances: np.ndarray  # (c, n, n), symmetric positive-definite
    norm_matrices: np.ndarray  # (c, n, n): rho_i * det(F_i)^(1/n) * inv(F_i)

    def to_dict(self) -> dict:
        return {
            "prototypes": self.prototypes.tolist(),
            "covariances": self.covariances.tolist(),
        }


@dataclass(frozen=True)
class FitResult:
    model: ClusterModel
    membership: np.ndarray  # (c, N), columns sum to 1
    iterations: int
    final_delta: float
    converged: bool
    history: tuple[float, ...] = field(default=(), repr=False)


def validate_partition(u: np.ndarray, atol: float = 1e-9) -> None:
    """Raise if ``u`` is not a valid fuzzy partition (columns summing to 1)."""
    u = np.asarray(u)
    if u.ndim != 2:
        raise ValueError("membership matrix must be 2-D (clusters x points)")
    if np.any(u < -atol) or np.any(u > 1 + atol):
        raise ValueError("memberships must lie in [0, 1]")
    colsum = u.sum(axis=0)
    if np.any(np.abs(colsum - 1.0) > atol):
        raise ValueError("membership columns must sum to 1")


def init_partition(n_points: int, params: GkbParams) -> np.ndarray:
    """Seeded random membership matrix, renormalized per column."""
    if n_points <= params.c:
        raise ValueError(
            f"need more points than clusters (N={n_points}, c={params.c})"
        )
    rng = np.random.default_rng(params.seed)
    u = rng.random((params.c, n_points))
    u /= u.sum(axis=0, keepdims=True)
    return u


def update_prototypes(data: np.ndarray, u: np.ndarray, m: float) -> np.ndarray:
    """Membership-weighted means, one prototype per cluster."""
    w = u ** m
    mass = w.sum(axis=1)
    if np.any(mass <= 0) or not np.all(np.isfinite(mass)):
        bad = int(np.argmin(mass))
        raise DegenerateClusterError(f"cluster {bad} has zero membership mass")
    return (w @ data) / mass[:, None]


def _condition(f: np.ndarray, gamma: float, beta: float) -> np.ndarray:
    """Blend toward scaled identity, then clip eigenvalues to condition <= beta."""
    n = f.shape[0]
    det = np.linalg.det(f)
    if det > 0 and gamma > 0:
        f = (1 - gamma) * f + gamma * det ** (1.0 / n) * np.eye(n)
    evals, evecs = np.linalg.eigh(f)
    lam_max = evals[-1]
    if lam_max <= 0:
        # Cluster collapsed to a single point; fall back to a tiny sphere.
        lam_max = 1e-12
    evals = np.maximum(evals, lam_max / beta)
    out = (evecs * evals) @ evecs.T
    return 0.5 * (out + out.T)


def update_covariances(
    data: np.ndarray, u: np.ndarray, prototypes: np.ndarray, params: GkbParams
) -> np.ndarray:
    """Weighted covariance per cluster, conditioned by gamma-blend and beta-clipping.

    Eigenvalue clipping is applied unconditionally so a singular raw
    covariance (cluster collapsed onto a hyperplane) stays invertible
    even with gamma=0.
    """
    w = u ** params.m
    mass = w.sum(axis=1)
    if np.any(mass <= 0):
        bad = int(np.argmin(mass))
        raise DegenerateClusterError(f"cluster {bad} has zero membership mass")
    c, n = prototypes.shape
    covs = np.empty((c, n, n))
    for i in range(c):
        diff = data - prototypes[i]
        f = (w[i][:, None] * diff).T @ diff / mass[i]
        covs[i] = _condition(f, params.gamma, params.beta)
    return covs


def norm_matrices(covariances: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Per-cluster norm-inducing matrices A_i = rho_i * det(F_i)^(1/n) * inv(F_i)."""
    c, n, _ = covariances.shape
    out = np.empty_like(covariances)
    for i in range(c):
        det = np.linalg.det(covariances[i])
        if det <= 0:
            raise ConditioningError(f"covariance {i} is not positive-definite")
        out[i] = rho[i] * det ** (1.0 / n) * np.linalg.inv(covariances[i])
    return out


def compute_distances(data: np.ndarray, model: ClusterModel) -> np.ndarray:
    """Squared Mahalanobis-type distances, shape (c, N)."""
    if not np.all(np.isfinite(data)):
        raise ValueError("data contains non-finite values")
    c = model.prototypes.shape[0]
    d2 = np.empty((c, data.shape[0]))
    for i in range(c):
        diff = data - model.prototypes[i]
        d2[i] = np.einsum("kj,jl,kl->k", diff, model.norm_matrices[i], diff)
    return np.maximum(d2, 0.0)


def update_memberships(
    d2: np.ndarray, m: float, paper_exponent: bool = False
) -> np.ndarray:
    """New partition from squared distances.

    Uses the standard c-means exponent 1/(m-1) on squared-distance
    ratios; ``paper_exponent=True`` switches to 2/(m-1). Points at zero
    distance to one or more prototypes get their membership split
    equally among those prototypes.
    """
    expo = (2.0 if paper_exponent else 1.0) / (m - 1.0)
    c, n_points = d2.shape
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = d2 ** -expo
        u = inv / inv.sum(axis=0, keepdims=True)
    zero_cols = np.any(d2 == 0.0, axis=0)
    if np.any(zero_cols):
        zeros = d2[:, zero_cols] == 0.0
        u[:, zero_cols] = zeros / zeros.sum(axis=0, keepdims=True)
    return u


def objective(u: np.ndarray, d2: np.ndarray, m: float) -> float:
    """Weighted within-cluster scatter J = sum_i sum_k u_ik^m * D2_ik."""
    return float(((u ** m) * d2).sum())


def fit_gkb(data: np.ndarray, params: GkbParams) -> FitResult:
    """Run the full GK-B alternating iteration until the membership change
    falls below epsilon (max-abs norm) or ``max_iters`` is hit."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("data must be a 2-D (points x features) array")
    if not np.all(np.isfinite(data)):
        raise ValueError("data contains non-finite values")
    n_points = data.shape[0]
    rho = params.rho_array()
    u = init_partition(n_points, params)

    model = None
    delta = np.inf
    history = []
    iterations = 0
    for iterations in range(1, params.max_iters + 1):
        prototypes = update_prototypes(data, u, params.m)
        covariances = update_covariances(data, u, prototypes, params)
        model = ClusterModel(prototypes, covariances, norm_matrices(covariances, rho))
        d2 = compute_distances(data, model)
        u_new = update_memberships(d2, params.m, params.paper_exponent)
        delta = float(np.max(np.abs(u_new - u)))
        history.append(delta)
        u = u_new
        if delta < params.epsilon:
            break

    return FitResult(
        model=model,
        membership=u,
        iterations=iterations,
        final_delta=delta,
        converged=delta < params.epsilon,
        history=tuple(history),
    )


class GKBClustering(ClusterMixin, BaseEstimator):
    """Scikit-learn style estimator wrapping the GK-B iteration.

    Parameters mirror :class:`GkbParams`; fitted state is exposed as
    ``prototypes_``, ``covariances_``, ``membership_``, ``labels_``,
    ``n_iter_``, ``converged_`` and ``final_delta_``.
    """

    def __init__(
        self,
        n_clusters: int = 2,
        m: float = 2.0,
        epsilon: float = 1e-3,
        gamma: float = 0.0,
        beta: float = 1e15,
        rho: tuple[float, ...] | None = None,
        max_iters: int = 300,
        seed: int = 0,
        paper_exponent: bool = False,
    ):
        self.n_clusters = n_clusters
        self.m = m
        self.epsilon = epsilon
        self.gamma = gamma
        self.beta = beta
        self.rho = rho
        self.max_iters = max_iters
        self.seed = seed
        self.paper_exponent = paper_exponent

    def _params(self) -> GkbParams:
        return GkbParams(
            c=self.n_clusters,
            m=self.m,
            epsilon=self.epsilon,
            gamma=self.gamma,
            beta=self.beta,
            rho=self.rho,
            max_iters=self.max_iters,
            seed=self.seed,
            paper_exponent=self.paper_exponent,
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        result = fit_gkb(X, self._params())
        self.result_ = result
        self.prototypes_ = result.model.prototypes
        self.covariances_ = result.model.covariances
        self.norm_matrices_ = result.model.norm_matrices
        self.membership_ = result.membership
        self.labels_ = np.argmax(result.membership, axis=0)
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.final_delta_ = result.final_delta
        return self

    def predict(self, X):
        check_is_fitted(self, "prototypes_")
        X = check_array(X, dtype=float)
        d2 = compute_distances(X, self.result_.model)
        return np.argmax(update_memberships(d2, self.m, self.paper_exponent), axis=0)

    def predict_membership(self, X):
        check_is_fitted(self, "prototypes_")
        X = check_array(X, dtype=float)
        d2 = compute_distances(X, self.result_.model)
        return update_memberships(d2, self.m, self.paper_exponent)
