"""Downstream statistics on fingerprints: kernel PCA embedding, Gaussian
mixture EM clustering with purity, two-sample Kolmogorov-Smirnov tests,
rewiring baselines, and temporal anomaly timelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .distance import TuningParams, tnbsd
from .generators import cm_null_ensemble, rewire
from .graph import Graph
from .spectral import Fingerprint, top_eigenvalues


class NumericalError(RuntimeError):
    """A numerical routine degenerated beyond recovery."""


@dataclass(frozen=True)
class LabeledPointSet:
    points: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(pts):
                raise ValueError("labels length must match point count")
            object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    rejected: bool


@dataclass(frozen=True)
class TimelineReport:
    distances: tuple[float, ...]
    mean: float
    std: float
    anomalies: tuple[int, ...]


@dataclass(frozen=True)
class GmmResult:
    assignments: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    weights: np.ndarray
    log_likelihood: float
    ll_history: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class RewiringProfile:
    fractions: tuple[float, ...]
    distances: tuple[float, ...]
    baseline_mean: float
    baseline_std: float
    baseline_distances: tuple[float, ...]


def kpca_cosine(vectors, dims: int) -> LabeledPointSet:
    """Kernel PCA with the cosine-similarity kernel.

    Double-centers the kernel matrix and projects onto the top ``dims``
    kernel eigenvectors (each scaled by the inverse square root of its
    eigenvalue).  The per-component sign ambiguity is fixed by forcing
    the largest-magnitude coordinate positive.
    """
    x = np.asarray(list(vectors), dtype=float)
    if x.ndim != 2 or len(x) < dims + 1:
        raise ValueError(f"need at least {dims + 1} vectors")
    norms = np.linalg.norm(x, axis=1)
    zero = np.nonzero(norms == 0)[0]
    if len(zero):
        raise ValueError(f"cosine similarity undefined for all-zero vector at index {zero[0]}")
    unit = x / norms[:, None]
    kernel = unit @ unit.T
    n = len(x)
    row = kernel.mean(axis=1, keepdims=True)
    col = kernel.mean(axis=0, keepdims=True)
    centered = kernel - row - col + kernel.mean()
    evals, evecs = np.linalg.eigh(centered)
    order = np.argsort(evals)[::-1][:dims]
    coords = np.empty((n, dims))
    for out, i in enumerate(order):
        lam = max(evals[i], 1e-12)
        comp = centered @ evecs[:, i] / math.sqrt(lam)
        if comp[np.argmax(np.abs(comp))] < 0:
            comp = -comp
        coords[:, out] = comp
    return LabeledPointSet(points=coords)


def gmm_em(pts: LabeledPointSet, k: int, restarts: int = 10, seed: int = 0,
           max_iter: int = 500, tol: float = 1e-8, reg: float = 1e-6) -> GmmResult:
    """Full-covariance Gaussian mixture fit by EM, best of ``restarts``.

    Means are initialized by distance-spreading seeding (each new mean
    drawn with probability proportional to squared distance from the
    chosen ones).  Covariances get ``reg`` added on the diagonal each
    M-step.  The log-likelihood is checked to be non-decreasing every
    iteration; a dip within the perturbation the ridge itself can cause
    means the fit has hit the regularization floor, so the previous
    parameters are kept and the restart stops.  Restarts whose
    covariance collapses to singular are discarded.
    """
    x = pts.points
    n, d = x.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"fewer points than components ({n} < {k})")
    rng = np.random.default_rng(seed)
    best: GmmResult | None = None
    failure: NumericalError | None = None
    for _ in range(max(1, restarts)):
        try:
            result = _em_once(x, k, rng, max_iter, tol, reg)
        except _DegenerateComponent as exc:
            failure = NumericalError(str(exc))
            continue
        if best is None or result.log_likelihood > best.log_likelihood:
            best = result
    if best is None:
        raise failure or NumericalError("no EM restart converged")
    return best


def _spread_means(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    means = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min(
            [np.sum((x - mu) ** 2, axis=1) for mu in means], axis=0)
        total = d2.sum()
        if total <= 0:
            means.append(x[rng.integers(len(x))])
            continue
        means.append(x[rng.choice(len(x), p=d2 / total)])
    return np.array(means)


class _DegenerateComponent(Exception):
    """A mixture component's covariance collapsed to singular."""


def _log_gauss(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    d = x.shape[1]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise _DegenerateComponent("covariance matrix is singular") from exc
    diag = np.diag(chol)
    # near-singular covariances make the solves too inaccurate to trust
    if diag.min() <= 1e-7 * diag.max():
        raise _DegenerateComponent("covariance matrix is ill-conditioned")
    diff = x - mean
    sol = np.linalg.solve(chol, diff.T)
    maha = np.sum(sol * sol, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (maha + logdet + d * math.log(2.0 * math.pi))


def _em_once(x, k, rng, max_iter, tol, reg) -> GmmResult:
    n, d = x.shape
    means = _spread_means(x, k, rng)
    base_cov = np.cov(x, rowvar=False).reshape(d, d)
    covs = np.array([base_cov + reg * np.eye(d) for _ in range(k)])
    weights = np.full(k, 1.0 / k)
    prev_ll = -np.inf
    history: list[float] = []
    resp = np.zeros((n, k))
    prev_state = None
    # the diagonal ridge makes the M-step slightly sub-optimal, so the
    # log-likelihood may dip by an amount on the order of the ridge itself;
    # anything beyond that is a genuine numerical failure
    ridge_slack = 100.0 * reg * n * d
    for _ in range(max_iter):
        logp = np.array([
            np.log(max(weights[j], 1e-300)) + _log_gauss(x, means[j], covs[j])
            for j in range(k)]).T
        lse = scipy.special.logsumexp(logp, axis=1)
        ll = float(lse.sum())
        if ll < prev_ll - 1e-9 * max(1.0, abs(prev_ll)):
            if ll < prev_ll - ridge_slack:
                raise NumericalError(
                    f"EM log-likelihood decreased: {prev_ll} -> {ll}")
            # hit the regularization floor: keep the previous parameters
            weights, means, covs, resp = prev_state
            break
        history.append(ll)
        resp = np.exp(logp - lse[:, None])
        if ll - prev_ll < tol and np.isfinite(prev_ll):
            break
        prev_ll = ll
        prev_state = (weights, means, covs.copy(), resp)
        nk = resp.sum(axis=0) + 1e-300
        weights = nk / n
        means = (resp.T @ x) / nk[:, None]
        for j in range(k):
            diff = x - means[j]
            covs[j] = (resp[:, j][:, None] * diff).T @ diff / nk[j] + reg * np.eye(d)
    assignments = resp.argmax(axis=1)
    return GmmResult(assignments=assignments, means=means, covariances=covs,
                     weights=weights, log_likelihood=history[-1],
                     ll_history=tuple(history))


def purity(assignments, labels) -> float:
    """Fraction of points lying in their cluster's majority class."""
    assignments = list(assignments)
    labels = list(labels)
    if len(assignments) != len(labels):
        raise ValueError("assignments and labels must have equal length")
    clusters: dict = {}
    for a, l in zip(assignments, labels):
        clusters.setdefault(a, {}).setdefault(l, 0)
        clusters[a][l] += 1
    return sum(max(c.values()) for c in clusters.values()) / len(labels)


def ks_two_sample(x, y, level: float = 0.05) -> KSResult:
    """Two-sample KS test: D = sup |F_x - F_y| with the asymptotic
    Kolmogorov p-value at effective size n_x n_y / (n_x + n_y)."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, pooled, side="right") / len(x)
    cdf_y = np.searchsorted(y, pooled, side="right") / len(y)
    stat = float(np.abs(cdf_x - cdf_y).max())
    en = len(x) * len(y) / (len(x) + len(y))
    p = float(min(1.0, max(0.0, scipy.special.kolmogorov(math.sqrt(en) * stat))))
    return KSResult(statistic=stat, p_value=p, rejected=p < level)


def fingerprint_ks_test(fp1: Fingerprint, fp2: Fingerprint, alpha: float = 0.1,
                        bonferroni_m: int = 14) -> tuple[KSResult, KSResult]:
    """KS tests on the real parts and imaginary parts of two fingerprints,
    each at the Bonferroni-corrected level alpha / bonferroni_m."""
    if fp1.r == 0 or fp2.r == 0:
        raise ValueError("fingerprints must be non-empty")
    level = alpha / bonferroni_m
    return (ks_two_sample(fp1.eigs.real, fp2.eigs.real, level=level),
            ks_two_sample(fp1.eigs.imag, fp2.eigs.imag, level=level))


def rewiring_profile(g: Graph, fractions, ensemble_count: int, r: int,
                     t: TuningParams = TuningParams(), seed: int = 0,
                     **eig_kwargs) -> RewiringProfile:
    """Distance from g to rewired copies at each fraction, plus the
    configuration-model null baseline (mean, std over the ensemble)."""
    fractions = tuple(float(f) for f in fractions)
    if any(f2 < f1 for f1, f2 in zip(fractions, fractions[1:])):
        raise ValueError("fractions must be sorted ascending")
    rng = np.random.default_rng(seed)
    fp0 = top_eigenvalues(g, r, **eig_kwargs)
    dists = []
    for f in fractions:
        h = rewire(g, f, seed=int(rng.integers(2**63)))
        dists.append(tnbsd(fp0, top_eigenvalues(h, r, **eig_kwargs), t))
    members = cm_null_ensemble(g, ensemble_count, seed=int(rng.integers(2**63)))
    base = [tnbsd(fp0, top_eigenvalues(h, r, **eig_kwargs), t) for h in members]
    return RewiringProfile(
        fractions=fractions, distances=tuple(dists),
        baseline_mean=float(np.mean(base)), baseline_std=float(np.std(base)),
        baseline_distances=tuple(base))


def timeline(fingerprints, mode: str = "consecutive", base: int = 0,
             t: TuningParams = TuningParams()) -> TimelineReport:
    """Distance timeline over an ordered fingerprint sequence.

    consecutive: d(fp_t, fp_{t-1}) for t >= 1.  fixed: d(fp_t, fp_base)
    for all t != base.  Anomalies are the indices (into the emitted
    distance sequence) strictly above mean + std.
    """
    fps = list(fingerprints)
    if len(fps) < 2:
        raise ValueError("timeline needs at least 2 fingerprints")
    if mode == "consecutive":
        dists = [tnbsd(fps[i], fps[i - 1], t) for i in range(1, len(fps))]
    elif mode == "fixed":
        if not 0 <= base < len(fps):
            raise ValueError(f"baseline index {base} out of range")
        dists = [tnbsd(fps[i], fps[base], t) for i in range(len(fps)) if i != base]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    arr = np.array(dists)
    mean = float(arr.mean())
    std = float(arr.std())
    anomalies = tuple(int(i) for i in np.nonzero(arr > mean + std)[0])
    return TimelineReport(distances=tuple(float(d) for d in dists),
                          mean=mean, std=std, anomalies=anomalies)
