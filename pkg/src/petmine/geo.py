"""Constituency analytics: issue shares, Z-scores, scaling law, clustering.

Each constituency's signature mass is spread over issues through the theta
rows of the petitions it signed: S_ci = sum_d sig(d,c) * theta[d][i].  The
issue share is S_ci / S_c, standardized per issue into a Z-score using the
cross-constituency mean and sample (n-1) standard deviation.  Clustering
runs Partition Around Medoids over the Z-score vectors: greedy BUILD
seeding followed by best-improvement SWAP steps until no single
medoid/non-medoid exchange lowers the total distance-to-medoid cost, which
makes the result 1-swap-optimal by construction.

Constituencies with zero signatures have undefined shares and Z-scores;
they are excluded from the standardization and from clustering, and keep
``cluster=None``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .corpus import ConstituencyMeta, Corpus
from .errors import ConfigError, ConvergenceError, ValidationError
from .lda import TopicModel

log = logging.getLogger(__name__)

UNKNOWN_CODE = "UNKNOWN"

_METRICS = {"euclidean": "euclidean", "manhattan": "cityblock"}


@dataclass
class ConstituencyProfile:
    meta: ConstituencyMeta
    total_signatures: int
    per_elector: float
    issue_share: np.ndarray          # K floats, NaN when no signatures
    z_scores: np.ndarray             # K floats, NaN when no signatures
    cluster: int | None = None


def profile_constituencies(model: TopicModel, corpus: Corpus,
                           meta: list[ConstituencyMeta] | tuple[ConstituencyMeta, ...],
                           ) -> list[ConstituencyProfile]:
    """Issue shares and Z-scores for every constituency in ``meta``.

    Signature mass under codes missing from ``meta`` (including the
    UNKNOWN bucket) is skipped with a warning; it still counts toward
    corpus-level totals elsewhere, just not toward any profile here.
    """
    ids = tuple(p.id for p in corpus.petitions)
    if ids != model.doc_ids:
        raise ValidationError("model and corpus are misaligned")
    if not meta:
        raise ValidationError("no constituency metadata supplied")
    codes = [m.code for m in meta]
    index = {c: i for i, c in enumerate(codes)}
    k = model.k
    mass = np.zeros((len(codes), k), dtype=np.float64)
    totals = np.zeros(len(codes), dtype=np.int64)
    skipped: set[str] = set()
    for d, p in enumerate(corpus.petitions):
        for code, n in p.signatures_by_constituency.items():
            i = index.get(code)
            if i is None:
                if code != UNKNOWN_CODE and code not in skipped:
                    log.warning("constituency %s not in metadata; skipping", code)
                skipped.add(code)
                continue
            mass[i] += n * model.theta[d]
            totals[i] += n

    share = np.full_like(mass, np.nan)
    included = totals > 0
    share[included] = mass[included] / mass[included].sum(axis=1, keepdims=True)
    if included.sum() < 2:
        raise ValidationError("need at least 2 constituencies with signatures")
    mu = share[included].mean(axis=0)
    sigma = share[included].std(axis=0, ddof=1)
    z = np.full_like(share, np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        z[included] = (share[included] - mu) / sigma
    if np.any(sigma == 0):
        log.warning("issue(s) with zero share variance: Z-scores undefined there")

    return [
        ConstituencyProfile(
            meta=m,
            total_signatures=int(totals[i]),
            per_elector=float(totals[i] / m.electorate),
            issue_share=share[i],
            z_scores=z[i],
        )
        for i, m in enumerate(meta)
    ]


# ---------------------------------------------------------------------------
# Log-log scaling regression
# ---------------------------------------------------------------------------

@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    r_squared: float
    mode: str                        # "raw" or "binned"
    n: int


def scaling_fit(profiles: list[ConstituencyProfile], mode: str = "raw",
                n_bins: int = 10) -> ScalingFit:
    """OLS of ln(signatures) on ln(electorate).

    ``binned`` mode sorts constituencies by electorate, splits them into
    ``n_bins`` equal-count groups, and regresses on the logs of each
    group's arithmetic-mean electorate and signatures.
    """
    if mode not in ("raw", "binned"):
        raise ConfigError(f"unknown scaling mode {mode!r}")
    pts = [(p.meta.electorate, p.total_signatures) for p in profiles
           if p.total_signatures > 0]
    if len(pts) < 3:
        raise ValidationError("need at least 3 constituencies with signatures")
    pts.sort()
    e = np.array([a for a, _ in pts], dtype=np.float64)
    s = np.array([b for _, b in pts], dtype=np.float64)
    if mode == "binned":
        if len(pts) < n_bins:
            raise ValidationError(f"{len(pts)} points cannot fill {n_bins} bins")
        e = np.array([c.mean() for c in np.array_split(e, n_bins)])
        s = np.array([c.mean() for c in np.array_split(s, n_bins)])
    x = np.log(e)
    y = np.log(s)
    vx = x.var()
    # var of identical logs can land at ~1e-31 instead of 0, so test the
    # inputs, not the variance
    if np.all(e == e[0]) or vx == 0.0:
        raise ValidationError("electorates are all equal: regression undefined")
    slope = float(np.cov(x, y, bias=True)[0, 1] / vx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float((resid ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(exponent=slope, intercept=intercept,
                      r_squared=r2, mode=mode, n=len(x))


# ---------------------------------------------------------------------------
# Partition Around Medoids
# ---------------------------------------------------------------------------

@dataclass
class ClusterResult:
    k: int
    medoid_indices: tuple[int, ...]  # indices into the profiles list
    assignments: dict[str, int]      # constituency code -> cluster id
    total_cost: float
    metric: str


def _pam_build(dist: np.ndarray, k: int) -> list[int]:
    n = dist.shape[0]
    medoids = [int(np.argmin(dist.sum(axis=0)))]
    nearest = dist[:, medoids[0]].copy()
    while len(medoids) < k:
        gain = np.maximum(nearest[:, None] - dist, 0.0).sum(axis=0)
        gain[medoids] = -1.0
        j = int(np.argmax(gain))    # ties resolve to the lowest index
        medoids.append(j)
        np.minimum(nearest, dist[:, j], out=nearest)
    return sorted(medoids)


def _pam_swap(dist: np.ndarray, medoids: list[int],
              max_iter: int = 500) -> tuple[list[int], float]:
    n = dist.shape[0]
    for _ in range(max_iter):
        dm = dist[:, medoids]
        order = np.argsort(dm, axis=1, kind="stable")
        rows = np.arange(n)
        near_pos = order[:, 0]
        d1 = dm[rows, near_pos]
        if len(medoids) > 1:
            d2 = dm[rows, order[:, 1]]
        else:
            d2 = np.full(n, np.inf)
        cost = float(d1.sum())
        in_medoids = np.zeros(n, dtype=bool)
        in_medoids[medoids] = True
        candidates = np.nonzero(~in_medoids)[0]
        best_delta = 0.0
        best = None
        # the full scan doubles as the 1-swap-optimality check: the loop
        # only ends on a pass that found no improving swap
        for i in range(len(medoids)):
            base = np.where(near_pos == i, d2, d1)
            for h in candidates:
                delta = float(np.minimum(base, dist[:, h]).sum()) - cost
                if delta < best_delta - 1e-12:
                    best_delta = delta
                    best = (i, int(h))
        if best is None:
            return medoids, cost
        medoids[best[0]] = best[1]
        medoids = sorted(medoids)
    raise ConvergenceError(f"PAM did not settle within {max_iter} swap passes")


def _pam_exact(dist: np.ndarray, k: int) -> tuple[list[int], float]:
    # exhaustive minimization of the medoid objective; first-found wins
    # ties, and combinations() emits sets in lexicographic order
    best_cost = np.inf
    best: tuple[int, ...] | None = None
    for combo in itertools.combinations(range(dist.shape[0]), k):
        cost = float(dist[:, combo].min(axis=1).sum())
        if cost < best_cost - 1e-12:
            best_cost = cost
            best = combo
    assert best is not None
    return list(best), best_cost


def _solve_medoids(dist: np.ndarray, k: int,
                   exact_budget: int) -> tuple[list[int], float]:
    if math.comb(dist.shape[0], k) <= exact_budget:
        return _pam_exact(dist, k)
    return _pam_swap(dist, _pam_build(dist, k))


def pam_cluster(profiles: list[ConstituencyProfile], k: int, seed: int = 0,
                metric: str = "euclidean",
                exact_budget: int = 20_000) -> ClusterResult:
    """Cluster constituencies by k-medoids over their Z-score vectors.

    Fills in ``profile.cluster`` for the clustered constituencies and
    returns the result.  When the number of candidate medoid subsets is
    at most ``exact_budget`` the global optimum is found by enumeration;
    larger instances fall back to BUILD plus best-improvement SWAP.
    Fully deterministic given the input order: cost ties break toward
    the lowest index, so ``seed`` has no effect on the outcome and is
    accepted only for interface stability.
    """
    if metric not in _METRICS:
        raise ConfigError(f"metric must be one of {sorted(_METRICS)}")
    included = [i for i, p in enumerate(profiles) if np.all(np.isfinite(p.z_scores))]
    n = len(included)
    if not 0 < k < n:
        raise ConfigError(f"k must satisfy 0 < k < {n}, got {k}")
    z = np.stack([profiles[i].z_scores for i in included])
    dist = cdist(z, z, metric=_METRICS[metric])
    medoids, cost = _solve_medoids(dist, k, exact_budget)
    labels = np.argmin(dist[:, medoids], axis=1)
    assignments: dict[str, int] = {}
    for local, i in enumerate(included):
        profiles[i].cluster = int(labels[local])
        assignments[profiles[i].meta.code] = int(labels[local])
    return ClusterResult(
        k=k,
        medoid_indices=tuple(included[m] for m in medoids),
        assignments=assignments,
        total_cost=cost,
        metric=metric,
    )


def cluster_issue_profile(result: ClusterResult,
                          profiles: list[ConstituencyProfile]) -> np.ndarray:
    """Mean issue share per cluster, a (k, K) matrix."""
    by_code = {p.meta.code: p for p in profiles}
    groups: dict[int, list[np.ndarray]] = {c: [] for c in range(result.k)}
    for code, cl in result.assignments.items():
        groups[cl].append(by_code[code].issue_share)
    n_issues = len(next(iter(by_code.values())).issue_share)
    out = np.full((result.k, n_issues), np.nan)
    for cl, shares in groups.items():
        if shares:
            out[cl] = np.mean(shares, axis=0)
    return out


def silhouette_score(dist: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette over all points (singleton clusters score 0)."""
    n = dist.shape[0]
    scores = np.zeros(n)
    clusters = np.unique(labels)
    for i in range(n):
        own = labels[i]
        same = (labels == own) & (np.arange(n) != i)
        if not same.any():
            continue
        a = dist[i, same].mean()
        b = min(
            dist[i, labels == other].mean()
            for other in clusters if other != own
        )
        denom = max(a, b)
        if denom > 0:
            scores[i] = (b - a) / denom
    return float(scores.mean())


def silhouette_sweep(profiles: list[ConstituencyProfile],
                     k_values=range(5, 11),
                     metric: str = "euclidean",
                     exact_budget: int = 20_000) -> dict[int, float]:
    """Mean silhouette of the PAM clustering at each candidate k."""
    if metric not in _METRICS:
        raise ConfigError(f"metric must be one of {sorted(_METRICS)}")
    included = [i for i, p in enumerate(profiles) if np.all(np.isfinite(p.z_scores))]
    z = np.stack([profiles[i].z_scores for i in included])
    dist = cdist(z, z, metric=_METRICS[metric])
    out = {}
    for k in k_values:
        if not 0 < k < len(included):
            continue
        medoids, _ = _solve_medoids(dist, k, exact_budget)
        labels = np.argmin(dist[:, medoids], axis=1)
        out[int(k)] = silhouette_score(dist, labels)
    return out
