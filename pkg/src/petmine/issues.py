"""Issue-level analytics: prevalence, success probability, similarity networks.

Prevalence sums topic mass with two weightings: each petition counting 1,
and each petition counting its UK signature total.  Success probability
treats a petition as belonging to its arg-max topic and asks what fraction
of a topic's petitions cleared a signature threshold.  The two networks
compare issues by cosine similarity, one over theta columns (which
petitions share issues) and one over phi rows (which issues share words).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, ValidationError
from .lda import TopicModel

CO_OCCURRENCE = "co_occurrence"
WORD_DISTRIBUTION = "word_distribution"


def _check_alignment(model: TopicModel, corpus: Corpus) -> None:
    ids = tuple(p.id for p in corpus.petitions)
    if ids != model.doc_ids:
        raise ValidationError(
            "model and corpus are misaligned: document ids differ "
            f"({len(model.doc_ids)} model rows vs {len(ids)} petitions)"
        )


@dataclass
class IssuePrevalence:
    by_petitions: np.ndarray         # K floats, sums to n_petitions
    by_signatures: np.ndarray        # K floats, sums to total UK signatures
    rank_by_petitions: np.ndarray    # 1 = largest mass
    rank_by_signatures: np.ndarray


def _ranks(mass: np.ndarray) -> np.ndarray:
    order = np.argsort(-mass, kind="stable")
    ranks = np.empty(len(mass), dtype=np.int64)
    ranks[order] = np.arange(1, len(mass) + 1)
    return ranks


def prevalence(model: TopicModel, corpus: Corpus) -> IssuePrevalence:
    """Topic mass summed over petitions, unweighted and signature-weighted."""
    _check_alignment(model, corpus)
    sigs = np.array([p.uk_signatures() for p in corpus.petitions], dtype=np.float64)
    by_p = model.theta.sum(axis=0)
    by_s = sigs @ model.theta
    return IssuePrevalence(
        by_petitions=by_p, by_signatures=by_s,
        rank_by_petitions=_ranks(by_p), rank_by_signatures=_ranks(by_s),
    )


def success_probability(model: TopicModel, corpus: Corpus,
                        threshold: int = 10_000,
                        smoothed: bool = False) -> np.ndarray:
    """Per-topic fraction of assigned petitions reaching ``threshold``.

    Assignment is arg-max of theta; the threshold applies to the petition's
    platform-wide signature total.  Topics with no assigned petitions get
    NaN (undefined, not zero).  ``smoothed`` applies the Beta(1,1)
    posterior mean (hits+1)/(n+2) instead of the raw fraction.
    """
    _check_alignment(model, corpus)
    if threshold <= 0:
        raise ConfigError("threshold must be positive")
    assigned = model.theta.argmax(axis=1)
    hit = np.array(
        [p.total_signatures >= threshold for p in corpus.petitions], dtype=np.float64
    )
    out = np.full(model.k, np.nan)
    for t in range(model.k):
        mask = assigned == t
        n = int(mask.sum())
        if n == 0:
            continue
        hits = hit[mask].sum()
        out[t] = (hits + 1) / (n + 2) if smoothed else hits / n
    return out


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1]; zero vectors are an error."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass
class IssueNetwork:
    kind: str                        # CO_OCCURRENCE or WORD_DISTRIBUTION
    weights: np.ndarray              # (K, K) symmetric, unit diagonal
    node_sizes: np.ndarray           # signatures per issue (zeros if unknown)


def _cosine_gram(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    unit = rows / norms
    g = np.clip(unit @ unit.T, -1.0, 1.0)
    # exact symmetry and unit diagonal, unspoiled by rounding
    g = (g + g.T) / 2.0
    np.fill_diagonal(g, 1.0)
    return g


def co_occurrence_network(model: TopicModel,
                          node_sizes: np.ndarray | None = None) -> IssueNetwork:
    """Issue similarity as cosine between theta columns across petitions."""
    weights = _cosine_gram(model.theta.T.copy())
    sizes = np.zeros(model.k) if node_sizes is None else np.asarray(node_sizes, float)
    return IssueNetwork(kind=CO_OCCURRENCE, weights=weights, node_sizes=sizes)


def word_distribution_network(model: TopicModel,
                              node_sizes: np.ndarray | None = None) -> IssueNetwork:
    """Issue similarity as cosine between phi rows."""
    weights = _cosine_gram(model.phi)
    sizes = np.zeros(model.k) if node_sizes is None else np.asarray(node_sizes, float)
    return IssueNetwork(kind=WORD_DISTRIBUTION, weights=weights, node_sizes=sizes)


def prune_network(net: IssueNetwork, keep_fraction: float) -> IssueNetwork:
    """Zero out all but the strongest off-diagonal edges.

    Keeps the ``ceil(keep_fraction * K(K-1)/2)`` largest weights; edges
    tied with the cutoff value are all retained, so the result can hold a
    few more edges than the nominal count but never depends on sort order.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError("keep_fraction must be in (0, 1]")
    k = net.weights.shape[0]
    iu = np.triu_indices(k, k=1)
    edges = net.weights[iu]
    if edges.size == 0:
        return replace(net, weights=net.weights.copy())
    n_keep = int(np.ceil(keep_fraction * edges.size))
    cutoff = np.sort(edges)[::-1][n_keep - 1]
    pruned = np.where(net.weights >= cutoff, net.weights, 0.0)
    np.fill_diagonal(pruned, 1.0)
    return replace(net, weights=pruned)


def edge_list(net: IssueNetwork, include_zero: bool = False
              ) -> list[tuple[int, int, float]]:
    """Upper-triangle edges as (source, target, weight), source < target."""
    k = net.weights.shape[0]
    out = []
    for i in range(k):
        for j in range(i + 1, k):
            w = float(net.weights[i, j])
            if include_zero or w != 0.0:
                out.append((i, j, w))
    return out
