"""Topic model fitting by collapsed Gibbs sampling, plus validation helpers.

``fit`` runs the collapsed sampler over token-level topic assignments and
reports phi (topic-word) and theta (document-topic) as posterior means
over retained post-burn-in states, with the Dirichlet priors folded in so
every entry is strictly positive.

Determinism contract: per-document random streams are keyed by petition id
(not row position), and every draw is a pure function of
``(document seed, sweep, within-document token index)``.  Two fits with
the same inputs, config and partition count are bit-identical, and
permuting document order leaves each document's stream unchanged.

Validation mirrors two human checks: word-intrusion instances (top-5 words
plus a low-probability intruder, shuffled) and an audit sample of
documents assigned to a topic with high confidence.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ConfigError, EmptyCorpusError, NumericalError
from .util import config_digest, derive_seed, load_arrays, save_arrays

log = logging.getLogger(__name__)

_LL_EVERY = 10


@dataclass(frozen=True)
class LdaConfig:
    k: int
    alpha: float = 0.1
    beta: float = 0.1
    iterations: int = 1000
    burn_in: int = 200
    sample_every: int = 10
    seed: int = 0

    def __post_init__(self):
        # k=1 is allowed: the degenerate single-topic model is well defined
        # and useful as a baseline
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("alpha and beta must be positive")
        if self.iterations < 1:
            raise ConfigError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be positive")

    def retained_sweeps(self) -> list[int]:
        return [
            s for s in range(self.burn_in + 1, self.iterations + 1)
            if (s - self.burn_in) % self.sample_every == 0
        ]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TopicModel:
    config: LdaConfig
    phi: np.ndarray                  # (K, V) float64, rows sum to 1
    theta: np.ndarray                # (D, K) float64, rows sum to 1
    log_likelihood_trace: list[float]
    trace_sweeps: list[int]
    terms: tuple[str, ...]
    doc_ids: tuple[str, ...]

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    @property
    def vocab_hash(self) -> str:
        return config_digest(list(self.terms))


def _expand_tokens(counts: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Unroll a doc-term count matrix into per-token word indices.

    Within each document, tokens appear in vocabulary order, so the
    unrolling does not depend on how the counts were assembled.
    """
    csr = counts.tocsr()
    csr.sum_duplicates()
    csr.sort_indices()
    doc_ptr = np.zeros(csr.shape[0] + 1, dtype=np.int64)
    lengths = np.asarray(csr.sum(axis=1)).ravel().astype(np.int64)
    np.cumsum(lengths, out=doc_ptr[1:])
    token_word = np.repeat(
        csr.indices.astype(np.int64), csr.data.astype(np.int64)
    ).astype(np.int32)
    return doc_ptr, token_word


def _doc_seeds(stage_seed: int, doc_ids) -> np.ndarray:
    return np.array(
        [derive_seed(stage_seed, f"doc:{d}") for d in doc_ids], dtype=np.uint64
    )


def fit(dtm, config: LdaConfig, n_partitions: int = 1) -> TopicModel:
    """Fit a topic model to a document-term matrix.

    ``n_partitions`` > 1 switches to the partitioned sampler: documents are
    split into that many contiguous blocks sampled against a per-sweep
    snapshot of the word-topic counts.  The result is still deterministic
    for a fixed partition count but follows a different (approximate)
    chain than the serial sampler.
    """
    if dtm.counts.nnz == 0:
        raise EmptyCorpusError("document-term matrix has no nonzero entries")
    if n_partitions < 1:
        raise ConfigError("n_partitions must be at least 1")
    retained = config.retained_sweeps()
    if not retained:
        raise ConfigError(
            "no sweeps would be retained: raise iterations or lower "
            "burn_in/sample_every"
        )

    n_docs, n_terms = dtm.counts.shape
    k = config.k
    doc_ptr, token_word = _expand_tokens(dtm.counts)
    doc_seed = _doc_seeds(derive_seed(config.seed, "lda.fit"), dtm.doc_ids)

    z = np.empty(token_word.shape[0], dtype=np.int32)
    n_kw = np.zeros((k, n_terms), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    cum = np.empty(k, dtype=np.float64)
    kernels.init_assignments(doc_ptr, token_word, doc_seed, k, z, n_kw, n_k, n_dk)

    if n_partitions > 1:
        bounds = np.linspace(0, n_docs, n_partitions + 1)
        part_ptr = np.round(bounds).astype(np.int64)
        delta_kw = np.zeros((n_partitions, k, n_terms), dtype=np.int64)
        delta_k = np.zeros((n_partitions, k), dtype=np.int64)

    alpha, beta = float(config.alpha), float(config.beta)
    doc_len = (doc_ptr[1:] - doc_ptr[:-1]).astype(np.float64)
    phi_acc = np.zeros((k, n_terms), dtype=np.float64)
    theta_acc = np.zeros((n_docs, k), dtype=np.float64)
    n_samples = 0
    trace: list[float] = []
    trace_sweeps: list[int] = []

    for sweep in range(1, config.iterations + 1):
        if n_partitions > 1:
            kernels.gibbs_sweep_partitioned(
                sweep, doc_ptr, token_word, doc_seed, z, n_kw, n_k, n_dk,
                alpha, beta, part_ptr, delta_kw, delta_k,
            )
        else:
            kernels.gibbs_sweep(
                sweep, doc_ptr, token_word, doc_seed, z, n_kw, n_k, n_dk,
                alpha, beta, cum,
            )
        if sweep == 1 or sweep % _LL_EVERY == 0:
            ll = float(kernels.log_likelihood(
                doc_ptr, token_word, n_kw, n_k, n_dk, alpha, beta,
            ))
            if not np.isfinite(ll):
                raise NumericalError(f"log-likelihood became {ll} at sweep {sweep}")
            trace.append(ll)
            trace_sweeps.append(sweep)
        if sweep > config.burn_in and (sweep - config.burn_in) % config.sample_every == 0:
            phi_acc += (n_kw + beta) / (n_k + n_terms * beta)[:, None]
            theta_acc += (n_dk + alpha) / (doc_len + k * alpha)[:, None]
            n_samples += 1

    phi = phi_acc / n_samples
    theta = theta_acc / n_samples
    log.info(
        "fitted k=%d on %d docs / %d tokens: %d retained samples, final ll %.1f",
        k, n_docs, token_word.shape[0], n_samples, trace[-1],
    )
    return TopicModel(
        config=config, phi=phi, theta=theta,
        log_likelihood_trace=trace, trace_sweeps=trace_sweeps,
        terms=tuple(dtm.vocabulary.terms), doc_ids=tuple(dtm.doc_ids),
    )


def top_words(model: TopicModel, topic: int, n: int) -> list[str]:
    """The ``n`` highest-probability terms of a topic, ties lexicographic."""
    if not 0 <= topic < model.k:
        raise ConfigError(f"topic {topic} out of range [0, {model.k})")
    if n < 1:
        raise ConfigError("n must be positive")
    row = model.phi[topic]
    order = sorted(range(len(model.terms)), key=lambda i: (-row[i], model.terms[i]))
    return [model.terms[i] for i in order[:n]]


def infer_theta(model: TopicModel, doc_counts, seed: int | None = None,
                sweeps: int = 200, burn_in: int = 100,
                sample_every: int = 10) -> np.ndarray:
    """Topic weights for one new document, phi held fixed.

    ``doc_counts`` is a length-V count vector (dense or sparse).  An
    all-zero vector carries no evidence: a uniform vector is returned and
    a UserWarning is emitted.
    """
    vec = np.asarray(
        doc_counts.todense() if sp.issparse(doc_counts) else doc_counts
    ).ravel()
    if vec.shape[0] != model.phi.shape[1]:
        raise ConfigError(
            f"doc vector has {vec.shape[0]} terms, model has {model.phi.shape[1]}"
        )
    if vec.sum() == 0:
        warnings.warn("empty document: returning uniform topic weights")
        return np.full(model.k, 1.0 / model.k)
    if seed is None:
        seed = derive_seed(model.config.seed, "lda.infer")
    words = np.repeat(np.arange(vec.shape[0]), vec.astype(np.int64)).astype(np.int32)
    acc = np.zeros(model.k, dtype=np.float64)
    n = kernels.infer_doc(
        words, np.uint64(seed), np.ascontiguousarray(model.phi),
        float(model.config.alpha), sweeps, burn_in, sample_every, acc,
    )
    if n == 0:
        raise ConfigError("no samples retained: raise sweeps or lower burn_in")
    return acc / n


def held_out_log_likelihood(model: TopicModel, counts, seed: int | None = None
                            ) -> tuple[float, float]:
    """(total, per-token) predictive log-likelihood of held-out rows.

    Topic weights for each row are inferred with phi fixed; rows with no
    tokens contribute nothing.
    """
    csr = counts.tocsr() if sp.issparse(counts) else sp.csr_matrix(counts)
    if seed is None:
        seed = derive_seed(model.config.seed, "lda.heldout")
    total = 0.0
    n_tokens = 0
    for d in range(csr.shape[0]):
        row = csr.getrow(d)
        if row.nnz == 0:
            continue
        theta = infer_theta(model, row, seed=derive_seed(seed, f"row:{d}"))
        word_p = theta @ model.phi[:, row.indices]
        total += float(np.dot(row.data, np.log(word_p)))
        n_tokens += int(row.data.sum())
    if n_tokens == 0:
        raise EmptyCorpusError("held-out rows contain no tokens")
    return total, total / n_tokens


# ---------------------------------------------------------------------------
# Word intrusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntrusionInstance:
    topic_index: int
    shown_words: tuple[str, ...]     # 6 words in shuffled order
    intruder_position: int          # index into shown_words


def make_intrusion_instances(model: TopicModel, seed: int) -> list[IntrusionInstance]:
    """One intrusion instance per topic.

    The intruder is drawn uniformly from terms whose probability in the
    topic is at or below the topic's median (excluding the top-5 words
    themselves, so the six shown words are always distinct).
    """
    if len(model.terms) < 7:
        raise ConfigError("need a vocabulary of at least 7 terms")
    instances = []
    for t in range(model.k):
        top5 = top_words(model, t, 5)
        row = model.phi[t]
        median = float(np.median(row))
        pool = [
            term for i, term in enumerate(model.terms)
            if row[i] <= median and term not in top5
        ]
        if not pool:
            raise NumericalError(f"topic {t}: no low-probability pool")
        rng = np.random.Generator(
            np.random.PCG64(derive_seed(seed, f"intrusion:{t}"))
        )
        intruder = pool[int(rng.integers(len(pool)))]
        shown = top5 + [intruder]
        order = rng.permutation(6)
        shuffled = tuple(shown[i] for i in order)
        instances.append(IntrusionInstance(
            topic_index=t,
            shown_words=shuffled,
            intruder_position=int(np.nonzero(order == 5)[0][0]),
        ))
    return instances


@dataclass
class IntrusionScore:
    per_topic: dict[int, float]
    overall: float
    flagged: tuple[int, ...]         # topics scoring below the 0.75 bar

    THRESHOLD = 0.75


def score_intrusion(instances: list[IntrusionInstance],
                    answers: list[int]) -> IntrusionScore:
    """Accuracy of intruder picks, per topic and overall.

    ``answers[i]`` is the position a subject chose for ``instances[i]``;
    repeat an instance once per subject to aggregate several raters.
    """
    if len(instances) != len(answers):
        raise ConfigError(
            f"{len(answers)} answers for {len(instances)} instances"
        )
    if not instances:
        raise ConfigError("no instances to score")
    hits: dict[int, int] = {}
    counts: dict[int, int] = {}
    correct = 0
    for inst, ans in zip(instances, answers):
        t = inst.topic_index
        counts[t] = counts.get(t, 0) + 1
        ok = int(ans == inst.intruder_position)
        hits[t] = hits.get(t, 0) + ok
        correct += ok
    per_topic = {t: hits[t] / counts[t] for t in sorted(counts)}
    flagged = tuple(t for t, acc in per_topic.items() if acc < IntrusionScore.THRESHOLD)
    return IntrusionScore(
        per_topic=per_topic,
        overall=correct / len(answers),
        flagged=flagged,
    )


# ---------------------------------------------------------------------------
# Assignment audit
# ---------------------------------------------------------------------------

def audit_assignments(model: TopicModel, threshold: float,
                      n_per_topic: int = 10, seed: int | None = None
                      ) -> list[tuple[str, int, float]]:
    """Seeded sample of documents assigned to each topic above ``threshold``.

    Returns ``(petition id, topic, max theta)`` rows sorted by (topic, id),
    at most ``n_per_topic`` per topic.  Topics with fewer qualifying
    documents contribute what they have; a warning notes the shortfall.
    """
    if not 0 < threshold < 1:
        raise ConfigError("threshold must lie strictly between 0 and 1")
    if seed is None:
        seed = derive_seed(model.config.seed, "lda.audit")
    assigned = model.theta.argmax(axis=1)
    peak = model.theta.max(axis=1)
    out = []
    for t in range(model.k):
        candidates = np.nonzero((assigned == t) & (peak > threshold))[0]
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, f"audit:{t}")))
        take = rng.permutation(len(candidates))[:n_per_topic]
        if len(candidates) < n_per_topic:
            log.warning(
                "topic %d: only %d documents exceed theta %.2f (wanted %d)",
                t, len(candidates), threshold, n_per_topic,
            )
        for i in sorted(candidates[take]):
            out.append((model.doc_ids[i], t, float(peak[i])))
    return sorted(out, key=lambda r: (r[1], r[0]))


# ---------------------------------------------------------------------------
# Model snapshot
# ---------------------------------------------------------------------------

_MODEL_FORMAT = "petmine-lda"
_MODEL_VERSION = 1


def save_model(model: TopicModel, path: str) -> None:
    save_arrays(
        path,
        {
            "phi": model.phi,
            "theta": model.theta,
            "trace": np.asarray(model.log_likelihood_trace, dtype=np.float64),
            "trace_sweeps": np.asarray(model.trace_sweeps, dtype=np.int64),
        },
        meta={
            "format": _MODEL_FORMAT,
            "version": _MODEL_VERSION,
            "config": model.config.to_dict(),
            "vocab_hash": model.vocab_hash,
            "terms": list(model.terms),
            "doc_ids": list(model.doc_ids),
        },
    )


def load_model(path: str) -> TopicModel:
    arrays, meta = load_arrays(path)
    if meta is None or meta.get("format") != _MODEL_FORMAT:
        raise ConfigError(f"{path} is not a model snapshot")
    model = TopicModel(
        config=LdaConfig(**meta["config"]),
        phi=arrays["phi"], theta=arrays["theta"],
        log_likelihood_trace=[float(x) for x in arrays["trace"]],
        trace_sweeps=[int(x) for x in arrays["trace_sweeps"]],
        terms=tuple(meta["terms"]), doc_ids=tuple(meta["doc_ids"]),
    )
    if model.vocab_hash != meta["vocab_hash"]:
        raise ConfigError(f"{path}: vocabulary hash mismatch")
    return model
