"""Hot sampling loops, compiled with numba or run as pure Python.

Mode is chosen once at import time: numba is used when it is importable
unless the environment variable ``PETMINE_NUMBA`` is set to ``0`` (or
``false``/``off``/``no``), in which case the same function bodies run as
plain Python over numpy scalars.  Both modes execute the identical source
with no fast-math, so results are bit-identical; the fallback is simply
slow.  ``NUMBA_ENABLED`` reports which mode is active.

Randomness is counter-based rather than stateful.  The uniform variate for
token ``n`` of a document in sweep ``s`` is a pure function of
``(doc_seed, s, n)``: the three values are combined with distinct odd
constants and passed through splitmix64 finalizer rounds.  Because no
generator state is threaded between documents, the stream a document sees
does not depend on where it sits in the corpus, and a sweep can be split
across partitions without replaying draws.

The partitioned sweep follows the approximate-distributed scheme: each
partition samples its documents against a frozen snapshot of the
word-topic table plus its own local deltas, and the integer deltas are
summed afterwards.  Addition of the deltas commutes, so the result is
deterministic regardless of thread scheduling, but the sampled chain is a
(deterministic) approximation of the serial chain, not a reordering of it.
"""

from __future__ import annotations

import functools
import os

import numpy as np

_env = os.environ.get("PETMINE_NUMBA", "").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")

NUMBA_ENABLED = False
if _want_numba:
    try:
        import numba
    except ImportError:
        numba = None
    else:
        NUMBA_ENABLED = True

if NUMBA_ENABLED:
    def _jit(fn):
        return numba.njit(cache=True)(fn)

    def _jit_parallel(fn):
        return numba.njit(cache=True, parallel=True)(fn)

    _inline = _jit
    prange = numba.prange
else:
    def _jit(fn):
        # uint64 wraparound is intended; silence numpy's scalar overflow
        # warnings for the duration of the kernel call
        @functools.wraps(fn)
        def wrapper(*args):
            with np.errstate(over="ignore"):
                return fn(*args)

        return wrapper

    def _inline(fn):
        return fn

    _jit_parallel = _jit
    prange = range


_U11 = np.uint64(11)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_C_SWEEP = np.uint64(0xD1342543DE82EF95)
_C_TOKEN = np.uint64(0xC2B2AE3D27D4EB4F)
_INV53 = np.float64(1.0 / 9007199254740992.0)  # 2**-53


@_inline
def _mix64(x):
    x = x + _GAMMA
    x = x ^ (x >> _U30)
    x = x * _MIX1
    x = x ^ (x >> _U27)
    x = x * _MIX2
    x = x ^ (x >> _U31)
    return x


@_inline
def _draw(seed, sweep, idx):
    # uniform in [0, 1) from the (seed, sweep, idx) counter triple
    x = seed ^ (np.uint64(sweep) * _C_SWEEP)
    x = _mix64(x)
    x = x ^ (np.uint64(idx) * _C_TOKEN)
    x = _mix64(x)
    return np.float64(x >> _U11) * _INV53


@_jit
def draw_uniform(seed, sweep, idx):
    """The raw counter-based uniform draw, exposed for stream verification."""
    return _draw(seed, sweep, idx)


@_jit
def init_assignments(doc_ptr, token_word, doc_seed, n_topics, z, n_kw, n_k, n_dk):
    """Assign every token a topic from its sweep-0 draw and build counts."""
    n_docs = doc_ptr.shape[0] - 1
    for d in range(n_docs):
        s = doc_seed[d]
        start = doc_ptr[d]
        for j in range(start, doc_ptr[d + 1]):
            u = _draw(s, 0, j - start)
            k = int(u * n_topics)
            if k >= n_topics:
                k = n_topics - 1
            z[j] = k
            n_kw[k, token_word[j]] += 1
            n_k[k] += 1
            n_dk[d, k] += 1


@_jit
def gibbs_sweep(sweep, doc_ptr, token_word, doc_seed, z, n_kw, n_k, n_dk,
                alpha, beta, cum):
    """One collapsed Gibbs sweep over every token, in document order."""
    n_docs = doc_ptr.shape[0] - 1
    n_topics = n_k.shape[0]
    vb = n_kw.shape[1] * beta
    for d in range(n_docs):
        s = doc_seed[d]
        start = doc_ptr[d]
        for j in range(start, doc_ptr[d + 1]):
            w = token_word[j]
            k = z[j]
            n_kw[k, w] -= 1
            n_k[k] -= 1
            n_dk[d, k] -= 1
            total = 0.0
            for t in range(n_topics):
                total += (n_kw[t, w] + beta) / (n_k[t] + vb) * (n_dk[d, t] + alpha)
                cum[t] = total
            r = _draw(s, sweep, j - start) * total
            k = 0
            while k < n_topics - 1 and cum[k] <= r:
                k += 1
            z[j] = k
            n_kw[k, w] += 1
            n_k[k] += 1
            n_dk[d, k] += 1


@_jit_parallel
def gibbs_sweep_partitioned(sweep, doc_ptr, token_word, doc_seed, z,
                            n_kw, n_k, n_dk, alpha, beta,
                            part_ptr, delta_kw, delta_k):
    """One sweep with documents split into partitions sampled concurrently.

    Partition ``p`` covers documents ``part_ptr[p]:part_ptr[p+1]`` and sees
    the global word-topic counts as they stood at sweep start plus its own
    accumulated deltas.  Per-token draws are identical to the serial
    kernel's; only the visibility of other partitions' updates differs.
    """
    n_parts = part_ptr.shape[0] - 1
    n_topics = n_k.shape[0]
    n_words = n_kw.shape[1]
    vb = n_words * beta
    for p in prange(n_parts):
        dkw = delta_kw[p]
        dk = delta_k[p]
        for a in range(n_topics):
            dk[a] = 0
            for b in range(n_words):
                dkw[a, b] = 0
        cum = np.empty(n_topics, np.float64)
        for d in range(part_ptr[p], part_ptr[p + 1]):
            s = doc_seed[d]
            start = doc_ptr[d]
            for j in range(start, doc_ptr[d + 1]):
                w = token_word[j]
                k = z[j]
                dkw[k, w] -= 1
                dk[k] -= 1
                n_dk[d, k] -= 1
                total = 0.0
                for t in range(n_topics):
                    total += ((n_kw[t, w] + dkw[t, w] + beta)
                              / (n_k[t] + dk[t] + vb)
                              * (n_dk[d, t] + alpha))
                    cum[t] = total
                r = _draw(s, sweep, j - start) * total
                k = 0
                while k < n_topics - 1 and cum[k] <= r:
                    k += 1
                z[j] = k
                dkw[k, w] += 1
                dk[k] += 1
                n_dk[d, k] += 1
    for p in range(n_parts):
        for a in range(n_topics):
            n_k[a] += delta_k[p, a]
            for b in range(n_words):
                n_kw[a, b] += delta_kw[p, a, b]


@_jit
def log_likelihood(doc_ptr, token_word, n_kw, n_k, n_dk, alpha, beta):
    """Per-token predictive log-likelihood under current posterior means."""
    n_docs = doc_ptr.shape[0] - 1
    n_topics = n_k.shape[0]
    vb = n_kw.shape[1] * beta
    ka = n_topics * alpha
    theta = np.empty(n_topics, np.float64)
    ll = 0.0
    for d in range(n_docs):
        n_d = doc_ptr[d + 1] - doc_ptr[d]
        if n_d == 0:
            continue
        denom = n_d + ka
        for t in range(n_topics):
            theta[t] = (n_dk[d, t] + alpha) / denom
        for j in range(doc_ptr[d], doc_ptr[d + 1]):
            w = token_word[j]
            p = 0.0
            for t in range(n_topics):
                p += theta[t] * (n_kw[t, w] + beta) / (n_k[t] + vb)
            ll += np.log(p)
    return ll


@_jit
def infer_doc(words, seed, phi, alpha, n_sweeps, burn_in, sample_every, acc):
    """Sample topic weights for one document against a fixed topic-word table.

    ``acc`` accumulates the per-sample posterior-mean weight vectors;
    returns the number of samples taken so the caller can normalize.
    """
    n_topics = phi.shape[0]
    n = words.shape[0]
    counts = np.zeros(n_topics, np.int64)
    z = np.empty(n, np.int32)
    cum = np.empty(n_topics, np.float64)
    for j in range(n):
        u = _draw(seed, 0, j)
        k = int(u * n_topics)
        if k >= n_topics:
            k = n_topics - 1
        z[j] = k
        counts[k] += 1
    n_samples = 0
    denom = n + n_topics * alpha
    for sweep in range(1, n_sweeps + 1):
        for j in range(n):
            w = words[j]
            k = z[j]
            counts[k] -= 1
            total = 0.0
            for t in range(n_topics):
                total += phi[t, w] * (counts[t] + alpha)
                cum[t] = total
            r = _draw(seed, sweep, j) * total
            k = 0
            while k < n_topics - 1 and cum[k] <= r:
                k += 1
            z[j] = k
            counts[k] += 1
        if sweep > burn_in and (sweep - burn_in) % sample_every == 0:
            n_samples += 1
            for t in range(n_topics):
                acc[t] += (counts[t] + alpha) / denom
    return n_samples
