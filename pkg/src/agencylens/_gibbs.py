"""Hot loop of the collapsed Gibbs sampler.

One function, one sweep over all tokens.  Randomness comes in as a
pre-drawn uniform array so the sweep is bit-identical whether or not the
numba JIT is available.
"""

from __future__ import annotations


try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def gibbs_sweep(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, eta, uniforms, weights):
    """Resample every token's topic once, updating counts in place.

    Full-conditional weight for topic k, with the current token's own count
    removed first:

        (n_dk + alpha) * (n_kw + eta) / (n_k + V * eta)
    """
    n_tokens = z.shape[0]
    n_topics = n_kw.shape[0]
    v_eta = n_kw.shape[1] * eta
    for i in range(n_tokens):
        d = doc_of[i]
        w = word_of[i]
        k_old = z[i]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1

        total = 0.0
        for k in range(n_topics):
            weight = (n_dk[d, k] + alpha) * (n_kw[k, w] + eta) / (n_k[k] + v_eta)
            weights[k] = weight
            total += weight

        target = uniforms[i] * total
        k_new = n_topics - 1
        acc = 0.0
        for k in range(n_topics):
            acc += weights[k]
            if target < acc:
                k_new = k
                break

        z[i] = k_new
        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1
