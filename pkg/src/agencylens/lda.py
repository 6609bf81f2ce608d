"""Static LDA via collapsed Gibbs sampling, NPMI coherence and K selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._gibbs import gibbs_sweep
from .errors import DataError
from .preprocess import BowCorpus, Vocabulary

IterationHook = Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]

DEFAULT_ETA = 0.01
DEFAULT_ITERATIONS = 1000
DEFAULT_BURN_IN = 500
COHERENCE_TOP_N = 10


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Fitted topic model: row-stochastic phi (K x V) and theta (D x K)."""

    n_topics: int
    alpha: float
    eta: float
    phi: np.ndarray
    theta: np.ndarray
    z: tuple[np.ndarray, ...]  # final per-document token assignments
    seed: int
    vocab: Vocabulary
    iterations: int
    burn_in: int

    def __post_init__(self) -> None:
        if self.n_topics < 1:
            raise DataError("n_topics must be >= 1")
        for name, matrix in (("phi", self.phi), ("theta", self.theta)):
            if np.any(matrix < 0):
                raise DataError(f"{name} has negative entries")
            if np.max(np.abs(matrix.sum(axis=1) - 1.0)) > 1e-9:
                raise DataError(f"{name} rows must sum to 1")
        for assignments in self.z:
            if assignments.size and (assignments.min() < 0 or assignments.max() >= self.n_topics):
                raise DataError("topic assignment out of range")


def _flatten(bow: BowCorpus) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Expand (token-id, count) pairs into per-token doc/word index arrays."""
    doc_ids: list[int] = []
    word_ids: list[int] = []
    doc_lengths: list[int] = []
    for d, doc in enumerate(bow.documents()):
        length = 0
        for token_id, count in doc.pairs:
            for _ in range(count):
                doc_ids.append(d)
                word_ids.append(token_id)
            length += count
        doc_lengths.append(length)
    return (
        np.asarray(doc_ids, dtype=np.int64),
        np.asarray(word_ids, dtype=np.int64),
        doc_lengths,
    )


def _initial_assignments(
    word_of: np.ndarray,
    n_topics: int,
    rng: np.random.Generator,
    init_phi: Optional[np.ndarray],
) -> np.ndarray:
    if init_phi is None:
        return rng.integers(0, n_topics, size=word_of.shape[0], dtype=np.int64)
    # warm start: z ~ Categorical over topics, proportional to init_phi[:, w]
    probs = np.asarray(init_phi, dtype=np.float64)
    col_sums = probs.sum(axis=0)
    col_sums[col_sums <= 0.0] = 1.0
    cumulative = np.cumsum(probs / col_sums, axis=0)  # (K, V)
    u = rng.random(word_of.shape[0])
    thresholds = cumulative[:, word_of]  # (K, n_tokens)
    z = (u[None, :] >= thresholds).sum(axis=0)
    return np.minimum(z, n_topics - 1).astype(np.int64)


def fit_lda(
    bow: BowCorpus,
    n_topics: int,
    *,
    alpha: Optional[float] = None,
    eta: float = DEFAULT_ETA,
    iterations: int = DEFAULT_ITERATIONS,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    init_phi: Optional[np.ndarray] = None,
    iteration_hook: Optional[IterationHook] = None,
) -> LdaModel:
    """Fit LDA by collapsed Gibbs; phi/theta are posterior means over
    post-burn-in count snapshots.  Deterministic given the seed.

    ``alpha`` defaults to 50 / n_topics.  ``init_phi`` warm-starts the
    initial assignments (used by the dynamic model's per-slice fits).
    ``iteration_hook`` receives (iteration, n_dk, n_kw, n_k) after every
    sweep; counts are live views, treat them as read-only.
    """
    if n_topics < 1:
        raise DataError("n_topics must be >= 1")
    if bow.n_docs == 0:
        raise DataError("cannot fit on an empty corpus")
    if not (iterations > burn_in >= 0):
        raise DataError("need iterations > burn_in >= 0")
    if alpha is None:
        alpha = 50.0 / n_topics
    if not (math.isfinite(alpha) and alpha > 0 and math.isfinite(eta) and eta > 0):
        raise DataError("hyperparameters must be finite and positive")

    vocab_size = bow.vocab.size
    doc_of, word_of, doc_lengths = _flatten(bow)
    n_tokens = doc_of.shape[0]
    if n_topics > vocab_size:
        raise DataError(
            f"n_topics={n_topics} exceeds the {vocab_size} distinct tokens available"
        )
    n_docs = len(doc_lengths)

    rng = np.random.default_rng(seed)
    z = _initial_assignments(word_of, n_topics, rng, init_phi)

    n_dk = np.zeros((n_docs, n_topics), dtype=np.int64)
    n_kw = np.zeros((n_topics, vocab_size), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_of), 1)
    n_k = n_kw.sum(axis=1)

    acc_dk = np.zeros_like(n_dk, dtype=np.float64)
    acc_kw = np.zeros_like(n_kw, dtype=np.float64)
    weights = np.empty(n_topics, dtype=np.float64)

    for iteration in range(iterations):
        uniforms = rng.random(n_tokens)
        gibbs_sweep(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, eta, uniforms, weights)
        if iteration >= burn_in:
            acc_dk += n_dk
            acc_kw += n_kw
        if iteration_hook is not None:
            iteration_hook(iteration, n_dk, n_kw, n_k)

    n_samples = iterations - burn_in
    mean_kw = acc_kw / n_samples
    mean_dk = acc_dk / n_samples
    phi = (mean_kw + eta) / (mean_kw.sum(axis=1, keepdims=True) + vocab_size * eta)
    theta = (mean_dk + alpha) / (mean_dk.sum(axis=1, keepdims=True) + n_topics * alpha)

    boundaries = np.cumsum([0] + doc_lengths)
    z_docs = tuple(
        z[boundaries[d] : boundaries[d + 1]].copy() for d in range(n_docs)
    )
    return LdaModel(
        n_topics=n_topics,
        alpha=alpha,
        eta=eta,
        phi=phi,
        theta=theta,
        z=z_docs,
        seed=seed,
        vocab=bow.vocab,
        iterations=iterations,
        burn_in=burn_in,
    )


def top_word_ids(row: np.ndarray, n: int) -> np.ndarray:
    """Token ids of the n largest entries, ties broken by smaller id."""
    order = np.lexsort((np.arange(row.shape[0]), -row))
    return order[:n]


def topic_top_words(model: LdaModel, topic: int, n: int) -> list[str]:
    if not (0 <= topic < model.n_topics):
        raise DataError(f"topic {topic} out of range")
    if n < 1:
        raise DataError("n must be >= 1")
    ids = top_word_ids(model.phi[topic], n)
    return [model.vocab.tokens[i] for i in ids]


def _doc_frequencies(bow: BowCorpus) -> tuple[list[frozenset[int]], np.ndarray]:
    doc_sets = [frozenset(doc.token_ids()) for doc in bow.documents()]
    df = np.zeros(bow.vocab.size, dtype=np.int64)
    for token_set in doc_sets:
        for token_id in token_set:
            df[token_id] += 1
    return doc_sets, df


def _npmi(joint: int, df_a: int, df_b: int, n_docs: int) -> float:
    # add-one smoothing on all counts over n_docs + 2 pseudo-documents keeps
    # every probability in (0, 1) and the score in [-1, 1]
    denom = n_docs + 2.0
    p_joint = (joint + 1.0) / denom
    p_a = (df_a + 1.0) / denom
    p_b = (df_b + 1.0) / denom
    return (math.log(p_joint) - math.log(p_a) - math.log(p_b)) / (-math.log(p_joint))


def coherence(model: LdaModel, bow: BowCorpus, top_n: int = COHERENCE_TOP_N) -> np.ndarray:
    """Mean NPMI over each topic's top-word pairs, document co-occurrence based."""
    doc_sets, df = _doc_frequencies(bow)
    n_docs = len(doc_sets)
    scores = np.zeros(model.n_topics, dtype=np.float64)
    for k in range(model.n_topics):
        words = top_word_ids(model.phi[k], min(top_n, model.vocab.size))
        pair_scores = []
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                a, b = int(words[i]), int(words[j])
                joint = sum(1 for s in doc_sets if a in s and b in s)
                pair_scores.append(_npmi(joint, int(df[a]), int(df[b]), n_docs))
        scores[k] = float(np.mean(pair_scores)) if pair_scores else 0.0
    return scores


@dataclass(frozen=True)
class CoherenceReport:
    """Per-candidate mean coherence and the selected topic count."""

    entries: tuple[tuple[int, float], ...]  # (K, mean NPMI), ascending K
    selected_k: int

    def __post_init__(self) -> None:
        best = max(score for _, score in self.entries)
        winners = [k for k, score in self.entries if score == best]
        if self.selected_k != min(winners):
            raise DataError("selected_k must attain the maximum coherence, smaller K on ties")


def select_k(
    bow: BowCorpus,
    k_grid: Sequence[int],
    *,
    alpha: Optional[float] = None,
    eta: float = DEFAULT_ETA,
    iterations: int = DEFAULT_ITERATIONS,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
) -> CoherenceReport:
    """Fit one model per candidate K (same seed for each) and pick the
    coherence argmax, ties toward smaller K."""
    candidates = sorted(set(int(k) for k in k_grid))
    if not candidates:
        raise DataError("k_grid must be non-empty")
    if any(k < 2 for k in candidates):
        raise DataError("k_grid entries must be >= 2")
    entries: list[tuple[int, float]] = []
    best_k: Optional[int] = None
    best_score = -math.inf
    for k in candidates:
        model = fit_lda(
            bow, k, alpha=alpha, eta=eta, iterations=iterations, burn_in=burn_in, seed=seed
        )
        score = float(np.mean(coherence(model, bow)))
        entries.append((k, score))
        if score > best_score:
            best_score = score
            best_k = k
    assert best_k is not None
    return CoherenceReport(entries=tuple(entries), selected_k=best_k)


def dominant_topic(model: LdaModel, doc_index: int) -> int:
    """Argmax of the document's topic proportions, ties to the smaller id."""
    if not (0 <= doc_index < model.theta.shape[0]):
        raise DataError(f"document index {doc_index} out of range")
    return int(np.argmax(model.theta[doc_index]))


LDA_FORMAT = "agencylens-lda"
LDA_FORMAT_VERSION = 1


def save_lda(model: LdaModel, path: Union[str, Path]) -> None:
    """Versioned single-file JSON serialization; floats round-trip exactly."""
    payload = {
        "format": LDA_FORMAT,
        "version": LDA_FORMAT_VERSION,
        "config": {
            "n_topics": model.n_topics,
            "alpha": model.alpha,
            "eta": model.eta,
            "iterations": model.iterations,
            "burn_in": model.burn_in,
        },
        "seed": model.seed,
        "vocab_sha256": model.vocab.sha256(),
        "vocab_tokens": list(model.vocab.tokens),
        "vocab_doc_freq": list(model.vocab.doc_freq),
        "phi": model.phi.tolist(),
        "theta": model.theta.tolist(),
        "z": [assignment.tolist() for assignment in model.z],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_lda(path: Union[str, Path]) -> LdaModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != LDA_FORMAT or payload.get("version") != LDA_FORMAT_VERSION:
        raise DataError(f"{path}: not a version-{LDA_FORMAT_VERSION} {LDA_FORMAT} file")
    vocab = Vocabulary(
        tokens=tuple(payload["vocab_tokens"]),
        doc_freq=tuple(payload["vocab_doc_freq"]),
    )
    if vocab.sha256() != payload["vocab_sha256"]:
        raise DataError(f"{path}: vocabulary hash mismatch")
    config = payload["config"]
    return LdaModel(
        n_topics=config["n_topics"],
        alpha=config["alpha"],
        eta=config["eta"],
        phi=np.asarray(payload["phi"], dtype=np.float64),
        theta=np.asarray(payload["theta"], dtype=np.float64),
        z=tuple(np.asarray(a, dtype=np.int64) for a in payload["z"]),
        seed=payload["seed"],
        vocab=vocab,
        iterations=config["iterations"],
        burn_in=config["burn_in"],
    )
