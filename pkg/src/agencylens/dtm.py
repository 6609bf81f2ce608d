"""Dynamic topic model: Gaussian natural-parameter chains over time slices.

Topic-word distributions are carried as natural parameters (log-ratios
against the last vocabulary entry, which is pinned to zero).  Each
coordinate of each topic evolves as a Gaussian random walk across slices;
estimation is two-stage: per-slice LDA fits warm-started from the previous
slice, cross-slice topic alignment by optimal bipartite matching on
phi-row cosine, then exact forward/backward (RTS) smoothing of the
gauge-fixed empirical natural parameters.  The same scalar smoother is
applied to the per-slice mean document-topic proportions, giving the
proportion-mean chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError
from .lda import fit_lda, top_word_ids
from .preprocess import BowCorpus, BowDocument, Vocabulary

DEFAULT_SIGMA2 = 0.005
DEFAULT_PROB_FLOOR = 1e-9
DEFAULT_OBS_VAR_SCALE = 1.0
DEFAULT_OBS_VAR_FLOOR = 1e-4
DEFAULT_PRIOR_VAR = 1e6

DTM_FORMAT = "agencylens-dtm"
DTM_FORMAT_VERSION = 1


def natural_to_mean(beta: np.ndarray) -> np.ndarray:
    """Map natural parameters to the probability simplex (softmax).

    Computed with max-subtraction so huge entries saturate instead of
    overflowing.  Requires the gauge: last coordinate equal to zero.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if not np.all(np.isfinite(beta)):
        raise DataError("natural parameters must be finite")
    if beta[-1] != 0.0:
        raise DataError("gauge violated: last natural parameter must be 0")
    shifted = beta - beta.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def mean_to_natural(pi: np.ndarray, floor: float = DEFAULT_PROB_FLOOR) -> np.ndarray:
    """Map a simplex point to gauge-fixed natural parameters, log(pi_i / pi_V).

    Entries are floored at ``floor`` and renormalized first so exact zeros
    stay finite.  Round-trips with :func:`natural_to_mean` when no flooring
    triggers.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 1 or pi.shape[0] < 2:
        raise DataError("need a 1-d simplex point with at least 2 entries")
    if np.any(pi < 0):
        raise DataError("simplex entries must be nonnegative")
    if abs(pi.sum() - 1.0) > 1e-9:
        raise DataError("simplex entries must sum to 1")
    floored = np.maximum(pi, floor)
    floored = floored / floored.sum()
    beta = np.log(floored / floored[-1])
    beta[-1] = 0.0
    return beta


def chain_logdensity(beta_t: np.ndarray, beta_prev: np.ndarray, sigma2: float) -> float:
    """Log N(beta_t | beta_prev, sigma2 * I) over the V-1 free coordinates."""
    beta_t = np.asarray(beta_t, dtype=np.float64)
    beta_prev = np.asarray(beta_prev, dtype=np.float64)
    if beta_t.shape != beta_prev.shape:
        raise DataError("dimension mismatch between chain states")
    if not sigma2 > 0:
        raise DataError("sigma2 must be positive")
    delta = beta_t[:-1] - beta_prev[:-1]
    n_free = beta_t.shape[0] - 1
    return float(-0.5 * n_free * math.log(2.0 * math.pi * sigma2) - delta @ delta / (2.0 * sigma2))


@dataclass(frozen=True, eq=False)
class ChainObservations:
    """Per-slice pseudo-observations for one batch of random-walk chains.

    ``values`` and ``variances`` are (T, n); rows with ``observed`` False
    are ignored by the smoother (prediction only).
    """

    values: np.ndarray
    variances: np.ndarray
    observed: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.variances.shape:
            raise DataError("values and variances must share a shape")
        if self.observed.shape != (self.values.shape[0],):
            raise DataError("observed mask must have one entry per slice")
        mask = np.asarray(self.observed, dtype=bool)
        if np.any(self.variances[mask] <= 0):
            raise DataError("observation variances must be positive")


@dataclass(frozen=True, eq=False)
class KalmanResult:
    """Smoothed and filtered posterior moments, coordinate-wise, (T, n)."""

    means: np.ndarray
    variances: np.ndarray
    filtered_means: np.ndarray
    filtered_variances: np.ndarray


def kalman_smooth(
    obs: ChainObservations,
    sigma2: float,
    prior_mean: Union[float, np.ndarray] = 0.0,
    prior_var: float = DEFAULT_PRIOR_VAR,
) -> KalmanResult:
    """Exact RTS smoother for the scalar chain x_t = x_{t-1} + N(0, sigma2),
    y_t = x_t + N(0, v_t), run independently over every column.

    Unobserved slices propagate the prediction only.  The smoothed moments
    equal the marginals of the exact joint-Gaussian posterior.
    """
    if sigma2 < 0:
        raise DataError("sigma2 must be nonnegative")
    if not prior_var > 0:
        raise DataError("prior variance must be positive")
    values = np.asarray(obs.values, dtype=np.float64)
    variances = np.asarray(obs.variances, dtype=np.float64)
    observed = np.asarray(obs.observed, dtype=bool)
    n_slices, n_coords = values.shape
    if n_slices < 1:
        raise DataError("need at least one slice")

    filtered_mean = np.empty((n_slices, n_coords))
    filtered_var = np.empty((n_slices, n_coords))
    pred_mean = np.empty((n_slices, n_coords))
    pred_var = np.empty((n_slices, n_coords))

    for t in range(n_slices):
        if t == 0:
            pred_mean[t] = np.broadcast_to(np.asarray(prior_mean, dtype=np.float64), (n_coords,))
            pred_var[t] = prior_var
        else:
            pred_mean[t] = filtered_mean[t - 1]
            pred_var[t] = filtered_var[t - 1] + sigma2
        if observed[t]:
            gain = pred_var[t] / (pred_var[t] + variances[t])
            filtered_mean[t] = pred_mean[t] + gain * (values[t] - pred_mean[t])
            filtered_var[t] = (1.0 - gain) * pred_var[t]
        else:
            filtered_mean[t] = pred_mean[t]
            filtered_var[t] = pred_var[t]

    smoothed_mean = np.empty_like(filtered_mean)
    smoothed_var = np.empty_like(filtered_var)
    smoothed_mean[-1] = filtered_mean[-1]
    smoothed_var[-1] = filtered_var[-1]
    for t in range(n_slices - 2, -1, -1):
        gain = filtered_var[t] / pred_var[t + 1]
        smoothed_mean[t] = filtered_mean[t] + gain * (smoothed_mean[t + 1] - pred_mean[t + 1])
        smoothed_var[t] = filtered_var[t] + gain * gain * (smoothed_var[t + 1] - pred_var[t + 1])

    return KalmanResult(
        means=smoothed_mean,
        variances=smoothed_var,
        filtered_means=filtered_mean,
        filtered_variances=filtered_var,
    )


def _cosine_matrix(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    norm_a = np.linalg.norm(rows_a, axis=1, keepdims=True)
    norm_b = np.linalg.norm(rows_b, axis=1, keepdims=True)
    norm_a[norm_a == 0] = 1.0
    norm_b[norm_b == 0] = 1.0
    return (rows_a / norm_a) @ (rows_b / norm_b).T


def align_topics(phis: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Chain consecutive slices' topics by maximum-cosine bipartite matching.

    Returns one permutation per slice; ``perm[g]`` is that slice's local
    topic index carrying global label ``g``.  The first slice anchors the
    labels.
    """
    if not phis:
        return []
    n_topics = phis[0].shape[0]
    perms: list[np.ndarray] = [np.arange(n_topics)]
    reference = phis[0]
    for phi in phis[1:]:
        similarity = _cosine_matrix(reference, phi)  # rows: global labels
        _, cols = linear_sum_assignment(-similarity)
        perms.append(cols.copy())
        reference = phi[cols]
    return perms


@dataclass(frozen=True, eq=False)
class DtmModel:
    """Smoothed natural-parameter chains per topic plus the proportion chain.

    ``beta_mean``/``beta_var`` are (T, K, V) with the gauge coordinate
    (last vocabulary entry) pinned at zero.  ``alpha_chain`` is (T, K)
    gauge-fixed natural parameters of the mean document-topic proportions.
    """

    n_topics: int
    beta_mean: np.ndarray
    beta_var: np.ndarray
    alpha_chain: np.ndarray
    sigma2: float
    slice_dates: tuple[date, ...]
    observed: tuple[bool, ...]
    vocab: Vocabulary
    seed: int

    def __post_init__(self) -> None:
        n_slices = len(self.slice_dates)
        if n_slices < 1:
            raise DataError("need at least one slice")
        if not self.sigma2 > 0:
            raise DataError("sigma2 must be positive")
        if any(a >= b for a, b in zip(self.slice_dates, self.slice_dates[1:])):
            raise DataError("slice dates must be strictly increasing")
        if self.beta_mean.shape != (n_slices, self.n_topics, self.vocab.size):
            raise DataError("beta_mean shape mismatch")
        if np.any(self.beta_mean[:, :, -1] != 0.0):
            raise DataError("gauge violated in beta chains")

    @property
    def n_slices(self) -> int:
        return len(self.slice_dates)

    def topic_distribution(self, t: int, k: int) -> np.ndarray:
        """Word simplex for topic k in slice t."""
        return natural_to_mean(self.beta_mean[t, k])

    def proportion_means(self, t: int) -> np.ndarray:
        """Expected topic proportions in slice t (softmax of alpha_t)."""
        return natural_to_mean(self.alpha_chain[t])


def _merge_slices(
    slices: Sequence[tuple[date, tuple[BowDocument, ...]]], factor: int
) -> list[tuple[date, tuple[BowDocument, ...]]]:
    if factor <= 1:
        return list(slices)
    merged = []
    for start in range(0, len(slices), factor):
        block = slices[start : start + factor]
        docs = tuple(doc for _, doc_group in block for doc in doc_group)
        merged.append((block[0][0], docs))
    return merged


def fit_dtm(
    bow: BowCorpus,
    n_topics: int,
    sigma2: float = DEFAULT_SIGMA2,
    *,
    alpha: Optional[float] = None,
    eta: float = 0.01,
    iterations: int = 200,
    burn_in: int = 100,
    seed: int = 0,
    slice_merge: int = 1,
    obs_var_scale: float = DEFAULT_OBS_VAR_SCALE,
    obs_var_floor: float = DEFAULT_OBS_VAR_FLOOR,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    prior_var: float = DEFAULT_PRIOR_VAR,
) -> DtmModel:
    """Two-stage dynamic-topic estimate over the corpus' day slices.

    Slices with no documents, or fewer tokens than topics, are treated as
    unobserved and receive purely smoothed states.  ``slice_merge`` groups
    that many consecutive days into one slice before fitting.
    """
    if n_topics < 2:
        raise DataError("dynamic model needs n_topics >= 2")
    if not sigma2 > 0:
        raise DataError("sigma2 must be positive")
    slices = _merge_slices(bow.slices, slice_merge)
    n_slices = len(slices)
    vocab_size = bow.vocab.size

    # stage 1: per-slice LDA fits, warm-started from the previous aligned phi
    phis: list[Optional[np.ndarray]] = [None] * n_slices
    topic_tokens: list[Optional[np.ndarray]] = [None] * n_slices
    theta_means: list[Optional[np.ndarray]] = [None] * n_slices
    doc_counts = np.zeros(n_slices, dtype=np.int64)
    previous_phi: Optional[np.ndarray] = None
    for t, (day, docs) in enumerate(slices):
        doc_counts[t] = len(docs)
        token_count = sum(doc.total() for doc in docs)
        if not docs or token_count < n_topics:
            continue
        slice_bow = BowCorpus(vocab=bow.vocab, slices=((day, docs),))
        model = fit_lda(
            slice_bow,
            n_topics,
            alpha=alpha,
            eta=eta,
            iterations=iterations,
            burn_in=burn_in,
            seed=seed + t,
            init_phi=previous_phi,
        )
        phis[t] = model.phi
        # expected tokens per topic, from the per-document assignments
        counts = np.zeros(n_topics)
        for doc_z in model.z:
            counts += np.bincount(doc_z, minlength=n_topics)
        topic_tokens[t] = counts
        theta_means[t] = model.theta.mean(axis=0)
        previous_phi = model.phi

    observed_idx = [t for t in range(n_slices) if phis[t] is not None]
    if not observed_idx:
        raise DataError("no slice has enough documents to fit the dynamic model")

    # stage 2: align topics across the observed slices
    perms = align_topics([phis[t] for t in observed_idx])
    for t, perm in zip(observed_idx, perms):
        phis[t] = phis[t][perm]
        topic_tokens[t] = topic_tokens[t][perm]
        theta_means[t] = theta_means[t][perm]

    # stage 3: smooth gauge-fixed empirical natural parameters per topic
    observed = np.array([phis[t] is not None for t in range(n_slices)])
    beta_mean = np.zeros((n_slices, n_topics, vocab_size))
    beta_var = np.zeros((n_slices, n_topics, vocab_size))
    for k in range(n_topics):
        values = np.zeros((n_slices, vocab_size - 1))
        variances = np.ones((n_slices, vocab_size - 1))
        for t in observed_idx:
            beta_obs = mean_to_natural(phis[t][k], floor=prob_floor)
            values[t] = beta_obs[:-1]
            variances[t] = max(obs_var_floor, obs_var_scale / (topic_tokens[t][k] + 1.0))
        result = kalman_smooth(
            ChainObservations(values=values, variances=variances, observed=observed),
            sigma2,
            prior_mean=0.0,
            prior_var=prior_var,
        )
        beta_mean[:, k, :-1] = result.means
        beta_var[:, k, :-1] = result.variances

    # proportion chain: same smoother on the gauge-fixed mean theta
    alpha_values = np.zeros((n_slices, n_topics - 1))
    alpha_variances = np.ones((n_slices, n_topics - 1))
    for t in observed_idx:
        alpha_obs = mean_to_natural(theta_means[t], floor=prob_floor)
        alpha_values[t] = alpha_obs[:-1]
        alpha_variances[t] = max(obs_var_floor, obs_var_scale / (doc_counts[t] + 1.0))
    alpha_result = kalman_smooth(
        ChainObservations(values=alpha_values, variances=alpha_variances, observed=observed),
        sigma2,
        prior_mean=0.0,
        prior_var=prior_var,
    )
    alpha_chain = np.zeros((n_slices, n_topics))
    alpha_chain[:, :-1] = alpha_result.means

    return DtmModel(
        n_topics=n_topics,
        beta_mean=beta_mean,
        beta_var=beta_var,
        alpha_chain=alpha_chain,
        sigma2=sigma2,
        slice_dates=tuple(day for day, _ in slices),
        observed=tuple(bool(flag) for flag in observed),
        vocab=bow.vocab,
        seed=seed,
    )


def topic_trajectory(model: DtmModel, topic: int, n: int) -> list[list[str]]:
    """Top-n word lists for one topic, one list per slice, ties by token id."""
    if not (0 <= topic < model.n_topics):
        raise DataError(f"topic {topic} out of range")
    if n < 1:
        raise DataError("n must be >= 1")
    trajectory = []
    for t in range(model.n_slices):
        pi = model.topic_distribution(t, topic)
        ids = top_word_ids(pi, n)
        trajectory.append([model.vocab.tokens[i] for i in ids])
    return trajectory


def save_dtm(model: DtmModel, path: Union[str, Path]) -> None:
    """Versioned single-file JSON serialization; round-trip exact."""
    payload = {
        "format": DTM_FORMAT,
        "version": DTM_FORMAT_VERSION,
        "config": {"n_topics": model.n_topics, "sigma2": model.sigma2},
        "seed": model.seed,
        "slice_dates": [d.isoformat() for d in model.slice_dates],
        "observed": list(model.observed),
        "vocab_sha256": model.vocab.sha256(),
        "vocab_tokens": list(model.vocab.tokens),
        "vocab_doc_freq": list(model.vocab.doc_freq),
        "beta_mean": model.beta_mean.tolist(),
        "beta_var": model.beta_var.tolist(),
        "alpha_chain": model.alpha_chain.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_dtm(path: Union[str, Path]) -> DtmModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != DTM_FORMAT or payload.get("version") != DTM_FORMAT_VERSION:
        raise DataError(f"{path}: not a version-{DTM_FORMAT_VERSION} {DTM_FORMAT} file")
    vocab = Vocabulary(
        tokens=tuple(payload["vocab_tokens"]),
        doc_freq=tuple(payload["vocab_doc_freq"]),
    )
    if vocab.sha256() != payload["vocab_sha256"]:
        raise DataError(f"{path}: vocabulary hash mismatch")
    return DtmModel(
        n_topics=payload["config"]["n_topics"],
        beta_mean=np.asarray(payload["beta_mean"], dtype=np.float64),
        beta_var=np.asarray(payload["beta_var"], dtype=np.float64),
        alpha_chain=np.asarray(payload["alpha_chain"], dtype=np.float64),
        sigma2=payload["config"]["sigma2"],
        slice_dates=tuple(date.fromisoformat(d) for d in payload["slice_dates"]),
        observed=tuple(payload["observed"]),
        vocab=vocab,
        seed=payload["seed"],
    )
