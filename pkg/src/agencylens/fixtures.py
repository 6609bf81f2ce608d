"""Deterministic synthetic corpora: planted-topic generators for tests and
the bundled 500-tweet demo fixture.

Nothing here touches the network; every artifact is a pure function of its
seed so regenerated files are byte-identical.
"""

from __future__ import annotations

import math
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Union

import numpy as np

from .corpus import Corpus, TweetRecord
from .preprocess import BowCorpus, build_vocabulary, to_bow

FIXTURE_WINDOW = (date(2020, 2, 21), date(2020, 6, 6))
FIXTURE_PEAK_DAY = date(2020, 4, 10)
FIXTURE_PEAK_CASES = 40000
FIXTURE_PEAK_DEATHS = 2500

_THEMES = {
    "WHO": ["masks", "vaccine", "community", "transmission", "nurses", "quarantine",
            "protective", "equipment", "solidarity", "tobacco"],
    "CDC": ["guidance", "tracing", "contact", "hospitalization", "older", "stress",
            "slow", "protect", "cases", "report"],
    "FEMA": ["supplies", "medical", "testing", "disaster", "funding", "hurricane",
             "season", "critical", "information", "response"],
    "FDOT": ["travel", "airports", "construction", "roadway", "distancing",
             "traffic", "florida", "essential", "checkpoints", "drivers"],
}
_POSITIVE = ["hope", "support", "recover", "together", "safe", "thank", "progress"]
_NEGATIVE = ["crisis", "death", "fear", "shortage", "risk", "emergency", "worry"]


def _records_to_bow(corpus: Corpus, min_df: int = 1) -> BowCorpus:
    token_docs = [record.text.split() for record in corpus.records]
    vocab = build_vocabulary(token_docs, min_df=min_df)
    return to_bow(corpus, vocab, stoplist=None)


def _utc(day: date, hour: int, minute: int = 0) -> datetime:
    return datetime(day.year, day.month, day.day, hour, minute, tzinfo=timezone.utc)


def planted_topics_corpus(
    n_docs: int,
    n_topics: int,
    *,
    words_per_topic: int = 10,
    doc_len: int = 20,
    seed: int = 0,
    skew: float = 0.0,
    background_words: int = 0,
    background_mass: float = 0.0,
    start_day: date = date(2020, 3, 1),
    n_days: int = 1,
) -> tuple[BowCorpus, np.ndarray]:
    """Corpus drawn from disjoint-support planted topics.

    Each document samples one planted topic and draws ``doc_len`` tokens
    from it.  ``skew`` > 0 tilts within-topic word probabilities toward a
    Zipf-like profile.  A shared pool of ``background_words`` rare words
    receiving ``background_mass`` of every topic gives the vocabulary a
    realistic noise tail.  Returns the bow corpus plus the planted
    topic-word matrix re-indexed to vocabulary ids.
    """
    rng = np.random.default_rng(seed)
    words = [
        [f"topic{g}word{j:02d}" for j in range(words_per_topic)] for g in range(n_topics)
    ]
    background = [f"noiseword{j:03d}" for j in range(background_words)]
    weights = []
    for g in range(n_topics):
        raw = 1.0 / np.arange(1, words_per_topic + 1) ** skew
        core = (1.0 - background_mass) * raw / raw.sum()
        tail = np.full(len(background), background_mass / max(len(background), 1))
        weights.append(np.concatenate([core, tail]))

    records = []
    for d in range(n_docs):
        g = int(rng.integers(0, n_topics))
        tokens = rng.choice(words[g] + background, size=doc_len, p=weights[g])
        day = start_day + timedelta(days=d % n_days)
        records.append(
            TweetRecord(
                id=f"doc-{d:05d}",
                timestamp=_utc(day, 6 + (d % 12), d % 60),
                agency="SYN",
                text=" ".join(tokens),
            )
        )
    records.sort(key=lambda r: r.timestamp)
    bow = _records_to_bow(Corpus(agency="SYN", records=tuple(records)))

    vocab_size = bow.vocab.size
    planted = np.zeros((n_topics, vocab_size))
    for g in range(n_topics):
        for j, word in enumerate(words[g] + background):
            if word in bow.vocab:
                planted[g, bow.vocab.id_of(word)] = weights[g][j]
        planted[g] /= planted[g].sum()
    return bow, planted


def drift_corpus(
    *,
    n_slices: int = 6,
    docs_per_slice: int = 60,
    doc_len: int = 25,
    mass_start: float = 0.05,
    mass_end: float = 0.45,
    seed: int = 0,
    start_day: date = date(2020, 3, 1),
) -> tuple[BowCorpus, str, np.ndarray]:
    """Two-topic corpus where topic 0's mass on one word drifts linearly.

    Returns (bow, drifting word, per-slice planted mass of that word).
    """
    rng = np.random.default_rng(seed)
    drifting = "driftword"
    fillers = [f"fillword{j:02d}" for j in range(9)]
    other = [f"otherword{j:02d}" for j in range(10)]
    masses = np.linspace(mass_start, mass_end, n_slices)

    records = []
    doc_id = 0
    for t in range(n_slices):
        day = start_day + timedelta(days=t)
        support = [drifting] + fillers
        probs = np.empty(len(support))
        probs[0] = masses[t]
        probs[1:] = (1.0 - masses[t]) / len(fillers)
        for _ in range(docs_per_slice):
            if rng.random() < 0.5:
                tokens = rng.choice(support, size=doc_len, p=probs)
            else:
                tokens = rng.choice(other, size=doc_len)
            records.append(
                TweetRecord(
                    id=f"doc-{doc_id:05d}",
                    timestamp=_utc(day, 6 + (doc_id % 12), doc_id % 60),
                    agency="SYN",
                    text=" ".join(tokens),
                )
            )
            doc_id += 1
    records.sort(key=lambda r: r.timestamp)
    bow = _records_to_bow(Corpus(agency="SYN", records=tuple(records)))
    return bow, drifting, masses


def fixture_indicator_rows() -> list[tuple[date, int, int]]:
    """Synthetic national daily curve peaking at exactly
    (40,000 cases, 2,500 deaths) on 2020-04-10."""
    first, last = FIXTURE_WINDOW
    peak_t = (FIXTURE_PEAK_DAY - first).days
    n_days = (last - first).days + 1
    rows = []
    for t in range(n_days):
        day = first + timedelta(days=t)
        if t <= peak_t:
            cases = int(FIXTURE_PEAK_CASES * (t / peak_t) ** 2)
            deaths = int(FIXTURE_PEAK_DEATHS * (t / peak_t) ** 2)
        else:
            cases = int(FIXTURE_PEAK_CASES * math.exp(-(t - peak_t) / 45.0))
            deaths = int(FIXTURE_PEAK_DEATHS * math.exp(-(t - peak_t) / 50.0))
        rows.append((day, cases, deaths))
    return rows


def fixture_tweet_records(n_tweets: int = 500, seed: int = 20200221) -> list[TweetRecord]:
    """The bundled demo archive: agency-themed texts over the full window."""
    rng = np.random.default_rng(seed)
    first, last = FIXTURE_WINDOW
    n_days = (last - first).days + 1
    agencies = list(_THEMES)

    records = []
    for i in range(n_tweets):
        # pin the corpus span to the analysis window
        if i == 0:
            day = first
        elif i == 1:
            day = last
        else:
            day = first + timedelta(days=int(rng.integers(0, n_days)))
        agency = agencies[int(rng.integers(0, len(agencies)))]
        theme = _THEMES[agency]
        body = list(rng.choice(theme, size=6, replace=True))
        # sentiment drifts negative around the case peak, positive later
        t = (day - first).days / (n_days - 1)
        negative_bias = math.sin(math.pi * min(t / 0.75, 1.0))
        pool = _NEGATIVE if rng.random() < 0.3 + 0.5 * negative_bias else _POSITIVE
        body.extend(rng.choice(pool, size=2, replace=True))
        order = rng.permutation(len(body))
        text = " ".join(body[j] for j in order)
        hour, minute = int(rng.integers(0, 24)), int(rng.integers(0, 60))
        records.append(
            TweetRecord(
                id=f"synth-{i:04d}",
                timestamp=_utc(day, hour, minute),
                agency=agency,
                text=text,
            )
        )
    records.sort(key=lambda r: r.timestamp)
    return records


def write_fixture(out_dir: Union[str, Path], n_tweets: int = 500, seed: int = 20200221) -> tuple[Path, Path]:
    """Write tweets.jsonl and indicators.csv; byte-identical per (n, seed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tweets_path = out / "tweets.jsonl"
    with open(tweets_path, "w", encoding="utf-8") as handle:
        import json

        for record in fixture_tweet_records(n_tweets, seed):
            handle.write(
                json.dumps(
                    {
                        "id": record.id,
                        "created_at": record.timestamp.isoformat(),
                        "agency": record.agency,
                        "text": record.text,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    indicators_path = out / "indicators.csv"
    with open(indicators_path, "w", encoding="utf-8") as handle:
        handle.write("date,new_cases,new_deaths\n")
        for day, cases, deaths in fixture_indicator_rows():
            handle.write(f"{day.isoformat()},{cases},{deaths}\n")
    return tweets_path, indicators_path


def fixture_paths() -> tuple[Path, Path]:
    """Paths of the bundled copies shipped inside the package."""
    from importlib import resources

    base = resources.files("agencylens") / "data" / "fixture"
    return Path(str(base / "tweets.jsonl")), Path(str(base / "indicators.csv"))
