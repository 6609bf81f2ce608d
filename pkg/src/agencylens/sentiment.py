"""Lexicon sentiment scoring, daily aggregation and rolling-mean smoothing.

Scores are token means, so they are length-invariant and stay in [-1, 1].
Days with no tweets are carried as undefined (NaN), never as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping, Optional, Union

from .corpus import Corpus, slice_by_day
from .errors import DataError
from .preprocess import tokenize

LEXICON_RAW_RANGE = 5  # bundled file carries integer valences in [-5, 5]


@dataclass(frozen=True)
class SentimentLexicon:
    """token -> valence in [-1, 1] (normalized from the file's integers)."""

    valences: Mapping[str, float]

    def __post_init__(self) -> None:
        for token, valence in self.valences.items():
            if token != token.lower():
                raise DataError(f"lexicon token {token!r} must be lowercase")
            if not -1.0 <= valence <= 1.0:
                raise DataError(f"valence for {token!r} outside [-1, 1]")

    def __len__(self) -> int:
        return len(self.valences)


def load_lexicon(path: Union[str, Path, None] = None) -> SentimentLexicon:
    """Load a tab-separated ``token<TAB>valence`` file, valences in [-5, 5].

    With no path, the bundled lexicon ships with the package.
    """
    if path is None:
        text = (resources.files("agencylens") / "data" / "sentiment_lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    valences: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"lexicon line {lineno}: expected token<TAB>valence")
        token = parts[0].strip().lower()
        try:
            raw = int(parts[1].strip())
        except ValueError as exc:
            raise DataError(f"lexicon line {lineno}: valence must be an integer") from exc
        if not -LEXICON_RAW_RANGE <= raw <= LEXICON_RAW_RANGE:
            raise DataError(f"lexicon line {lineno}: valence {raw} outside [-5, 5]")
        valences[token] = raw / LEXICON_RAW_RANGE
    if not valences:
        raise DataError("lexicon file holds no entries")
    return SentimentLexicon(valences=valences)


def score_text(text: str, lexicon: SentimentLexicon, *, negation: bool = False) -> float:
    """Mean valence over lexicon-matched tokens; 0 when nothing matches.

    Tokenization follows the preprocessing rules but without a stoplist
    (lexicon matching already filters, and "not" must survive for the
    optional negation flip).
    """
    tokens = tokenize(text)
    matched: list[float] = []
    for i, token in enumerate(tokens):
        valence = lexicon.valences.get(token)
        if valence is None:
            continue
        if negation and i > 0 and tokens[i - 1] == "not":
            valence = -valence
        matched.append(valence)
    if not matched:
        return 0.0
    return sum(matched) / len(matched)


@dataclass(frozen=True)
class SentimentSeries:
    """Daily mean scores over a contiguous date range; NaN marks empty days.

    ``counts[i]`` is the number of contributing observations on day i: raw
    tweet counts after :func:`daily_sentiment`, contributing defined days
    after :func:`rolling_mean`.  ``means[i]`` is NaN exactly when
    ``counts[i]`` is zero.
    """

    start: date
    means: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.means) != len(self.counts) or not self.means:
            raise DataError("series needs equal-length, non-empty means and counts")
        for mean, count in zip(self.means, self.counts):
            if count > 0 and not math.isfinite(mean):
                raise DataError("defined day carries a non-finite mean")
            if count == 0 and not math.isnan(mean):
                raise DataError("empty day must be marked undefined")

    @property
    def end(self) -> date:
        return self.start + timedelta(days=len(self.means) - 1)

    def __len__(self) -> int:
        return len(self.means)

    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self.means))]

    def get(self, day: date) -> Optional[float]:
        """Mean for ``day``; None when undefined or outside the range."""
        offset = (day - self.start).days
        if not 0 <= offset < len(self.means):
            return None
        value = self.means[offset]
        return None if math.isnan(value) else value

    def items(self) -> Iterator[tuple[date, float, int]]:
        for i, (mean, count) in enumerate(zip(self.means, self.counts)):
            yield self.start + timedelta(days=i), mean, count


def daily_sentiment(
    corpus: Corpus, lexicon: SentimentLexicon, *, negation: bool = False
) -> SentimentSeries:
    """Per-day unweighted mean of per-tweet scores over the corpus span."""
    means: list[float] = []
    counts: list[int] = []
    for _, indices in slice_by_day(corpus):
        if not indices:
            means.append(math.nan)
            counts.append(0)
            continue
        scores = [
            score_text(corpus.records[i].text, lexicon, negation=negation) for i in indices
        ]
        means.append(sum(scores) / len(scores))
        counts.append(len(scores))
    return SentimentSeries(start=corpus.span[0], means=tuple(means), counts=tuple(counts))


def rolling_mean(series: SentimentSeries, window_days: int) -> SentimentSeries:
    """Trailing inclusive window over defined days only.

    Undefined days contribute to neither numerator nor denominator; a
    window with no defined days stays undefined.  ``window_days=1`` is the
    identity on defined days.
    """
    if window_days < 1:
        raise DataError("window_days must be >= 1")
    n_days = len(series.means)
    means: list[float] = []
    counts: list[int] = []
    # direct chronological summation per window: O(n * window), exact for
    # window 1 and bit-compatible with a brute-force oracle
    for t in range(n_days):
        lo = max(0, t - window_days + 1)
        total = 0.0
        window_defined = 0
        for i in range(lo, t + 1):
            if series.counts[i] > 0:
                total += series.means[i]
                window_defined += 1
        if window_defined == 0:
            means.append(math.nan)
            counts.append(0)
        else:
            means.append(total / window_defined)
            counts.append(window_defined)
    return SentimentSeries(start=series.start, means=tuple(means), counts=tuple(counts))
