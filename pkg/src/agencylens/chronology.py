"""Timeline assembly: topic-frequency series, the four policy periods,
per-period top words, and the aligned topic/sentiment/indicator report."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .corpus import IndicatorSeries
from .dtm import DtmModel, natural_to_mean
from .errors import DataError
from .lda import LdaModel, top_word_ids
from .preprocess import BowCorpus
from .sentiment import SentimentSeries, rolling_mean

logger = logging.getLogger(__name__)

LABEL_WORDS = 3
ANALYSIS_WINDOW = (date(2020, 2, 21), date(2020, 6, 6))


@dataclass(frozen=True)
class Period:
    name: str
    start: date
    end: date  # inclusive

    def __contains__(self, day: object) -> bool:
        return isinstance(day, date) and self.start <= day <= self.end


@dataclass(frozen=True)
class PeriodSegmentation:
    """Contiguous, non-overlapping periods covering the analysis window."""

    periods: tuple[Period, ...]

    def __post_init__(self) -> None:
        if not self.periods:
            raise DataError("segmentation needs at least one period")
        for period in self.periods:
            if period.start > period.end:
                raise DataError(f"period {period.name!r} has start after end")
        for left, right in zip(self.periods, self.periods[1:]):
            if right.start != left.end + timedelta(days=1):
                raise DataError("periods must be contiguous and non-overlapping")

    @property
    def start(self) -> date:
        return self.periods[0].start

    @property
    def end(self) -> date:
        return self.periods[-1].end

    def period_of(self, day: date) -> Period:
        for period in self.periods:
            if day in period:
                return period
        raise DataError(f"date {day.isoformat()} outside the segmentation window")

    def window_dates(self) -> list[date]:
        days = []
        day = self.start
        while day <= self.end:
            days.append(day)
            day += timedelta(days=1)
        return days


def default_segmentation() -> PeriodSegmentation:
    """The four policy phases of the 2020-02-21 .. 2020-06-06 window."""
    return PeriodSegmentation(
        periods=(
            Period("Before the lockdown", date(2020, 2, 21), date(2020, 3, 19)),
            Period("Beginning of the lockdown", date(2020, 3, 20), date(2020, 4, 10)),
            Period("During the lockdown", date(2020, 4, 11), date(2020, 5, 10)),
            Period("Re-opening phase", date(2020, 5, 11), date(2020, 6, 6)),
        )
    )


@dataclass(frozen=True, eq=False)
class TopicFrequencySeries:
    """Per (day, topic) tweet attribution counts, plus top-word topic labels.

    Hard mode stores dominant-topic counts that sum to each day's document
    count; soft mode stores summed topic weights with the same marginal.
    """

    start: date
    counts: np.ndarray  # (n_days, K)
    labels: tuple[str, ...]
    hard: bool = True

    def __post_init__(self) -> None:
        if self.counts.ndim != 2 or self.counts.shape[1] != len(self.labels):
            raise DataError("counts/labels shape mismatch")

    @property
    def n_topics(self) -> int:
        return self.counts.shape[1]

    def __len__(self) -> int:
        return self.counts.shape[0]

    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self))]

    def row(self, day: date) -> Optional[np.ndarray]:
        offset = (day - self.start).days
        if 0 <= offset < len(self):
            return self.counts[offset]
        return None


def _lda_labels(model: LdaModel) -> tuple[str, ...]:
    labels = []
    for k in range(model.n_topics):
        ids = top_word_ids(model.phi[k], LABEL_WORDS)
        labels.append("/".join(model.vocab.tokens[i] for i in ids))
    return tuple(labels)


def _dtm_labels(model: DtmModel) -> tuple[str, ...]:
    # label each topic by its across-slice average word distribution
    labels = []
    for k in range(model.n_topics):
        mean_pi = np.mean(
            [natural_to_mean(model.beta_mean[t, k]) for t in range(model.n_slices)], axis=0
        )
        ids = top_word_ids(mean_pi, LABEL_WORDS)
        labels.append("/".join(model.vocab.tokens[i] for i in ids))
    return tuple(labels)


def _dtm_slice_of_day(model: DtmModel, day: date) -> int:
    """Index of the model slice covering ``day`` (slices may be merged days)."""
    slot = 0
    for t, slice_day in enumerate(model.slice_dates):
        if slice_day <= day:
            slot = t
        else:
            break
    return slot


def topic_frequency(
    model: Union[LdaModel, DtmModel], bow: BowCorpus, *, soft: bool = False
) -> TopicFrequencySeries:
    """Attribute each document's day to a topic and count per (day, topic).

    LDA documents go to their dominant theta topic (or contribute their
    full theta row under ``soft``).  Dynamic-model documents go to the
    topic maximizing the multinomial log-likelihood under the covering
    slice's smoothed word distributions.
    """
    n_topics = model.n_topics
    counts = np.zeros((len(bow.slices), n_topics), dtype=np.float64)

    if isinstance(model, LdaModel):
        if bow.n_docs != model.theta.shape[0]:
            raise DataError("model was not fit on this bow corpus")
        doc_index = 0
        for day_idx, (_, docs) in enumerate(bow.slices):
            for _ in docs:
                if soft:
                    counts[day_idx] += model.theta[doc_index]
                else:
                    counts[day_idx, int(np.argmax(model.theta[doc_index]))] += 1.0
                doc_index += 1
    else:
        log_pi_cache: dict[int, np.ndarray] = {}
        for day_idx, (day, docs) in enumerate(bow.slices):
            slot = _dtm_slice_of_day(model, day)
            if slot not in log_pi_cache:
                log_pi_cache[slot] = np.log(
                    np.stack([model.topic_distribution(slot, k) for k in range(n_topics)])
                )
            log_pi = log_pi_cache[slot]
            for doc in docs:
                ids = [tid for tid, _ in doc.pairs]
                weights = np.array([count for _, count in doc.pairs], dtype=np.float64)
                loglik = log_pi[:, ids] @ weights
                if soft:
                    shifted = np.exp(loglik - loglik.max())
                    counts[day_idx] += shifted / shifted.sum()
                else:
                    counts[day_idx, int(np.argmax(loglik))] += 1.0

    # conservation: per-day mass equals the day's document count
    docs_per_day = np.array([len(docs) for _, docs in bow.slices], dtype=np.float64)
    if np.max(np.abs(counts.sum(axis=1) - docs_per_day)) > 1e-6:
        raise DataError("per-day topic attribution does not conserve document counts")
    if not soft:
        counts = counts.astype(np.int64)

    labels = _lda_labels(model) if isinstance(model, LdaModel) else _dtm_labels(model)
    return TopicFrequencySeries(
        start=bow.slices[0][0], counts=counts, labels=labels, hard=not soft
    )


def top_words_by_period(
    bow: BowCorpus, segmentation: PeriodSegmentation, n: int
) -> dict[str, list[str]]:
    """Per period, the n tokens with the highest within-period document
    frequency (ties toward the smaller token id)."""
    if n < 1:
        raise DataError("n must be >= 1")
    period_df: dict[str, Counter[int]] = {p.name: Counter() for p in segmentation.periods}
    for day, docs in bow.slices:
        try:
            period = segmentation.period_of(day)
        except DataError:
            continue  # slices outside the segmentation window do not vote
        for doc in docs:
            period_df[period.name].update(set(doc.token_ids()))
    result: dict[str, list[str]] = {}
    for period in segmentation.periods:
        df = period_df[period.name]
        if not df:
            logger.warning("period %r holds no documents", period.name)
            result[period.name] = []
            continue
        ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))
        result[period.name] = [bow.vocab.tokens[tid] for tid, _ in ranked[:n]]
    return result


@dataclass(frozen=True)
class AlignedRow:
    """One report row; None marks a cell with no underlying data."""

    day: date
    period: str
    topic_counts: Optional[tuple[float, ...]]
    sentiment_raw: Optional[float]
    sentiment_rolling: Optional[float]
    new_cases: Optional[int]
    new_deaths: Optional[int]


@dataclass(frozen=True)
class AlignedReport:
    """Figure-5-style join of all daily series over the segmentation window."""

    agency: str
    rows: tuple[AlignedRow, ...]
    topic_labels: tuple[str, ...]
    segmentation: PeriodSegmentation
    period_top_words: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = self.segmentation.window_dates()
        if [row.day for row in self.rows] != expected:
            raise DataError("report must hold exactly one row per window date")
        for row in self.rows:
            if self.segmentation.period_of(row.day).name != row.period:
                raise DataError("row period inconsistent with the segmentation")


def align(
    tf: TopicFrequencySeries,
    sentiment: SentimentSeries,
    indicators: IndicatorSeries,
    segmentation: PeriodSegmentation,
    *,
    rolling_window: int = 1,
    period_top_words: Optional[dict[str, list[str]]] = None,
    agency: str = "all",
) -> AlignedReport:
    """Outer-join the daily series onto the segmentation window.

    Missing cells stay undefined; the row count always equals the window
    length.  An empty overlap between the window and every series is fatal.
    """
    rolled = rolling_mean(sentiment, rolling_window)
    rows: list[AlignedRow] = []
    any_data = False
    for day in segmentation.window_dates():
        tf_row = tf.row(day)
        indicator = indicators.get(day)
        raw = sentiment.get(day)
        rolling = rolled.get(day)
        if tf_row is not None or indicator is not None or raw is not None:
            any_data = True
        rows.append(
            AlignedRow(
                day=day,
                period=segmentation.period_of(day).name,
                topic_counts=tuple(float(c) for c in tf_row) if tf_row is not None else None,
                sentiment_raw=raw,
                sentiment_rolling=rolling,
                new_cases=indicator[0] if indicator is not None else None,
                new_deaths=indicator[1] if indicator is not None else None,
            )
        )
    if not any_data:
        raise DataError("no series overlaps the segmentation window")
    return AlignedReport(
        agency=agency,
        rows=tuple(rows),
        topic_labels=tf.labels,
        segmentation=segmentation,
        period_top_words=dict(period_top_words or {}),
    )


def _format_cell(value: Optional[float], *, integer: bool = False) -> str:
    if value is None:
        return ""
    if integer or float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _svg_line_chart(
    title: str, days: list[date], values: list[Optional[float]]
) -> str:
    """Minimal standalone SVG line chart; byte-deterministic for fixed input."""
    width, height, pad = 640, 240, 36
    defined = [v for v in values if v is not None]
    lo = min(defined) if defined else 0.0
    hi = max(defined) if defined else 1.0
    if hi == lo:
        hi = lo + 1.0
    n = max(len(values) - 1, 1)

    def x_at(i: int) -> float:
        return pad + (width - 2 * pad) * i / n

    def y_at(v: float) -> float:
        return height - pad - (height - 2 * pad) * (v - lo) / (hi - lo)

    segments: list[list[str]] = []
    current: list[str] = []
    for i, value in enumerate(values):
        if value is None:
            if current:
                segments.append(current)
                current = []
            continue
        current.append(f"{x_at(i):.2f},{y_at(value):.2f}")
    if current:
        segments.append(current)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="18" font-family="monospace" font-size="13">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" '
        'stroke="black" stroke-width="1"/>',
        f'<text x="4" y="{height - pad}" font-family="monospace" font-size="10">{lo:g}</text>',
        f'<text x="4" y="{pad + 4}" font-family="monospace" font-size="10">{hi:g}</text>',
        f'<text x="{pad}" y="{height - 8}" font-family="monospace" font-size="10">'
        f"{days[0].isoformat()}</text>",
        f'<text x="{width - pad - 70}" y="{height - 8}" font-family="monospace" '
        f'font-size="10">{days[-1].isoformat()}</text>',
    ]
    for segment in segments:
        if len(segment) == 1:
            x, y = segment[0].split(",")
            parts.append(f'<circle cx="{x}" cy="{y}" r="2" fill="steelblue"/>')
        else:
            parts.append(
                f'<polyline points="{" ".join(segment)}" fill="none" '
                'stroke="steelblue" stroke-width="1.5"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(
    report: AlignedReport, out_dir: Union[str, Path], *, charts: bool = False
) -> list[Path]:
    """Write the tidy aligned table, the period summary document and,
    optionally, one SVG line chart per series.  Byte-deterministic."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []

    n_topics = len(report.topic_labels)
    header = (
        ["date", "period"]
        + [f"topic_{k}" for k in range(n_topics)]
        + ["sentiment_raw", "sentiment_rolling", "new_cases", "new_deaths"]
    )
    lines = [",".join(header)]
    for row in report.rows:
        topic_cells = (
            [_format_cell(c) for c in row.topic_counts]
            if row.topic_counts is not None
            else [""] * n_topics
        )
        lines.append(
            ",".join(
                [row.day.isoformat(), f'"{row.period}"']
                + topic_cells
                + [
                    _format_cell(row.sentiment_raw),
                    _format_cell(row.sentiment_rolling),
                    _format_cell(row.new_cases, integer=True),
                    _format_cell(row.new_deaths, integer=True),
                ]
            )
        )
    aligned_path = out / "aligned.csv"
    try:
        aligned_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {aligned_path}: {exc}") from exc
    written.append(aligned_path)

    summary_lines = [
        f"agency: {report.agency}",
        f"window: {report.segmentation.start.isoformat()} .. {report.segmentation.end.isoformat()}",
        f"days: {len(report.rows)}",
        "topic_labels: " + "; ".join(f"{k}={label}" for k, label in enumerate(report.topic_labels)),
        "",
    ]
    for period in report.segmentation.periods:
        in_period = [r for r in report.rows if r.period == period.name]
        sentiments = [r.sentiment_raw for r in in_period if r.sentiment_raw is not None]
        cases = sum(r.new_cases for r in in_period if r.new_cases is not None)
        deaths = sum(r.new_deaths for r in in_period if r.new_deaths is not None)
        summary_lines.append(f"[{period.name}] {period.start.isoformat()} .. {period.end.isoformat()}")
        summary_lines.append(f"  days: {len(in_period)}")
        mean_sent = sum(sentiments) / len(sentiments) if sentiments else math.nan
        summary_lines.append(
            "  mean_sentiment: " + (f"{mean_sent:.4f}" if sentiments else "undefined")
        )
        summary_lines.append(f"  total_new_cases: {cases}")
        summary_lines.append(f"  total_new_deaths: {deaths}")
        top = report.period_top_words.get(period.name, [])
        summary_lines.append("  top_words: " + (", ".join(top) if top else "(none)"))
        summary_lines.append("")
    summary_path = out / "summary.txt"
    summary_path.write_text("\n".join(summary_lines), encoding="utf-8")
    written.append(summary_path)

    if charts:
        chart_dir = out / "charts"
        chart_dir.mkdir(parents=True, exist_ok=True)
        days = [row.day for row in report.rows]
        series: list[tuple[str, list[Optional[float]]]] = [
            ("sentiment_raw", [row.sentiment_raw for row in report.rows]),
            ("sentiment_rolling", [row.sentiment_rolling for row in report.rows]),
            ("new_cases", [float(row.new_cases) if row.new_cases is not None else None for row in report.rows]),
            ("new_deaths", [float(row.new_deaths) if row.new_deaths is not None else None for row in report.rows]),
        ]
        for k in range(n_topics):
            series.append(
                (
                    f"topic_{k}",
                    [
                        row.topic_counts[k] if row.topic_counts is not None else None
                        for row in report.rows
                    ],
                )
            )
        for name, values in series:
            path = chart_dir / f"{name}.svg"
            path.write_text(_svg_line_chart(name, days, values), encoding="utf-8")
            written.append(path)
    return written
