"""Ingestion of archived tweet streams and daily outbreak-indicator tables.

Archives are UTF-8 line-delimited JSON objects with string fields ``id``,
``created_at`` (ISO-8601), ``agency`` and ``text``.  Indicator files are
comma-delimited with header ``date,new_cases,new_deaths``.  Everything built
here is immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

from .errors import DataError

logger = logging.getLogger(__name__)

Source = Union[str, Path, IO[str], Iterable[str]]


@dataclass(frozen=True)
class TweetRecord:
    """One timestamped agency message."""

    id: str
    timestamp: datetime  # timezone-aware, UTC
    agency: str
    text: str

    def day(self) -> date:
        return self.timestamp.date()


@dataclass(frozen=True)
class Corpus:
    """Time-ordered tweet records for one agency label (or ``"all"``)."""

    agency: str
    records: tuple[TweetRecord, ...]

    def __post_init__(self) -> None:
        if not self.records:
            raise DataError("a corpus must contain at least one record")
        times = [r.timestamp for r in self.records]
        if any(a > b for a, b in zip(times, times[1:])):
            raise DataError("corpus records must be sorted by timestamp")

    @property
    def span(self) -> tuple[date, date]:
        return self.records[0].day(), self.records[-1].day()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TweetRecord]:
        return iter(self.records)


@dataclass(frozen=True)
class IngestStats:
    """Bookkeeping for one ingestion pass."""

    lines_read: int = 0
    kept: int = 0
    skipped_malformed: int = 0
    skipped_duplicate: int = 0
    skipped_window: int = 0
    skipped_filtered: int = 0

    @property
    def skipped_count(self) -> int:
        return self.skipped_malformed


@dataclass(frozen=True)
class IndicatorSeries:
    """Contiguous daily new-case / new-death counts."""

    start: date
    new_cases: tuple[int, ...]
    new_deaths: tuple[int, ...]
    fill_count: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if len(self.new_cases) != len(self.new_deaths) or not self.new_cases:
            raise DataError("indicator series must hold equal-length, non-empty count sequences")
        if any(c < 0 for c in self.new_cases) or any(d < 0 for d in self.new_deaths):
            raise DataError("indicator counts must be nonnegative")

    @property
    def end(self) -> date:
        return self.start + timedelta(days=len(self.new_cases) - 1)

    def __len__(self) -> int:
        return len(self.new_cases)

    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self.new_cases))]

    def get(self, day: date) -> Optional[tuple[int, int]]:
        """Counts for ``day``, or None outside the covered range."""
        offset = (day - self.start).days
        if 0 <= offset < len(self.new_cases):
            return self.new_cases[offset], self.new_deaths[offset]
        return None


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    text = raw.strip()
    if text.endswith(("Z", "z")):  # Python 3.10 fromisoformat rejects the Z suffix
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        return stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


def _iter_lines(source: Source) -> tuple[Iterable[str], Optional[IO[str]]]:
    if isinstance(source, (str, Path)):
        handle = open(source, "r", encoding="utf-8")
        return handle, handle
    return source, None


def _parse_line(line: str, lineno: int) -> TweetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise DataError(f"line {lineno}: record is not an object")
    for key in ("id", "created_at", "agency", "text"):
        if not isinstance(obj.get(key), str):
            raise DataError(f"line {lineno}: missing or non-string field {key!r}")
    try:
        stamp = parse_timestamp(obj["created_at"])
    except ValueError as exc:
        raise DataError(f"line {lineno}: unparseable created_at {obj['created_at']!r}") from exc
    text = obj["text"]
    if not text.strip():
        raise DataError(f"line {lineno}: empty text")
    return TweetRecord(id=obj["id"], timestamp=stamp, agency=obj["agency"], text=text)


def ingest_tweets(
    source: Source,
    agency_filter: Optional[str] = None,
    *,
    window: Optional[tuple[date, date]] = None,
    strict: bool = False,
    drop_retweets: bool = False,
) -> tuple[Corpus, IngestStats]:
    """Read an archive into a validated, timestamp-sorted :class:`Corpus`.

    Malformed lines abort in strict mode and are skipped (and counted) in the
    default lenient mode.  Records outside ``window`` are always dropped with
    a counted warning; duplicate ids are rejected.  An empty result is fatal.
    """
    lines, handle = _iter_lines(source)
    kept: list[TweetRecord] = []
    seen_ids: set[str] = set()
    lines_read = malformed = duplicates = windowed = filtered = 0
    try:
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            lines_read += 1
            try:
                record = _parse_line(line, lineno)
            except DataError as exc:
                if strict:
                    raise
                malformed += 1
                logger.warning("skipping malformed record: %s", exc)
                continue
            if agency_filter is not None and record.agency != agency_filter:
                filtered += 1
                continue
            if drop_retweets and record.text.lstrip().startswith(("RT @", "@")):
                filtered += 1  # retweet / reply conventions
                continue
            if window is not None and not (window[0] <= record.day() <= window[1]):
                windowed += 1
                logger.warning("line %d: record %s outside analysis window", lineno, record.id)
                continue
            if record.id in seen_ids:
                if strict:
                    raise DataError(f"line {lineno}: duplicate record id {record.id!r}")
                duplicates += 1
                logger.warning("line %d: duplicate record id %s", lineno, record.id)
                continue
            seen_ids.add(record.id)
            kept.append(record)
    finally:
        if handle is not None:
            handle.close()

    if not kept:
        raise DataError("ingestion produced an empty corpus")
    kept.sort(key=lambda r: r.timestamp)  # stable: equal timestamps keep archive order
    stats = IngestStats(
        lines_read=lines_read,
        kept=len(kept),
        skipped_malformed=malformed,
        skipped_duplicate=duplicates,
        skipped_window=windowed,
        skipped_filtered=filtered,
    )
    agency = agency_filter if agency_filter is not None else "all"
    return Corpus(agency=agency, records=tuple(kept)), stats


def write_tweets(corpus: Corpus, destination: Union[str, Path, IO[str]]) -> None:
    """Serialize a corpus back to the archive format (ingestion round-trips)."""
    own = isinstance(destination, (str, Path))
    out = open(destination, "w", encoding="utf-8") if own else destination
    try:
        for record in corpus.records:
            obj = {
                "id": record.id,
                "created_at": record.timestamp.isoformat(),
                "agency": record.agency,
                "text": record.text,
            }
            out.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
    finally:
        if own:
            out.close()


def ingest_indicators(source: Source) -> IndicatorSeries:
    """Read a ``date,new_cases,new_deaths`` table into a contiguous daily series.

    Interior missing dates are zero-filled and counted; duplicate dates and
    negative counts are fatal.
    """
    lines, handle = _iter_lines(source)
    try:
        if isinstance(lines, io.TextIOBase) or hasattr(lines, "read"):
            reader = csv.reader(lines)
        else:
            reader = csv.reader(list(lines))
        rows = list(reader)
    finally:
        if handle is not None:
            handle.close()
    if not rows:
        raise DataError("indicator file is empty")
    header = [h.strip().lower() for h in rows[0]]
    if header != ["date", "new_cases", "new_deaths"]:
        raise DataError(f"unexpected indicator header {rows[0]!r}")

    by_date: dict[date, tuple[int, int]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise DataError(f"line {lineno}: expected 3 columns, found {len(row)}")
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError as exc:
            raise DataError(f"line {lineno}: unparseable date {row[0]!r}") from exc
        try:
            cases, deaths = int(row[1]), int(row[2])
        except ValueError as exc:
            raise DataError(f"line {lineno}: counts must be integers") from exc
        if cases < 0 or deaths < 0:
            raise DataError(f"line {lineno}: negative count")
        if day in by_date:
            raise DataError(f"line {lineno}: duplicate date {day.isoformat()}")
        by_date[day] = (cases, deaths)

    if not by_date:
        raise DataError("indicator file holds no data rows")
    first, last = min(by_date), max(by_date)
    cases_seq: list[int] = []
    deaths_seq: list[int] = []
    fill_count = 0
    day = first
    while day <= last:
        if day in by_date:
            c, d = by_date[day]
        else:
            c, d = 0, 0
            fill_count += 1
            logger.warning("indicator gap on %s filled with zeros", day.isoformat())
        cases_seq.append(c)
        deaths_seq.append(d)
        day += timedelta(days=1)
    return IndicatorSeries(
        start=first,
        new_cases=tuple(cases_seq),
        new_deaths=tuple(deaths_seq),
        fill_count=fill_count,
    )


def write_indicators(series: IndicatorSeries, destination: Union[str, Path, IO[str]]) -> None:
    own = isinstance(destination, (str, Path))
    out = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["date", "new_cases", "new_deaths"])
        for day, cases, deaths in zip(series.dates(), series.new_cases, series.new_deaths):
            writer.writerow([day.isoformat(), cases, deaths])
    finally:
        if own:
            out.close()


def slice_by_day(corpus: Corpus) -> list[tuple[date, list[int]]]:
    """Partition record indices into one slice per UTC calendar day.

    Every day inside the corpus span appears, empty days as empty slices;
    within a slice the original (timestamp) order is preserved.
    """
    first, last = corpus.span
    slices: list[tuple[date, list[int]]] = []
    day = first
    while day <= last:
        slices.append((day, []))
        day += timedelta(days=1)
    for index, record in enumerate(corpus.records):
        slices[(record.day() - first).days][1].append(index)
    return slices
