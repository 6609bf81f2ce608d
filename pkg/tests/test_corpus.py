import io
from datetime import date, timedelta

import pytest
from hypothesis import given, strategies as st

from agencylens.corpus import (
    ingest_indicators,
    ingest_tweets,
    slice_by_day,
    write_tweets,
)
from agencylens.errors import DataError

from conftest import jsonl, make_corpus, tweet_line


def test_ingest_three_lines_count_and_span():
    source = jsonl(
        tweet_line("a", "2020-03-02T10:00:00Z", "stay home"),
        tweet_line("b", "2020-03-01T09:00:00Z", "wash hands"),
        tweet_line("c", "2020-03-05T12:30:00Z", "wear masks"),
    )
    corpus, stats = ingest_tweets(source)
    assert len(corpus) == 3
    assert stats.kept == 3
    assert corpus.span == (date(2020, 3, 1), date(2020, 3, 5))
    assert [r.id for r in corpus.records] == ["b", "a", "c"]


def test_ingest_lenient_skips_bad_date():
    source = jsonl(
        tweet_line("a", "2020-03-02T10:00:00Z", "stay home"),
        tweet_line("b", "not-a-date", "wash hands"),
        tweet_line("c", "2020-03-05T12:30:00Z", "wear masks"),
    )
    corpus, stats = ingest_tweets(source)
    assert len(corpus) == 2
    assert stats.skipped_count == 1


def test_ingest_strict_aborts_on_bad_line():
    source = jsonl(
        tweet_line("a", "2020-03-02T10:00:00Z", "stay home"),
        tweet_line("b", "not-a-date", "wash hands"),
    )
    with pytest.raises(DataError, match="line 2"):
        ingest_tweets(source, strict=True)


def test_ingest_reproduces_analysis_window_span():
    source = jsonl(
        tweet_line("first", "2020-02-21T00:10:00Z", "first message"),
        tweet_line("mid", "2020-04-15T12:00:00Z", "middle message"),
        tweet_line("last", "2020-06-06T23:50:00Z", "last message"),
    )
    corpus, _ = ingest_tweets(source)
    assert corpus.span == (date(2020, 2, 21), date(2020, 6, 6))


def test_ingest_duplicate_ids_rejected():
    lines = [
        tweet_line("a", "2020-03-02T10:00:00Z", "one"),
        tweet_line("a", "2020-03-03T10:00:00Z", "two"),
    ]
    corpus, stats = ingest_tweets(jsonl(*lines))
    assert len(corpus) == 1
    assert stats.skipped_duplicate == 1
    with pytest.raises(DataError, match="duplicate"):
        ingest_tweets(jsonl(*lines), strict=True)


def test_ingest_window_drop_is_counted():
    source = jsonl(
        tweet_line("a", "2020-01-01T10:00:00Z", "too early"),
        tweet_line("b", "2020-03-03T10:00:00Z", "in window"),
    )
    corpus, stats = ingest_tweets(source, window=(date(2020, 2, 21), date(2020, 6, 6)))
    assert len(corpus) == 1
    assert stats.skipped_window == 1


def test_ingest_agency_filter():
    source = jsonl(
        tweet_line("a", "2020-03-02T10:00:00Z", "one", agency="WHO"),
        tweet_line("b", "2020-03-03T10:00:00Z", "two", agency="CDC"),
    )
    corpus, stats = ingest_tweets(source, "CDC")
    assert corpus.agency == "CDC"
    assert [r.id for r in corpus.records] == ["b"]
    assert stats.skipped_filtered == 1


def test_ingest_empty_result_is_fatal():
    with pytest.raises(DataError, match="empty"):
        ingest_tweets(jsonl(tweet_line("a", "nope", "x")))


def test_ingest_round_trip_identity():
    corpus, _ = ingest_tweets(
        jsonl(
            tweet_line("a", "2020-03-02T10:00:00+00:00", "stay home"),
            tweet_line("b", "2020-03-04T09:00:00+00:00", "wash hands"),
        )
    )
    buffer = io.StringIO()
    write_tweets(corpus, buffer)
    buffer.seek(0)
    again, _ = ingest_tweets(buffer)
    assert again == corpus


def test_indicators_paper_peak_values():
    source = io.StringIO(
        "date,new_cases,new_deaths\n2020-04-09,33000,1900\n2020-04-10,40000,2500\n"
    )
    series = ingest_indicators(source)
    assert series.get(date(2020, 4, 10)) == (40000, 2500)
    assert series.get(date(2020, 4, 9)) == (33000, 1900)


def test_indicators_single_row():
    series = ingest_indicators(io.StringIO("date,new_cases,new_deaths\n2020-04-09,10,1\n"))
    assert len(series) == 1
    assert series.start == series.end == date(2020, 4, 9)


def test_indicators_gap_fill():
    source = io.StringIO(
        "date,new_cases,new_deaths\n2020-04-01,5,1\n2020-04-03,7,2\n"
    )
    series = ingest_indicators(source)
    assert series.get(date(2020, 4, 2)) == (0, 0)
    assert series.fill_count == 1
    assert len(series) == 3


def test_indicators_negative_count_fatal():
    with pytest.raises(DataError, match="negative"):
        ingest_indicators(io.StringIO("date,new_cases,new_deaths\n2020-04-01,-5,1\n"))


def test_indicators_duplicate_date_fatal():
    source = io.StringIO(
        "date,new_cases,new_deaths\n2020-04-01,5,1\n2020-04-01,6,1\n"
    )
    with pytest.raises(DataError, match="duplicate"):
        ingest_indicators(source)


def test_slice_single_day():
    corpus = make_corpus(
        ("a", "2020-03-01T08:00:00", "x"),
        ("b", "2020-03-01T09:00:00", "y"),
        ("c", "2020-03-01T10:00:00", "z"),
    )
    slices = slice_by_day(corpus)
    assert len(slices) == 1
    assert slices[0] == (date(2020, 3, 1), [0, 1, 2])


def test_slice_empty_middle_day():
    corpus = make_corpus(
        ("a", "2020-02-21T08:00:00", "x"),
        ("b", "2020-02-23T09:00:00", "y"),
    )
    slices = slice_by_day(corpus)
    assert [day for day, _ in slices] == [date(2020, 2, 21), date(2020, 2, 22), date(2020, 2, 23)]
    assert slices[1][1] == []


def test_slice_count_over_paper_window():
    corpus = make_corpus(
        ("a", "2020-02-21T08:00:00", "first"),
        ("b", "2020-06-06T09:00:00", "last"),
    )
    slices = slice_by_day(corpus)
    # independent calendar enumeration: count days month by month
    # Feb 21-29 (leap year) = 9, Mar = 31, Apr = 30, May = 31, Jun 1-6 = 6
    assert 9 + 31 + 30 + 31 + 6 == 107
    assert len(slices) == 107


@given(
    st.lists(
        st.tuples(st.integers(min_value=0, max_value=30), st.integers(min_value=0, max_value=23)),
        min_size=1,
        max_size=40,
    )
)
def test_slice_partition_and_order_property(day_hours):
    base = date(2020, 3, 1)
    specs = [
        (f"r{i}", f"{(base + timedelta(days=d)).isoformat()}T{h:02d}:00:00", f"text {i}")
        for i, (d, h) in enumerate(day_hours)
    ]
    corpus = make_corpus(*specs)
    slices = slice_by_day(corpus)
    # partition: each record in exactly one slice
    assert sum(len(ix) for _, ix in slices) == len(corpus)
    seen = [i for _, ix in slices for i in ix]
    assert sorted(seen) == list(range(len(corpus)))
    # dates strictly increasing, within-slice index (timestamp) order preserved
    days = [day for day, _ in slices]
    assert days == sorted(set(days))
    assert (days[-1] - days[0]).days + 1 == len(days)
    for day, ix in slices:
        assert ix == sorted(ix)
        for i in ix:
            assert corpus.records[i].day() == day
