import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from agencylens.errors import DataError
from agencylens.sentiment import (
    SentimentLexicon,
    SentimentSeries,
    daily_sentiment,
    load_lexicon,
    rolling_mean,
    score_text,
)

from conftest import make_corpus


def series(start, values):
    """values: floats, None for undefined days."""
    from datetime import date

    means = tuple(math.nan if v is None else float(v) for v in values)
    counts = tuple(0 if v is None else 1 for v in values)
    return SentimentSeries(start=date(2020, 4, 1), means=means, counts=counts)


def brute_force_rolling(values, window):
    """Oracle: re-scan every window in chronological order."""
    out = []
    for t in range(len(values)):
        seen = [v for v in values[max(0, t - window + 1): t + 1] if v is not None]
        if not seen:
            out.append(None)
        else:
            total = 0.0
            for v in seen:
                total += v
            out.append(total / len(seen))
    return out


def test_score_empty_text(simple_lexicon):
    assert score_text("", simple_lexicon) == 0.0


def test_score_hand_average(simple_lexicon):
    # (1 + 1 - 1) / 3, exactly
    assert score_text("good good bad", simple_lexicon) == pytest.approx(
        float(Fraction(1, 3)), abs=1e-15
    )


def test_score_no_matches(simple_lexicon):
    assert score_text("nothing matches here", simple_lexicon) == 0.0


def test_score_negation_flag(simple_lexicon):
    assert score_text("not good", simple_lexicon, negation=True) == -1.0
    assert score_text("not good", simple_lexicon) == 1.0


def test_bundled_lexicon_normalized():
    lexicon = load_lexicon()
    assert len(lexicon) > 100
    assert all(-1.0 <= v <= 1.0 for v in lexicon.valences.values())
    assert lexicon.valences["good"] == 0.6  # raw 3 over 5


def test_lexicon_rejects_out_of_range(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("good\t9\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"\[-5, 5\]"):
        load_lexicon(path)


def test_lexicon_rejects_non_integer(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("good\t1.5\n", encoding="utf-8")
    with pytest.raises(DataError, match="integer"):
        load_lexicon(path)


def test_daily_single_tweet(simple_lexicon):
    # calm(0.4) + good(1.0) averaged -> 0.7; one-tweet day carries the score
    corpus = make_corpus(("a", "2020-04-01T10:00:00", "calm good"))
    result = daily_sentiment(corpus, simple_lexicon)
    assert result.means == (pytest.approx(0.7),)
    assert result.counts == (1,)


def test_daily_mean_of_two(simple_lexicon):
    corpus = make_corpus(
        ("a", "2020-04-01T10:00:00", "good"),
        ("b", "2020-04-01T11:00:00", "bad"),
    )
    result = daily_sentiment(corpus, simple_lexicon)
    assert result.means == (0.0,)
    assert result.counts == (2,)


def test_daily_empty_day_is_undefined(simple_lexicon):
    corpus = make_corpus(
        ("a", "2020-04-01T10:00:00", "good"),
        ("b", "2020-04-03T11:00:00", "bad"),
    )
    result = daily_sentiment(corpus, simple_lexicon)
    assert result.means[0] == 1.0
    assert math.isnan(result.means[1])
    assert result.counts[1] == 0
    assert result.means[2] == -1.0
    assert result.get(result.dates()[1]) is None


def test_rolling_window_one_is_identity():
    base = series("2020-04-01", [0.5, None, -0.25, 1.0])
    rolled = rolling_mean(base, 1)
    assert rolled.means[0] == base.means[0]
    assert math.isnan(rolled.means[1])
    assert rolled.means[2] == base.means[2]
    assert rolled.means[3] == base.means[3]


def test_rolling_hand_oracle():
    base = series("2020-04-01", [1.0, 2.0, 3.0])
    rolled = rolling_mean(base, 2)
    assert rolled.means == (1.0, 1.5, 2.5)


def test_rolling_skips_undefined_days():
    base = series("2020-04-01", [1.0, None, 3.0])
    rolled = rolling_mean(base, 2)
    assert rolled.means == (1.0, 1.0, 3.0)
    assert rolled.counts == (1, 1, 1)


def test_rolling_all_gap_window_undefined():
    base = series("2020-04-01", [1.0, None, None])
    rolled = rolling_mean(base, 2)
    assert math.isnan(rolled.means[2])
    assert rolled.counts[2] == 0


def test_rolling_rejects_bad_window():
    base = series("2020-04-01", [1.0])
    with pytest.raises(DataError, match="window_days"):
        rolling_mean(base, 0)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.one_of(st.none(), st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)),
        min_size=1,
        max_size=30,
    ),
    st.integers(min_value=1, max_value=10),
)
def test_rolling_matches_brute_force_exactly(values, window):
    if all(v is None for v in values):
        values = values + [0.25]
    base = series("2020-04-01", values)
    rolled = rolling_mean(base, window)
    oracle = brute_force_rolling(list(values), window)
    for got, want in zip(rolled.means, oracle):
        if want is None:
            assert math.isnan(got)
        else:
            assert got == want  # bit-exact: same chronological summation
    # boundedness survives the windowing
    assert all(math.isnan(m) or -1.0 <= m <= 1.0 for m in rolled.means)


def test_shift_equivariance():
    # single-token tweets: per-tweet score equals that token's valence, so a
    # lexicon shifted by c shifts every daily and rolling mean by exactly c
    corpus = make_corpus(
        ("a", "2020-04-01T10:00:00", "good"),
        ("b", "2020-04-02T10:00:00", "bad"),
        ("c", "2020-04-04T10:00:00", "calm"),
    )
    shift = 0.25
    base_lex = SentimentLexicon(valences={"good": 0.5, "bad": -0.5, "calm": 0.25})
    shifted_lex = SentimentLexicon(
        valences={t: v + shift for t, v in base_lex.valences.items()}
    )
    base = daily_sentiment(corpus, base_lex)
    shifted = daily_sentiment(corpus, shifted_lex)
    for b, s in zip(base.means, shifted.means):
        if math.isnan(b):
            assert math.isnan(s)
        else:
            assert s == pytest.approx(b + shift, abs=1e-12)
    for b, s in zip(rolling_mean(base, 3).means, rolling_mean(shifted, 3).means):
        if math.isnan(b):
            assert math.isnan(s)
        else:
            assert s == pytest.approx(b + shift, abs=1e-12)


def test_constant_series_fixed_point():
    base = series("2020-04-01", [0.25] * 7)
    for window in (1, 2, 3, 7, 10):
        assert rolling_mean(base, window).means == base.means


def test_boundedness_on_bundled_lexicon():
    lexicon = load_lexicon()
    corpus = make_corpus(
        ("a", "2020-04-01T10:00:00", "terrible awful bad sad crisis death"),
        ("b", "2020-04-01T11:00:00", "wonderful great win love hope"),
    )
    result = daily_sentiment(corpus, lexicon)
    assert all(-1.0 <= m <= 1.0 for m in result.means if not math.isnan(m))
