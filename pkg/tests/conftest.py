import io
import json
from datetime import date, datetime, timezone

import pytest

from agencylens.corpus import Corpus, TweetRecord
from agencylens.preprocess import build_vocabulary, to_bow
from agencylens.sentiment import SentimentLexicon


def make_record(rid, iso_ts, text, agency="WHO"):
    stamp = datetime.fromisoformat(iso_ts)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return TweetRecord(id=rid, timestamp=stamp, agency=agency, text=text)


def make_corpus(*specs, agency="WHO"):
    """specs: (id, iso timestamp, text) triples, any order."""
    records = sorted((make_record(*s, agency=agency) for s in specs), key=lambda r: r.timestamp)
    return Corpus(agency=agency, records=tuple(records))


def jsonl(*objs):
    return io.StringIO("".join(json.dumps(o) + "\n" for o in objs))


def tweet_line(rid, created_at, text, agency="WHO"):
    return {"id": rid, "created_at": created_at, "agency": agency, "text": text}


def bow_from_texts(texts, min_df=1, base_day=date(2020, 3, 1)):
    """Single-day bow corpus from whitespace-ready texts."""
    corpus = make_corpus(
        *(
            (f"t{i}", f"{base_day.isoformat()}T10:{i // 60:02d}:{i % 60:02d}", text)
            for i, text in enumerate(texts)
        )
    )
    vocab = build_vocabulary([t.split() for t in texts], min_df=min_df)
    return to_bow(corpus, vocab, stoplist=None)


@pytest.fixture
def simple_lexicon():
    # raw integers over 5: good -> +1.0, bad -> -1.0, calm -> +0.4
    return SentimentLexicon(valences={"good": 1.0, "bad": -1.0, "calm": 0.4})
