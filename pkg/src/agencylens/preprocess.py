"""Text normalization, vocabulary pruning and sparse bag-of-words conversion."""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from .corpus import Corpus, slice_by_day
from .errors import DataError

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
# unicode letters/digits, internal apostrophes allowed, underscores excluded
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")

MIN_TOKEN_LEN = 3
DEFAULT_MIN_DF = 5
SMALL_CORPUS_MIN_DF = 2
SMALL_CORPUS_THRESHOLD = 1000

_SUFFIXES = ("ing", "edly", "ed", "es", "s")  # optional crude suffix stripper


def load_stoplist(path: Union[str, Path, None] = None) -> frozenset[str]:
    """Load a stoplist file (one token per line, ``#`` comments allowed).

    With no path, the bundled English function-word list is used.
    """
    if path is None:
        text = (resources.files("agencylens") / "data" / "stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    tokens = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            tokens.add(word)
    return frozenset(tokens)


def _strip_suffix(token: str) -> str:
    for suffix in _SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= MIN_TOKEN_LEN:
            return token[: -len(suffix)]
    return token


def tokenize(
    text: str,
    stoplist: Optional[frozenset[str]] = None,
    *,
    strip_suffixes: bool = False,
) -> list[str]:
    """Lowercase and split a message into analysis tokens.

    URLs and @-mentions are removed, hashtags keep their word minus the
    ``#``, tokens shorter than three characters and stoplist tokens are
    dropped.  Deterministic; empty output is allowed.
    """
    cleaned = _MENTION_RE.sub(" ", _URL_RE.sub(" ", text.lower()))
    tokens = []
    for token in _TOKEN_RE.findall(cleaned):
        if len(token) < MIN_TOKEN_LEN:
            continue
        if stoplist is not None and token in stoplist:
            continue
        if strip_suffixes:
            token = _strip_suffix(token)
        tokens.append(token)
    return tokens


@dataclass(frozen=True)
class Vocabulary:
    """Dense token <-> id bijection ordered by descending document frequency."""

    tokens: tuple[str, ...]
    doc_freq: tuple[int, ...]
    index: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.tokens) < 2:
            raise DataError("vocabulary needs at least 2 tokens; topic models are undefined below that")
        if len(self.tokens) != len(self.doc_freq):
            raise DataError("tokens and doc_freq length mismatch")
        object.__setattr__(self, "index", {tok: i for i, tok in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id_of(self, token: str) -> int:
        return self.index[token]

    def sha256(self) -> str:
        digest = hashlib.sha256()
        for token, freq in zip(self.tokens, self.doc_freq):
            digest.update(token.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(str(freq).encode("ascii"))
            digest.update(b"\x01")
        return digest.hexdigest()


def build_vocabulary(token_docs: Iterable[Sequence[str]], min_df: int = 1) -> Vocabulary:
    """Retain tokens whose document frequency reaches ``min_df``.

    Ids are assigned by descending document frequency, ties broken
    lexicographically; fewer than two surviving tokens is fatal.
    """
    if min_df < 1:
        raise DataError("min_df must be >= 1")
    df: Counter[str] = Counter()
    for tokens in token_docs:
        df.update(set(tokens))
    survivors = [(token, freq) for token, freq in df.items() if freq >= min_df]
    if len(survivors) < 2:
        raise DataError(
            f"only {len(survivors)} token(s) reach min_df={min_df}; need at least 2"
        )
    survivors.sort(key=lambda item: (-item[1], item[0]))
    tokens, freqs = zip(*survivors)
    return Vocabulary(tokens=tokens, doc_freq=freqs)


@dataclass(frozen=True)
class BowDocument:
    """Sparse (token-id, count) view of one record."""

    source_id: str
    timestamp: datetime
    pairs: tuple[tuple[int, int], ...]  # sorted by token id, counts >= 1

    def total(self) -> int:
        return sum(count for _, count in self.pairs)

    def token_ids(self) -> list[int]:
        return [tid for tid, _ in self.pairs]


@dataclass(frozen=True)
class BowCorpus:
    """Per-day slices of bag-of-words documents over a shared vocabulary."""

    vocab: Vocabulary
    slices: tuple[tuple[date, tuple[BowDocument, ...]], ...]
    dropped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        days = [day for day, _ in self.slices]
        if any(a >= b for a, b in zip(days, days[1:])):
            raise DataError("bow slices must be strictly increasing by date")

    @property
    def n_slices(self) -> int:
        return len(self.slices)

    @property
    def n_docs(self) -> int:
        return sum(len(docs) for _, docs in self.slices)

    def documents(self) -> Iterator[BowDocument]:
        for _, docs in self.slices:
            yield from docs

    def slice_dates(self) -> list[date]:
        return [day for day, _ in self.slices]

    def total_tokens(self) -> int:
        return sum(doc.total() for doc in self.documents())


def _to_pairs(tokens: Sequence[str], vocab: Vocabulary) -> tuple[tuple[int, int], ...]:
    counts = Counter(vocab.index[t] for t in tokens if t in vocab.index)
    return tuple(sorted(counts.items()))


def to_bow(
    corpus: Corpus,
    vocab: Vocabulary,
    stoplist: Optional[frozenset[str]] = None,
    *,
    strip_suffixes: bool = False,
) -> BowCorpus:
    """Convert each record into a BowDocument, mirroring ``slice_by_day`` grouping.

    Records with zero in-vocabulary tokens are dropped and counted.
    """
    dropped = 0
    slices: list[tuple[date, tuple[BowDocument, ...]]] = []
    for day, indices in slice_by_day(corpus):
        docs: list[BowDocument] = []
        for idx in indices:
            record = corpus.records[idx]
            pairs = _to_pairs(
                tokenize(record.text, stoplist, strip_suffixes=strip_suffixes), vocab
            )
            if not pairs:
                dropped += 1
                continue
            docs.append(BowDocument(source_id=record.id, timestamp=record.timestamp, pairs=pairs))
        slices.append((day, tuple(docs)))
    return BowCorpus(vocab=vocab, slices=tuple(slices), dropped=dropped)


def default_min_df(n_docs: int) -> int:
    """min_df = 5, scaled down to 2 for corpora under 1,000 documents."""
    return SMALL_CORPUS_MIN_DF if n_docs < SMALL_CORPUS_THRESHOLD else DEFAULT_MIN_DF


def build_bow_corpus(
    corpus: Corpus,
    *,
    min_df: Optional[int] = None,
    stoplist: Optional[frozenset[str]] = None,
    strip_suffixes: bool = False,
) -> BowCorpus:
    """One-shot pipeline: tokenize, build the pruned vocabulary, convert."""
    if stoplist is None:
        stoplist = load_stoplist()
    token_docs = [
        tokenize(record.text, stoplist, strip_suffixes=strip_suffixes)
        for record in corpus.records
    ]
    if min_df is None:
        min_df = default_min_df(len(corpus))
    vocab = build_vocabulary(token_docs, min_df=min_df)
    return to_bow(corpus, vocab, stoplist, strip_suffixes=strip_suffixes)
