from collections import Counter

import pytest
from hypothesis import given, strategies as st

from agencylens.errors import DataError
from agencylens.preprocess import (
    build_bow_corpus,
    build_vocabulary,
    default_min_df,
    load_stoplist,
    to_bow,
    tokenize,
)

from conftest import bow_from_texts, make_corpus


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_url_mention_hashtag():
    assert tokenize("Wear masks! https://t.co/x @WHO #COVID19") == ["wear", "masks", "covid19"]


def test_tokenize_keeps_repeats():
    assert tokenize("Social distancing, social distancing.") == [
        "social", "distancing", "social", "distancing",
    ]


def test_tokenize_short_and_stoplist():
    stoplist = frozenset({"the", "and"})
    assert tokenize("The cat and a dog ran far", stoplist) == ["cat", "dog", "ran", "far"]


def test_tokenize_suffix_strip_flag():
    assert tokenize("testing tested tests", strip_suffixes=True) == ["test", "test", "test"]


def test_vocabulary_fatal_below_two_tokens():
    docs = [["a-token"], ["a-token"], ["b-token"]]
    with pytest.raises(DataError, match="min_df=2"):
        build_vocabulary(docs, min_df=2)


def test_vocabulary_ids_by_doc_frequency():
    docs = [["masks", "home"], ["masks"], ["home", "masks"]]
    vocab = build_vocabulary(docs, min_df=2)
    # hand-count: df(masks) = 3, df(home) = 2
    assert vocab.size == 2
    assert vocab.id_of("masks") == 0
    assert vocab.id_of("home") == 1
    assert vocab.doc_freq == (3, 2)


def test_vocabulary_min_df_one_keeps_everything():
    docs = [["aaa", "bbb"], ["ccc"], ["aaa"]]
    vocab = build_vocabulary(docs, min_df=1)
    assert set(vocab.tokens) == {"aaa", "bbb", "ccc"}


def test_vocabulary_tie_break_lexicographic():
    docs = [["zebra", "apple"], ["zebra", "apple"]]
    vocab = build_vocabulary(docs, min_df=1)
    assert vocab.tokens == ("apple", "zebra")


@given(
    st.lists(
        st.lists(st.sampled_from(["alpha", "beta", "gamma", "delta", "omega"]), min_size=1, max_size=6),
        min_size=2,
        max_size=20,
    ),
    st.integers(min_value=1, max_value=4),
)
def test_vocabulary_min_df_monotone(docs, min_df):
    def size_at(cut):
        try:
            return build_vocabulary(docs, min_df=cut).size
        except DataError:
            return 0

    assert size_at(min_df + 1) <= size_at(min_df)


def test_to_bow_counts_and_oov_drop():
    docs = [["masks", "home"], ["masks"], ["home", "masks"]]
    vocab = build_vocabulary(docs, min_df=2)
    corpus = make_corpus(
        ("a", "2020-03-01T10:00:00", "masks masks home"),
        ("b", "2020-03-01T11:00:00", "unrelated words entirely"),
    )
    bow = to_bow(corpus, vocab)
    assert bow.n_docs == 1
    assert bow.dropped == 1
    (doc,) = list(bow.documents())
    assert doc.pairs == ((0, 2), (1, 1))  # (masks, 2), (home, 1)


def test_to_bow_partition_property():
    texts = [f"word{i % 3} word{(i + 1) % 3}" for i in range(9)]
    bow = bow_from_texts(texts)
    assert bow.n_docs == 9
    assert bow.dropped == 0
    assert sum(len(docs) for _, docs in bow.slices) == 9


def test_bow_round_trip_recount():
    texts = ["apple apple pear", "pear plum", "plum plum plum apple"]
    bow = bow_from_texts(texts)
    for doc, text in zip(bow.documents(), texts):
        decoded = Counter()
        for token_id, count in doc.pairs:
            decoded[bow.vocab.tokens[token_id]] += count
        assert decoded == Counter(text.split())


def test_determinism_bit_identical():
    texts = ["apple pear plum", "pear pear apple", "plum apple"]
    first = bow_from_texts(texts)
    second = bow_from_texts(texts)
    assert first.vocab == second.vocab
    assert first.slices == second.slices


def test_default_min_df_scaling():
    assert default_min_df(500) == 2
    assert default_min_df(4434) == 5


def test_build_bow_corpus_uses_stoplist():
    corpus = make_corpus(
        ("a", "2020-03-01T10:00:00", "the masks and the masks protect"),
        ("b", "2020-03-01T11:00:00", "masks protect people"),
        ("c", "2020-03-01T12:00:00", "people wear masks"),
    )
    bow = build_bow_corpus(corpus, min_df=2)
    assert "the" not in bow.vocab
    assert "masks" in bow.vocab


def test_stoplist_file_with_comments(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# a comment\nfoo\nbar # trailing\n\nBAZ\n", encoding="utf-8")
    stoplist = load_stoplist(path)
    assert stoplist == frozenset({"foo", "bar", "baz"})
