"""agencylens: batch analytics for agency crisis communication.

Time-sliced topic mining (static LDA and a Gaussian state-space dynamic
topic model), lexicon sentiment over time, and alignment of both against
daily outbreak-indicator series into period-segmented reports.
"""

from .chronology import (
    AlignedReport,
    PeriodSegmentation,
    TopicFrequencySeries,
    align,
    default_segmentation,
    emit_report,
    top_words_by_period,
    topic_frequency,
)
from .corpus import (
    Corpus,
    IndicatorSeries,
    TweetRecord,
    ingest_indicators,
    ingest_tweets,
    slice_by_day,
)
from .dtm import (
    ChainObservations,
    DtmModel,
    chain_logdensity,
    fit_dtm,
    kalman_smooth,
    mean_to_natural,
    natural_to_mean,
    topic_trajectory,
)
from .errors import AgencyLensError, ConfigError, DataError, MissingArtifactError
from .lda import (
    CoherenceReport,
    LdaModel,
    coherence,
    dominant_topic,
    fit_lda,
    select_k,
    topic_top_words,
)
from .preprocess import (
    BowCorpus,
    BowDocument,
    Vocabulary,
    build_bow_corpus,
    build_vocabulary,
    to_bow,
    tokenize,
)
from .sentiment import (
    SentimentLexicon,
    SentimentSeries,
    daily_sentiment,
    load_lexicon,
    rolling_mean,
    score_text,
)

__version__ = "0.1.0"

__all__ = [
    "AgencyLensError",
    "AlignedReport",
    "BowCorpus",
    "BowDocument",
    "ChainObservations",
    "CoherenceReport",
    "ConfigError",
    "Corpus",
    "DataError",
    "DtmModel",
    "IndicatorSeries",
    "LdaModel",
    "MissingArtifactError",
    "PeriodSegmentation",
    "SentimentLexicon",
    "SentimentSeries",
    "TopicFrequencySeries",
    "TweetRecord",
    "Vocabulary",
    "align",
    "build_bow_corpus",
    "build_vocabulary",
    "chain_logdensity",
    "coherence",
    "daily_sentiment",
    "default_segmentation",
    "dominant_topic",
    "emit_report",
    "fit_dtm",
    "fit_lda",
    "ingest_indicators",
    "ingest_tweets",
    "kalman_smooth",
    "load_lexicon",
    "mean_to_natural",
    "natural_to_mean",
    "rolling_mean",
    "score_text",
    "select_k",
    "slice_by_day",
    "to_bow",
    "tokenize",
    "top_words_by_period",
    "topic_frequency",
    "topic_top_words",
    "topic_trajectory",
]
