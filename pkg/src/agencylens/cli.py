"""Subcommand CLI wiring the pipeline end to end.

Commands exchange artifacts through the output directory: ``ingest``
persists the normalized corpus and indicator series, ``fit-lda`` /
``fit-dtm`` persist models, ``sentiment`` the daily series, and
``report`` joins everything.  ``report --all`` runs the whole chain in
one process.  Exit codes: 0 success, 1 config error, 2 missing upstream
artifact, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import chronology, dtm, lda, sentiment as sentiment_mod
from .config import CONFIG_ECHO_NAME, RunConfig, build_config, parse_config_file
from .corpus import (
    Corpus,
    ingest_indicators,
    ingest_tweets,
    write_indicators,
    write_tweets,
)
from .errors import ConfigError, DataError, MissingArtifactError
from .preprocess import build_bow_corpus, load_stoplist

logger = logging.getLogger(__name__)

CORPUS_NAME = "corpus.jsonl"
CORPUS_SUMMARY_NAME = "corpus_summary.json"
INDICATORS_NAME = "indicators.csv"
LDA_MODEL_NAME = "lda_model.json"
COHERENCE_NAME = "coherence.json"
DTM_MODEL_NAME = "dtm_model.json"
SENTIMENT_NAME = "sentiment.csv"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING = 2
EXIT_DATA = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse usage errors are config errors
        raise ConfigError(message)


def _echo_config(config: RunConfig) -> None:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / CONFIG_ECHO_NAME).write_text(config.to_key_values(), encoding="utf-8")


def _artifact(config: RunConfig, name: str, hint: str) -> Path:
    path = Path(config.out) / name
    if not path.exists():
        raise MissingArtifactError(f"missing {path}; run `agencylens {hint}` first")
    return path


def _load_corpus(config: RunConfig) -> Corpus:
    path = _artifact(config, CORPUS_NAME, "ingest")
    corpus, _ = ingest_tweets(path, None, strict=True)
    agencies = {record.agency for record in corpus.records}
    if len(agencies) == 1:  # restore the label a filtered ingest produced
        corpus = Corpus(agency=agencies.pop(), records=corpus.records)
    return corpus


def _bow(config: RunConfig, corpus: Corpus):
    stoplist = load_stoplist(config.stoplist)
    return build_bow_corpus(
        corpus,
        min_df=config.min_df,
        stoplist=stoplist,
        strip_suffixes=config.strip_suffixes,
    )


def cmd_ingest(config: RunConfig) -> None:
    if config.tweets is None:
        raise ConfigError("ingest needs a tweets archive (--tweets or config)")
    window = (config.window_start, config.window_end)
    corpus, stats = ingest_tweets(
        config.tweets,
        config.agency,
        window=window,
        strict=config.strict,
        drop_retweets=config.drop_retweets,
    )
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_tweets(corpus, out / CORPUS_NAME)

    summary = {
        "agency": corpus.agency,
        "records": len(corpus),
        "span": [corpus.span[0].isoformat(), corpus.span[1].isoformat()],
        "lines_read": stats.lines_read,
        "skipped_malformed": stats.skipped_malformed,
        "skipped_duplicate": stats.skipped_duplicate,
        "skipped_window": stats.skipped_window,
        "skipped_filtered": stats.skipped_filtered,
    }
    if config.indicators is not None:
        indicators = ingest_indicators(config.indicators)
        write_indicators(indicators, out / INDICATORS_NAME)
        summary["indicators"] = {
            "days": len(indicators),
            "span": [indicators.start.isoformat(), indicators.end.isoformat()],
            "gap_fills": indicators.fill_count,
        }
    (out / CORPUS_SUMMARY_NAME).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"ingested {len(corpus)} records -> {out / CORPUS_NAME}")


def cmd_fit_lda(config: RunConfig) -> None:
    corpus = _load_corpus(config)
    bow = _bow(config, corpus)
    out = Path(config.out)

    if config.k is not None or len(config.k_grid) <= 1:
        chosen = config.k if config.k is not None else (
            config.k_grid[0] if config.k_grid else 10
        )
        report_entries: Optional[lda.CoherenceReport] = None
    else:
        report_entries = lda.select_k(
            bow,
            config.k_grid,
            alpha=config.lda_alpha,
            eta=config.lda_eta,
            iterations=config.lda_iterations,
            burn_in=config.lda_burn_in,
            seed=config.seed,
        )
        chosen = report_entries.selected_k

    model = lda.fit_lda(
        bow,
        chosen,
        alpha=config.lda_alpha,
        eta=config.lda_eta,
        iterations=config.lda_iterations,
        burn_in=config.lda_burn_in,
        seed=config.seed,
    )
    lda.save_lda(model, out / LDA_MODEL_NAME)

    if report_entries is None:
        score = float(sum(lda.coherence(model, bow)) / model.n_topics)
        report_entries = lda.CoherenceReport(entries=((chosen, score),), selected_k=chosen)
    payload = {
        "entries": [{"k": k, "mean_npmi": score} for k, score in report_entries.entries],
        "selected_k": report_entries.selected_k,
    }
    (out / COHERENCE_NAME).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"fit LDA with K={chosen} -> {out / LDA_MODEL_NAME}")


def cmd_fit_dtm(config: RunConfig) -> None:
    corpus = _load_corpus(config)
    bow = _bow(config, corpus)
    k = config.k if config.k is not None else max(config.k_grid or (10,))
    if k < 2:
        raise ConfigError("the dynamic model needs k >= 2")
    model = dtm.fit_dtm(
        bow,
        k,
        config.sigma2,
        alpha=config.lda_alpha,
        eta=config.lda_eta,
        iterations=config.dtm_iterations,
        burn_in=config.dtm_burn_in,
        seed=config.seed,
        slice_merge=config.slice_merge,
    )
    out = Path(config.out)
    dtm.save_dtm(model, out / DTM_MODEL_NAME)
    print(f"fit dynamic model with K={k} over {model.n_slices} slices -> {out / DTM_MODEL_NAME}")


def cmd_sentiment(config: RunConfig) -> None:
    corpus = _load_corpus(config)
    lexicon = sentiment_mod.load_lexicon(config.lexicon)
    series = sentiment_mod.daily_sentiment(corpus, lexicon, negation=config.negation)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / SENTIMENT_NAME
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["date", "mean_score", "tweet_count"])
        for day, mean, count in series.items():
            writer.writerow([day.isoformat(), "" if math.isnan(mean) else repr(mean), count])
    print(f"scored {len(corpus)} tweets over {len(series)} days -> {path}")


def _load_sentiment(config: RunConfig) -> sentiment_mod.SentimentSeries:
    path = _artifact(config, SENTIMENT_NAME, "sentiment")
    with open(path, "r", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != ["date", "mean_score", "tweet_count"]:
        raise DataError(f"{path}: unexpected sentiment header")
    means: list[float] = []
    counts: list[int] = []
    start: Optional[date] = None
    for row in rows[1:]:
        day = date.fromisoformat(row[0])
        if start is None:
            start = day
        means.append(float(row[1]) if row[1] else math.nan)
        counts.append(int(row[2]))
    if start is None:
        raise DataError(f"{path}: empty sentiment series")
    return sentiment_mod.SentimentSeries(start=start, means=tuple(means), counts=tuple(counts))


def cmd_report(config: RunConfig, *, run_all: bool = False) -> None:
    if run_all:
        cmd_ingest(config)
        cmd_sentiment(config)
        cmd_fit_lda(config)
        if config.use_dtm:
            cmd_fit_dtm(config)

    corpus = _load_corpus(config)
    bow = _bow(config, corpus)
    indicators_path = _artifact(config, INDICATORS_NAME, "ingest (with an indicators file)")
    indicators = ingest_indicators(indicators_path)
    series = _load_sentiment(config)

    if config.use_dtm:
        model = dtm.load_dtm(_artifact(config, DTM_MODEL_NAME, "fit-dtm"))
    else:
        model = lda.load_lda(_artifact(config, LDA_MODEL_NAME, "fit-lda"))
    if model.vocab.sha256() != bow.vocab.sha256():
        raise DataError("model vocabulary does not match the current corpus; refit")

    tf = chronology.topic_frequency(model, bow, soft=config.soft_attribution)
    segmentation = chronology.default_segmentation()
    top_words = chronology.top_words_by_period(bow, segmentation, config.top_words)
    report = chronology.align(
        tf,
        series,
        indicators,
        segmentation,
        rolling_window=config.sentiment_window,
        period_top_words=top_words,
        agency=corpus.agency,
    )
    written = chronology.emit_report(report, config.out, charts=config.charts)
    for path in written:
        print(f"wrote {path}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="agencylens", description=__doc__)
    parser.add_argument("--config", type=str, default=None, help="key = value config file")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument("--strict", action="store_true", default=None,
                        help="abort on malformed input lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="read tweet archive and indicator table")
    p_ingest.add_argument("--tweets", type=str, default=None)
    p_ingest.add_argument("--indicators", type=str, default=None)
    p_ingest.add_argument("--agency", type=str, default=None)

    p_lda = sub.add_parser("fit-lda", help="fit the static topic model")
    p_lda.add_argument("--k", type=int, default=None)
    p_lda.add_argument("--k-grid", type=str, default=None, help="comma-separated candidates")
    p_lda.add_argument("--iterations", type=int, default=None)
    p_lda.add_argument("--burn-in", type=int, default=None)

    p_dtm = sub.add_parser("fit-dtm", help="fit the dynamic topic model")
    p_dtm.add_argument("--k", type=int, default=None)
    p_dtm.add_argument("--sigma2", type=float, default=None)
    p_dtm.add_argument("--slice-merge", type=int, default=None)

    p_sent = sub.add_parser("sentiment", help="score daily sentiment")
    p_sent.add_argument("--lexicon", type=str, default=None)

    p_report = sub.add_parser("report", help="emit the aligned report")
    p_report.add_argument("--all", action="store_true", help="run the whole pipeline first")
    p_report.add_argument("--charts", action="store_true", default=None)
    p_report.add_argument("--use-dtm", action="store_true", default=None,
                          help="attribute tweets through the dynamic model")
    p_report.add_argument("--soft", action="store_true", default=None, dest="soft_attribution",
                          help="aggregate full topic weights instead of dominant topics")
    p_report.add_argument("--tweets", type=str, default=None)
    p_report.add_argument("--indicators", type=str, default=None)
    p_report.add_argument("--agency", type=str, default=None)
    p_report.add_argument("--k", type=int, default=None,
                          help="topic count for the --all LDA fit (default 10)")
    return parser


_OVERRIDE_KEYS = {
    "out", "seed", "strict", "tweets", "indicators", "agency", "k",
    "iterations", "burn_in", "sigma2", "slice_merge", "lexicon",
    "charts", "use_dtm", "soft_attribution",
}

_OVERRIDE_RENAMES = {"iterations": "lda_iterations", "burn_in": "lda_burn_in"}


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides = {}
    for key, value in vars(args).items():
        if key in ("command", "config", "all"):
            continue
        if value is None:
            continue
        if key == "k_grid":
            overrides["k_grid"] = tuple(int(part) for part in value.split(",") if part)
        elif key in _OVERRIDE_KEYS:
            overrides[_OVERRIDE_RENAMES.get(key, key)] = value
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        file_values = parse_config_file(Path(args.config)) if args.config else None
        config = build_config(file_values, _overrides_from_args(args))
        _echo_config(config)
        if args.command == "ingest":
            cmd_ingest(config)
        elif args.command == "fit-lda":
            cmd_fit_lda(config)
        elif args.command == "fit-dtm":
            cmd_fit_dtm(config)
        elif args.command == "sentiment":
            cmd_sentiment(config)
        elif args.command == "report":
            cmd_report(config, run_all=args.all)
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifactError as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
