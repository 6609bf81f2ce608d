"""Declarative run configuration: flat key-value file, CLI-flag overrides.

Flags win over file values, file values win over defaults.  The resolved
configuration is echoed verbatim into every output directory so a run can
be reproduced from its artifacts alone.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Optional

from .errors import ConfigError

CONFIG_ECHO_NAME = "run_config.txt"

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    # inputs
    tweets: Optional[str] = None
    indicators: Optional[str] = None
    lexicon: Optional[str] = None  # None -> bundled
    stoplist: Optional[str] = None  # None -> bundled
    agency: Optional[str] = None
    # analysis window
    window_start: date = date(2020, 2, 21)
    window_end: date = date(2020, 6, 6)
    # preprocessing
    min_df: Optional[int] = None  # None -> 5, or 2 under 1000 docs
    strict: bool = False
    drop_retweets: bool = False
    strip_suffixes: bool = False
    # static topic model
    k: Optional[int] = None
    k_grid: tuple[int, ...] = ()
    lda_alpha: Optional[float] = None  # None -> 50 / K
    lda_eta: float = 0.01
    lda_iterations: int = 1000
    lda_burn_in: int = 500
    seed: int = 0
    # dynamic topic model
    sigma2: float = 0.005
    slice_merge: int = 1
    dtm_iterations: int = 200
    dtm_burn_in: int = 100
    use_dtm: bool = False
    # sentiment / report
    sentiment_window: int = 1
    soft_attribution: bool = False
    top_words: int = 10
    charts: bool = False
    negation: bool = False
    # output
    out: str = "out"

    def validate(self) -> None:
        if self.window_start > self.window_end:
            raise ConfigError("window_start must not be after window_end")
        if self.min_df is not None and self.min_df < 1:
            raise ConfigError("min_df must be >= 1")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be >= 1")
        if any(k < 2 for k in self.k_grid):
            raise ConfigError("k_grid entries must be >= 2")
        if not self.lda_iterations > self.lda_burn_in >= 0:
            raise ConfigError("need lda_iterations > lda_burn_in >= 0")
        if not self.dtm_iterations > self.dtm_burn_in >= 0:
            raise ConfigError("need dtm_iterations > dtm_burn_in >= 0")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        if self.slice_merge < 1:
            raise ConfigError("slice_merge must be >= 1")
        if self.sentiment_window < 1:
            raise ConfigError("sentiment_window must be >= 1")
        if self.top_words < 1:
            raise ConfigError("top_words must be >= 1")
        if self.lda_alpha is not None and self.lda_alpha <= 0:
            raise ConfigError("lda_alpha must be positive")
        if self.lda_eta <= 0:
            raise ConfigError("lda_eta must be positive")
        for label in ("tweets", "indicators", "lexicon", "stoplist"):
            value = getattr(self, label)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{label} path does not exist: {value}")

    def to_key_values(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {_render(value)}")
        return "\n".join(lines) + "\n"


def _render(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_config_file(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` comments and blank lines allowed."""
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


def _parse_value(name: str, kind: Any, raw: str) -> Any:
    raw = raw.strip()
    if raw == "":
        return None
    try:
        if kind is bool:
            lowered = raw.lower()
            if lowered in _BOOL_TRUE:
                return True
            if lowered in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is date:
            return date.fromisoformat(raw)
        if kind == "int_tuple":
            return tuple(int(part) for part in raw.replace(" ", "").split(",") if part)
        return raw
    except ValueError as exc:
        raise ConfigError(f"config value {name} = {raw!r}: {exc}") from exc


_FIELD_KINDS: dict[str, Any] = {
    "tweets": str,
    "indicators": str,
    "lexicon": str,
    "stoplist": str,
    "agency": str,
    "window_start": date,
    "window_end": date,
    "min_df": int,
    "strict": bool,
    "drop_retweets": bool,
    "strip_suffixes": bool,
    "k": int,
    "k_grid": "int_tuple",
    "lda_alpha": float,
    "lda_eta": float,
    "lda_iterations": int,
    "lda_burn_in": int,
    "seed": int,
    "sigma2": float,
    "slice_merge": int,
    "dtm_iterations": int,
    "dtm_burn_in": int,
    "use_dtm": bool,
    "sentiment_window": int,
    "soft_attribution": bool,
    "top_words": int,
    "charts": bool,
    "negation": bool,
    "out": str,
}


def build_config(
    file_values: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Layer defaults <- config file <- CLI overrides, then validate."""
    config = RunConfig()
    if file_values:
        for key, raw in file_values.items():
            if key not in _FIELD_KINDS:
                raise ConfigError(f"unknown config key {key!r}")
            if raw.strip() == "":
                continue  # empty value keeps the default
            setattr(config, key, _parse_value(key, _FIELD_KINDS[key], raw))
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in _FIELD_KINDS:
                raise ConfigError(f"unknown config override {key!r}")
            setattr(config, key, value)
    config.validate()
    return config
