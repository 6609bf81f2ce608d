"""Exception taxonomy shared across the pipeline.

The CLI maps these onto exit codes (config 1, missing artifact 2, data 3).
"""


class AgencyLensError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AgencyLensError):
    """Invalid or inconsistent run configuration."""


class MissingArtifactError(AgencyLensError):
    """A required upstream artifact (corpus, model, series) does not exist."""


class DataError(AgencyLensError):
    """Input data violates a documented contract."""
