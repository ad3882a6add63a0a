"""Frozen query-count regression constants.

The asymptotic claims the learners implement are realized here as frozen
empirical bounds: constants measured on the shipped suite, reviewed, and
stored with provenance.  Tests and the CLI fail when a measured value
exceeds its constant.  The RANKPROBE_REGRESSION environment variable points
to an alternative config file.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import UsageError

__all__ = ["RegressionConfig", "load_regression_config", "ENV_VAR"]

ENV_VAR = "RANKPROBE_REGRESSION"

_DEFAULT_PATH = Path(__file__).parent / "regression.json"


class RegressionConfig:
    """Named constants plus the sparse-recovery budget table B(N, d)."""

    def __init__(self, doc):
        self.version = doc.get("config_version", "unversioned")
        self.constants = doc.get("constants", {})
        self.b_table = doc.get("sparse_budget_table", {})

    def value(self, name):
        try:
            return float(self.constants[name]["value"])
        except KeyError as exc:
            raise UsageError(f"regression config has no constant {name!r}") from exc

    def note(self, name):
        return self.constants.get(name, {}).get("note", "")

    def sparse_budget(self, N, d):
        key = f"{N}:{d}"
        try:
            return int(self.b_table[key])
        except KeyError as exc:
            raise UsageError(f"no frozen sparse budget for (N, d) = ({N}, {d})") from exc


def load_regression_config(path=None):
    """Load the config from ``path``, the env override, or the packaged default."""
    candidate = path or os.environ.get(ENV_VAR) or _DEFAULT_PATH
    with open(candidate, "rb") as fh:
        return RegressionConfig(json.load(fh))
