"""Localized session-based news recommendation and offline evaluation."""

from locrec.errors import ConfigError, DataError, LocrecError, ScenarioError
from locrec.model import (
    Article,
    Interaction,
    ItemFilter,
    Locality,
    MainCategory,
    MetricsReport,
    ScenarioSpec,
    Session,
    apply_filter,
)

__version__ = "0.1.0"

__all__ = [
    "Article",
    "ConfigError",
    "DataError",
    "Interaction",
    "ItemFilter",
    "Locality",
    "LocrecError",
    "MainCategory",
    "MetricsReport",
    "ScenarioError",
    "ScenarioSpec",
    "Session",
    "apply_filter",
]
