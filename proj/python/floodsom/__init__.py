"""Flood depth emulation: cellular-automata simulation and a self-organizing-map surrogate."""

import json

from ._floodsom import (
    CombinedModel,
    ConfigError,
    InputError,
    MissingArtifact,
    ParseError,
    depth_stats,
    format_time_delta,
    simulate,
)
from . import _floodsom

__all__ = [
    "CombinedModel",
    "ConfigError",
    "InputError",
    "MissingArtifact",
    "ParseError",
    "default_config",
    "depth_stats",
    "format_time_delta",
    "generate_dem",
    "run_pipeline",
    "simulate",
]


def default_config():
    return json.loads(_floodsom.default_config_json())


def generate_dem(config=None):
    """DEM as a 2-D float array; ``config`` is a (partial) pipeline config dict."""
    return _floodsom.generate_dem(json.dumps(config or {}))


def run_pipeline(config):
    _floodsom.run_pipeline(json.dumps(config))
