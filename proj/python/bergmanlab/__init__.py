"""Bergman space operators on the unit ball of C^n."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run as _run, sweep as _sweep


def run_experiment(config):
    """Run a config (dict or JSON string) and return the report payload as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run(text))


def run_sweep(config):
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_sweep(text))
