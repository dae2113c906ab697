"""Python access to the RIS-assisted D2D resource allocation core.

Configs, specs and results are plain dicts with the same keys as the JSON
files the command-line tool reads and writes. Rates are in nats.
"""

import json as _json

from . import _risd2d
from ._risd2d import (
    ConfigError,
    dbm_to_watts,
    lagrangian_dual_f,
    receive_beamformer,
    solve_pair,
)

__all__ = [
    "ConfigError",
    "dbm_to_watts",
    "generate_channels",
    "lagrangian_dual_f",
    "make_replay_record",
    "preset",
    "preset_names",
    "receive_beamformer",
    "replay",
    "results_to_csv",
    "run_experiment",
    "solve",
    "solve_pair",
]


def _dump(obj):
    return "" if obj is None else _json.dumps(obj)


def solve(scenario=None, bcd=None, fading=None, seed=1):
    """Generate one realization and run the alternating optimizer on it.

    Returns a dict with "solution", "trace" and "power_proportion".
    """
    return _json.loads(_risd2d.solve(_dump(scenario), _dump(bcd), _dump(fading), seed))


def generate_channels(scenario=None, fading=None, seed=1):
    return _json.loads(_risd2d.generate_channels(_dump(scenario), _dump(fading), seed))


def run_experiment(spec):
    """Run a sweep spec and return the aggregated rows."""
    return _json.loads(_risd2d.run_experiment(_json.dumps(spec)))


def preset(name):
    return _json.loads(_risd2d.preset(name))


def preset_names():
    return list(_risd2d.preset_names())


def make_replay_record(spec, value, scheme="proposed", seed=1):
    return _json.loads(_risd2d.make_replay_record(_json.dumps(spec), value, scheme, seed))


def replay(record, tol=1e-9):
    return _json.loads(_risd2d.replay(_json.dumps(record), tol))


def results_to_csv(rows):
    return _risd2d.results_to_csv(_json.dumps(rows))
