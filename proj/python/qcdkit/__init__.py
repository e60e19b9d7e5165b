"""Streaming quickest-change detection over prediction-error streams.

Thin convenience layer over the compiled extension: anywhere the core takes a
JSON string (detector configs, scenarios) these wrappers also accept plain
dicts.
"""

from __future__ import annotations

import json as _json

try:  # installed wheel layout
    from . import _qcdkit as _core
except ImportError:  # build-tree layout: extension directly on sys.path
    import _qcdkit as _core

Gaussian = _core.Gaussian
GaussianMixture = _core.GaussianMixture
MomentSummary = _core.MomentSummary
EmFit = _core.EmFit
KlEstimate = _core.KlEstimate
DetectorState = _core.DetectorState
Estimate = _core.Estimate
SweepPoint = _core.SweepPoint
CorrectnessReport = _core.CorrectnessReport
RobustShiftRow = _core.RobustShiftRow
QcdError = _core.QcdError

fit_em = _core.fit_em
kl_mc = _core.kl_mc
kl_gaussian = _core.kl_gaussian
kl = _core.kl
threshold_for_far = _core.threshold_for_far
ade = _core.ade
fde = _core.fde
rmse = _core.rmse
read_error_stream_csv = _core.read_error_stream_csv
read_trajectory_csv = _core.read_trajectory_csv
robust_shift_study = _core.robust_shift_study

__version__ = _core.__version__


def _as_json(config) -> str:
    return config if isinstance(config, str) else _json.dumps(config)


def detector(config) -> "_core.Detector":
    """Build a detector from a config dict or JSON string."""
    return _core.Detector(_as_json(config))


Detector = detector


def log_likelihood_ratio(config, x: float) -> float:
    return _core.log_likelihood_ratio(_as_json(config), x)


def generate(scenario, seed: int) -> list[float]:
    """Sample an error stream from a scenario dict or JSON string."""
    return _core.generate_stream(_as_json(scenario), seed)


def estimate_wadd(config, scenario, *, trials: int, seed: int, horizon: int = 0,
                  workers: int = 0) -> "_core.Estimate":
    return _core.estimate_wadd(_as_json(config), _as_json(scenario), trials, horizon, workers,
                               seed)


def estimate_mtfa(config, scenario, *, trials: int, seed: int, horizon: int = 0,
                  workers: int = 0) -> "_core.Estimate":
    return _core.estimate_mtfa(_as_json(config), _as_json(scenario), trials, horizon, workers,
                               seed)


def calibrate_threshold(config, target_mtfa: float, scenario, *, seed: int,
                        trials: int = 200) -> float:
    return _core.calibrate_threshold(_as_json(config), target_mtfa, _as_json(scenario), trials,
                                     seed)


def sweep_detector(config, scenario, thresholds, *, trials: int, seed: int, horizon: int = 0,
                   workers: int = 0) -> list:
    return _core.sweep_detector(_as_json(config), _as_json(scenario), list(thresholds), trials,
                                horizon, workers, seed)


def correctness_report(config, scenario, *, n: int, seed: int) -> "_core.CorrectnessReport":
    return _core.correctness_report(_as_json(config), _as_json(scenario), n, seed)
