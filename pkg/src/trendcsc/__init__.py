"""Convolutional sparse coding with a piecewise-constant trend.

Decomposes an eye-tracker trajectory into recurring short waveforms
(dictionary atoms convolved with sparse activations), a trend that
absorbs gaze drift and saccades, and residual noise.
"""

from ._accel import NUMBA_ENABLED
from .benchmark import (
    TV_WEIGHT_RULE,
    BenchmarkRow,
    BenchmarkSpec,
    run_benchmark,
    summarize,
    tv_weight,
)
from .coding import lambda_max, sparse_code
from .dictupdate import init_dictionary, project_unit_ball, update_dictionary
from .fileio import DataError
from .metrics import RecoveryScore, objective, recovery_score
from .model import (
    Activations,
    Decomposition,
    Dictionary,
    Signal,
    SolverConfig,
    Trend,
    convolve,
    reconstruct,
)
from .simulate import GroundTruth, SyntheticParams, gen_nystagmus, gen_signal, gen_trend
from .solver import fit
from .tv import prox_tv, tv_norm, tv_weight_scale

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "TV_WEIGHT_RULE",
    "Activations",
    "BenchmarkRow",
    "BenchmarkSpec",
    "DataError",
    "Decomposition",
    "Dictionary",
    "GroundTruth",
    "RecoveryScore",
    "Signal",
    "SolverConfig",
    "SyntheticParams",
    "Trend",
    "convolve",
    "fit",
    "gen_nystagmus",
    "gen_signal",
    "gen_trend",
    "init_dictionary",
    "lambda_max",
    "objective",
    "project_unit_ball",
    "prox_tv",
    "reconstruct",
    "recovery_score",
    "run_benchmark",
    "sparse_code",
    "summarize",
    "tv_norm",
    "tv_weight",
    "tv_weight_scale",
    "update_dictionary",
    "__version__",
]
