"""Shared data model: signals, dictionaries, activations, trends, solver config.

All containers are immutable value objects; the wrapped arrays are
float64 and marked read-only, so instances are safe to share across
threads.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "MODES",
    "ATOM_NORM_TOL",
    "Signal",
    "Dictionary",
    "Activations",
    "Trend",
    "SolverConfig",
    "Decomposition",
    "convolve",
    "reconstruct",
]

#: Solver modes: joint trend re-estimation, frozen initial detrend, no detrend.
MODES = ("joint", "init", "none")

#: Slack on the unit-ball constraint ||d_k||_2^2 <= 1.
ATOM_NORM_TOL = 1e-9


def _readonly_f64(values, name, ndim=1):
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled 1-D eye-angle trajectory.

    Parameters
    ----------
    samples : array-like
        Angle samples in degrees of visual angle, length T >= 1.
    sample_rate : float
        Sampling frequency in Hz, > 0.
    """

    samples: np.ndarray
    sample_rate: float = 1000.0

    def __post_init__(self):
        arr = _readonly_f64(self.samples, "samples")
        if arr.size < 1:
            raise ValueError("signal must contain at least one sample")
        rate = float(self.sample_rate)
        if not (np.isfinite(rate) and rate > 0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class Dictionary:
    """K waveform templates of common length W, each inside the unit l2 ball."""

    atoms: np.ndarray

    def __post_init__(self):
        arr = _readonly_f64(self.atoms, "atoms", ndim=2)
        n_atoms, atom_length = arr.shape
        if n_atoms < 1:
            raise ValueError("dictionary needs at least one atom")
        if atom_length < 2:
            raise ValueError("atoms must have length >= 2")
        sq_norms = np.einsum("kw,kw->k", arr, arr)
        if np.any(sq_norms > 1.0 + ATOM_NORM_TOL):
            worst = float(np.max(sq_norms))
            raise ValueError(f"atom squared norm {worst} exceeds the unit ball")
        object.__setattr__(self, "atoms", arr)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.shape[0])

    @property
    def atom_length(self) -> int:
        return int(self.atoms.shape[1])


@dataclass(frozen=True)
class Activations:
    """K sparse activation maps of common length L = T - W + 1, in degrees."""

    maps: np.ndarray

    def __post_init__(self):
        arr = _readonly_f64(self.maps, "maps", ndim=2)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"activation maps must be non-empty, got shape {arr.shape}")
        object.__setattr__(self, "maps", arr)

    @property
    def n_atoms(self) -> int:
        return int(self.maps.shape[0])

    @property
    def length(self) -> int:
        return int(self.maps.shape[1])


@dataclass(frozen=True)
class Trend:
    """Piecewise-constant trend component, same length as the signal."""

    values: np.ndarray

    def __post_init__(self):
        arr = _readonly_f64(self.values, "values")
        if arr.size < 1:
            raise ValueError("trend must contain at least one value")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SolverConfig:
    """Configuration of the alternating solver.

    ``lambda_frac`` sets the l1 weight as a fraction of the data-dependent
    lambda_max; ``lambda_tv`` is the absolute weight of the total-variation
    penalty on the trend.  ``epsilon`` is the outer stopping tolerance on
    ``max|Z_new - Z_old|``; when None it resolves to 1e-4 * max|x| at fit
    time.  ``mode`` selects joint trend re-estimation ("joint"), a frozen
    initial detrend ("init") or no trend at all ("none").
    """

    lambda_frac: float = 0.5
    lambda_tv: float = 20.0
    epsilon: Optional[float] = None
    max_iter: int = 60
    mode: str = "joint"
    seed: int = 0
    nonneg: bool = False
    literal_schedule: bool = False
    fista_iters: int = 50

    def __post_init__(self):
        if not (0.0 < self.lambda_frac <= 1.0):
            raise ValueError(f"lambda_frac must be in (0, 1], got {self.lambda_frac}")
        if not (np.isfinite(self.lambda_tv) and self.lambda_tv >= 0.0):
            raise ValueError(f"lambda_tv must be >= 0, got {self.lambda_tv}")
        if self.epsilon is not None and not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        mode = str(self.mode).strip().lower()
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if self.fista_iters < 1:
            raise ValueError(f"fista_iters must be >= 1, got {self.fista_iters}")


@dataclass(frozen=True)
class Decomposition:
    """Result of a fit: (D, Z, y), the residual e = x - D*Z - y, diagnostics.

    ``objective_trace`` holds the penalized objective (data fit + l1 + TV)
    before iterating and after each outer iteration.  The trailing fields
    record the resolved solver parameters for manifests.
    """

    dictionary: Dictionary
    activations: Activations
    trend: Trend
    residual: np.ndarray
    objective_trace: np.ndarray
    iterations_run: int
    converged: bool
    lambda_value: float = float("nan")
    lambda_max_value: float = float("nan")
    lambda_tv_value: float = float("nan")
    epsilon_value: float = float("nan")

    def __post_init__(self):
        residual = _readonly_f64(self.residual, "residual")
        trace = _readonly_f64(self.objective_trace, "objective_trace")
        if residual.size != len(self.trend):
            raise ValueError("residual and trend must have the same length")
        expected_len = residual.size - self.dictionary.atom_length + 1
        if self.activations.length != expected_len:
            raise ValueError(
                f"activation length {self.activations.length} does not match "
                f"T - W + 1 = {expected_len}"
            )
        object.__setattr__(self, "residual", residual)
        object.__setattr__(self, "objective_trace", trace)


def convolve(atom, activation) -> np.ndarray:
    """Full linear convolution of an atom with an activation map.

    out[t] = sum_tau atom[tau] * activation[t - tau]; the result has
    length W + L - 1.
    """
    a = np.asarray(atom, dtype=np.float64)
    v = np.asarray(activation, dtype=np.float64)
    if a.ndim != 1 or v.ndim != 1:
        raise ValueError("convolve expects 1-D inputs")
    if a.size == 0 or v.size == 0:
        raise ValueError("convolve requires non-empty inputs")
    return np.convolve(a, v)


def reconstruct(dictionary: Dictionary, activations: Activations, trend: Trend) -> np.ndarray:
    """Noiseless model output sum_k d_k * z_k + y, length T."""
    atoms = dictionary.atoms
    maps = activations.maps
    y = trend.values
    n_atoms, atom_length = atoms.shape
    expected = (n_atoms, y.size - atom_length + 1)
    if maps.shape != expected:
        raise ValueError(f"activation shape {maps.shape} does not match expected {expected}")
    out = y.copy()
    for k in range(n_atoms):
        out += np.convolve(atoms[k], maps[k])
    return out
