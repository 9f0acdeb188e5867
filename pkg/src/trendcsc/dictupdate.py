"""Dictionary update by accelerated projected gradient descent.

For fixed activations Z this module minimizes the data-fit term

    f(D) = 0.5 * ||sum_k d_k * z_k - x||_2^2     s.t.  ||d_k||_2 <= 1

with FISTA momentum, a monotone safeguard (an accelerated step that
would increase f is replaced by a plain projected-gradient step and
the momentum restarts), and the safe step size 1 / sum_k ||z_k||_1^2,
an upper bound on the gradient's Lipschitz constant.  Activations are
sparse, so reconstructions and gradients are accumulated spike by
spike in O(nnz * W) instead of dense correlations over the signal.
"""

import math
import warnings

import numpy as np

from ._accel import maybe_jit
from .model import Activations, Dictionary, Signal

__all__ = [
    "dict_gradient",
    "init_dictionary",
    "project_unit_ball",
    "update_dictionary",
]


@maybe_jit
def _spike_conv_add(atom, idx, vals, out):
    # out += atom convolved with the spike train (idx, vals)
    w = atom.shape[0]
    for i in range(idx.shape[0]):
        t = idx[i]
        v = vals[i]
        for n in range(w):
            out[t + n] += v * atom[n]


@maybe_jit
def _spike_corr(r, idx, vals, out):
    # out[tau] += sum_i vals[i] * r[idx[i] + tau]
    w = out.shape[0]
    for i in range(idx.shape[0]):
        t = idx[i]
        v = vals[i]
        for tau in range(w):
            out[tau] += v * r[t + tau]


def _as_signal_array(x) -> np.ndarray:
    if isinstance(x, Signal):
        return np.asarray(x.samples, dtype=np.float64)
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("signal must be a non-empty 1-D sequence")
    return arr


def _as_maps(z) -> np.ndarray:
    maps = z.maps if isinstance(z, Activations) else z
    arr = np.ascontiguousarray(maps, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError("activations must be a K x L array")
    return arr


def _spike_trains(maps: np.ndarray):
    trains = []
    for k in range(maps.shape[0]):
        idx = np.flatnonzero(maps[k])
        trains.append((idx, np.ascontiguousarray(maps[k, idx])))
    return trains


def _reconstruct_sparse(atoms: np.ndarray, trains, n_samples: int) -> np.ndarray:
    out = np.zeros(n_samples)
    for k, (idx, vals) in enumerate(trains):
        if idx.size:
            _spike_conv_add(np.ascontiguousarray(atoms[k]), idx, vals, out)
    return out


def project_unit_ball(atom) -> np.ndarray:
    """Scale the vector onto the l2 unit ball; inside stays untouched."""
    arr = np.asarray(atom, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot project non-finite values")
    norm = float(np.linalg.norm(arr))
    if norm <= 1.0:
        return arr.copy()
    return arr / norm


def dict_gradient(d, z, x_detrended) -> np.ndarray:
    """Gradient of the data-fit term with respect to every atom.

    Entry (k, tau) is the correlation of the residual D*Z - x with
    z_k at lag tau.
    """
    atoms = np.asarray(d.atoms if isinstance(d, Dictionary) else d, dtype=np.float64)
    if atoms.ndim == 1:
        atoms = atoms[None, :]
    maps = _as_maps(z)
    arr = _as_signal_array(x_detrended)
    n_atoms, w = atoms.shape
    if maps.shape != (n_atoms, arr.size - w + 1):
        raise ValueError(
            f"activation shape {maps.shape} does not match "
            f"({n_atoms}, {arr.size - w + 1})"
        )
    trains = _spike_trains(maps)
    residual = _reconstruct_sparse(atoms, trains, arr.size) - arr
    grad = np.zeros((n_atoms, w))
    for k, (idx, vals) in enumerate(trains):
        if idx.size:
            _spike_corr(residual, idx, vals, grad[k])
    return grad


def _datafit(atoms: np.ndarray, trains, arr: np.ndarray) -> float:
    diff = _reconstruct_sparse(atoms, trains, arr.size) - arr
    return 0.5 * float(np.dot(diff, diff))


def update_dictionary(d_init, z, x_detrended, fista_iters: int = 50) -> Dictionary:
    """Improve the atoms for fixed activations; data fit never increases.

    All-zero activations leave the dictionary unidentifiable: the
    input is returned unchanged and a warning is emitted.
    """
    dictionary = d_init if isinstance(d_init, Dictionary) else Dictionary(d_init)
    fista_iters = int(fista_iters)
    if fista_iters < 1:
        raise ValueError("fista_iters must be >= 1")
    maps = _as_maps(z)
    arr = _as_signal_array(x_detrended)
    atoms0 = np.array(dictionary.atoms, dtype=np.float64, copy=True)
    n_atoms, w = atoms0.shape
    if maps.shape != (n_atoms, arr.size - w + 1):
        raise ValueError(
            f"activation shape {maps.shape} does not match "
            f"({n_atoms}, {arr.size - w + 1})"
        )

    lipschitz = float(np.sum(np.sum(np.abs(maps), axis=1) ** 2))
    if lipschitz == 0.0:
        warnings.warn(
            "all activations are zero; returning the dictionary unchanged",
            stacklevel=2,
        )
        return Dictionary(atoms0)
    step = 1.0 / lipschitz

    trains = _spike_trains(maps)

    def gradient(at):
        residual = _reconstruct_sparse(at, trains, arr.size) - arr
        g = np.zeros((n_atoms, w))
        for k, (idx, vals) in enumerate(trains):
            if idx.size:
                _spike_corr(residual, idx, vals, g[k])
        return g

    def project(at):
        out = np.empty_like(at)
        for k in range(n_atoms):
            out[k] = project_unit_ball(at[k])
        return out

    current = atoms0
    f_current = _datafit(current, trains, arr)
    extrapolated = current.copy()
    momentum = 1.0
    for _ in range(fista_iters):
        candidate = project(extrapolated - step * gradient(extrapolated))
        f_candidate = _datafit(candidate, trains, arr)
        if f_candidate > f_current:
            # Accelerated step overshot: fall back to a plain projected
            # gradient step from the current point and restart momentum.
            candidate = project(current - step * gradient(current))
            f_candidate = _datafit(candidate, trains, arr)
            momentum = 1.0
            if f_candidate > f_current:
                candidate = current
                f_candidate = f_current
        momentum_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
        extrapolated = candidate + ((momentum - 1.0) / momentum_next) * (
            candidate - current
        )
        current = candidate
        f_current = f_candidate
        momentum = momentum_next
    return Dictionary(current)


def init_dictionary(x_detrended, k: int, w: int, rng) -> Dictionary:
    """Seeded initial atoms: random signal windows inside the unit ball."""
    arr = _as_signal_array(x_detrended)
    k = int(k)
    w = int(w)
    if k < 1:
        raise ValueError("need at least one atom")
    if not 2 <= w <= arr.size:
        raise ValueError(f"atom length must be in [2, {arr.size}], got {w}")
    starts = rng.integers(0, arr.size - w + 1, size=k)
    atoms = np.empty((k, w))
    for i, start in enumerate(starts):
        window = arr[start : start + w]
        if np.any(window != 0.0):
            atoms[i] = project_unit_ball(window)
        else:
            # Degenerate flat window: fall back to seeded noise so the
            # atom can still correlate with something.
            noise = rng.standard_normal(w)
            atoms[i] = noise / np.linalg.norm(noise)
    return Dictionary(atoms)
