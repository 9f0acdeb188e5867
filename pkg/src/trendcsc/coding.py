"""Convolutional lasso solved by locally greedy coordinate descent.

For a fixed dictionary D and target signal x this module minimizes

    f(Z) = 0.5 * ||sum_k d_k * z_k - x||_2^2 + lambda * ||Z||_1

one coordinate at a time.  The closed-form update for coordinate
(k, t) is a soft-threshold of the correlation surrogate

    beta_k[t] = <d_k, r[t : t+W]> + ||d_k||_2^2 * z_k[t]

where r is the current residual.  After an update only the beta
entries of overlapping coordinates change, and they change by a
precomputed atom cross-correlation times the coordinate delta, so
each update costs O(K*W).  Coordinates are selected greedily inside
contiguous segments of length W (locally greedy order): per segment
visit, the single coordinate with the largest exact objective
decrease is updated.
"""

from dataclasses import dataclass

import numpy as np

from ._accel import maybe_jit
from .model import Activations, Dictionary, Signal

__all__ = ["CoordinateState", "lambda_max", "sparse_code"]


def _as_signal_array(x) -> np.ndarray:
    if isinstance(x, Signal):
        return np.asarray(x.samples, dtype=np.float64)
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("signal must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite values")
    return arr


def _as_atom_matrix(d) -> np.ndarray:
    if isinstance(d, Dictionary):
        return np.asarray(d.atoms, dtype=np.float64)
    arr = np.ascontiguousarray(d, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError("dictionary must be a K x W array")
    return arr


def _windowed_correlation(x: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    """All valid-mode correlations <d_k, x[t:t+W]> as a K x L table."""
    w = atoms.shape[1]
    windows = np.lib.stride_tricks.sliding_window_view(x, w)
    return atoms @ windows.T


def lambda_max(x, d) -> float:
    """Smallest l1 weight for which the all-zero activation is optimal.

    Equals max over atoms and offsets of the absolute correlation
    between the atom and a signal window.
    """
    arr = _as_signal_array(x)
    atoms = _as_atom_matrix(d)
    if atoms.shape[1] > arr.size:
        raise ValueError(
            f"atom length {atoms.shape[1]} exceeds signal length {arr.size}"
        )
    return float(np.max(np.abs(_windowed_correlation(arr, atoms))))


@dataclass(frozen=True)
class CoordinateState:
    """Internal coordinate-descent state for one sparse-coding call.

    beta holds the correlation surrogate for every coordinate, norms
    the squared atom norms, and segment_bounds the contiguous
    (start, stop) tiles used for locally greedy selection.
    """

    beta: np.ndarray
    norms: np.ndarray
    segment_bounds: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        norms = np.asarray(self.norms, dtype=np.float64)
        seg = np.asarray(self.segment_bounds, dtype=np.int64)
        if beta.ndim != 2:
            raise ValueError("beta must be K x L")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta contains non-finite values")
        if norms.shape != (beta.shape[0],):
            raise ValueError("norms must have one entry per atom")
        if np.any(norms < 0.0):
            raise ValueError("squared norms cannot be negative")
        if seg.ndim != 2 or seg.shape[1] != 2:
            raise ValueError("segment_bounds must be n_segments x 2")
        # Segments must tile [0, L) in order, without gaps or overlap.
        length = beta.shape[1]
        if seg[0, 0] != 0 or seg[-1, 1] != length:
            raise ValueError("segments must cover [0, L)")
        if np.any(seg[:, 0] >= seg[:, 1]):
            raise ValueError("empty segment")
        if np.any(seg[1:, 0] != seg[:-1, 1]):
            raise ValueError("segments must be contiguous and disjoint")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "segment_bounds", seg)


def _segment_bounds(length: int, width: int) -> np.ndarray:
    starts = np.arange(0, length, width, dtype=np.int64)
    stops = np.minimum(starts + width, length)
    return np.stack([starts, stops], axis=1)


def _cross_correlation_table(atoms: np.ndarray) -> np.ndarray:
    """cross[j, k, t - s + W - 1] = effect of z_k[t] on beta_j[s]."""
    n_atoms, w = atoms.shape
    cross = np.empty((n_atoms, n_atoms, 2 * w - 1))
    for j in range(n_atoms):
        for k in range(n_atoms):
            # entry at delta = t - s is sum_n d_j[n] * d_k[n - delta]
            cross[j, k] = np.correlate(atoms[j], atoms[k], mode="full")
    return cross


def build_state(x_detrended, d, z: np.ndarray) -> CoordinateState:
    """Coordinate state consistent with the given activations."""
    arr = _as_signal_array(x_detrended)
    atoms = _as_atom_matrix(d)
    n_atoms, w = atoms.shape
    norms = np.einsum("kw,kw->k", atoms, atoms)
    residual = arr.copy()
    for k in range(n_atoms):
        if np.any(z[k] != 0.0):
            residual -= np.convolve(atoms[k], z[k])
    beta = _windowed_correlation(residual, atoms) + norms[:, None] * z
    return CoordinateState(
        beta=np.ascontiguousarray(beta),
        norms=norms,
        segment_bounds=_segment_bounds(z.shape[1], w),
    )


@maybe_jit
def _lgcd_kernel(beta, z, cross, norms, lam, seg, tol, max_updates, nonneg):
    # Locally greedy sweep: per segment visit, apply the single best
    # coordinate update; stop once a full pass over all segments moves
    # no coordinate by tol or more.  Single structured loop with flag
    # exits; early returns inside the loop miscompile under the JIT.
    n_atoms, length = beta.shape
    w = (cross.shape[2] + 1) // 2
    n_seg = seg.shape[0]
    updates = 0
    seg_idx = 0
    visited = 0
    largest_step = 0.0
    converged = False
    while not converged and updates < max_updates:
        s0 = seg[seg_idx, 0]
        s1 = seg[seg_idx, 1]
        best_dec = 0.0
        best_k = -1
        best_t = -1
        best_u = 0.0
        for k in range(n_atoms):
            a = norms[k]
            if a > 0.0:
                for t in range(s0, s1):
                    b = beta[k, t]
                    if b > lam:
                        u = (b - lam) / a
                    elif b < -lam:
                        u = (b + lam) / a
                    else:
                        u = 0.0
                    if nonneg and u < 0.0:
                        u = 0.0
                    zc = z[k, t]
                    if u != zc:
                        dec = (
                            0.5 * a * (zc * zc - u * u)
                            - b * (zc - u)
                            + lam * (abs(zc) - abs(u))
                        )
                        if dec > best_dec:
                            best_dec = dec
                            best_k = k
                            best_t = t
                            best_u = u
        if best_k >= 0:
            zc = z[best_k, best_t]
            diff = best_u - zc
            z[best_k, best_t] = best_u
            lo = best_t - w + 1
            if lo < 0:
                lo = 0
            hi = best_t + w
            if hi > length:
                hi = length
            for j in range(n_atoms):
                for s in range(lo, hi):
                    # beta at the updated coordinate itself is already
                    # consistent: the residual and z terms cancel.
                    if j != best_k or s != best_t:
                        beta[j, s] -= cross[j, best_k, best_t - s + w - 1] * diff
            updates += 1
            if abs(diff) > largest_step:
                largest_step = abs(diff)
        seg_idx += 1
        visited += 1
        if seg_idx == n_seg:
            seg_idx = 0
        if visited >= n_seg:
            # One full pass: converged when nothing moved, or when the
            # largest applied step stayed below tol.
            if largest_step < tol or largest_step == 0.0:
                converged = True
            largest_step = 0.0
            visited = 0
    return updates, converged


def sparse_code(
    x_detrended,
    d,
    lam: float,
    z_init=None,
    tol=None,
    max_iter=None,
    nonneg: bool = False,
) -> Activations:
    """Approximately minimize the convolutional lasso objective.

    Parameters
    ----------
    x_detrended : Signal or array, shape (T,)
        Coding target (signal minus current trend).
    d : Dictionary or array, shape (K, W)
        Fixed atoms.
    lam : float
        l1 weight, > 0.
    z_init : Activations or array, shape (K, T-W+1), optional
        Warm start; zeros when omitted.
    tol : float, optional
        Stop once no coordinate moves by tol within a full pass.
        Defaults to 1e-6 * lambda_max(x_detrended, d).
    max_iter : int, optional
        Cap on applied coordinate updates; defaults to 10*K*L.
    nonneg : bool
        Clamp activations at zero from below.

    Returns
    -------
    Activations
        The objective at the result never exceeds the objective at
        z_init; every applied update strictly decreases it.
    """
    arr = _as_signal_array(x_detrended)
    atoms = _as_atom_matrix(d)
    n_atoms, w = atoms.shape
    if w > arr.size:
        raise ValueError(f"atom length {w} exceeds signal length {arr.size}")
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0.0):
        raise ValueError(f"l1 weight must be finite and > 0, got {lam}")
    length = arr.size - w + 1

    if z_init is None:
        z = np.zeros((n_atoms, length))
    else:
        maps = z_init.maps if isinstance(z_init, Activations) else z_init
        z = np.array(maps, dtype=np.float64, order="C", copy=True)
        if z.shape != (n_atoms, length):
            raise ValueError(
                f"warm start shape {z.shape} does not match ({n_atoms}, {length})"
            )
        if nonneg and np.any(z < 0.0):
            raise ValueError("warm start violates the nonnegativity constraint")

    state = build_state(arr, atoms, z)
    if tol is None:
        tol = 1e-6 * float(np.max(np.abs(_windowed_correlation(arr, atoms))))
    tol = float(tol)
    if not (np.isfinite(tol) and tol >= 0.0):
        raise ValueError(f"tolerance must be finite and >= 0, got {tol}")
    if max_iter is None:
        max_iter = 10 * n_atoms * length
    max_iter = int(max_iter)
    if max_iter < 0:
        raise ValueError("max_iter cannot be negative")

    _lgcd_kernel(
        state.beta,
        z,
        _cross_correlation_table(atoms),
        state.norms,
        lam,
        state.segment_bounds,
        tol,
        max_iter,
        nonneg,
    )
    return Activations(z)
