"""Pattern-recovery score and objective evaluation.

The recovery score compares a learned atom against the waveform that
generated the signal.  Cosine similarity alone fails here for two
reasons: the atom may start anywhere inside the waveform's cycle
(phase), and it may span several cycles (repetition).  The score
therefore tiles the ground-truth pattern, slides a comparison window
over every phase of the tiled pattern and every offset inside the
atom, and reports the best windowed cosine.  No absolute value is
taken, so a sign-flipped atom scores by its raw (negative) alignment.
"""

from dataclasses import dataclass

import numpy as np

from .model import Decomposition, Signal, reconstruct
from .tv import tv_norm

__all__ = ["RecoveryScore", "objective", "recovery_score"]


@dataclass(frozen=True)
class RecoveryScore:
    """Best windowed cosine between pattern and atom, with its argmax."""

    rho: float
    best_shift: int
    best_offset: int

    def __post_init__(self):
        if not np.isfinite(self.rho):
            raise ValueError("recovery score must be finite")


def _window_matrix(values: np.ndarray, width: int) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(values, width)


def recovery_score(d_star, d) -> RecoveryScore:
    """Phase- and repetition-invariant similarity of atom d to pattern d_star.

    The pattern (one period, length P) is tiled so that every phase
    shift t in [0, P) exposes a full window; the atom contributes
    windows at every offset l in [0, W - C] with comparison length
    C = min(P, W).  Each pair is scored by the cosine of the two
    windows and the maximum wins.

    Returns
    -------
    RecoveryScore
        rho in [-1, 1], plus the winning (shift, offset) pair.
    """
    pattern = np.asarray(d_star, dtype=np.float64)
    atom = np.asarray(d, dtype=np.float64)
    if pattern.ndim != 1 or pattern.size < 2:
        raise ValueError("pattern must be 1-D with at least 2 samples")
    if atom.ndim != 1 or atom.size < 2:
        raise ValueError("atom must be 1-D with at least 2 samples")
    if not (np.all(np.isfinite(pattern)) and np.all(np.isfinite(atom))):
        raise ValueError("recovery score inputs must be finite")
    if not (np.any(pattern != 0.0) and np.any(atom != 0.0)):
        raise ValueError("recovery score is undefined for zero-norm inputs")

    period = pattern.size
    width = atom.size
    compare = min(period, width)
    reps = -(-(period + width) // period)  # ceil division
    tiled = np.tile(pattern, reps)

    pat_windows = _window_matrix(tiled, compare)[:period]
    atom_windows = _window_matrix(atom, compare)
    scores = pat_windows @ atom_windows.T
    pat_norms = np.linalg.norm(pat_windows, axis=1)
    atom_norms = np.linalg.norm(atom_windows, axis=1)
    denom = pat_norms[:, None] * atom_norms[None, :]
    # A locally flat stretch yields a zero-norm window; its cosine is
    # taken as 0 rather than propagating a division error.
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(denom > 0.0, scores / denom, 0.0)
    flat_idx = int(np.argmax(scores))
    shift, offset = np.unravel_index(flat_idx, scores.shape)
    return RecoveryScore(
        rho=float(scores[shift, offset]),
        best_shift=int(shift),
        best_offset=int(offset),
    )


def objective(x, dec: Decomposition, lam: float, lam_tv: float) -> float:
    """Full model objective:

        0.5 * ||D*Z + y - x||_2^2 + lam * ||Z||_1 + lam_tv * TV(y)
    """
    arr = np.asarray(x.samples if isinstance(x, Signal) else x, dtype=np.float64)
    recon = reconstruct(dec.dictionary, dec.activations, dec.trend)
    if recon.shape != arr.shape:
        raise ValueError(
            f"decomposition length {recon.size} does not match signal {arr.size}"
        )
    diff = recon - arr
    data_fit = 0.5 * float(np.dot(diff, diff))
    l1 = float(np.sum(np.abs(np.asarray(dec.activations.maps))))
    tv = tv_norm(np.asarray(dec.trend.values))
    return data_fit + float(lam) * l1 + float(lam_tv) * tv
