"""Alternating solver: sparse coding, trend prox, dictionary update.

One outer iteration of the default ("joint") mode performs

    Z  <- sparse_code(x - y, D, lambda)      (warm-started)
    y  <- prox_tv(x - D*Z, lambda_tv)
    D  <- update_dictionary(x - y, Z)

and stops when no activation coordinate moved by epsilon or more.
Each sub-step minimizes the full objective

    0.5 * ||D*Z + y - x||_2^2 + lambda * ||Z||_1 + lambda_tv * TV(y)

over its own block with the freshest other blocks held fixed, so the
recorded objective trace is non-increasing.  A `literal_schedule`
variant instead feeds each update the previous iteration's blocks;
that ordering has no descent guarantee and exists for comparison.

The two baselines freeze the trend: "init" detrends once with the TV
prox and runs plain convolutional dictionary learning on the
remainder, "none" runs it on the raw signal with y = 0.
"""

import numpy as np

from .coding import lambda_max, sparse_code
from .dictupdate import (
    _reconstruct_sparse,
    _spike_trains,
    init_dictionary,
    update_dictionary,
)
from .model import (
    Activations,
    Decomposition,
    Dictionary,
    Signal,
    SolverConfig,
    Trend,
    reconstruct,
)
from .tv import prox_tv, tv_norm

__all__ = ["fit"]


def _model_sum(atoms: np.ndarray, z: np.ndarray, n_samples: int) -> np.ndarray:
    return _reconstruct_sparse(atoms, _spike_trains(z), n_samples)


def _objective_value(x, recon_dz, y, z, lam, lam_tv) -> float:
    diff = recon_dz + y - x
    return (
        0.5 * float(np.dot(diff, diff))
        + lam * float(np.sum(np.abs(z)))
        + lam_tv * tv_norm(y)
    )


def _largest_residual_window(residual: np.ndarray, w: int) -> np.ndarray:
    padded = np.concatenate([[0.0], np.cumsum(residual * residual)])
    energy = padded[w:] - padded[:-w]
    start = int(np.argmax(energy))
    return residual[start : start + w]


def _revive_dead_atoms(atoms: np.ndarray, z: np.ndarray, residual: np.ndarray):
    """Reseed atoms whose activations died from the residual's loudest window.

    A dead atom contributes nothing to the reconstruction, so swapping
    its shape leaves the objective untouched while giving the next
    sparse-coding pass something correlated with unexplained signal.
    Returns a fresh atom matrix, or None when nothing changed.
    """
    out = None
    for k in range(atoms.shape[0]):
        if not np.any(z[k] != 0.0):
            window = _largest_residual_window(residual, atoms.shape[1])
            norm = float(np.linalg.norm(window))
            if norm > 0.0:
                if out is None:
                    out = atoms.copy()
                out[k] = window / norm
    return out


def fit(x, k: int, w: int, config: SolverConfig = None) -> Decomposition:
    """Decompose a signal into sparse atom activations plus a trend.

    Parameters
    ----------
    x : Signal or array, shape (T,)
    k : int
        Number of atoms to learn, >= 1.
    w : int
        Atom length, 2 <= w <= T.
    config : SolverConfig, optional

    Returns
    -------
    Decomposition
        Learned dictionary, activations, trend, exact residual, the
        objective trace (initial value plus one entry per outer
        iteration), and the resolved lambda / lambda_tv / epsilon.
    """
    if config is None:
        config = SolverConfig()
    signal = x if isinstance(x, Signal) else Signal(x)
    arr = np.asarray(signal.samples)
    n = arr.size
    k = int(k)
    w = int(w)
    if k < 1:
        raise ValueError(f"need at least one atom, got k={k}")
    if not 2 <= w <= n:
        raise ValueError(f"atom length must be in [2, {n}], got {w}")

    rng = np.random.default_rng(config.seed)
    lam_tv = float(config.lambda_tv)
    joint = config.mode == "joint"
    if config.mode == "none":
        y = np.zeros(n)
    else:
        y = prox_tv(arr, lam_tv)

    dictionary = init_dictionary(arr - y, k, w, rng)
    atoms = np.array(dictionary.atoms, dtype=np.float64, copy=True)
    lam_max = lambda_max(arr - y, atoms)
    lam = config.lambda_frac * lam_max

    scale = float(np.max(np.abs(arr)))
    epsilon = config.epsilon if config.epsilon is not None else 1e-4 * (scale or 1.0)

    length = n - w + 1
    z = np.zeros((k, length))
    recon_dz = np.zeros(n)
    trace = [_objective_value(arr, recon_dz, y, z, lam, lam_tv)]
    iterations = 0
    converged = False

    for _ in range(config.max_iter):
        z_prev = z
        y_prev = y
        atoms_prev = atoms
        if lam > 0.0:
            z = np.asarray(
                sparse_code(
                    arr - (y_prev if config.literal_schedule else y),
                    atoms_prev if config.literal_schedule else atoms,
                    lam,
                    z_init=z_prev,
                    nonneg=config.nonneg,
                ).maps
            )
        recon_dz = _model_sum(
            atoms_prev if config.literal_schedule else atoms, z, n
        )
        if joint:
            y = prox_tv(arr - recon_dz, lam_tv)
        if config.literal_schedule:
            # Printed-order variant: the dictionary step sees last
            # iteration's activations and trend.
            if np.any(z_prev != 0.0):
                atoms = np.asarray(
                    update_dictionary(
                        atoms_prev, z_prev, arr - y_prev, config.fista_iters
                    ).atoms
                )
                recon_dz = _model_sum(atoms, z, n)
        elif np.any(z != 0.0):
            atoms = np.asarray(
                update_dictionary(atoms, z, arr - y, config.fista_iters).atoms
            )
            recon_dz = _model_sum(atoms, z, n)

        trace.append(_objective_value(arr, recon_dz, y, z, lam, lam_tv))
        iterations += 1
        delta = float(np.max(np.abs(z - z_prev))) if z is not z_prev else 0.0
        if delta < epsilon:
            converged = True
            break
        revived = _revive_dead_atoms(atoms, z, arr - y - recon_dz)
        if revived is not None:
            atoms = revived

    final_dict = Dictionary(atoms)
    final_z = Activations(z)
    final_trend = Trend(y)
    residual = arr - reconstruct(final_dict, final_z, final_trend)
    return Decomposition(
        dictionary=final_dict,
        activations=final_z,
        trend=final_trend,
        residual=residual,
        objective_trace=np.asarray(trace),
        iterations_run=iterations,
        converged=converged,
        lambda_value=float(lam),
        lambda_max_value=float(lam_max),
        lambda_tv_value=lam_tv,
        epsilon_value=float(epsilon),
    )
