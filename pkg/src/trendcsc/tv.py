"""Exact proximal operator of the 1-D total-variation penalty.

``prox_tv(v, w)`` returns the unique minimizer of

    0.5 * ||u - v||_2^2 + w * sum_t |u[t+1] - u[t]|

via a direct taut-string-class sweep (single pass with backtracking,
O(T) in practice).  The output is exactly piecewise constant, which is
what makes the trend update of the alternating solver an exact
minimization step rather than an inner iteration.
"""

import numpy as np

from ._accel import maybe_jit

__all__ = ["prox_tv", "tv_norm", "tv_weight_scale"]


def tv_norm(values) -> float:
    """Total variation sum_t |v[t+1] - v[t]| (open sum, no wraparound)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        return 0.0
    return float(np.sum(np.abs(np.diff(arr))))


def tv_weight_scale(values) -> float:
    """Smallest TV weight at which prox_tv flattens the input to its mean.

    In the taut-string picture the output is constant exactly when a
    straight line fits inside the tube of half-width w around the
    running sum, so the threshold is the largest deviation of the
    partial sums from the straight line joining the endpoints.  This
    plays the role for lambda_tv that lambda_max plays for lambda: a
    natural unit for expressing relative TV weights.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("tv_weight_scale expects a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tv_weight_scale input contains non-finite values")
    if arr.size < 3:
        return 0.0 if arr.size == 1 else 0.5 * float(np.abs(np.diff(arr))[0])
    partial = np.cumsum(arr)[:-1]
    # Straight line from (0, 0) to (T, sum): value at t is t * mean.
    line = np.arange(1, arr.size) * (np.sum(arr) / arr.size)
    return float(np.max(np.abs(partial - line)))


@maybe_jit
def _tv1d_kernel(y, lam, out):
    # Direct non-iterative 1-D TV denoising: maintain the running bounds
    # (vmin, vmax) of the candidate segment value together with the slack
    # accumulators (umin, umax); emit a segment whenever the next sample
    # forces a jump.
    # Control flow is a single structured loop with one exit flag on
    # purpose: early returns or continue inside the loop produce a CFG
    # that the JIT frontend mis-resolves (wrong phi wiring), silently
    # corrupting the segment bounds.
    n = y.shape[0]
    k = 0
    k0 = 0
    kminus = 0
    kplus = 0
    vmin = y[0] - lam
    vmax = y[0] + lam
    umin = lam
    umax = -lam
    done = False
    while not done:
        if k == n - 1:
            if umin < 0.0:
                # The lower bound went slack: the segment must end with a
                # negative jump at kminus.
                while k0 <= kminus:
                    out[k0] = vmin
                    k0 += 1
                k = k0
                kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + lam - vmax
            elif umax > 0.0:
                while k0 <= kplus:
                    out[k0] = vmax
                    k0 += 1
                k = k0
                kplus = k0
                vmax = y[k]
                umax = -lam
                umin = vmax - lam - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while k0 <= k:
                    out[k0] = vmin
                    k0 += 1
                done = True
        elif y[k + 1] + umin < vmin - lam:
            # Negative jump is unavoidable: flush the segment at vmin.
            while k0 <= kminus:
                out[k0] = vmin
                k0 += 1
            k = k0
            kminus = k0
            kplus = k0
            vmin = y[k]
            vmax = y[k] + 2.0 * lam
            umin = lam
            umax = -lam
        elif y[k + 1] + umax > vmax + lam:
            # Positive jump is unavoidable: flush the segment at vmax.
            while k0 <= kplus:
                out[k0] = vmax
                k0 += 1
            k = k0
            kminus = k0
            kplus = k0
            vmin = y[k] - 2.0 * lam
            vmax = y[k]
            umin = lam
            umax = -lam
        else:
            # No jump: absorb the sample and re-tighten the bounds.
            k += 1
            umin += y[k] - vmin
            umax += y[k] - vmax
            if umin >= lam:
                vmin += (umin - lam) / (k - k0 + 1)
                umin = lam
                kminus = k
            if umax <= -lam:
                vmax += (umax + lam) / (k - k0 + 1)
                umax = -lam
                kplus = k


def prox_tv(target, weight) -> np.ndarray:
    """Proximal operator of ``weight * TV`` applied to ``target``.

    Parameters
    ----------
    target : array-like, shape (T,)
        Finite values; typically the residual x - D*Z.
    weight : float
        TV penalty weight, >= 0.  Zero short-circuits to a copy.

    Returns
    -------
    ndarray, shape (T,)
        The exact minimizer; piecewise constant for weight > 0.
    """
    arr = np.ascontiguousarray(target, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("prox_tv expects a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("prox_tv input contains non-finite values")
    w = float(weight)
    if not (np.isfinite(w) and w >= 0.0):
        raise ValueError(f"TV weight must be finite and >= 0, got {weight}")
    if w == 0.0 or arr.size == 1:
        return arr.copy()
    out = np.empty_like(arr)
    _tv1d_kernel(arr, w, out)
    return out
