"""Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)).

The Butcher tableau, error estimators and the dense-output coefficients are
the published DOP853 ones (taken from SciPy); the stepping loop, the PI step
size controller and the abort hooks live here so that the vortex integrator
can stop on collisions or boundary contact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .errors import IntegrationAbort, StepSizeUnderflow

N_STAGES = _dop.N_STAGES
A = _dop.A[:N_STAGES, :N_STAGES]
B = _dop.B
C = _dop.C[:N_STAGES]
E3 = _dop.E3
E5 = _dop.E5
D = _dop.D
A_EXTRA = _dop.A[N_STAGES + 1:]
C_EXTRA = _dop.C[N_STAGES + 1:]

SAFETY = 0.9
BETA = 0.04  # PI controller weight on the previous error
EXPO = 1.0 / 8.0 - 0.2 * BETA
FAC_MIN = 1.0 / 6.0
FAC_MAX = 3.0


def _norm(x):
    return np.sqrt(np.mean(np.abs(x) ** 2))


@dataclass
class OdeSolution:
    t: np.ndarray
    y: np.ndarray
    t_final: float
    y_final: np.ndarray
    nfev: int
    n_accepted: int
    n_rejected: int


def _initial_step(fun, t0, y0, f0, direction, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0, d1 = _norm(y0 / scale), _norm(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = fun(t0 + direction * h0, y1)
    d2 = _norm((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100 * h0, h1)


def _dense_coeffs(fun, t, y, h, K, y_new, f_new):
    Kx = np.empty((_dop.N_STAGES_EXTENDED, y.size), dtype=y.dtype)
    Kx[: N_STAGES + 1] = K
    for s, (a, c) in enumerate(zip(A_EXTRA, C_EXTRA), start=N_STAGES + 1):
        Kx[s] = fun(t + c * h, y + h * (a[:s] @ Kx[:s]))
    dy = y_new - y
    F = np.empty((_dop.INTERPOLATOR_POWER, y.size), dtype=y.dtype)
    F[0] = dy
    F[1] = h * K[0] - dy
    F[2] = 2 * dy - h * (f_new + K[0])
    F[3:] = h * (D @ Kx)
    return F


def _dense_eval(F, y_old, x):
    out = np.zeros((len(x), y_old.size), dtype=y_old.dtype)
    x = x[:, None]
    for i, f in enumerate(F[::-1]):
        out += f
        out *= x if i % 2 == 0 else (1 - x)
    return out + y_old


def dop853(fun, t0, y0, t_end, *, rtol=1e-10, atol=1e-12, t_eval=None, check=None, max_steps=1_000_000):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    Parameters
    ----------
    fun : callable
        Right-hand side ``fun(t, y)``; ``y`` may be real or complex.
    t_eval : array_like, optional
        Output times, monotone in the integration direction and within
        ``[t0, t_end]``; evaluated with the 7th-order dense output. When
        omitted only the end state is returned.
    check : callable, optional
        Called as ``check(t, y)`` after every accepted step; may raise.

    Returns
    -------
    OdeSolution
    """
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float).ravel()
    t = float(t0)
    t_end = float(t_end)
    direction = 1.0 if t_end >= t else -1.0
    t_eval = np.array([], dtype=float) if t_eval is None else np.asarray(t_eval, dtype=float)
    out = np.empty((len(t_eval), y.size), dtype=y.dtype)
    i_eval = 0
    while i_eval < len(t_eval) and t_eval[i_eval] == t:
        out[i_eval] = y
        i_eval += 1

    f = fun(t, y)
    nfev = 1
    if t == t_end:
        return OdeSolution(t_eval, out, t, y, nfev, 0, 0)
    h_abs = _initial_step(fun, t, y, f, direction, rtol, atol)
    nfev += 1
    K = np.empty((N_STAGES + 1, y.size), dtype=y.dtype)
    err_old = 1e-4
    n_acc = n_rej = 0
    rejected = False

    while direction * (t_end - t) > 0:
        min_step = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        if n_acc + n_rej >= max_steps or h_abs < min_step:
            partial = OdeSolution(t_eval[:i_eval], out[:i_eval], t, y, nfev, n_acc, n_rej)
            reason = "maximum number of steps exceeded" if h_abs >= min_step else "step size underflow"
            raise StepSizeUnderflow(f"{reason} at t={t:.17g}", t=t, partial=partial)
        h = direction * h_abs
        t_new = t + h
        if direction * (t_new - t_end) > 0:
            t_new = t_end
        h = t_new - t
        h_abs = abs(h)

        K[0] = f
        for s in range(1, N_STAGES):
            K[s] = fun(t + C[s] * h, y + h * (A[s, :s] @ K[:s]))
        y_new = y + h * (B @ K[:N_STAGES])
        f_new = fun(t_new, y_new)
        K[N_STAGES] = f_new
        nfev += N_STAGES

        scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
        err5 = np.abs((E5 @ K) / scale) ** 2
        err3 = np.abs((E3 @ K) / scale) ** 2
        e5, e3 = err5.sum(), err3.sum()
        if e5 == 0 and e3 == 0:
            err = 0.0
        else:
            err = h_abs * e5 / np.sqrt((e5 + 0.01 * e3) * y.size)

        if not np.isfinite(err):
            # a stage left the region where fun is defined; shrink and retry
            h_abs *= FAC_MIN
            n_rej += 1
            rejected = True
        elif err <= 1.0:
            fac11 = max(err, 1e-300) ** EXPO
            fac = fac11 / err_old**BETA / SAFETY
            fac = min(1.0 / FAC_MIN, max(1.0 / FAC_MAX, fac))
            h_next = h_abs / fac
            if rejected:
                h_next = min(h_next, h_abs)
            err_old = max(err, 1e-4)

            if i_eval < len(t_eval) and direction * (t_eval[i_eval] - t_new) <= 0:
                j = i_eval
                while j < len(t_eval) and direction * (t_eval[j] - t_new) <= 0:
                    j += 1
                F = _dense_coeffs(fun, t, y, h, K, y_new, f_new)
                nfev += 4
                out[i_eval:j] = _dense_eval(F, y, (t_eval[i_eval:j] - t) / h)
                i_eval = j

            t, y, f = t_new, y_new, f_new
            n_acc += 1
            rejected = False
            h_abs = h_next
            if check is not None:
                try:
                    check(t, y)
                except IntegrationAbort as exc:
                    exc.partial = OdeSolution(t_eval[:i_eval], out[:i_eval], t, y, nfev, n_acc, n_rej)
                    raise
        else:
            fac11 = err**EXPO
            h_abs = h_abs / min(1.0 / FAC_MIN, fac11 / SAFETY)
            n_rej += 1
            rejected = True

    # outputs requested exactly at t_end
    while i_eval < len(t_eval):
        out[i_eval] = y
        i_eval += 1
    return OdeSolution(t_eval, out, t, y, nfev, n_acc, n_rej)
