"""Compiled inner loops for the linear machine.

States are ``(trials, spins)`` arrays. Each trial is integrated in its own
loop with a fixed summation order, so results are bitwise independent of
which trials share a call.
"""

import numpy as np
from numba import njit

OK = -1


@njit(cache=True)
def csr_rows_dot(indptr, indices, data, x):
    """``out[j] = M @ x[j]`` for every trial row ``j``."""
    T = x.shape[0]
    m = indptr.size - 1
    out = np.zeros((T, m))
    for j in range(T):
        for i in range(m):
            s = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * x[j, indices[p]]
            out[j, i] = s
    return out


@njit(cache=True)
def quadratic_energy(indptr, indices, data, field, q):
    """``-1/2 q J q - h q`` per row of ``q``."""
    T, n = q.shape
    out = np.zeros(T)
    for j in range(T):
        e = 0.0
        for i in range(n):
            s = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * q[j, indices[p]]
            e += q[j, i] * s
        lin = 0.0
        for i in range(n):
            lin += field[i] * q[j, i]
        out[j] = -0.5 * e - lin
    return out


@njit(cache=True)
def advance(indptr, indices, data, x, f, use_f, noise, off, cols, k_steps, dt, coef, rc):
    """Integrate ``dx = (A x + f) / rc dt + coef dW`` for ``k_steps`` with clamping.

    ``x`` is modified in place. ``cols[i]`` maps local spin ``i`` to its
    column in the noise block. Returns ``(trial, step)`` of the first
    non-finite drift, or ``(-1, -1)``.
    """
    T, m = x.shape
    d = np.empty(m)
    for j in range(T):
        for k in range(k_steps):
            bad = False
            for i in range(m):
                s = 0.0
                for p in range(indptr[i], indptr[i + 1]):
                    s += data[p] * x[j, indices[p]]
                if use_f:
                    s += f[j, i]
                d[i] = s / rc
                if not np.isfinite(d[i]):
                    bad = True
            if bad:
                return j, k
            c = coef[k]
            for i in range(m):
                v = x[j, i] + d[i] * dt + c * noise[j, off + k, cols[i]]
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                x[j, i] = v
    return OK, OK


@njit(cache=True)
def advance_tracked(indptr, indices, data, eptr, eind, edat, x, f, noise, off, k_steps, dt, coef, rc, g2):
    """Concurrent step that also accumulates ``int |J_ext (x - x0)|^2 / rc^2 dt``.

    ``f`` holds ``J_ext x0``; ``g2`` (per trial) is updated in place.
    """
    T, m = x.shape
    d = np.empty(m)
    for j in range(T):
        for k in range(k_steps):
            bad = False
            acc = 0.0
            for i in range(m):
                s = 0.0
                for p in range(indptr[i], indptr[i + 1]):
                    s += data[p] * x[j, indices[p]]
                e = 0.0
                for p in range(eptr[i], eptr[i + 1]):
                    e += edat[p] * x[j, eind[p]]
                g = (e - f[j, i]) / rc
                acc += g * g
                d[i] = (s + f[j, i]) / rc
                if not np.isfinite(d[i]):
                    bad = True
            if bad:
                return j, k
            g2[j] += acc * dt
            c = coef[k]
            for i in range(m):
                v = x[j, i] + d[i] * dt + c * noise[j, off + k, i]
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                x[j, i] = v
    return OK, OK


@njit(cache=True)
def advance_coupled(iptr, iind, idat, eptr, eind, edat, x, y, f, noise, off, k_steps, dt, coef, rc,
                    g2, ext_int, pair_int):
    """Advance a concurrent state ``x`` and ideal state ``y`` on shared noise.

    Accumulates (in place) the squared external-gradient error ``g2``, the
    integrated external-gradient difference ``ext_int`` and the integrated
    full-gradient difference ``pair_int``.
    """
    T, n = x.shape
    dx = np.empty(n)
    dy = np.empty(n)
    for j in range(T):
        for k in range(k_steps):
            acc = 0.0
            bad = False
            for i in range(n):
                ax = 0.0
                ay = 0.0
                for p in range(iptr[i], iptr[i + 1]):
                    ax += idat[p] * x[j, iind[p]]
                    ay += idat[p] * y[j, iind[p]]
                bx = 0.0
                by = 0.0
                for p in range(eptr[i], eptr[i + 1]):
                    bx += edat[p] * x[j, eind[p]]
                    by += edat[p] * y[j, eind[p]]
                dx[i] = (ax + f[j, i]) / rc
                dy[i] = (ay + by) / rc
                g = (f[j, i] - bx) / rc
                acc += g * g
                ext_int[j, i] += g * dt
                pair_int[j, i] += (dy[i] - (ax + bx) / rc) * dt
                if not (np.isfinite(dx[i]) and np.isfinite(dy[i])):
                    bad = True
            if bad:
                return j, k
            g2[j] += acc * dt
            c = coef[k]
            for i in range(n):
                w = c * noise[j, off + k, i]
                v = x[j, i] + dx[i] * dt + w
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                x[j, i] = v
                v = y[j, i] + dy[i] * dt + w
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                y[j, i] = v
    return OK, OK
