"""Compiled inner loops for Gram-form coordinate descent.

All kernels operate on the standardized problem

    min_b  0.5 * b' G b - c' b + lam * |b|_1,   G = X'X/n,  c = X'y/n

and keep ``grad = c - G b`` (the scaled residual correlation) up to date
in place.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True, nogil=True)
def residual_correlation(gram, xty, beta):
    p = xty.shape[0]
    grad = xty.copy()
    for k in range(p):
        bk = beta[k]
        if bk != 0.0:
            for i in range(p):
                grad[i] -= gram[i, k] * bk
    return grad


@njit(cache=True, nogil=True)
def _update(gram, lam, beta, grad, j):
    gjj = gram[j, j]
    if gjj <= 0.0:
        # all-zero column: only the penalty sees beta_j, and its Gram column is zero
        d = abs(beta[j])
        beta[j] = 0.0
        return d
    old = beta[j]
    new = soft(grad[j] + gjj * old, lam) / gjj
    d = new - old
    if d != 0.0:
        beta[j] = new
        for i in range(grad.shape[0]):
            grad[i] -= d * gram[i, j]
    return abs(d)


@njit(cache=True, nogil=True)
def sweep_full(gram, lam, beta, grad):
    """One cyclic pass over every coordinate; returns the largest move."""
    dmax = 0.0
    for j in range(beta.shape[0]):
        d = _update(gram, lam, beta, grad, j)
        if d > dmax:
            dmax = d
    return dmax


@njit(cache=True, nogil=True)
def sweep_active(gram, lam, beta, grad, active, tol, max_sweeps):
    """Cycle over ``active`` until the largest move drops below tol * max(1, |b|_inf).

    Returns the number of sweeps spent.
    """
    sweeps = 0
    while sweeps < max_sweeps:
        dmax = 0.0
        for a in range(active.shape[0]):
            d = _update(gram, lam, beta, grad, active[a])
            if d > dmax:
                dmax = d
        sweeps += 1
        scale = 1.0
        for j in range(beta.shape[0]):
            if abs(beta[j]) > scale:
                scale = abs(beta[j])
        if dmax < tol * scale:
            break
    return sweeps


@njit(cache=True, nogil=True)
def kkt_violation(grad, beta, lam):
    worst = 0.0
    for j in range(beta.shape[0]):
        if beta[j] > 0.0:
            v = abs(grad[j] - lam)
        elif beta[j] < 0.0:
            v = abs(grad[j] + lam)
        else:
            v = abs(grad[j]) - lam
        if v > worst:
            worst = v
    return worst
