"""Implicit Wilkinson-shift QR on a real symmetric tridiagonal matrix (numba)."""

from __future__ import annotations

import math

import numba
import numpy as np

EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 30  # per eigenvalue


@numba.njit(cache=True, nogil=True)
def _qr_sweeps(d, e, Z, want_z, max_sweeps):
    """Diagonalize ``tridiag(d, e)`` in place.

    On return ``d`` holds the (unsorted) eigenvalues and, when ``want_z``, the
    rotations are accumulated into ``Z`` so that, starting from the identity,
    ``tridiag(d0, e0) == Z @ diag(d) @ Z.T``. Returns -1 on success, otherwise
    the index of the eigenvalue whose sweep budget ran out.
    """
    n = d.shape[0]
    hi = n - 1
    sweeps = 0
    while hi > 0:
        if abs(e[hi - 1]) <= EPS * (abs(d[hi - 1]) + abs(d[hi])):
            e[hi - 1] = 0.0
            hi -= 1
            sweeps = 0
            continue
        lo = hi - 1
        while lo > 0:
            if abs(e[lo - 1]) <= EPS * (abs(d[lo - 1]) + abs(d[lo])):
                e[lo - 1] = 0.0
                break
            lo -= 1
        sweeps += 1
        if sweeps > max_sweeps:
            return hi

        # Wilkinson shift from the trailing 2x2 block
        t = e[hi - 1]
        half = 0.5 * (d[hi - 1] - d[hi])
        root = math.hypot(half, t)
        if half < 0.0:
            root = -root
        mu = d[hi] - t * t / (half + root)

        x = d[lo] - mu
        y = e[lo]
        for k in range(lo, hi):
            r = math.hypot(x, y)
            if r == 0.0:
                c, s = 1.0, 0.0
            else:
                c, s = x / r, y / r
            if k > lo:
                e[k - 1] = r
            dk, dk1, ek = d[k], d[k + 1], e[k]
            d[k] = c * c * dk + 2.0 * c * s * ek + s * s * dk1
            d[k + 1] = s * s * dk - 2.0 * c * s * ek + c * c * dk1
            e[k] = c * s * (dk1 - dk) + (c * c - s * s) * ek
            if k < hi - 1:
                y = s * e[k + 1]
                e[k + 1] = c * e[k + 1]
                x = e[k]
            if want_z:
                for row in range(Z.shape[0]):
                    zk = Z[row, k]
                    zk1 = Z[row, k + 1]
                    Z[row, k] = c * zk + s * zk1
                    Z[row, k + 1] = c * zk1 - s * zk
    return -1


def tridiagonal_eigh(d, e, want_vectors=False, max_sweeps=None):
    """Eigenvalues (ascending) and optionally eigenvectors of ``tridiag(d, e)``.

    Returns ``(w, Z, failed)`` where ``failed`` is -1 on success or the
    index at which the sweep budget (``MAX_SWEEPS`` per eigenvalue unless
    ``max_sweeps`` is given) was exhausted.
    """
    if max_sweeps is None:
        max_sweeps = MAX_SWEEPS
    d = np.array(d, dtype=np.float64)
    e = np.array(e, dtype=np.float64)
    n = d.shape[0]
    Z = np.eye(n) if want_vectors else np.empty((0, 0))
    failed = _qr_sweeps(d, e, Z, want_vectors, int(max_sweeps))
    order = np.argsort(d, kind="stable")
    w = d[order]
    if want_vectors:
        Z = Z[:, order]
    return w, (Z if want_vectors else None), int(failed)
