"""Dense Hermitian eigensolver.

Blocked Householder reduction to a real symmetric tridiagonal matrix followed
by implicit QR with Wilkinson shifts. The reduction follows the usual
panel scheme: ``nb`` reflectors are generated against a lazily updated
trailing matrix, then applied in one rank-2k update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _qr
from .errors import ConvergenceError, DomainError

__all__ = ["SpectralSample", "tridiagonalize", "eigenvalues", "eigen_full", "is_hermitian"]

BLOCK = 32


@dataclass(frozen=True)
class SpectralSample:
    """Ascending eigenvalues and, optionally, matching orthonormal columns.

    ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __len__(self):
        return self.eigenvalues.shape[0]


def is_hermitian(H: np.ndarray, rtol: float = 1e-12) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    return float(np.abs(H - H.conj().T).max(initial=0.0)) <= rtol * scale


def _householder(x: np.ndarray):
    """Reflector ``I - tau v v^H`` with ``v[0] = 1`` mapping ``x`` to ``beta e_1``.

    ``beta`` is real, so the reduced matrix is real tridiagonal.
    """
    alpha = x[0]
    xnorm = float(np.linalg.norm(x[1:])) if x.shape[0] > 1 else 0.0
    v = x.copy()
    if xnorm == 0.0 and alpha.imag == 0.0:
        v[0] = 1.0
        v[1:] = 0.0
        return float(alpha.real), 0j, v
    beta = -np.copysign(np.sqrt(alpha.real ** 2 + alpha.imag ** 2 + xnorm ** 2), alpha.real)
    tau = complex((beta - alpha.real) / beta, -alpha.imag / beta)
    v /= alpha - beta
    v[0] = 1.0
    return float(beta), tau, v


def tridiagonalize(H: np.ndarray, want_q: bool = False, block: int = BLOCK):
    """Reduce Hermitian ``H`` to real tridiagonal form ``T = Q^H H Q``.

    Returns
    -------
    d : ndarray, shape (n,)
        Diagonal of ``T``.
    e : ndarray, shape (n-1,)
        Sub-diagonal of ``T``.
    Q : ndarray or None
        Unitary accumulator, only when ``want_q``.
    """
    A = np.array(H, dtype=np.complex128, order="C")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    d = np.empty(n)
    e = np.empty(max(n - 1, 0))
    reflectors = []

    j0 = 0
    while j0 < n - 1:
        B = A[j0:, j0:]
        m = n - j0
        nb = min(block, m - 1)
        V = np.zeros((m, nb), dtype=np.complex128)
        W = np.zeros((m, nb), dtype=np.complex128)
        for i in range(nb):
            if i:
                B[i:, i] -= V[i:, :i] @ W[i, :i].conj() + W[i:, :i] @ V[i, :i].conj()
            d[j0 + i] = B[i, i].real
            beta, tau, v = _householder(B[i + 1:, i].copy())
            e[j0 + i] = beta
            if want_q:
                reflectors.append((j0 + i, tau, v))
            if tau == 0:
                continue
            V[i + 1:, i] = v
            x = B[i + 1:, i + 1:] @ v
            if i:
                x -= (V[i + 1:, :i] @ (W[i + 1:, :i].conj().T @ v)
                      + W[i + 1:, :i] @ (V[i + 1:, :i].conj().T @ v))
            x *= tau
            W[i + 1:, i] = x - 0.5 * tau * np.vdot(x, v) * v
        trailing = B[nb:, nb:]
        update = V[nb:] @ W[nb:].conj().T
        trailing -= update
        trailing -= update.conj().T
        j0 += nb
    if n:
        d[n - 1] = A[n - 1, n - 1].real

    if not want_q:
        return d, e, None
    Q = np.eye(n, dtype=np.complex128)
    for k, tau, v in reversed(reflectors):
        if tau == 0:
            continue
        block_q = Q[k + 1:, k + 1:]
        block_q -= np.outer(tau * v, v.conj() @ block_q)
    return d, e, Q


def _check_input(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise DomainError("matrix has non-finite entries")
    if not is_hermitian(H):
        raise DomainError("matrix is not Hermitian")
    return H


def _solve(H, want_vectors):
    H = _check_input(H)
    d, e, Q = tridiagonalize(H, want_q=want_vectors)
    w, Z, failed = _qr.tridiagonal_eigh(d, e, want_vectors)
    if failed >= 0:
        raise ConvergenceError(
            f"implicit QR exceeded {_qr.MAX_SWEEPS} sweeps on eigenvalue {failed}",
            float(abs(e[failed - 1])) if failed > 0 else float("nan"))
    if not want_vectors:
        return SpectralSample(w)
    U = Q @ Z
    # largest-modulus component of each column made real positive
    idx = np.argmax(np.abs(U), axis=0)
    lead = U[idx, np.arange(U.shape[1])]
    U *= (np.abs(lead) / lead)[None, :]
    U[idx, np.arange(U.shape[1])] = np.abs(lead)
    return SpectralSample(w, U)


def eigenvalues(H) -> SpectralSample:
    """All eigenvalues of Hermitian ``H``, ascending.

    Raises
    ------
    ConvergenceError
        If an eigenvalue needs more than 30 QR sweeps.
    """
    return _solve(H, False)


def eigen_full(H) -> SpectralSample:
    """Eigenvalues and orthonormal eigenvectors of Hermitian ``H``.

    Each eigenvector's largest-modulus component is real and positive.
    """
    return _solve(H, True)
