"""Dense linear algebra and a counter-based random source."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import ndtri


class NumericsError(ValueError):
    pass


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NumericsError(f"expected a square matrix, got shape {A.shape}")
    return A


def is_symmetric(A, tol=1e-12) -> bool:
    A = np.asarray(A)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return bool(np.all(np.abs(A - A.T) <= tol * scale))


def solve_spd(A, b, refine: int = 1) -> np.ndarray:
    """Cholesky solve of A x = b with iterative refinement.

    Raises NumericsError("matrix not positive definite") if the
    factorization breaks down.
    """
    A = _as_square(A)
    b = np.asarray(b, dtype=float)
    if A.shape[0] == 0:
        return np.zeros_like(b)
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NumericsError("matrix not positive definite") from exc
    x = scipy.linalg.cho_solve(factor, b)
    for _ in range(refine):
        r = b - A @ x
        x = x + scipy.linalg.cho_solve(factor, r)
    return x


def solve_cg(A, b, tol=1e-14, maxiter=None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradient for SPD systems."""
    A = _as_square(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if maxiter is None:
        maxiter = 10 * n + 10
    dinv = 1.0 / np.diag(A)
    x = np.zeros(n)
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x
    for _ in range(maxiter):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            break
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def min_eigen_spd(A) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    A = _as_square(A)
    if not is_symmetric(A):
        raise NumericsError("matrix not symmetric")
    if A.shape[0] == 1:
        return float(A[0, 0])
    return float(scipy.linalg.eigh(A, eigvals_only=True, subset_by_index=[0, 0])[0])


def rayleigh(A, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ np.asarray(A) @ x / (x @ x))


def psd_root(C, tol=1e-10) -> np.ndarray:
    """Lower factor L with L L^T = C for symmetric PSD C.

    Cholesky when C is definite, otherwise a symmetric eigen-root.
    """
    C = _as_square(C)
    if not is_symmetric(C, 1e-10):
        raise NumericsError("matrix not symmetric")
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        pass
    w, V = np.linalg.eigh((C + C.T) / 2)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w.min() < -tol * scale:
        raise NumericsError("matrix not positive semidefinite")
    return V * np.sqrt(np.clip(w, 0.0, None))


_BLOCK = 1 << 128


@dataclass(frozen=True)
class RandomSource:
    """Counter-based stream (Philox4x64) keyed by a 64-bit seed.

    Position ``i`` of the stream is a fixed function of (seed, stream, i),
    so a batch starting at any offset reproduces the same variates.
    """

    seed: int = 0
    stream: int = 0

    def fork(self, i: int) -> "RandomSource":
        """Independent child stream; forking is deterministic."""
        return RandomSource(self.seed, self.stream * 1_000_003 + i + 1)

    def _raw(self, n: int, start: int = 0) -> np.ndarray:
        # Philox emits 4 words per counter step; start must align to 4.
        if start % 4:
            raise NumericsError("start offset must be a multiple of 4")
        bg = np.random.Philox(key=self.seed & (2**64 - 1))
        bg.advance(self.stream * _BLOCK + start // 4)
        return bg.random_raw(n)

    def uniforms(self, n: int, start: int = 0) -> np.ndarray:
        """Uniform variates in the open interval (0, 1)."""
        raw = self._raw(n, start) >> np.uint64(11)
        return (raw.astype(np.float64) + 0.5) * 2.0**-53

    def normals(self, n: int, start: int = 0) -> np.ndarray:
        return ndtri(self.uniforms(n, start))


def normal_samples(rs: RandomSource, n: int, start: int = 0) -> np.ndarray:
    """``n`` standard normals by inverse CDF of the uniform stream."""
    if n < 1:
        raise NumericsError("n must be >= 1")
    return rs.normals(n, start)
