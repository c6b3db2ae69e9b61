"""
Linear-algebra and special-function kernels.

Real symmetric eigendecomposition (implicit-shift QL on tridiagonal input,
Householder reduction for dense input), complex vector helpers and
generalized Laguerre polynomials. All functions are pure; nothing here keeps
state between calls.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from errors import ConvergenceError, ValidationError, require, require_all_finite

logger = logging.getLogger(__name__)

MAX_SWEEPS = 50

ArrayLike = Union[float, np.ndarray]


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix stored as its two bands."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        offdiag = np.asarray(self.offdiag, dtype=float).reshape(-1)
        require(diag.ndim == 1 and diag.size >= 1, "diag", "expected a 1-D array with at least one entry")
        require(
            offdiag.size == diag.size - 1,
            "offdiag",
            f"expected {diag.size - 1} entries, got {offdiag.size}",
        )
        require_all_finite(diag, "diag")
        require_all_finite(offdiag, "offdiag")
        object.__setattr__(self, "diag", _frozen(diag))
        object.__setattr__(self, "offdiag", _frozen(offdiag))

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        shape = (-1,) + (1,) * (v.ndim - 1)
        off = self.offdiag.reshape(shape)
        out = self.diag.reshape(shape) * v
        out[:-1] += off * v[1:]
        out[1:] += off * v[:-1]
        return out

    def norm_inf(self) -> float:
        rows = np.abs(self.diag).copy()
        rows[:-1] += np.abs(self.offdiag)
        rows[1:] += np.abs(self.offdiag)
        return float(rows.max())


@dataclass(frozen=True)
class EigenPairs:
    """Ascending eigenvalues with orthonormal eigenvectors stored column-wise."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "vectors", _frozen(self.vectors))

    @property
    def size(self) -> int:
        return int(self.values.size)

    def orthonormality_error(self) -> float:
        gram = self.vectors.T @ self.vectors
        return float(np.max(np.abs(gram - np.eye(self.size))))

    def residual(self, matrix: Union[SymTridiag, np.ndarray]) -> float:
        """Largest ‖H·v − λ·v‖∞ over all pairs."""
        if isinstance(matrix, SymTridiag):
            hv = matrix.matvec(self.vectors)
        else:
            hv = np.asarray(matrix) @ self.vectors
        return float(np.max(np.abs(hv - self.vectors * self.values[None, :])))


def eig_sym_tridiag(m: SymTridiag) -> EigenPairs:
    """Full eigendecomposition by implicit-shift QL (tqli)."""
    n = m.size
    d: List[float] = [float(x) for x in m.diag]
    e: List[float] = [float(x) for x in m.offdiag] + [0.0]
    # rows of zt are the eigenvectors being accumulated
    zt = np.eye(n)
    total_sweeps = 0

    for l in range(n):
        sweeps = 0
        while True:
            m_idx = l
            while m_idx < n - 1:
                dd = abs(d[m_idx]) + abs(d[m_idx + 1])
                if abs(e[m_idx]) + dd == dd:
                    break
                m_idx += 1
            if m_idx == l:
                break
            if sweeps == MAX_SWEEPS:
                raise ConvergenceError(l, sweeps)
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m_idx] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m_idx - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m_idx] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                upper = zt[i + 1].copy()
                zt[i + 1] = s * zt[i] + c * upper
                zt[i] = c * zt[i] - s * upper
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m_idx] = 0.0
        total_sweeps += sweeps

    values = np.array(d)
    order = np.argsort(values, kind="stable")
    logger.debug(f"QL eigendecomposition of size {n} finished in {total_sweeps} sweeps")
    return EigenPairs(values=values[order], vectors=zt[order].T)


def tridiagonalize(a: np.ndarray) -> Tuple[SymTridiag, np.ndarray]:
    """
    Householder reduction of a dense real symmetric matrix.

    Returns (T, Q) with Qᵀ·a·Q = T.
    """
    work = np.array(a, dtype=float)
    require(work.ndim == 2 and work.shape[0] == work.shape[1], "a", "expected a square matrix")
    require_all_finite(work, "a")
    scale = max(1.0, float(np.max(np.abs(work)))) if work.size else 1.0
    require(np.max(np.abs(work - work.T)) <= 1e-12 * scale, "a", "matrix is not symmetric")

    n = work.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        u = work[k + 1:, k].copy()
        if not np.any(u[1:]):
            continue
        alpha = math.sqrt(float(u @ u))
        if u[0] < 0.0:
            alpha = -alpha
        u[0] += alpha
        h = float(u @ u) / 2.0
        sub = work[k + 1:, k + 1:]
        v = sub @ u / h
        gamma = float(u @ v) / (2.0 * h)
        v = v - gamma * u
        work[k + 1:, k + 1:] = sub - np.outer(v, u) - np.outer(u, v)
        work[k, k + 1:] = 0.0
        work[k + 1:, k] = 0.0
        work[k, k + 1] = work[k + 1, k] = -alpha
        q[:, k + 1:] -= np.outer(q[:, k + 1:] @ u, u) / h

    return SymTridiag(np.diagonal(work).copy(), np.diagonal(work, 1).copy()), q


def eig_sym_dense(a: np.ndarray) -> EigenPairs:
    tri, q = tridiagonalize(a)
    pairs = eig_sym_tridiag(tri)
    return EigenPairs(values=pairs.values, vectors=q @ pairs.vectors)


def laguerre_table(n: int, k: int, x: ArrayLike) -> np.ndarray:
    """L_0^{(k)}(x) … L_n^{(k)}(x) by the three-term recurrence; leading axis is the degree."""
    require(n >= 0, "n", "degree must be non-negative")
    require(k >= 0, "k", "order must be non-negative")
    x = np.asarray(x, dtype=float)
    table = np.empty((n + 1,) + x.shape)
    table[0] = 1.0
    if n >= 1:
        table[1] = 1.0 + k - x
    for j in range(1, n):
        table[j + 1] = ((2 * j + k + 1 - x) * table[j] - (j + k) * table[j - 1]) / (j + 1)
    return table


def laguerre(n: int, k: int, x: ArrayLike) -> ArrayLike:
    """Generalized Laguerre polynomial L_n^{(k)}(x)."""
    value = laguerre_table(n, k, x)[n]
    return float(value) if np.ndim(value) == 0 else value


def log_factorials(n: int) -> np.ndarray:
    """log(j!) for j = 0 … n−1."""
    out = np.zeros(max(n, 1))
    if n > 1:
        out[1:] = np.cumsum(np.log(np.arange(1, n)))
    return out[:n]


def expi_weighted_sum(weights: np.ndarray, energies: np.ndarray, t: ArrayLike) -> Union[complex, np.ndarray]:
    """Σ_ℓ w_ℓ e^{−iE_ℓ t} (ħ = 1). Vectorised over an array of times."""
    weights = np.asarray(weights, dtype=complex)
    energies = np.asarray(energies, dtype=float)
    if weights.shape != energies.shape:
        raise ValidationError("energies", f"length {energies.size} does not match weights length {weights.size}")
    times = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(times, energies))
    total = phases @ weights
    return complex(total) if times.ndim == 0 else total


def vdot(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(v) ** 2)))


def normalize(v: np.ndarray) -> np.ndarray:
    length = norm(v)
    if length == 0.0:
        raise ValidationError("amps", "cannot normalize the zero vector")
    return np.asarray(v) / length
