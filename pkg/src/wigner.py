"""
Wigner function of a chain state in the (x, p) quadratures of mode b.

W(x, p) = (1/π)⟨s|D(α)Π_b D†(α)|s⟩ with α = (x + ip)/√2 and Π_b = (−1)^{b†b}.
Using D(α)Π_b D†(α) = D(2α)Π_b the sum runs over the closed-form elements
⟨n|D(2α)|m⟩, so no truncated matrix exponential is involved.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from errors import require, require_all_finite
from model import ChainState
from numerics import laguerre_table, log_factorials

logger = logging.getLogger(__name__)

DEFAULT_EXTENT = 6.5
DEFAULT_POINTS = 201
COVERAGE_MARGIN = 4.0
SUPPORT_TOLERANCE = 1e-20
ROWS_PER_BLOCK = 16


@dataclass(frozen=True)
class WignerGrid:
    """values[i, j] = W(x_axis[i], p_axis[j])."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x_axis = _check_axis(self.x_axis, "x_axis")
        p_axis = _check_axis(self.p_axis, "p_axis")
        values = np.asarray(self.values, dtype=float)
        require(values.shape == (x_axis.size, p_axis.size), "values", "shape must be (len(x_axis), len(p_axis))")
        object.__setattr__(self, "x_axis", x_axis)
        object.__setattr__(self, "p_axis", p_axis)
        object.__setattr__(self, "values", values)

    @property
    def cell_area(self) -> float:
        return float(np.mean(np.diff(self.x_axis)) * np.mean(np.diff(self.p_axis)))

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_area)

    def peak(self) -> Tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.x_axis[i]), float(self.p_axis[j])

    def to_frame(self) -> pd.DataFrame:
        """Long format, x varying slowest."""
        x, p = np.meshgrid(self.x_axis, self.p_axis, indexing="ij")
        return pd.DataFrame({"x": x.ravel(), "p": p.ravel(), "W": self.values.ravel()})


class Squeezing(NamedTuple):
    tangential: float
    normal: float


def _check_axis(axis, name: str) -> np.ndarray:
    axis = np.asarray(axis, dtype=float).reshape(-1)
    require(axis.size >= 2, name, "needs at least two points")
    require_all_finite(axis, name)
    require(bool(np.all(np.diff(axis) > 0)), name, "must be strictly increasing")
    return axis


def default_axes(extent: float = DEFAULT_EXTENT, points: int = DEFAULT_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    axis = np.linspace(-extent, extent, points)
    return axis, axis.copy()


def _effective_amplitudes(s: ChainState) -> np.ndarray:
    """Amplitudes up to the last level whose remaining tail weight is above SUPPORT_TOLERANCE."""
    probs = s.probabilities()
    remaining = np.cumsum(probs[::-1])[::-1]
    keep = np.flatnonzero(remaining > SUPPORT_TOLERANCE)
    size = int(keep[-1]) + 1 if keep.size else 1
    return np.asarray(s.amps[:size])


def _wigner_rows(amps: np.ndarray, x_rows: np.ndarray, p_axis: np.ndarray) -> np.ndarray:
    x, p = np.meshgrid(x_rows, p_axis, indexing="ij")
    # 2α = √2 (x + ip)
    r = math.sqrt(2.0) * np.hypot(x, p)
    theta = np.arctan2(p, x)
    r_sq = r * r
    log_r = np.log(np.where(r > 0, r, 1.0))
    size = amps.size
    lf = log_factorials(size)
    signs = np.where(np.arange(size) % 2 == 0, 1.0, -1.0)
    total = np.zeros(x.shape)
    for k in range(size):
        m = np.arange(size - k)
        coeff = signs[m] * np.conj(amps[m + k]) * amps[m] * np.exp(0.5 * (lf[m] - lf[m + k]))
        table = laguerre_table(size - 1 - k, k, r_sq)
        inner = np.tensordot(coeff, table, axes=(0, 0))
        radial = np.exp(k * log_r - 0.5 * r_sq)
        if k > 0:
            radial = np.where(r > 0, radial, 0.0)
        term = np.real(np.exp(1j * k * theta) * radial * inner)
        total += term if k == 0 else 2.0 * term
    return total / math.pi


def phase_space_moments(s: ChainState) -> Tuple[np.ndarray, np.ndarray]:
    """Mean (x̄, p̄) and symmetrized covariance matrix of the b quadratures."""
    amps = s.amps
    n = np.arange(amps.size)
    mean_b = complex(np.vdot(amps[:-1], np.sqrt(n[1:]) * amps[1:]))
    mean_b2 = complex(np.vdot(amps[:-2], np.sqrt(n[2:] * (n[2:] - 1.0)) * amps[2:]))
    number = float(np.sum(n * np.abs(amps) ** 2))
    mean = math.sqrt(2.0) * np.array([mean_b.real, mean_b.imag])
    var_x = mean_b2.real + number + 0.5 - mean[0] ** 2
    var_p = -mean_b2.real + number + 0.5 - mean[1] ** 2
    cov = mean_b2.imag - mean[0] * mean[1]
    return mean, np.array([[var_x, cov], [cov, var_p]])


def _check_coverage(s: ChainState, x_axis: np.ndarray, p_axis: np.ndarray) -> None:
    mean, _ = phase_space_moments(s)
    reach = max(math.hypot(x, p) for x in (x_axis[0], x_axis[-1]) for p in (p_axis[0], p_axis[-1])) / math.sqrt(2.0)
    needed = float(np.hypot(*mean)) / math.sqrt(2.0) + COVERAGE_MARGIN
    if reach < needed:
        logger.warning(f"Wigner grid reaches |alpha|={reach:.3f}, state needs {needed:.3f}; the integral may fall short of 1")


def wigner(s: ChainState, x_axis, p_axis, n_jobs: Optional[int] = 1) -> WignerGrid:
    x_axis = _check_axis(x_axis, "x_axis")
    p_axis = _check_axis(p_axis, "p_axis")
    _check_coverage(s, x_axis, p_axis)
    amps = _effective_amplitudes(s)
    blocks = [x_axis[i:i + ROWS_PER_BLOCK] for i in range(0, x_axis.size, ROWS_PER_BLOCK)]
    logger.debug(f"Wigner grid {x_axis.size}x{p_axis.size} over {amps.size} levels in {len(blocks)} blocks")
    rows = Parallel(n_jobs=n_jobs)(delayed(_wigner_rows)(amps, block, p_axis) for block in blocks)
    return WignerGrid(x_axis=x_axis, p_axis=p_axis, values=np.vstack(rows))


def wigner_negativity(gridded: WignerGrid) -> float:
    return float(np.sum(np.clip(-gridded.values, 0.0, None)) * gridded.cell_area)


def squeezing_diagnostic(s: ChainState, beta0: float) -> Squeezing:
    """
    Quadrature variances along the tangent and the normal of the circular orbit
    centred at (−√2β₀, 0). The normal points from the centre to the mean; it falls
    back to the x axis when the mean sits on the centre.
    """
    mean, cov = phase_space_moments(s)
    radial = mean - np.array([-math.sqrt(2.0) * beta0, 0.0])
    length = float(np.hypot(*radial))
    normal = radial / length if length > 1e-12 else np.array([1.0, 0.0])
    tangent = np.array([-normal[1], normal[0]])
    return Squeezing(tangential=float(tangent @ cov @ tangent), normal=float(normal @ cov @ normal))
