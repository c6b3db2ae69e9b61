"""
Exact time evolution on the parity chains by spectral decomposition.

A Propagator diagonalizes one chain Hamiltonian once and stores the overlaps
⟨φ_ℓ|ψ(0)⟩; every observable below is then a sum over ℓ with phases e^{−iE_ℓt}.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from analytic import displaced_vacuum_weights, perturbative_spectrum, significant_levels
from errors import ValidationError, require, require_all_finite
from model import (
    PARITIES,
    TAIL_WIDTH,
    ChainState,
    ModelParams,
    TensorState,
    annihilation_matrix,
    build_chain_hamiltonian,
    build_tensor_hamiltonian,
    chain_to_tensor,
    tensor_to_chain,
    validate_parity,
)
from numerics import ArrayLike, EigenPairs, eig_sym_dense, eig_sym_tridiag, expi_weighted_sum

logger = logging.getLogger(__name__)

TAIL_WARNING = 1e-8
WEIGHT_TOLERANCE = 1e-10
TWO_PI = 2.0 * math.pi


def time_grid(t_max: float, n_steps: int) -> np.ndarray:
    """Uniform grid over [0, t_max] (physical time) with n_steps samples."""
    require(t_max > 0, "t_max", f"must be positive, got {t_max}")
    require(n_steps >= 2, "n_steps", f"must be at least 2, got {n_steps}")
    return np.linspace(0.0, t_max, n_steps)


def _check_times(t_grid: ArrayLike) -> np.ndarray:
    times = np.atleast_1d(np.asarray(t_grid, dtype=float))
    require(times.ndim == 1 and times.size >= 1, "t_grid", "expected a non-empty 1-D array of times")
    require_all_finite(times, "t_grid")
    require(bool(np.all(np.diff(times) > 0)), "t_grid", "times must be strictly increasing")
    return times


@dataclass(frozen=True)
class TimeSeries:
    """A sampled observable. Times are physical; to_frame reports them in units of 2π/ω."""

    times: np.ndarray
    values: np.ndarray
    label: str
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        times = _check_times(self.times)
        values = np.asarray(self.values)
        require(values.shape == times.shape, "values", f"expected {times.size} samples, got {values.size}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self) -> int:
        return int(self.times.size)

    def to_frame(self, omega: float = 1.0) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times * omega / TWO_PI, self.label: self.values})


@dataclass(frozen=True)
class Propagator:
    spectrum: EigenPairs
    initial_weights: np.ndarray
    params: ModelParams
    parity: int

    def __post_init__(self):
        weights = np.array(self.initial_weights, dtype=complex)
        total = float(np.sum(np.abs(weights) ** 2))
        require(abs(total - 1.0) <= WEIGHT_TOLERANCE, "initial_weights", f"overlaps sum to {total:.12f}, not 1")
        weights.setflags(write=False)
        object.__setattr__(self, "initial_weights", weights)

    @property
    def energies(self) -> np.ndarray:
        return self.spectrum.values

    @property
    def weights(self) -> np.ndarray:
        """|⟨φ_ℓ|ψ(0)⟩|²."""
        return np.abs(self.initial_weights) ** 2

    def eigen_amplitudes(self, times: np.ndarray) -> np.ndarray:
        """⟨φ_ℓ|ψ(t)⟩ for each time (rows) and level (columns)."""
        return np.exp(-1j * np.multiply.outer(times, self.energies)) * self.initial_weights[None, :]


@dataclass(frozen=True)
class DetuningTable:
    """Levels of one chain with δ_ℓ = (ωℓ − (E_ℓ + g²/ω))/ω₀ and their weight in ψ(0)."""

    frame: pd.DataFrame
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        total = float(self.frame["weight"].sum())
        require(abs(total - 1.0) <= 1e-8, "weight", f"weights sum to {total:.10f}, not 1")
        require(bool(self.frame["level"].is_monotonic_increasing), "level", "rows must be sorted by level")

    def top(self, count: int) -> pd.DataFrame:
        """The count highest-weight rows, heaviest first."""
        return self.frame.sort_values("weight", ascending=False, kind="mergesort").head(count)


def make_propagator(params: ModelParams, p: int, psi0: ChainState) -> Propagator:
    validate_parity(p)
    require(psi0.parity == p, "psi0", f"state lives on chain {psi0.parity}, propagator requested for {p}")
    require(psi0.n_max == params.n_max, "psi0", f"state has {psi0.n_max} levels, params.n_max={params.n_max}")
    psi0.check_health()
    spectrum = eig_sym_tridiag(build_chain_hamiltonian(params, p))
    logger.info(f"Diagonalized chain p={p:+d} of size {params.n_max} (g={params.g}, omega0={params.omega0})")
    overlaps = spectrum.vectors.T @ psi0.amps
    return Propagator(spectrum=spectrum, initial_weights=overlaps, params=params, parity=p)


def _tail_warnings(prop: Propagator, times: np.ndarray) -> Tuple[str, ...]:
    tail = prop.eigen_amplitudes(times) @ prop.spectrum.vectors[-TAIL_WIDTH:, :].T
    mass = np.sum(np.abs(tail) ** 2, axis=1)
    worst = int(np.argmax(mass))
    if mass[worst] <= TAIL_WARNING:
        return ()
    message = f"tail mass {mass[worst]:.3e} at t={times[worst]:.6g} exceeds {TAIL_WARNING:.0e}; raise n_max"
    logger.warning(message)
    return (message,)


def evolve(prop: Propagator, t: float) -> ChainState:
    u = prop.eigen_amplitudes(np.array([float(t)]))[0]
    return ChainState(parity=prop.parity, amps=prop.spectrum.vectors @ u, time_tag=float(t))


def evolve_many(prop: Propagator, t_grid: ArrayLike) -> np.ndarray:
    """Chain amplitudes at every time, one row per time."""
    times = _check_times(t_grid)
    return prop.eigen_amplitudes(times) @ prop.spectrum.vectors.T


def revival_series(prop: Propagator, t_grid: ArrayLike) -> TimeSeries:
    """|Σ_ℓ |⟨ψ(0)|φ_ℓ⟩|² e^{−iE_ℓ t}|² straight from the stored weights."""
    times = _check_times(t_grid)
    amplitude = expi_weighted_sum(prop.weights, prop.energies, times)
    return TimeSeries(times, np.abs(amplitude) ** 2, "P", _tail_warnings(prop, times))


def photon_statistics(s: ChainState) -> np.ndarray:
    return s.probabilities()


def photon_statistics_series(prop: Propagator, times: ArrayLike) -> np.ndarray:
    """P_{n_b}(t); rows follow times, columns follow n_b."""
    return np.abs(evolve_many(prop, times)) ** 2


def trajectory(prop: Propagator, t_grid: ArrayLike) -> Tuple[TimeSeries, TimeSeries]:
    """(x̄, p̄) = √2 (Re⟨b⟩, Im⟨b⟩) along the evolution."""
    times = _check_times(t_grid)
    vectors = prop.spectrum.vectors
    b_eigen = vectors.T @ annihilation_matrix(prop.params.n_max) @ vectors
    u = prop.eigen_amplitudes(times)
    mean_b = np.sum((u.conj() @ b_eigen) * u, axis=1)
    warnings = _tail_warnings(prop, times)
    x = TimeSeries(times, math.sqrt(2.0) * mean_b.real, "x", warnings)
    p = TimeSeries(times, math.sqrt(2.0) * mean_b.imag, "p", warnings)
    return x, p


def orbit_radius(x: TimeSeries, p: TimeSeries, beta0: float) -> np.ndarray:
    """Distance of (x̄, p̄) from the orbit centre (−√2β₀, 0)."""
    return np.hypot(x.values + math.sqrt(2.0) * beta0, p.values)


def detuning_table(prop: Propagator) -> DetuningTable:
    params = prop.params
    if params.omega0 == 0.0:
        raise ValidationError("omega0", "detunings are measured in units of omega0 and need omega0 > 0")
    levels = np.arange(prop.spectrum.size)
    offset = -params.g ** 2 / params.omega
    delta = (params.omega * levels - (prop.energies - offset)) / params.omega0
    frame = pd.DataFrame({"level": levels, "E": prop.energies, "delta": delta, "weight": prop.weights})
    metadata = {
        "parity": prop.parity,
        "energy_reference": offset,
        "delta_definition": "(omega*level - (E + g^2/omega))/omega0",
    }
    return DetuningTable(frame=frame, metadata=metadata)


def first_order_revival_series(params: ModelParams, t_grid: ArrayLike, order: int = 1, p: int = 1) -> TimeSeries:
    """Return probability of |p, 0_b⟩ rebuilt from perturbative energies and Poisson overlaps."""
    validate_parity(p)
    times = _check_times(t_grid)
    size = significant_levels(params)
    weights = displaced_vacuum_weights(params.beta0, size)
    energies = perturbative_spectrum(params, p, order, size)
    amplitude = expi_weighted_sum(weights, energies, times)
    return TimeSeries(times, np.abs(amplitude) ** 2, f"P_order{order}")


def revival_peaks(series: TimeSeries, omega: float, periods: Sequence[int]) -> pd.DataFrame:
    """Largest sample in each window [2πk/ω − π/ω, 2πk/ω + π/ω]."""
    rows = []
    period = TWO_PI / omega
    for k in periods:
        centre = k * period
        mask = (series.times >= centre - 0.5 * period) & (series.times <= centre + 0.5 * period)
        if not mask.any():
            raise ValidationError("periods", f"no samples near t = {k}·2π/ω")
        idx = np.flatnonzero(mask)
        best = idx[int(np.argmax(series.values[idx]))]
        rows.append({"k": int(k), "t": float(series.times[best]), "value": float(series.values[best])})
    return pd.DataFrame(rows, columns=["k", "t", "value"])


def parity_expectation(state: TensorState) -> float:
    """⟨Π⟩ with Π = −σ_z(−1)^{n_a} in the interleaved tensor basis."""
    n_a = np.arange(state.n_max)
    photon_sign = np.where(n_a % 2 == 0, 1.0, -1.0)
    parities = np.empty(2 * state.n_max)
    parities[0::2] = photon_sign
    parities[1::2] = -photon_sign
    return float(np.sum(parities * np.abs(state.amps) ** 2))


def chain_propagators(state: TensorState, params: ModelParams) -> Dict[int, Tuple[float, Propagator]]:
    """One propagator per populated chain, keyed by parity, with that chain's weight."""
    require(state.n_max == params.n_max, "state", f"state has {state.n_max} levels, params.n_max={params.n_max}")
    plus, minus, weights = tensor_to_chain(state)
    out: Dict[int, Tuple[float, Propagator]] = {}
    for p, chain in zip(PARITIES, (plus, minus)):
        if chain is not None:
            out[p] = (weights[p], make_propagator(params, p, chain))
    return out


def evolve_tensor(
    state: TensorState,
    params: ModelParams,
    t: ArrayLike,
) -> Union[TensorState, List[TensorState]]:
    """Evolve a tensor-basis state by splitting it across the two chains."""
    props = chain_propagators(state, params)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    evolved = []
    for time in times:
        chains = {p: evolve(prop, time) for p, (_, prop) in props.items()}
        weights = {p: weight for p, (weight, _) in props.items()}
        evolved.append(chain_to_tensor(chains.get(1), chains.get(-1), weights))
    return evolved[0] if np.ndim(t) == 0 else evolved


def cross_chain_revival(state: TensorState, params: ModelParams, t_grid: ArrayLike) -> pd.DataFrame:
    """
    Per-chain return probabilities P_p(t), the parity-resolved total Σ_p w_p P_p(t),
    the coherent overlap |Σ_p w_p A_p(t)|² and ⟨Π⟩(t). Times are physical.
    """
    return chain_revival_frame(chain_propagators(state, params), t_grid)


def chain_revival_frame(props: Dict[int, Tuple[float, Propagator]], t_grid: ArrayLike) -> pd.DataFrame:
    times = _check_times(t_grid)
    columns: Dict[str, np.ndarray] = {"t": times}
    combined = np.zeros(times.size)
    coherent = np.zeros(times.size, dtype=complex)
    parity = np.zeros(times.size)
    for p, (weight, prop) in props.items():
        tag = "plus" if p == 1 else "minus"
        amplitude = expi_weighted_sum(prop.weights, prop.energies, times)
        chain_norm = np.sum(np.abs(evolve_many(prop, times)) ** 2, axis=1)
        columns[f"P_{tag}"] = np.abs(amplitude) ** 2
        combined += weight * columns[f"P_{tag}"]
        coherent += weight * amplitude
        parity += p * weight * chain_norm
        _tail_warnings(prop, times)
    columns["P_combined"] = combined
    columns["P_coherent"] = np.abs(coherent) ** 2
    columns["parity"] = parity
    return pd.DataFrame(columns)


@dataclass(frozen=True)
class TensorPropagator:
    """Dense diagonalization of the full tensor-basis Hamiltonian; an independent check on the chains."""

    spectrum: EigenPairs
    initial_weights: np.ndarray
    params: ModelParams

    @classmethod
    def from_state(cls, params: ModelParams, psi0: TensorState) -> "TensorPropagator":
        require(psi0.n_max == params.n_max, "psi0", f"state has {psi0.n_max} levels, params.n_max={params.n_max}")
        spectrum = eig_sym_dense(build_tensor_hamiltonian(params))
        logger.info(f"Diagonalized tensor Hamiltonian of size {2 * params.n_max}")
        return cls(spectrum=spectrum, initial_weights=spectrum.vectors.T @ psi0.amps, params=params)

    def evolve(self, t: float) -> TensorState:
        u = np.exp(-1j * self.spectrum.values * t) * self.initial_weights
        return TensorState(amps=self.spectrum.vectors @ u)

    def revival(self, t_grid: ArrayLike) -> np.ndarray:
        times = _check_times(t_grid)
        return np.abs(expi_weighted_sum(np.abs(self.initial_weights) ** 2, self.spectrum.values, times)) ** 2
