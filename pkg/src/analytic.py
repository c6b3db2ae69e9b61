"""
Closed-form results for the Rabi model at deep strong coupling.

Exact ω₀ = 0 evolution of |p, 0_b⟩ (a coherent orbit of mode b), perturbative
eigenenergies in ω₀/ω, the resonant-level rule and the two-mode heuristic for
partial revivals. Everything works in the parity-chain basis of model.py.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import TruncationError, ValidationError, require
from model import ChainState, ModelParams, coherent_amplitudes, displacement_element, displacement_matrix, validate_parity
from numerics import ArrayLike, expi_weighted_sum, laguerre_table, log_factorials

logger = logging.getLogger(__name__)

PERTURBATION_ORDERS = (0, 1, 2)
LEVEL_MARGIN = 16
CONVENTIONS = ("printed", "phase")


@dataclass(frozen=True)
class CoherentOrbit:
    """
    Orbit β(t) = β₀(e^{−iωt} − 1) of mode b when ω₀ = 0.

    The state picks up e^{i(g²/ω)t} from the energy offset and e^{−iβ₀² sin ωt}
    from the displacement composition; `global_phase` returns their product.
    """

    beta0: float
    omega: float = 1.0

    def __post_init__(self):
        require(self.beta0 >= 0, "beta0", f"must be non-negative, got {self.beta0}")
        require(self.omega > 0, "omega", f"must be positive, got {self.omega}")

    @property
    def center(self) -> float:
        return -self.beta0

    def beta(self, t: ArrayLike) -> Union[complex, np.ndarray]:
        value = self.beta0 * (np.exp(-1j * self.omega * np.asarray(t, dtype=float)) - 1.0)
        return complex(value) if np.ndim(value) == 0 else value

    def global_phase(self, t: ArrayLike) -> Union[complex, np.ndarray]:
        wt = self.omega * np.asarray(t, dtype=float)
        value = np.exp(1j * self.beta0 ** 2 * wt) * np.exp(-1j * self.beta0 ** 2 * np.sin(wt))
        return complex(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class PerturbedLevel:
    n_b: int
    energy: float
    delta: float
    order: int
    parity: int = 1

    def __post_init__(self):
        require(self.order in PERTURBATION_ORDERS, "order", f"must be 0, 1 or 2, got {self.order}")


def beta_of_t(beta0: float, omega: float, t: ArrayLike) -> Union[complex, np.ndarray]:
    return CoherentOrbit(beta0, omega).beta(t)


def exact_state_w0_zero(params: ModelParams, p: int, t: float) -> ChainState:
    """Evolved |p, 0_b⟩ at ω₀ = 0: a coherent state of b with amplitude β(t), phases included."""
    validate_parity(p)
    require(params.omega0 == 0.0, "omega0", "the closed-form evolution needs omega0 = 0")
    orbit = CoherentOrbit(params.beta0, params.omega)
    amps = orbit.global_phase(t) * coherent_amplitudes(orbit.beta(t), params.n_max)
    state = ChainState.from_amplitudes(p, amps, time_tag=float(t))
    state.check_health()
    return state


def revival_probability_w0_zero(beta0: float, omega: float, t: ArrayLike) -> ArrayLike:
    """e^{−|β(t)|²} with |β(t)|² = 4β₀² sin²(ωt/2)."""
    t = np.asarray(t, dtype=float)
    value = np.exp(-4.0 * beta0 ** 2 * np.sin(0.5 * omega * t) ** 2)
    return float(value) if value.ndim == 0 else value


def second_order_cutoff(beta0: float) -> int:
    """Half-width of the m-window kept in the second-order sum."""
    return int(math.ceil(4.0 * beta0 ** 2)) + 20


def perturbative_energy(params: ModelParams, p: int, n_b: int, order: int) -> PerturbedLevel:
    """
    E = ωn − g²/ω − (ω₀/2)p(−1)ⁿΔ_nn + Σ_{m≠n} ω₀²/(4ω(n−m)) Δ_nm²,
    truncated at the requested order, with Δ_nm = ⟨n|D(2β₀)|m⟩.
    """
    validate_parity(p)
    require(order in PERTURBATION_ORDERS, "order", f"must be 0, 1 or 2, got {order}")
    require(n_b >= 0, "n_b", f"must be non-negative, got {n_b}")
    require(
        n_b + LEVEL_MARGIN <= params.n_max,
        "n_b",
        f"level {n_b} too close to the truncation n_max={params.n_max} (need n_b + {LEVEL_MARGIN} <= n_max)",
    )
    omega, omega0 = params.omega, params.omega0
    shift = 2.0 * params.beta0
    energy = omega * n_b - params.g ** 2 / omega
    sign = p * (1 if n_b % 2 == 0 else -1)
    delta = 0.5 * sign * displacement_element(n_b, n_b, shift)

    if order >= 1:
        energy -= omega0 * delta
    if order == 2 and omega0 != 0.0:
        cut = second_order_cutoff(params.beta0)
        total = 0.0
        for m in range(max(0, n_b - cut), n_b + cut + 1):
            if m == n_b:
                continue
            total += displacement_element(n_b, m, shift) ** 2 / (n_b - m)
        energy += omega0 ** 2 / (4.0 * omega) * total

    return PerturbedLevel(n_b=n_b, energy=float(energy), delta=float(delta), order=order, parity=p)


def resonant_level(params: ModelParams, initial_n_b: int) -> int:
    """Nearest integer to (g/ω)² + N_b, halves rounded up."""
    require(initial_n_b >= 0, "initial_n_b", f"must be non-negative, got {initial_n_b}")
    return int(math.floor(params.beta0 ** 2 + initial_n_b + 0.5))


def significant_levels(params: ModelParams) -> int:
    """Number of displaced-basis levels that carry the Poisson weight of |p, 0_b⟩."""
    beta0 = params.beta0
    wanted = int(math.ceil(beta0 ** 2 + 12.0 * beta0)) + 24
    return max(1, min(wanted, params.n_max - LEVEL_MARGIN))


def displaced_vacuum_weights(beta0: float, n_levels: int) -> np.ndarray:
    """|⟨n|D(β₀)|0⟩|² = e^{−β₀²}β₀^{2n}/n! for n < n_levels."""
    n = np.arange(n_levels)
    if beta0 == 0.0:
        weights = np.zeros(n_levels)
        weights[0] = 1.0
        return weights
    return np.exp(-beta0 ** 2 + 2.0 * n * math.log(beta0) - log_factorials(n_levels))


def first_order_detunings(params: ModelParams, p: int, n_levels: int) -> np.ndarray:
    """δ_n = p(−1)ⁿΔ_nn/2 for n < n_levels, from one Laguerre table."""
    validate_parity(p)
    x = 4.0 * params.beta0 ** 2
    diag = math.exp(-0.5 * x) * laguerre_table(n_levels - 1, 0, x)
    signs = np.where(np.arange(n_levels) % 2 == 0, 1.0, -1.0)
    return 0.5 * p * signs * diag


def perturbative_spectrum(params: ModelParams, p: int, order: int, n_levels: int) -> np.ndarray:
    """Perturbative energies of levels 0 … n_levels−1 at the given order."""
    require(order in PERTURBATION_ORDERS, "order", f"must be 0, 1 or 2, got {order}")
    n = np.arange(n_levels)
    energies = params.omega * n - params.g ** 2 / params.omega
    if order == 1:
        energies = energies - params.omega0 * first_order_detunings(params, p, n_levels)
    elif order == 2:
        energies = np.array([perturbative_energy(params, p, int(level), 2).energy for level in n])
    return energies


def two_mode_state(params: ModelParams, t: float) -> ChainState:
    """
    |ψ(t)⟩ ≈ U₀(t)|+,0_b⟩ + ψ_N e^{−iE⁰_N t}(e^{iω₀δ_N t} − 1) D(−β₀)|N⟩, renormalized,
    where N is the resonant level and E⁰_N = ωN − g²/ω.
    """
    free = params.with_changes(omega0=0.0)
    base = exact_state_w0_zero(free, 1, t).amps
    if params.omega0 == 0.0:
        return ChainState(parity=1, amps=base, time_tag=float(t))

    level = resonant_level(params, 0)
    if level >= params.n_max:
        raise TruncationError(f"resonant level {level} lies outside n_max={params.n_max}", n_max=params.n_max)
    delta = perturbative_energy(params, 1, level, 1).delta
    psi_level = math.sqrt(displaced_vacuum_weights(params.beta0, level + 1)[level])
    bare_energy = params.omega * level - params.g ** 2 / params.omega
    factor = psi_level * np.exp(-1j * bare_energy * t) * (np.exp(1j * params.omega0 * delta * t) - 1.0)
    column = displacement_matrix(-params.beta0, params.n_max)[:, level]
    return ChainState.from_amplitudes(1, base + factor * column, time_tag=float(t))


def two_mode_revival(params: ModelParams, t: ArrayLike, convention: str = "printed") -> ArrayLike:
    """
    P ≈ 2e^{−|β(t)|²/2 − β₀²}(β₀^{2N}/N!)[cos(c·ω₀δ_N t) − 1] + e^{−|β(t)|²}.

    convention="printed" uses c = 1/2; convention="phase" uses c = 1, the phase
    carried by two_mode_state. Values are not clamped here. The formula needs
    β₀ > 0; at g = 0 the state |+,0_b⟩ is an eigenstate and the result is 1.
    """
    if convention not in CONVENTIONS:
        raise ValidationError("convention", f"must be one of {CONVENTIONS}, got {convention!r}")
    t = np.asarray(t, dtype=float)
    beta0 = params.beta0
    if beta0 == 0.0:
        value = np.ones_like(t)
        return float(value) if value.ndim == 0 else value
    level = resonant_level(params, 0)
    delta = perturbative_energy(params, 1, level, 1).delta
    beta_sq = 4.0 * beta0 ** 2 * np.sin(0.5 * params.omega * t) ** 2
    weight = math.exp(-beta0 ** 2 + 2 * level * math.log(beta0) - math.lgamma(level + 1))
    scale = 0.5 if convention == "printed" else 1.0
    value = 2.0 * weight * np.exp(-0.5 * beta_sq) * (np.cos(scale * params.omega0 * delta * t) - 1.0) + np.exp(-beta_sq)
    return float(value) if value.ndim == 0 else value


def resonant_revival(params: ModelParams, t: ArrayLike, n_levels: int) -> ArrayLike:
    """
    Return probability of |+,0_b⟩ when only the n_levels highest-weight levels get
    their first-order shift; the rest keep ωn − g²/ω. With every level included this
    is the first-order spectral curve.
    """
    require(n_levels >= 0, "n_levels", f"must be non-negative, got {n_levels}")
    size = significant_levels(params)
    weights = displaced_vacuum_weights(params.beta0, size)
    shifted = np.argsort(-weights, kind="stable")[:n_levels]
    energies = perturbative_spectrum(params, 1, 0, size)
    energies[shifted] -= params.omega0 * first_order_detunings(params, 1, size)[shifted]
    amplitude = expi_weighted_sum(weights, energies, t)
    value = np.abs(amplitude) ** 2
    return float(value) if np.ndim(value) == 0 else value
