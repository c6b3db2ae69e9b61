"""
Operators and Hamiltonians of the quantum Rabi model.

Two bases are used throughout:

* the tensor basis |q, n_a⟩, ordered (g,0), (e,0), (g,1), (e,1), …
* the parity-chain basis |p, n_b⟩ with b = σ_x a, where each parity p = ±1
  is an independent ladder and the Hamiltonian is tridiagonal.

ħ = 1 everywhere; energies and frequencies share one unit.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import TruncationError, ValidationError, require
from numerics import SymTridiag, laguerre, laguerre_table, log_factorials, norm

logger = logging.getLogger(__name__)

QUBIT_LEVELS = ("g", "e")
SIGMA_Z = {"g": -1, "e": 1}
PARITIES = (1, -1)

MIN_NMAX = 8
TAIL_WIDTH = 8
TAIL_TOLERANCE = 1e-10
NORM_TOLERANCE = 1e-10

ROTATING = "rotating"
COUNTER_ROTATING = "counter-rotating"


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters and Fock truncation. β₀ = g/ω is derived, not stored."""

    omega: float = 1.0
    omega0: float = 0.0
    g: float = 0.0
    n_max: int = 256

    def __post_init__(self):
        for name in ("omega", "omega0", "g"):
            value = getattr(self, name)
            require(isinstance(value, (int, float)) and math.isfinite(value), name, "must be a finite number")
        require(self.omega > 0, "omega", f"must be positive, got {self.omega}")
        require(self.omega0 >= 0, "omega0", f"must be non-negative, got {self.omega0}")
        require(self.g >= 0, "g", f"must be non-negative, got {self.g}")
        require(
            isinstance(self.n_max, (int, np.integer)) and self.n_max >= MIN_NMAX,
            "n_max",
            f"must be an integer >= {MIN_NMAX}, got {self.n_max}",
        )

    @property
    def beta0(self) -> float:
        return self.g / self.omega

    def with_changes(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"omega": self.omega, "omega0": self.omega0, "g": self.g, "n_max": self.n_max}


def validate_parity(p: int) -> int:
    if p not in PARITIES:
        raise ValidationError("parity", f"must be +1 or -1, got {p}")
    return int(p)


def validate_qubit(q: str) -> str:
    if q not in QUBIT_LEVELS:
        raise ValidationError("qubit", f"must be 'g' or 'e', got {q!r}")
    return q


@dataclass(frozen=True)
class ChainState:
    """Normalized amplitudes over one parity chain |p, n_b⟩, n_b = 0 … n_max−1."""

    parity: int
    amps: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        validate_parity(self.parity)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        require(amps.size >= MIN_NMAX, "amps", f"need at least {MIN_NMAX} levels, got {amps.size}")
        require(abs(norm(amps) - 1.0) <= NORM_TOLERANCE, "amps", f"state is not normalized (norm {norm(amps):.12f})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return int(self.amps.size)

    @classmethod
    def basis(cls, parity: int, level: int, n_max: int) -> "ChainState":
        require(0 <= level < n_max, "level", f"must lie in [0, {n_max}), got {level}")
        amps = np.zeros(n_max, dtype=complex)
        amps[level] = 1.0
        return cls(parity=parity, amps=amps)

    @classmethod
    def from_amplitudes(cls, parity: int, amps: np.ndarray, time_tag: float = 0.0) -> "ChainState":
        amps = np.asarray(amps, dtype=complex)
        length = norm(amps)
        if length == 0.0:
            raise ValidationError("amps", "all amplitudes are zero")
        return cls(parity=parity, amps=amps / length, time_tag=time_tag)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tail_mass(self, width: int = TAIL_WIDTH) -> float:
        return float(np.sum(self.probabilities()[-width:]))

    def is_healthy(self, tolerance: float = TAIL_TOLERANCE) -> bool:
        return self.tail_mass() <= tolerance

    def check_health(self, tolerance: float = TAIL_TOLERANCE) -> None:
        mass = self.tail_mass()
        if mass > tolerance:
            raise TruncationError(
                f"tail mass {mass:.3e} in the top {TAIL_WIDTH} levels exceeds {tolerance:.0e}",
                n_max=self.n_max,
            )

    def overlap(self, other: "ChainState") -> complex:
        if other.parity != self.parity:
            return 0j
        return complex(np.vdot(self.amps, other.amps))


def tensor_index(q: str, n_a: int) -> int:
    return 2 * n_a + QUBIT_LEVELS.index(validate_qubit(q))


@dataclass(frozen=True)
class TensorState:
    """Normalized amplitudes in the |q, n_a⟩ basis, interleaved as (g,0), (e,0), (g,1), …"""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        require(amps.size % 2 == 0 and amps.size >= 2 * MIN_NMAX, "amps", "length must be 2*n_max")
        require(abs(norm(amps) - 1.0) <= NORM_TOLERANCE, "amps", f"state is not normalized (norm {norm(amps):.12f})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return int(self.amps.size // 2)

    @classmethod
    def basis(cls, q: str, n_a: int, n_max: int) -> "TensorState":
        return cls.from_components([(q, n_a, 1.0)], n_max)

    @classmethod
    def from_components(cls, components: Iterable[Tuple[str, int, complex]], n_max: int) -> "TensorState":
        amps = np.zeros(2 * n_max, dtype=complex)
        for q, n_a, amp in components:
            require(0 <= n_a < n_max, "n_a", f"must lie in [0, {n_max}), got {n_a}")
            amps[tensor_index(q, n_a)] += amp
        length = norm(amps)
        if length == 0.0:
            raise ValidationError("amps", "all amplitudes are zero")
        return cls(amps=amps / length)


def excitation_parity(config: str, n: int) -> int:
    """(−1)^(n + number of excited qubits); equals −σ_z(−1)^n for one qubit."""
    for q in config:
        validate_qubit(q)
    return 1 if (n + config.count("e")) % 2 == 0 else -1


def parity_of(q: str, n_a: int) -> int:
    """Eigenvalue of Π = −σ_z(−1)^{n_a} on |q, n_a⟩."""
    return -SIGMA_Z[validate_qubit(q)] * (1 if n_a % 2 == 0 else -1)


def chain_position(p: int, n_b: int) -> Tuple[str, int]:
    """Tensor label (q, n_a) of the chain state |p, n_b⟩."""
    validate_parity(p)
    even = n_b % 2 == 0
    q = "g" if even == (p == 1) else "e"
    return q, n_b


@lru_cache(maxsize=32)
def chain_indices(p: int, n_max: int) -> np.ndarray:
    idx = np.array([tensor_index(*chain_position(p, n)) for n in range(n_max)], dtype=int)
    idx.setflags(write=False)
    return idx


def build_chain_hamiltonian(params: ModelParams, p: int) -> SymTridiag:
    """H_p = ω b†b + g(b + b†) − (ω₀/2) p (−1)^{b†b} in the number basis of b."""
    validate_parity(p)
    n = np.arange(params.n_max)
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    diag = params.omega * n - 0.5 * params.omega0 * p * signs
    offdiag = params.g * np.sqrt(n[1:].astype(float))
    return SymTridiag(diag, offdiag)


def coupling_kind(q_from: str, n_from: int, q_to: str, n_to: int) -> str:
    """Rotating terms (σ⁺a, σ⁻a†) conserve excitations; counter-rotating ones do not."""
    qubit_up = SIGMA_Z[q_to] > SIGMA_Z[q_from]
    photon_up = n_to > n_from
    return COUNTER_ROTATING if qubit_up == photon_up else ROTATING


def _qubit_configs(n_qubits: int) -> List[str]:
    return ["".join(c) for c in itertools.product(QUBIT_LEVELS, repeat=n_qubits)]


def _multi_qubit_hamiltonian(params: ModelParams, n_qubits: int) -> np.ndarray:
    """ω a†a + (ω₀/2)Σσ_z⁽ⁱ⁾ + g Σσ_x⁽ⁱ⁾(a + a†), photon-major ordering."""
    configs = _qubit_configs(n_qubits)
    width = len(configs)
    dim = width * params.n_max
    h = np.zeros((dim, dim))
    for n in range(params.n_max):
        for ci, config in enumerate(configs):
            row = n * width + ci
            h[row, row] = params.omega * n + 0.5 * params.omega0 * sum(SIGMA_Z[q] for q in config)
            if n + 1 >= params.n_max:
                continue
            amplitude = params.g * math.sqrt(n + 1)
            for site in range(n_qubits):
                flipped = config[:site] + ("e" if config[site] == "g" else "g") + config[site + 1:]
                col = (n + 1) * width + configs.index(flipped)
                h[row, col] = h[col, row] = amplitude
    return h


def build_tensor_hamiltonian(params: ModelParams) -> np.ndarray:
    """Full Rabi Hamiltonian (ω₀/2)σ_z + ω a†a + g σ_x(a + a†) in the tensor basis."""
    return _multi_qubit_hamiltonian(params, 1)


def build_two_qubit_hamiltonian(params: ModelParams) -> np.ndarray:
    """Equal-coupling two-qubit Rabi Hamiltonian, basis index 4n + index of gg/ge/eg/ee."""
    return _multi_qubit_hamiltonian(params, 2)


def two_qubit_index(config: str, n: int) -> int:
    return 4 * n + _qubit_configs(2).index(config)


def two_qubit_parity(config: str, n: int) -> int:
    """Generalized parity σ_z⁽¹⁾σ_z⁽²⁾(−1)ⁿ."""
    require(len(config) == 2, "config", f"expected two qubit labels, got {config!r}")
    return SIGMA_Z[config[0]] * SIGMA_Z[config[1]] * (1 if n % 2 == 0 else -1)


def tensor_to_chain(s: TensorState) -> Tuple[Optional[ChainState], Optional[ChainState], Dict[int, float]]:
    """Split a tensor state into its normalized chain components and their weights."""
    chains: Dict[int, Optional[ChainState]] = {}
    weights: Dict[int, float] = {}
    for p in PARITIES:
        amps = s.amps[chain_indices(p, s.n_max)]
        weight = float(np.sum(np.abs(amps) ** 2))
        weights[p] = weight
        chains[p] = ChainState(parity=p, amps=amps / math.sqrt(weight)) if weight > 0.0 else None
    return chains[1], chains[-1], weights


def chain_to_tensor(
    plus: Optional[ChainState],
    minus: Optional[ChainState],
    weights: Dict[int, float],
) -> TensorState:
    """Inverse of tensor_to_chain."""
    states = {1: plus, -1: minus}
    n_max = next(s.n_max for s in states.values() if s is not None)
    amps = np.zeros(2 * n_max, dtype=complex)
    for p, state in states.items():
        if state is None or weights.get(p, 0.0) == 0.0:
            continue
        require(state.parity == p, "parity", f"chain state for p={p} carries parity {state.parity}")
        amps[chain_indices(p, n_max)] = math.sqrt(weights[p]) * state.amps
    return TensorState(amps=amps)


def annihilation_matrix(n_max: int) -> np.ndarray:
    """Matrix of b in chain coordinates: b|n⟩ = √n |n−1⟩."""
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), 1)


def coherent_amplitudes(beta: complex, n_max: int) -> np.ndarray:
    """Fock amplitudes e^{−|β|²/2} βⁿ/√n! of the coherent state |β⟩."""
    amps = np.zeros(n_max, dtype=complex)
    if beta == 0:
        amps[0] = 1.0
        return amps
    n = np.arange(n_max)
    log_mag = -0.5 * abs(beta) ** 2 + n * math.log(abs(beta)) - 0.5 * log_factorials(n_max)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(beta))


def displacement_element(n: int, m: int, beta: float) -> float:
    """⟨n|D(β)|m⟩ for real β from the Laguerre closed form; no truncation involved."""
    require(n >= 0 and m >= 0, "n", "indices must be non-negative")
    if n < m:
        sign = -1.0 if (m - n) % 2 else 1.0
        return sign * displacement_element(m, n, beta)
    k = n - m
    x = beta * beta
    if beta == 0.0:
        return 1.0 if k == 0 else 0.0
    log_prefactor = 0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1)) + k * math.log(abs(beta)) - 0.5 * x
    sign = -1.0 if (beta < 0 and k % 2) else 1.0
    return sign * math.exp(log_prefactor) * laguerre(m, k, x)


def displacement_matrix(beta: float, n_max: int) -> np.ndarray:
    """Truncated matrix of D(β) = e^{β(b† − b)} for real β, built band by band."""
    beta = float(beta)
    if abs(beta) > math.sqrt(n_max) / 4:
        raise TruncationError(
            f"|beta|={abs(beta):.3f} exceeds the truncation limit sqrt(n_max)/4={math.sqrt(n_max) / 4:.3f}",
            n_max=n_max,
        )
    if beta == 0.0:
        return np.eye(n_max)
    x = beta * beta
    lf = log_factorials(n_max)
    out = np.zeros((n_max, n_max))
    for k in range(n_max):
        m = np.arange(n_max - k)
        lag = laguerre_table(n_max - 1 - k, k, x)
        log_prefactor = 0.5 * (lf[m] - lf[m + k]) + k * math.log(abs(beta)) - 0.5 * x
        sign = -1.0 if (beta < 0 and k % 2) else 1.0
        band = sign * np.exp(log_prefactor) * lag
        out[m + k, m] = band
        if k:
            out[m, m + k] = band if k % 2 == 0 else -band
    return out


@dataclass(frozen=True)
class ChainGraph:
    """Basis states (qubit configuration, photon number) joined by single-flip couplings."""

    vertices: Tuple[Tuple[str, int], ...]
    edges: Tuple[Tuple[Tuple[str, int], Tuple[str, int], str], ...] = field(default_factory=tuple)

    def neighbours(self) -> Dict[Tuple[str, int], List[Tuple[str, int]]]:
        adjacency: Dict[Tuple[str, int], List[Tuple[str, int]]] = {v: [] for v in self.vertices}
        for a, b, _ in self.edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        return adjacency

    def components(self) -> List[List[Tuple[str, int]]]:
        """Connected components by breadth-first search, in vertex order."""
        adjacency = self.neighbours()
        seen = set()
        found: List[List[Tuple[str, int]]] = []
        for start in self.vertices:
            if start in seen:
                continue
            seen.add(start)
            queue = deque([start])
            members = []
            while queue:
                v = queue.popleft()
                members.append(v)
                for w in adjacency[v]:
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            found.append(members)
        return found

    def component_labels(self) -> Dict[Tuple[str, int], int]:
        return {v: idx for idx, members in enumerate(self.components()) for v in members}

    def to_frame(self) -> pd.DataFrame:
        labels = self.component_labels()
        rows = [
            {
                "source": f"{a[0]},{a[1]}",
                "target": f"{b[0]},{b[1]}",
                "kind": kind,
                "component": labels[a],
                "parity": excitation_parity(*a),
            }
            for a, b, kind in self.edges
        ]
        return pd.DataFrame(rows, columns=["source", "target", "kind", "component", "parity"])


def _build_graph(n_qubits: int, n_levels: int) -> ChainGraph:
    require(n_levels >= 2, "n_levels", f"must be at least 2, got {n_levels}")
    configs = _qubit_configs(n_qubits)
    vertices = tuple((c, n) for n in range(n_levels) for c in configs)
    edges = []
    for n in range(n_levels - 1):
        for config in configs:
            for site in range(n_qubits):
                flipped = config[:site] + ("e" if config[site] == "g" else "g") + config[site + 1:]
                kind = coupling_kind(config[site], n, flipped[site], n + 1)
                edges.append(((config, n), (flipped, n + 1), kind))
    return ChainGraph(vertices=vertices, edges=tuple(edges))


def build_chain_graph(n_levels: int) -> ChainGraph:
    """Single-qubit parity chains |g0⟩ ↔ |e1⟩ ↔ |g2⟩ … and |e0⟩ ↔ |g1⟩ ↔ …"""
    return _build_graph(1, n_levels)


def build_two_qubit_graph(n_levels: int) -> ChainGraph:
    """Two-qubit couplings σ_x⁽ⁱ⁾(a + a†); splits into two components by generalized parity."""
    return _build_graph(2, n_levels)


def cross_parity_leakage(h: np.ndarray, parities: Sequence[int]) -> float:
    """Largest |H_ij| between basis states of different parity (exactly 0 when H commutes with Π)."""
    parities = np.asarray(parities)
    mask = parities[:, None] != parities[None, :]
    return float(np.max(np.abs(h[mask]))) if mask.any() else 0.0
