from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from errors import ValidationError
from model import ChainState, TensorState, chain_position, validate_parity


@dataclass(frozen=True)
class StateComponent:
    """One (parity, level, amplitude) term of an initial superposition."""

    parity: int
    level: int
    amplitude: complex = 1.0

    @property
    def weight(self) -> float:
        return abs(self.amplitude) ** 2


_PARITY_TOKENS = {"+": 1, "+1": 1, "1": 1, "p": 1, "-": -1, "-1": -1, "m": -1}


def _parse_parity(token: str) -> int:
    token = token.strip().lower()
    if token not in _PARITY_TOKENS:
        raise ValidationError("initial", f"unknown parity {token!r}; use + or -")
    return _PARITY_TOKENS[token]


def _parse_amplitude(token: Optional[str]) -> complex:
    if token is None or not token.strip():
        return 1.0 + 0j
    parts = [part.strip() for part in token.split(",")]
    if len(parts) != 2:
        raise ValidationError("initial", f"amplitude must read 're,im', got {token!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ValidationError("initial", f"amplitude must read 're,im', got {token!r}") from None


def parse_initial_spec(text: str) -> List[StateComponent]:
    """
    Parse `"<p>,<n>[:re,im];..."`, e.g. `"+,0"` or `"+,0:0.7071,0;-,0:0.7071,0"`.
    Repeated (parity, level) pairs are summed. Amplitudes are returned as
    given; normalization happens where the state is built.
    """
    if not text or not text.strip():
        raise ValidationError("initial", "no components given")
    merged: Dict[Tuple[int, int], complex] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        head, _, amp_token = chunk.partition(":")
        fields = head.split(",")
        if len(fields) != 2:
            raise ValidationError("initial", f"component must read '<p>,<n>', got {head!r}")
        parity = _parse_parity(fields[0])
        try:
            level = int(fields[1])
        except ValueError:
            raise ValidationError("initial", f"level must be an integer, got {fields[1]!r}") from None
        if level < 0:
            raise ValidationError("initial", f"level must be non-negative, got {level}")
        key = (parity, level)
        merged[key] = merged.get(key, 0j) + _parse_amplitude(amp_token or None)
    components = [StateComponent(p, n, amp) for (p, n), amp in merged.items()]
    if not any(c.amplitude != 0 for c in components):
        raise ValidationError("initial", "all amplitudes are zero")
    return components


def normalize_components(components: Iterable[StateComponent]) -> List[StateComponent]:
    components = [c for c in components if c.amplitude != 0]
    total = math.sqrt(sum(c.weight for c in components))
    if total == 0.0:
        raise ValidationError("initial", "all amplitudes are zero")
    return [StateComponent(validate_parity(c.parity), c.level, c.amplitude / total) for c in components]


def format_initial_spec(components: Iterable[StateComponent]) -> str:
    """Inverse of parse_initial_spec, exact to the last bit."""
    chunks = []
    for c in components:
        sign = "+" if c.parity == 1 else "-"
        amp = complex(c.amplitude)
        chunks.append(f"{sign},{c.level}:{amp.real:.17g},{amp.imag:.17g}")
    return ";".join(chunks)


def split_by_parity(components: Iterable[StateComponent], n_max: int) -> Dict[int, Tuple[float, ChainState]]:
    """Map each populated parity to (weight, normalized chain state)."""
    components = normalize_components(components)
    out: Dict[int, Tuple[float, ChainState]] = {}
    for p in (1, -1):
        members = [c for c in components if c.parity == p]
        if not members:
            continue
        amps = np.zeros(n_max, dtype=complex)
        for c in members:
            if c.level >= n_max:
                raise ValidationError("initial", f"level {c.level} exceeds n_max={n_max}")
            amps[c.level] += c.amplitude
        weight = float(np.sum(np.abs(amps) ** 2))
        out[p] = (weight, ChainState.from_amplitudes(p, amps))
    return out


def components_to_tensor(components: Iterable[StateComponent], n_max: int) -> TensorState:
    terms = []
    for c in normalize_components(components):
        q, n_a = chain_position(c.parity, c.level)
        terms.append((q, n_a, c.amplitude))
    return TensorState.from_components(terms, n_max)


def describe_components(components: Iterable[StateComponent]) -> dict:
    """Quick stats about an initial superposition."""
    components = list(components)
    by_parity = Counter("+" if c.parity == 1 else "-" for c in components)
    weight_by_parity: Dict[str, float] = {}
    for c in components:
        key = "+" if c.parity == 1 else "-"
        weight_by_parity[key] = weight_by_parity.get(key, 0.0) + c.weight
    return {
        "count": len(components),
        "by_parity": dict(by_parity),
        "weight_by_parity": weight_by_parity,
        "max_level": max((c.level for c in components), default=0),
        "cross_chain": len(by_parity) > 1,
    }
