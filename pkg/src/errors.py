from __future__ import annotations

from typing import Dict, Optional

import numpy as np

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


class RabiError(Exception):
    """Base class for every failure raised by the simulator."""

    exit_code = 1
    kind = "generic"


class ValidationError(RabiError, ValueError):
    exit_code = EXIT_VALIDATION
    kind = "validation"

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConvergenceError(RabiError, RuntimeError):
    exit_code = EXIT_CONVERGENCE
    kind = "convergence"

    def __init__(self, index: int, sweeps: int):
        self.index = index
        self.sweeps = sweeps
        super().__init__(f"eigenvalue {index} did not converge after {sweeps} sweeps")


class TruncationError(RabiError, RuntimeError):
    exit_code = EXIT_CONVERGENCE
    kind = "truncation"

    def __init__(self, message: str, n_max: Optional[int] = None):
        self.n_max = n_max
        super().__init__(message)


REMEDIATION_HINTS: Dict[str, str] = {
    "validation": "Check the flag named in the message; see `--help` for accepted ranges.",
    "convergence": "The eigensolver stalled. Reduce --nmax or check the parameters for NaN/inf values.",
    "truncation": "The Fock truncation is too small for this coupling. Raise --nmax (roughly 4(g/omega)^2 + 64 or more).",
    "io": "Check that the output directory exists and is writable.",
}


def remediation_hint(error: BaseException) -> str:
    """Return a short follow-up hint for an error raised anywhere in the pipeline."""
    if isinstance(error, RabiError):
        return REMEDIATION_HINTS.get(error.kind, "")
    if isinstance(error, OSError):
        return REMEDIATION_HINTS["io"]
    return ""


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, RabiError):
        return error.exit_code
    if isinstance(error, OSError):
        return EXIT_IO
    return 1


def require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ValidationError(field, message)


def require_all_finite(values, field: str) -> None:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(field, "entries must be finite")
