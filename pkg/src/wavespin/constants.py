"""SI constants used throughout the package.

The defaults are rounded four-digit values rather than CODATA; derived numbers
(eta, Compton wavelength, decoherence time) are quoted against these.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    e: float = -1.6022e-19  # C
    m: float = 9.109e-31  # kg
    mu0: float = 1.257e-6  # H/m
    c: float = 2.998e8  # m/s
    hbar: float = 1.054e-34  # J s

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"constant {name} must be finite, got {value!r}")
        if self.e >= 0:
            raise ValueError("electron charge e must be negative")
        if self.c <= 0 or self.hbar <= 0 or self.mu0 <= 0:
            raise ValueError("c, hbar and mu0 must be positive")
        if self.m < 0:
            raise ValueError("mass must be non-negative")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULTS = PhysicalConstants()

UNITS = {"e": "C", "m": "kg", "mu0": "H/m", "c": "m/s", "hbar": "J s"}


def compton_wavelength(consts: PhysicalConstants = DEFAULTS) -> float:
    """Reduced Compton wavelength hbar/(m c) in metres."""
    return consts.hbar / (consts.m * consts.c)


def rest_energy(consts: PhysicalConstants = DEFAULTS) -> float:
    """Rest energy m c^2 in joules."""
    return consts.m * consts.c * consts.c
