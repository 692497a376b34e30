"""Exact Dirac 4-spinor states of a confined and a free electron, with their observables."""

from wavespin.constants import DEFAULTS, PhysicalConstants, compton_wavelength, rest_energy

__version__ = "0.1.0"

__all__ = [
    "DEFAULTS",
    "PhysicalConstants",
    "compton_wavelength",
    "rest_energy",
    "__version__",
]
