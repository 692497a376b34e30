"""Ground eigenstate of a Dirac electron in a 2D infinite square well.

The well occupies |x|, |y| <= L with no confinement along z. Every observable is
written in terms of sin/cos of the half-wave phases pi x / 2L and pi y / 2L rather
than tangents, so nothing diverges on the walls. Densities are per unit length in z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wavespin.constants import DEFAULTS, PhysicalConstants, rest_energy
from wavespin.numerics import gauss_legendre_nodes
from wavespin import spinor

DEFAULT_ORDER = 32


class UndefinedVelocityError(ValueError):
    """Raised when the velocity is requested where the charge density vanishes."""


@dataclass(frozen=True)
class WellConfig:
    L: float  # half-width, m

    def __post_init__(self):
        if not (isinstance(self.L, (int, float)) and math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"well half-width L must be positive and finite, got {self.L!r}")


@dataclass(frozen=True)
class WellState:
    config: WellConfig
    eta: float  # dimensionless geometric factor
    E: float  # total energy, J
    kinetic: float  # E - m c^2, J (kept separately: it is ~1e-9 of E)
    N: float  # normalization, 1/m
    consts: PhysicalConstants = DEFAULTS

    @property
    def L(self) -> float:
        return self.config.L

    @property
    def k(self) -> float:
        """Transverse wavenumber pi / 2L."""
        return math.pi / (2 * self.config.L)


def solve_ground(config: WellConfig, consts: PhysicalConstants = DEFAULTS) -> WellState:
    """Energy, eta and normalization of the lowest mode.

    Uses E^2 - m^2c^4 = 2 (hbar c pi / 2L)^2; the kinetic part is formed as
    2(hbar c k)^2 / (E + mc^2) so it keeps full relative precision.
    """
    if not isinstance(config, WellConfig):
        config = WellConfig(float(config))
    mc2 = rest_energy(consts)
    p_c = consts.hbar * consts.c * math.pi / (2 * config.L)
    transverse = 2.0 * p_c * p_c
    E = math.sqrt(mc2 * mc2 + transverse)
    kinetic = transverse / (E + mc2)
    eta = p_c / (E + mc2)
    N = 1.0 / (config.L * math.sqrt(1.0 + 2.0 * eta * eta))
    return WellState(config=config, eta=eta, E=E, kinetic=kinetic, N=N, consts=consts)


def eigenvalue_residual(state: WellState) -> float:
    """(E^2 - m^2c^4) / (2 (hbar c pi/2L)^2) - 1, evaluated without cancellation."""
    c = state.consts
    mc2 = rest_energy(c)
    p_c = c.hbar * c.c * state.k
    return state.kinetic * (state.kinetic + 2 * mc2) / (2 * p_c * p_c) - 1.0


def _trig(state: WellState, x, y):
    ax = state.k * np.asarray(x, dtype=float)
    ay = state.k * np.asarray(y, dtype=float)
    return np.cos(ax), np.sin(ax), np.cos(ay), np.sin(ay)


def phase(state: WellState, t) -> np.ndarray:
    return np.exp(-1j * (state.E / state.consts.hbar) * np.asarray(t, dtype=float))


def wavefunction(state: WellState, x, y, t=0.0) -> np.ndarray:
    """Spinor field psi(x, y, t), shape broadcast(x, y, t) + (4,)."""
    cx, sx, cy, sy = _trig(state, x, y)
    ph = phase(state, t)
    upper = cx * cy
    lower = state.eta * (1j * sx * cy - cx * sy)
    upper, lower, ph = np.broadcast_arrays(upper, lower, ph)
    psi = np.zeros(upper.shape + (4,), dtype=complex)
    psi[..., 0] = state.N * ph * upper
    psi[..., 3] = state.N * ph * lower
    return psi


def time_derivative(state: WellState, x, y, t=0.0) -> np.ndarray:
    """Analytic d psi / dt = -i E / hbar psi."""
    return (-1j * state.E / state.consts.hbar) * wavefunction(state, x, y, t)


def field(state: WellState):
    """psi as a function of (x, y, z, t) for the generic verification routines."""

    def psi_fn(x, y, z, t):
        x, y, _ = np.broadcast_arrays(x, y, z)
        return wavefunction(state, x, y, t)

    return psi_fn


def field_dt(state: WellState):
    def dpsi_fn(x, y, z, t):
        x, y, _ = np.broadcast_arrays(x, y, z)
        return time_derivative(state, x, y, t)

    return dpsi_fn


def _mixed(cx, sx, cy, sy):
    # tan-free stand-ins for cos^2 cos^2 and cos^2 cos^2 (tan^2 + tan^2)
    return (cx * cy) ** 2, (sx * cy) ** 2 + (cx * sy) ** 2


def charge_density(state: WellState, x, y) -> np.ndarray:
    """Time-independent charge density, C/m^2."""
    peak, ring = _mixed(*_trig(state, x, y))
    return state.consts.e * state.N**2 * (peak + state.eta**2 * ring)


def current_density(state: WellState, x, y) -> np.ndarray:
    """Current density vector (jx, jy, jz), A/m, shape broadcast(x, y) + (3,)."""
    cx, sx, cy, sy = _trig(state, x, y)
    scale = 2 * state.eta * state.consts.e * state.consts.c * state.N**2
    jx = -scale * cx * cx * cy * sy
    jy = scale * cx * sx * cy * cy
    jx, jy = np.broadcast_arrays(jx, jy)
    return np.stack([jx, jy, np.zeros_like(jx)], axis=-1)


def current_magnitude(state: WellState, x, y) -> np.ndarray:
    cx, sx, cy, sy = _trig(state, x, y)
    _, ring = _mixed(cx, sx, cy, sy)
    scale = 2 * state.eta * abs(state.consts.e) * state.consts.c * state.N**2
    return scale * np.abs(cx * cy) * np.sqrt(ring)


def current_divergence(state: WellState, x, y) -> np.ndarray:
    """d jx/dx + d jy/dy from the analytic partials (identically zero)."""
    cx, sx, cy, sy = _trig(state, x, y)
    scale = 2 * state.eta * state.consts.e * state.consts.c * state.N**2 * state.k
    djx_dx = scale * 2 * cx * sx * cy * sy
    djy_dy = -scale * 2 * cx * sx * cy * sy
    return djx_dx + djy_dy


def divergence_scale(state: WellState) -> float:
    """Size of the individual partials in current_divergence (their maximum)."""
    return abs(2 * state.eta * state.consts.e * state.consts.c * state.N**2 * state.k) * 0.5


def is_corner(state: WellState, x, y) -> np.ndarray:
    """Points where both large-component cosines vanish, i.e. rho = 0 to rounding."""
    cx, _, cy, _ = _trig(state, x, y)
    return (np.abs(cx) < 1e-12) & (np.abs(cy) < 1e-12)


def velocity(state: WellState, x, y, *, corners: str = "raise") -> np.ndarray:
    """Local speed |j| / |rho| in m/s.

    At the four corners rho vanishes and the speed is undefined: ``corners="raise"``
    raises UndefinedVelocityError, ``corners="nan"`` returns NaN there.
    """
    cx, sx, cy, sy = _trig(state, x, y)
    peak, ring = _mixed(cx, sx, cy, sy)
    eta = state.eta
    num = 2 * eta * np.abs(cx * cy) * np.sqrt(ring)
    den = peak + eta * eta * ring
    bad = is_corner(state, x, y)
    if np.any(bad):
        if corners == "raise":
            raise UndefinedVelocityError("velocity is undefined at the well corners (rho = 0)")
        den = np.where(bad, 1.0, den)
        return np.where(bad, np.nan, state.consts.c * num / den)
    return state.consts.c * num / den


def velocity_tan_form(state: WellState, x, y) -> np.ndarray:
    """Reference closed form c 2 eta T / (1 + eta^2 T^2), T^2 = tan^2 + tan^2.

    Only meaningful strictly inside the walls.
    """
    tx = np.tan(state.k * np.asarray(x, dtype=float))
    ty = np.tan(state.k * np.asarray(y, dtype=float))
    T = np.sqrt(tx * tx + ty * ty)
    return state.consts.c * 2 * state.eta * T / (1 + (state.eta * T) ** 2)


def _quadrature(state: WellState, order: int):
    nodes, weights = gauss_legendre_nodes(order, -state.L, state.L)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    W = np.outer(weights, weights)
    return wavefunction(state, X, Y, 0.0), W


def norm(state: WellState, order: int = DEFAULT_ORDER) -> float:
    """Integral of psi^dagger psi over the well (should be 1)."""
    psi, W = _quadrature(state, order)
    return float(np.sum(W * np.einsum("...a,...a->...", psi.conj(), psi).real))


def spin_squared(state: WellState, order: int = DEFAULT_ORDER) -> float:
    """<S^2> = integral of psi^dagger (hbar Sigma / 2)^2 psi, in (J s)^2."""
    psi, W = _quadrature(state, order)
    total = 0.0
    for k in (1, 2, 3):
        s = spinor.sigma_spin(k)
        total += np.sum(W * spinor.real_bilinear(psi, s @ s))
    return float((state.consts.hbar / 2) ** 2 * total)


def spin_vector(state: WellState, order: int = DEFAULT_ORDER) -> np.ndarray:
    """<S> = integral of psi^dagger (hbar/2) Sigma psi, in J s."""
    psi, W = _quadrature(state, order)
    return np.array(
        [
            state.consts.hbar / 2 * np.sum(W * spinor.real_bilinear(psi, spinor.sigma_spin(k)))
            for k in (1, 2, 3)
        ]
    )


def spin_z_closed_form(state: WellState) -> float:
    e2 = state.eta**2
    return state.consts.hbar / 2 * (1 - 2 * e2) / (1 + 2 * e2)


def spin_z_deficit(state: WellState) -> float:
    """hbar/2 - S_z in closed form, hbar 2 eta^2 / (1 + 2 eta^2)."""
    e2 = state.eta**2
    return state.consts.hbar * 2 * e2 / (1 + 2 * e2)
