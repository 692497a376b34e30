"""Free-electron Gaussian wavepacket, spin up, zero mean momentum.

The closed form follows from integrating the quadratic-order plane-wave superposition
in momentum space; the complex width w(t) = d^2 + i hbar t / m carries all the
spreading. ``superposition_oracle`` redoes that momentum integral by brute-force
Gauss-Hermite quadrature and is the independent check on the closed form.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from wavespin import spinor
from wavespin.constants import DEFAULTS, PhysicalConstants, compton_wavelength, rest_energy
from wavespin.numerics import gauss_legendre_nodes

REGIME_FACTOR = 100.0  # d must exceed this many Compton wavelengths
NORM_BOX = 4.0  # normalization box half-width in units of d
NORM_ORDER = 64
ORACLE_CHUNK = 32
CONVERGENCE_TOL = 1e-8
THREADS_ENV = "WAVESPIN_THREADS"


@dataclass(frozen=True)
class PacketConfig:
    d: float  # Gaussian width, m

    def __post_init__(self):
        if not (isinstance(self.d, (int, float)) and math.isfinite(self.d) and self.d > 0):
            raise ValueError(f"packet width d must be positive and finite, got {self.d!r}")


@dataclass(frozen=True)
class PacketState:
    config: PacketConfig
    norm: float  # N, fixed at t = 0
    t_c: float  # decoherence time, s
    consts: PhysicalConstants = DEFAULTS

    @property
    def d(self) -> float:
        return self.config.d


@dataclass(frozen=True)
class OracleResult:
    psi: np.ndarray  # (n_points, 4)
    converged: bool | None  # None when the doubling check was not run
    change: float | None  # relative change on doubling the node count


def complex_width(state: PacketState, t) -> np.ndarray:
    c = state.consts
    return state.d**2 + 1j * c.hbar * np.asarray(t, dtype=float) / c.m


def _rest_phase(consts: PhysicalConstants, t) -> np.ndarray:
    omega = rest_energy(consts) / consts.hbar
    return np.exp(-1j * np.mod(omega * np.asarray(t, dtype=float), 2 * np.pi))


def _unnormalized(state: PacketState, x, y, z, t, norm: float) -> np.ndarray:
    c = state.consts
    x, y, z, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z, t)))
    w = complex_width(state, t)
    r2 = x * x + y * y + z * z
    G = (2 * np.pi * c.hbar**2 / w) ** 1.5 * np.exp(-r2 / (2 * w))
    a = (1j * c.hbar / (2 * c.m * c.c)) / w
    amp = norm * _rest_phase(c, t) * G
    psi = np.zeros(x.shape + (4,), dtype=complex)
    psi[..., 0] = amp
    psi[..., 2] = amp * a * z
    psi[..., 3] = amp * a * (x + 1j * y)
    return psi


def prepare(config: PacketConfig, consts: PhysicalConstants = DEFAULTS) -> PacketState:
    """Check the regime, fix the normalization numerically and compute t_c."""
    if not isinstance(config, PacketConfig):
        config = PacketConfig(float(config))
    lam = compton_wavelength(consts)
    if config.d < REGIME_FACTOR * lam:
        raise ValueError(
            f"packet width d = {config.d:.4g} m is below {REGIME_FACTOR:g} Compton wavelengths "
            f"({REGIME_FACTOR * lam:.4g} m); the quadratic-momentum expansion does not hold"
        )
    t_c = config.d**2 / (lam * consts.c)
    bare = PacketState(config=config, norm=1.0, t_c=t_c, consts=consts)
    half = NORM_BOX * config.d
    nodes, weights = gauss_legendre_nodes(NORM_ORDER, -half, half)
    X, Y, Z = np.meshgrid(nodes, nodes, nodes, indexing="ij")
    W = weights[:, None, None] * weights[None, :, None] * weights[None, None, :]
    psi = _unnormalized(bare, X, Y, Z, 0.0, 1.0)
    total = np.sum(W * np.sum(np.abs(psi) ** 2, axis=-1))
    return PacketState(config=config, norm=float(1.0 / math.sqrt(total)), t_c=t_c, consts=consts)


def wavefunction(state: PacketState, x, y, z, t=0.0) -> np.ndarray:
    """Closed-form spinor psi(x, y, z, t), shape broadcast + (4,)."""
    return _unnormalized(state, x, y, z, t, state.norm)


def time_derivative(state: PacketState, x, y, z, t=0.0) -> np.ndarray:
    """Analytic d psi / dt (rest-energy phase plus the complex-width evolution)."""
    c = state.consts
    x, y, z, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z, t)))
    w = complex_width(state, t)
    r2 = x * x + y * y + z * z
    psi = wavefunction(state, x, y, z, t)
    dw_dt = 1j * c.hbar / c.m
    dlogG = (-1.5 / w + r2 / (2 * w * w)) * dw_dt
    out = psi * (-1j * rest_energy(c) / c.hbar + dlogG)[..., None]
    # the small components also carry a 1/w factor
    out[..., 2:] += psi[..., 2:] * (-dw_dt / w)[..., None]
    return out


def field(state: PacketState):
    return lambda x, y, z, t: wavefunction(state, x, y, z, t)


def field_dt(state: PacketState):
    return lambda x, y, z, t: time_derivative(state, x, y, z, t)


def plane_wave(P, x, y, z, t=0.0, consts: PhysicalConstants = DEFAULTS) -> np.ndarray:
    """Exact free positive-energy spin-up eigenstate with momentum P (kg m/s)."""
    px, py, pz = (float(v) for v in P)
    p2 = px * px + py * py + pz * pz
    mc2 = rest_energy(consts)
    if math.sqrt(p2) >= consts.m * consts.c:
        raise ValueError("plane_wave is limited to |P| < m c")
    E = math.sqrt(mc2 * mc2 + p2 * consts.c**2)
    x, y, z, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z, t)))
    # E t / hbar is ~1e21 t; reduce modulo 2 pi separately from the spatial phase
    temporal = np.exp(-1j * np.mod(E / consts.hbar * t, 2 * np.pi))
    ph = temporal * np.exp(1j * (px * x + py * y + pz * z) / consts.hbar)
    f = consts.c / (E + mc2)
    psi = np.zeros(x.shape + (4,), dtype=complex)
    psi[..., 0] = ph
    psi[..., 2] = ph * f * pz
    psi[..., 3] = ph * f * (px + 1j * py)
    return psi


def plane_wave_energy(P, consts: PhysicalConstants = DEFAULTS) -> float:
    p2 = sum(float(v) ** 2 for v in P)
    return math.sqrt(rest_energy(consts) ** 2 + p2 * consts.c**2)


def plane_wave_field(P, consts: PhysicalConstants = DEFAULTS):
    return lambda x, y, z, t: plane_wave(P, x, y, z, t, consts)


def plane_wave_field_dt(P, consts: PhysicalConstants = DEFAULTS):
    E = plane_wave_energy(P, consts)
    return lambda x, y, z, t: (-1j * E / consts.hbar) * plane_wave(P, x, y, z, t, consts)


@lru_cache(maxsize=16)
def _hermgauss(n: int):
    s, w = np.polynomial.hermite.hermgauss(n)
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _oracle_chunk(state: PacketState, pts: np.ndarray, t: float, nodes: int) -> np.ndarray:
    c = state.consts
    d = state.d
    s, w = _hermgauss(nodes)
    # P = sqrt(2) hbar s / d turns exp(-P^2 d^2 / 2 hbar^2) into the Hermite weight exp(-s^2)
    P = math.sqrt(2.0) * c.hbar * s / d
    tau = c.hbar * t / (c.m * d * d)
    chirp = w * np.exp(-1j * tau * s * s)
    # per-axis factors, shape (points, nodes)
    A = [chirp[None, :] * np.exp(1j * np.outer(pts[:, k], P) / c.hbar) for k in range(3)]
    T = A[0][:, :, None, None] * A[1][:, None, :, None] * A[2][:, None, None, :]
    Px = P[:, None, None]
    Py = P[None, :, None]
    Pz = P[None, None, :]
    u3 = np.broadcast_to(Pz / (2 * c.m * c.c), T.shape[1:])
    u4 = (Px + 1j * Py) / (2 * c.m * c.c) + 0 * Pz
    out = np.empty((pts.shape[0], 4), dtype=complex)
    out[:, 0] = T.sum(axis=(1, 2, 3))
    out[:, 1] = 0.0
    out[:, 2] = np.einsum("pijk,ijk->p", T, u3)
    out[:, 3] = np.einsum("pijk,ijk->p", T, u4)
    jacobian = (math.sqrt(2.0) * c.hbar / d) ** 3
    return state.norm * jacobian * _rest_phase(c, t) * out


def _oracle(state: PacketState, pts: np.ndarray, t: float, nodes: int) -> np.ndarray:
    chunks = [pts[i : i + ORACLE_CHUNK] for i in range(0, len(pts), ORACLE_CHUNK)]
    workers = _threads()
    if workers == 1 or len(chunks) == 1:
        parts = [_oracle_chunk(state, ch, t, nodes) for ch in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ch: _oracle_chunk(state, ch, t, nodes), chunks))
    return np.concatenate(parts, axis=0)


def superposition_oracle(
    state: PacketState, points, t: float = 0.0, nodes: int = 24, check: bool = True
) -> OracleResult:
    """Spinor at ``points`` (shape (n, 3)) from the momentum-space superposition.

    Each point is a full tensor-product Gauss-Hermite sum over nodes^3 momenta of the
    Gaussian-weighted, quadratically dephased plane waves with spinor
    (1, 0, P_z/2mc, (P_x + i P_y)/2mc). With ``check`` the sum is repeated at
    2 * nodes and the relative change decides ``converged``.
    """
    if nodes < 8:
        raise ValueError("superposition_oracle needs at least 8 nodes per axis")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    psi = _oracle(state, pts, t, nodes)
    if not check:
        return OracleResult(psi, None, None)
    finer = _oracle(state, pts, t, 2 * nodes)
    change = float(np.linalg.norm(psi - finer) / np.linalg.norm(finer))
    return OracleResult(psi, change <= CONVERGENCE_TOL, change)


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a, b>| / (|a| |b|) with the spinors at all sample points stacked into one vector."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def four_current_closed_form(state: PacketState, x, y, z, t=0.0) -> spinor.FourCurrent:
    """rho (C/m^3) and j (A/m^2) from the spinor bilinears of the closed form."""
    return spinor.four_current(wavefunction(state, x, y, z, t), state.consts)


def decoherence_time(state: PacketState) -> float:
    """d^2 / (lambda_c c)."""
    return state.d**2 / (compton_wavelength(state.consts) * state.consts.c)


def width_variance(state: PacketState, t) -> np.ndarray:
    """Per-axis variance of |G|^2: (d^4 + (lambda_c c t)^2) / (2 d^2)."""
    t = np.asarray(t, dtype=float)
    spread = compton_wavelength(state.consts) * state.consts.c * t
    return (state.d**4 + spread**2) / (2 * state.d**2)


def width_ratio(state: PacketState, t) -> np.ndarray:
    """RMS width of |G|^2 at time t over its t = 0 value."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("width_ratio needs t >= 0")
    return np.sqrt(width_variance(state, t) / width_variance(state, 0.0))


def total_charge(state: PacketState, t: float, half_width: float | None = None, order: int = NORM_ORDER) -> float:
    """Gauss-Legendre integral of rho over a cube of the given half-width (default 12 d)."""
    half = 12 * state.d if half_width is None else half_width
    nodes, weights = gauss_legendre_nodes(order, -half, half)
    X, Y, Z = np.meshgrid(nodes, nodes, nodes, indexing="ij")
    W = weights[:, None, None] * weights[None, :, None] * weights[None, None, :]
    rho = four_current_closed_form(state, X, Y, Z, t).rho
    return float(np.sum(W * rho))
