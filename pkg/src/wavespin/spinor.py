"""Dirac-representation matrices and spinor bilinears.

Spinors are numpy arrays whose last axis has length 4, ordered as the column
(upper pair = large components, lower pair = small components). Any leading
shape is allowed, so a whole sampled grid is handled in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wavespin.constants import DEFAULTS, PhysicalConstants

# residue tolerance for bilinears of Hermitian operators, relative to psi^dagger psi
IMAG_TOL = 1e-12

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)
I4 = np.eye(4, dtype=complex)
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def _block(a, b, c, d):
    return np.block([[a, b], [c, d]])


_GAMMA0 = _block(I2, Z2, Z2, -I2)
_ALPHA = tuple(_block(Z2, s, s, Z2) for s in PAULI)
_GAMMA = (_GAMMA0,) + tuple(_GAMMA0 @ a for a in _ALPHA)
_SIGMA_SPIN = tuple(_block(s, Z2, Z2, s) for s in PAULI)

for _arr in (_GAMMA0, *_ALPHA, *_GAMMA, *_SIGMA_SPIN):
    _arr.setflags(write=False)


def _check_index(value: int, lo: int, hi: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or not lo <= value <= hi:
        raise IndexError(f"{name} must be an integer in {lo}..{hi}, got {value!r}")
    return int(value)


def gamma(mu: int) -> np.ndarray:
    """gamma^mu in the Dirac representation, mu = 0..3."""
    return _GAMMA[_check_index(mu, 0, 3, "mu")].copy()


def alpha(k: int) -> np.ndarray:
    """alpha^k = ((0, sigma_k), (sigma_k, 0)), k = 1..3."""
    return _ALPHA[_check_index(k, 1, 3, "k") - 1].copy()


def sigma_spin(k: int) -> np.ndarray:
    """Spin operator Sigma_k = diag(sigma_k, sigma_k), k = 1..3."""
    return _SIGMA_SPIN[_check_index(k, 1, 3, "k") - 1].copy()


def sigma_tensor(mu: int, nu: int) -> np.ndarray:
    """sigma^{mu nu} = (i/2) [gamma^mu, gamma^nu]."""
    g_mu = _GAMMA[_check_index(mu, 0, 3, "mu")]
    g_nu = _GAMMA[_check_index(nu, 0, 3, "nu")]
    return 0.5j * (g_mu @ g_nu - g_nu @ g_mu)


def spin_from_alpha(k: int) -> np.ndarray:
    """(1/2i) (alpha x alpha)_k built from the alpha matrices alone."""
    k = _check_index(k, 1, 3, "k")
    i, j = k % 3, (k + 1) % 3
    a_i, a_j = _ALPHA[i], _ALPHA[j]
    return (a_i @ a_j - a_j @ a_i) / 2j


def self_test(atol: float = 1e-15) -> None:
    """Check the hard-coded matrices against their defining algebra.

    Raises AssertionError on the first mismatch. Run once at import.
    """
    for mu in range(4):
        for nu in range(4):
            anti = _GAMMA[mu] @ _GAMMA[nu] + _GAMMA[nu] @ _GAMMA[mu]
            assert np.allclose(anti, 2 * METRIC[mu, nu] * I4, atol=atol, rtol=0), (mu, nu)
    for k in range(1, 4):
        assert np.allclose(spin_from_alpha(k), _SIGMA_SPIN[k - 1], atol=atol, rtol=0), k
        assert np.allclose(_ALPHA[k - 1], _ALPHA[k - 1].conj().T, atol=0, rtol=0), k


self_test()


@dataclass(frozen=True)
class FourCurrent:
    """Charge density and current density components (arrays share a shape)."""

    rho: np.ndarray
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def j(self) -> np.ndarray:
        return np.stack([self.jx, self.jy, self.jz], axis=-1)

    @property
    def jmag(self) -> np.ndarray:
        return np.sqrt(self.jx**2 + self.jy**2 + self.jz**2)


def bilinear(psi: np.ndarray, op: np.ndarray) -> np.ndarray:
    """psi^dagger . op . psi over the last axis (complex result)."""
    psi = np.asarray(psi, dtype=complex)
    return np.einsum("...a,ab,...b->...", psi.conj(), op, psi)


def dirac_adjoint_bilinear(psi: np.ndarray, op: np.ndarray) -> np.ndarray:
    """psi-bar . op . psi with psi-bar = psi^dagger gamma^0."""
    return bilinear(psi, _GAMMA0 @ op)


def real_bilinear(psi: np.ndarray, op: np.ndarray, tol: float = IMAG_TOL) -> np.ndarray:
    """Bilinear of a Hermitian operator; the imaginary round-off is checked, then dropped."""
    psi = np.asarray(psi, dtype=complex)
    value = bilinear(psi, op)
    norm = np.einsum("...a,...a->...", psi.conj(), psi).real
    resid = np.abs(value.imag)
    if np.any(resid > tol * np.maximum(norm, np.finfo(float).tiny)):
        worst = float(np.max(resid / np.maximum(norm, np.finfo(float).tiny)))
        raise FloatingPointError(f"bilinear has imaginary residue {worst:.3e} (relative)")
    return value.real


def four_current(psi: np.ndarray, consts: PhysicalConstants = DEFAULTS) -> FourCurrent:
    """rho = e psi^dagger psi, j^k = e c psi^dagger alpha^k psi."""
    psi = np.asarray(psi, dtype=complex)
    density = np.einsum("...a,...a->...", psi.conj(), psi).real
    jx, jy, jz = (consts.e * consts.c * real_bilinear(psi, a) for a in _ALPHA)
    return FourCurrent(consts.e * density, jx, jy, jz)
