"""Quadrature, sampling grids and finite-difference checks of the Dirac solutions.

Spinor fields are passed around as callables ``psi_fn(x, y, z, t)`` returning an
array of shape ``broadcast(x, y, z) + (4,)``. All derivatives here are second-order
central differences; time derivatives come from an analytic callable when one is
supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from wavespin import spinor
from wavespin.constants import DEFAULTS, PhysicalConstants

SpinorField = Callable[..., np.ndarray]

MIN_NODES = 9


@lru_cache(maxsize=64)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_nodes(order: int, lo: float, hi: float):
    """Gauss-Legendre nodes and weights mapped to [lo, hi]."""
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    x, w = _leggauss(int(order))
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w


def gauss_legendre(f: Callable[..., np.ndarray], domain, order: int) -> float:
    """Tensor-product Gauss-Legendre estimate of the integral of f over a box.

    ``domain`` is a single (lo, hi) pair or a sequence of them, one per axis; f is
    called with one meshgrid array per axis (``indexing="ij"``).
    """
    domain = np.atleast_2d(np.asarray(domain, dtype=float))
    pairs = [gauss_legendre_nodes(order, lo, hi) for lo, hi in domain]
    coords = np.meshgrid(*(p[0] for p in pairs), indexing="ij")
    weights = pairs[0][1]
    for _, w in pairs[1:]:
        weights = np.multiply.outer(weights, w)
    values = np.asarray(f(*coords))
    return np.sum(weights * values)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on a 2D plane (at height z0) or a 3D box.

    ``centering="vertex"`` puts nodes on the end points; ``"cell"`` puts them at cell
    midpoints.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    nodes: tuple[int, ...]
    centering: str = "vertex"
    z0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "nodes", tuple(int(v) for v in self.nodes))
        if not len(self.lo) == len(self.hi) == len(self.nodes) or self.dims not in (2, 3):
            raise ValueError("grid needs matching lo/hi/nodes of length 2 or 3")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("grid needs hi > lo on every axis")
        if any(n < MIN_NODES for n in self.nodes):
            raise ValueError(f"grid too coarse for the stencil: need >= {MIN_NODES} nodes per axis")
        if self.centering not in ("vertex", "cell"):
            raise ValueError(f"unknown centering {self.centering!r}")

    @classmethod
    def square(cls, half_width: float, nodes: int, **kw) -> "GridSpec":
        return cls((-half_width, -half_width), (half_width, half_width), (nodes, nodes), **kw)

    @classmethod
    def cube(cls, half_width: float, nodes: int, **kw) -> "GridSpec":
        return cls((-half_width,) * 3, (half_width,) * 3, (nodes,) * 3, **kw)

    @property
    def dims(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> tuple[float, ...]:
        if self.centering == "vertex":
            return tuple((h - l) / (n - 1) for l, h, n in zip(self.lo, self.hi, self.nodes))
        return tuple((h - l) / n for l, h, n in zip(self.lo, self.hi, self.nodes))

    def axes(self) -> list[np.ndarray]:
        out = []
        for l, h, n, d in zip(self.lo, self.hi, self.nodes, self.spacing):
            if self.centering == "vertex":
                out.append(np.linspace(l, h, n))
            else:
                out.append(l + d * (np.arange(n) + 0.5))
        return out

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X, Y, Z) arrays of shape ``nodes``; Z is the constant z0 plane in 2D."""
        grids = list(np.meshgrid(*self.axes(), indexing="ij"))
        if self.dims == 2:
            grids.append(np.full_like(grids[0], self.z0))
        return tuple(grids)

    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dims


@dataclass(frozen=True)
class ResidualReport:
    h: float  # grid spacing, m
    l2: float  # RMS of the pointwise residual norm
    linf: float
    interior: int  # number of nodes contributing
    scale: float  # RMS size of the largest discretised term, same units as l2

    @property
    def relative(self) -> float:
        return self.l2 / self.scale if self.scale > 0 else 0.0


def _apply(op: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.einsum("ab,...b->...a", op, psi)


def _central(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference along a grid axis, valid on interior nodes only."""
    n = values.shape[axis]
    hi = [slice(None)] * values.ndim
    lo = [slice(None)] * values.ndim
    hi[axis] = slice(2, n)
    lo[axis] = slice(0, n - 2)
    return (values[tuple(hi)] - values[tuple(lo)]) / (2 * h)


def _trim(values: np.ndarray, dims: int, skip: int | None = None) -> np.ndarray:
    """Restrict to interior nodes on every grid axis except ``skip`` (already trimmed)."""
    sl = [slice(1, -1) if a != skip else slice(None) for a in range(dims)]
    return values[tuple(sl)]


def _gradient(fn, grid: GridSpec, t: float):
    """Interior values and the three spatial partial derivatives of a grid field."""
    X, Y, Z = grid.mesh()
    base = np.asarray(fn(X, Y, Z, t))
    spacing = grid.spacing
    partials = []
    for axis in range(grid.dims):
        partials.append(_trim(_central(base, axis, spacing[axis]), grid.dims, skip=axis))
    if grid.dims == 2:
        h = min(spacing)
        up = np.asarray(fn(X, Y, Z + h, t))
        down = np.asarray(fn(X, Y, Z - h, t))
        partials.append(_trim((up - down) / (2 * h), 2))
    return _trim(base, grid.dims), partials


def _norms(resid: np.ndarray, scale_field: np.ndarray, h: float) -> ResidualReport:
    pointwise = np.sqrt(np.sum(np.abs(resid) ** 2, axis=-1)) if resid.ndim > 0 else np.abs(resid)
    scale_pt = np.sqrt(np.sum(np.abs(scale_field) ** 2, axis=-1)) if scale_field.ndim > 0 else np.abs(scale_field)
    return ResidualReport(
        h=float(h),
        l2=float(np.sqrt(np.mean(pointwise**2))),
        linf=float(np.max(pointwise)),
        interior=int(pointwise.size),
        scale=float(np.sqrt(np.mean(scale_pt**2))),
    )


def dirac_residual(
    psi_fn: SpinorField,
    dpsi_dt_fn: SpinorField | None,
    grid: GridSpec,
    t: float = 0.0,
    h_t: float | None = None,
    consts: PhysicalConstants = DEFAULTS,
) -> ResidualReport:
    """Residual of (1/c) d_t psi + alpha . grad psi + i (mc/hbar) gamma^0 psi on the grid interior.

    The scale reported is the RMS of alpha . grad psi, the term being discretised.
    """
    psi, partials = _gradient(psi_fn, grid, t)
    if dpsi_dt_fn is not None:
        X, Y, Z = grid.mesh()
        dpsi_dt = _trim(np.asarray(dpsi_dt_fn(X, Y, Z, t)), grid.dims)
    elif h_t:
        X, Y, Z = grid.mesh()
        dpsi_dt = _trim((psi_fn(X, Y, Z, t + h_t) - psi_fn(X, Y, Z, t - h_t)) / (2 * h_t), grid.dims)
    else:
        raise ValueError("need an analytic time derivative or a time step h_t")
    kinetic = sum(_apply(spinor.alpha(k + 1), partials[k]) for k in range(3))
    mass = 1j * (consts.m * consts.c / consts.hbar) * _apply(spinor.gamma(0), psi)
    resid = dpsi_dt / consts.c + kinetic + mass
    return _norms(resid, kinetic, min(grid.spacing))


def continuity_residual(
    rho_fn: Callable[..., np.ndarray],
    j_fn: Callable[..., np.ndarray],
    grid: GridSpec,
    t: float = 0.0,
    dt: float | None = None,
) -> ResidualReport:
    """Residual of d rho/dt + div j by central differences.

    ``j_fn`` returns shape ``(..., 3)``. With ``dt`` None the density is treated as
    static. The scale is the RMS of |d_t rho| + sum_k |d_k j_k|.
    """
    X, Y, Z = grid.mesh()
    if dt:
        drho = (np.asarray(rho_fn(X, Y, Z, t + dt)) - np.asarray(rho_fn(X, Y, Z, t - dt))) / (2 * dt)
        drho = _trim(drho, grid.dims)
    else:
        drho = np.zeros(tuple(n - 2 for n in grid.nodes))
    _, partials = _gradient(j_fn, grid, t)
    terms = [partials[k][..., k] for k in range(3)]
    resid = drho + sum(terms)
    scale = np.abs(drho) + sum(np.abs(term) for term in terms)
    return _norms(resid[..., None], scale[..., None], min(grid.spacing))


def current_fields(psi_fn: SpinorField, consts: PhysicalConstants = DEFAULTS):
    """(rho_fn, j_fn) built from a spinor field through the four-current."""

    def rho_fn(x, y, z, t):
        return spinor.four_current(psi_fn(x, y, z, t), consts).rho

    def j_fn(x, y, z, t):
        return spinor.four_current(psi_fn(x, y, z, t), consts).j

    return rho_fn, j_fn


@dataclass(frozen=True)
class GordonTerms:
    """Gordon split of the current at one or more points, each of shape (..., 3), A/m^n."""

    convection: np.ndarray
    magnetization: np.ndarray
    polarization: np.ndarray
    direct: np.ndarray
    imag_residue: float  # largest imaginary part of the assembled sum, relative to scale

    @property
    def total(self) -> np.ndarray:
        return self.convection + self.magnetization + self.polarization

    @property
    def spin(self) -> np.ndarray:
        return self.magnetization + self.polarization


def gordon_decompose(
    psi_fn: SpinorField,
    point,
    t: float,
    h: float,
    h_t: float | None = None,
    dpsi_dt_fn: SpinorField | None = None,
    consts: PhysicalConstants = DEFAULTS,
) -> GordonTerms:
    """Convection, magnetization and polarization currents at ``point`` (shape (..., 3)).

    convection   = -(i e hbar / 2m) [psibar d_k psi - (d_k psibar) psi]
    magnetization = (e hbar / 2m) d_n (psibar sigma^{kn} psi)
    polarization  = (e hbar / 2mc) d_t (psibar sigma^{k0} psi)
    with d_k = d/dx^k and sigma^{mu nu} = (i/2)[gamma^mu, gamma^nu]. The time
    derivative uses ``dpsi_dt_fn`` when given, else a central difference with h_t.
    """
    p = np.asarray(point, dtype=float)
    coords = [p[..., 0], p[..., 1], p[..., 2]]

    def at(offset_axis=None, step=0.0, time=t):
        c = list(coords)
        if offset_axis is not None:
            c[offset_axis] = c[offset_axis] + step
        return np.asarray(psi_fn(c[0], c[1], c[2], time))

    psi = at()
    if not np.all(np.isfinite(psi)):
        raise FloatingPointError("spinor field is not finite at the requested point")
    shifted = [(at(a, h), at(a, -h)) for a in range(3)]
    dpsi = [(up - down) / (2 * h) for up, down in shifted]

    e, hbar, m, c = consts.e, consts.hbar, consts.m, consts.c
    bar = lambda a, op, b: np.einsum("...a,ab,...b->...", a.conj(), spinor.gamma(0) @ op, b)

    conv = np.stack(
        [-(1j * e * hbar / (2 * m)) * (bar(psi, spinor.I4, dpsi[k]) - bar(dpsi[k], spinor.I4, psi)) for k in range(3)],
        axis=-1,
    )
    mag = []
    for k in range(1, 4):
        acc = 0.0
        for n in range(1, 4):
            if n == k:
                continue
            s = spinor.sigma_tensor(k, n)
            up, down = shifted[n - 1]
            acc = acc + (bar(up, s, up) - bar(down, s, down)) / (2 * h)
        mag.append(e * hbar / (2 * m) * acc)
    mag = np.stack(mag, axis=-1)

    if dpsi_dt_fn is not None:
        dpsi_t = np.asarray(dpsi_dt_fn(coords[0], coords[1], coords[2], t))
        dt_bilinear = lambda s: bar(psi, s, dpsi_t) + bar(dpsi_t, s, psi)
    elif h_t:
        fwd, back = at(time=t + h_t), at(time=t - h_t)
        dt_bilinear = lambda s: (bar(fwd, s, fwd) - bar(back, s, back)) / (2 * h_t)
    else:
        raise ValueError("need an analytic time derivative or a time step h_t")
    pol = np.stack([e * hbar / (2 * m * c) * dt_bilinear(spinor.sigma_tensor(k, 0)) for k in range(1, 4)], axis=-1)

    direct = np.stack([e * c * bar(psi, spinor.gamma(k), psi) for k in range(1, 4)], axis=-1)
    total = conv + mag + pol
    scale = max(float(np.max(np.abs(direct))), float(np.max(np.abs(total))), np.finfo(float).tiny)
    residue = max(float(np.max(np.abs(x.imag))) for x in (total, direct)) / scale
    return GordonTerms(conv.real, mag.real, pol.real, direct.real, residue)


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    monotone: bool


def convergence_order(reports: Sequence[ResidualReport], attr: str = "l2") -> OrderEstimate:
    """Least-squares slope of log(residual) against log(h)."""
    if len(reports) < 3:
        raise ValueError("need at least 3 residual reports for a convergence slope")
    hs = np.array([r.h for r in reports])
    values = np.array([getattr(r, attr) for r in reports])
    if np.any(np.diff(hs) >= 0):
        raise ValueError("reports must have strictly decreasing h")
    if np.any(values <= 0):
        raise ValueError("residuals must be positive to fit an order")
    slope = np.polyfit(np.log(hs), np.log(values), 1)[0]
    return OrderEstimate(order=float(slope), monotone=bool(np.all(np.diff(values) < 0)))


def order_from_errors(hs: Sequence[float], errors: Sequence[float]) -> OrderEstimate:
    """Same fit as convergence_order for bare (h, error) pairs."""
    reports = [ResidualReport(h, e, e, 1, 1.0) for h, e in zip(hs, errors)]
    return convergence_order(reports)
