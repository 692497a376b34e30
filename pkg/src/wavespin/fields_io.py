"""Field tables and their on-disk forms: CSV, PPM heatmaps, SVG quivers, JSON manifests.

Everything written here is deterministic: no timestamps unless SOURCE_DATE_EPOCH is
set, fixed number formatting, LF line endings.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from wavespin import packet as packet_mod
from wavespin import well as well_mod
from wavespin.numerics import GridSpec

# anchor colours of a perceptually ordered dark-to-bright ramp (viridis samples)
_RAMP = np.array(
    [
        [68, 1, 84],
        [72, 40, 120],
        [62, 74, 137],
        [49, 104, 142],
        [38, 130, 142],
        [31, 158, 137],
        [53, 183, 121],
        [109, 205, 89],
        [180, 222, 44],
        [253, 231, 37],
    ],
    dtype=float,
)

ARROW_FLOOR = 1e-12  # arrows shorter than this fraction of the longest one are dropped


@dataclass
class FieldTable:
    """Column-oriented samples on a grid; rows are in x-fastest order.

    ``shape`` is the grid shape in (ny, nx) or (nz, ny, nx) order so that
    ``column(name).reshape(shape)`` gives an image-like array.
    """

    columns: list[tuple[str, str]]
    data: np.ndarray  # (rows, len(columns))
    shape: tuple[int, ...]

    def __post_init__(self):
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        if any(not unit for _, unit in self.columns):
            raise ValueError("every column needs a unit")
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (math.prod(self.shape), len(self.columns)):
            raise ValueError(f"data shape {self.data.shape} does not match grid {self.shape}")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.columns]

    def unit(self, name: str) -> str:
        return dict(self.columns)[name]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.names.index(name)]
        except ValueError:
            raise KeyError(f"unknown column {name!r}") from None

    def grid(self, name: str) -> np.ndarray:
        return self.column(name).reshape(self.shape)


def _table(columns, arrays, shape) -> FieldTable:
    # meshgrids are built with indexing="ij" (x first); transpose so x varies fastest
    flat = [np.asarray(a).T.reshape(-1) for a in arrays]
    return FieldTable(list(columns), np.stack(flat, axis=1), shape)


def sample_well(state: well_mod.WellState, grid: GridSpec) -> FieldTable:
    """Charge, current and speed of the well state on a 2D grid."""
    X, Y, _ = grid.mesh()
    rho = well_mod.charge_density(state, X, Y)
    j = well_mod.current_density(state, X, Y)
    jmag = well_mod.current_magnitude(state, X, Y)
    v = well_mod.velocity(state, X, Y, corners="nan")
    peak = np.max(np.abs(rho))
    columns = [
        ("x", "m"),
        ("y", "m"),
        ("rho", "C/m^2"),
        ("rho_rel", "1"),
        ("jx", "A/m"),
        ("jy", "A/m"),
        ("jz", "A/m"),
        ("jmag", "A/m"),
        ("v", "m/s"),
    ]
    arrays = [X, Y, rho, np.abs(rho) / peak, j[..., 0], j[..., 1], j[..., 2], jmag, v]
    return _table(columns, arrays, (grid.nodes[1], grid.nodes[0]))


def sample_packet(state: packet_mod.PacketState, grid: GridSpec, t: float) -> FieldTable:
    """Packet densities on the z = z0 plane of a 2D grid at time t."""
    X, Y, Z = grid.mesh()
    cur = packet_mod.four_current_closed_form(state, X, Y, Z, t)
    rho = cur.rho
    jmag = cur.jmag
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(rho != 0, jmag / np.abs(rho), np.nan)
    peak = np.max(np.abs(rho))
    columns = [
        ("x", "m"),
        ("y", "m"),
        ("z", "m"),
        ("rho", "C/m^3"),
        ("rho_rel", "1"),
        ("jx", "A/m^2"),
        ("jy", "A/m^2"),
        ("jz", "A/m^2"),
        ("jmag", "A/m^2"),
        ("v", "m/s"),
    ]
    arrays = [X, Y, Z, rho, np.abs(rho) / peak, cur.jx, cur.jy, cur.jz, jmag, v]
    return _table(columns, arrays, (grid.nodes[1], grid.nodes[0]))


def write_field_csv(table: FieldTable, destination) -> None:
    """Header ``# name(unit),...`` then one row per node, 17 significant digits."""
    lines = ["# " + ",".join(f"{n}({u})" for n, u in table.columns)]
    row_fmt = ",".join(["%.16e"] * len(table.columns))  # nan formats as "nan"
    lines += [row_fmt % tuple(row) for row in table.data.tolist()]
    Path(destination).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def read_field_csv(source, shape: tuple[int, ...] | None = None) -> FieldTable:
    text = Path(source).read_text(encoding="ascii").splitlines()
    header = text[0].lstrip("#").strip()
    columns = []
    for item in header.split(","):
        name, unit = item.split("(", 1)
        columns.append((name, unit.rstrip(")")))
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]], dtype=float)
    return FieldTable(columns, data, shape or (len(data),))


def colour_ramp(u: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to uint8 RGB along the ramp."""
    u = np.clip(np.nan_to_num(np.asarray(u, dtype=float), nan=0.0), 0.0, 1.0)
    pos = u * (len(_RAMP) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_RAMP) - 1)
    frac = (pos - lo)[..., None]
    rgb = _RAMP[lo] * (1 - frac) + _RAMP[hi] * frac
    return np.round(rgb).astype(np.uint8)


def write_heatmap(table: FieldTable, column: str, destination) -> tuple[float, float]:
    """P6 PPM, one pixel per node, +y at the top; min/max go to ``<destination>.txt``."""
    if len(table.shape) != 2:
        raise ValueError("heatmaps need a 2D table")
    values = table.grid(column)  # raises KeyError for unknown columns
    finite = values[np.isfinite(values)]
    vmin, vmax = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 0.0)
    span = vmax - vmin
    u = (values - vmin) / span if span > 0 else np.zeros_like(values)
    rgb = colour_ramp(u[::-1, :])
    ny, nx = values.shape
    destination = Path(destination)
    destination.write_bytes(f"P6\n{nx} {ny}\n255\n".encode("ascii") + rgb.tobytes())
    meta = f"column={column}\nunit={table.unit(column)}\nmin={vmin!r}\nmax={vmax!r}\nscaling=linear\n"
    Path(str(destination) + ".txt").write_text(meta, encoding="ascii", newline="\n")
    return vmin, vmax


def read_ppm(source) -> np.ndarray:
    raw = Path(source).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    nx, ny = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(ny, nx, 3)


@dataclass(frozen=True)
class Arrow:
    x: float  # node position, m
    y: float
    dx: float  # unit direction
    dy: float
    length: float  # |j| / max |j| over the arrows shown


def quiver_arrows(table: FieldTable, stride: int) -> list[Arrow]:
    """Arrows at every ``stride``-th node in x and y, along (jx, jy)."""
    if len(table.shape) != 2:
        raise ValueError("quiver needs a 2D table")
    ny, nx = table.shape
    if stride < 1 or stride > max(nx, ny):
        raise ValueError(f"stride {stride} does not fit a {nx}x{ny} grid")
    X, Y = table.grid("x"), table.grid("y")
    JX, JY = table.grid("jx"), table.grid("jy")
    sel = (slice(None, None, stride), slice(None, None, stride))
    x, y, jx, jy = X[sel].ravel(), Y[sel].ravel(), JX[sel].ravel(), JY[sel].ravel()
    mag = np.hypot(jx, jy)
    top = float(mag.max()) if mag.size else 0.0
    arrows = []
    if top == 0.0:
        return arrows
    for xi, yi, ax, ay, m in zip(x, y, jx, jy, mag):
        if m <= ARROW_FLOOR * top:
            continue
        arrows.append(Arrow(float(xi), float(yi), float(ax / m), float(ay / m), float(m / top)))
    return arrows


def write_quiver_svg(table: FieldTable, destination, stride: int = 10, size: int = 600) -> int:
    """Standalone SVG 1.1 of the in-plane current; returns the number of arrows drawn."""
    arrows = quiver_arrows(table, stride)
    X, Y = table.grid("x"), table.grid("y")
    x0, x1, y0, y1 = float(X.min()), float(X.max()), float(Y.min()), float(Y.max())
    ny, nx = table.shape
    pad = 20.0
    sx = (size - 2 * pad) / (x1 - x0)
    sy = (size - 2 * pad) / (y1 - y0)
    cell = min(sx * (x1 - x0) / max(nx - 1, 1), sy * (y1 - y0) / max(ny - 1, 1)) * stride
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{pad:.3f}" y="{pad:.3f}" width="{size - 2 * pad:.3f}" height="{size - 2 * pad:.3f}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        '<g stroke="#1f4e9c" fill="#1f4e9c" stroke-width="1.2">',
    ]
    for a in arrows:
        px = pad + (a.x - x0) * sx
        py = size - pad - (a.y - y0) * sy
        length = 0.9 * cell * a.length
        # svg y grows downwards
        ux, uy = a.dx, -a.dy
        tx, ty = px + ux * length, py + uy * length
        head = max(1.5, 0.3 * length)
        bx, by = tx - ux * head, ty - uy * head
        lx, ly = bx - uy * head * 0.4, by + ux * head * 0.4
        rx, ry = bx + uy * head * 0.4, by - ux * head * 0.4
        lines.append(f'<line x1="{px:.3f}" y1="{py:.3f}" x2="{tx:.3f}" y2="{ty:.3f}"/>')
        lines.append(f'<polygon points="{tx:.3f},{ty:.3f} {lx:.3f},{ly:.3f} {rx:.3f},{ry:.3f}"/>')
    lines += ["</g>", "</svg>"]
    Path(destination).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return len(arrows)


def read_svg_arrows(source) -> list[tuple[float, float, float, float]]:
    """(x1, y1, x2, y2) of every arrow shaft in an SVG written by write_quiver_svg."""
    import xml.etree.ElementTree as ET

    root = ET.parse(source).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    return [
        tuple(float(el.get(k)) for k in ("x1", "y1", "x2", "y2")) for el in root.iter(f"{ns}line")
    ]


def quantity(value, unit: str) -> dict[str, Any]:
    """Scalar tagged with its unit; numpy scalars become plain floats."""
    if value is None:
        return {"unit": unit, "value": None}
    if isinstance(value, (list, tuple, np.ndarray)):
        return {"unit": unit, "value": [float(v) for v in value]}
    return {"unit": unit, "value": float(value)}


@dataclass
class ObservablesManifest:
    config: dict[str, Any]
    scalars: dict[str, dict[str, Any]]
    residuals: dict[str, Any] | None = None
    checks: list[dict[str, Any]] | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "config": self.config,
            "scalars": self.scalars,
            "residuals": self.residuals,
            "provenance": self.provenance,
        }
        if self.checks is not None:
            out["checks"] = self.checks
        return out


def provenance(consts) -> dict[str, Any]:
    from wavespin import __version__
    from wavespin.constants import UNITS

    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    return {
        "constants": {k: quantity(v, UNITS[k]) for k, v in consts.as_dict().items()},
        "code_version": __version__,
        "timestamp": int(epoch) if epoch and epoch.isdigit() else None,
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_manifest(manifest: ObservablesManifest | dict) -> str:
    data = manifest.to_dict() if isinstance(manifest, ObservablesManifest) else manifest
    return json.dumps(_clean(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_manifest(manifest: ObservablesManifest | dict, destination) -> None:
    Path(destination).write_text(dumps_manifest(manifest), encoding="utf-8", newline="\n")
