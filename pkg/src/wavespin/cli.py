"""Command-line entry point: ``wavespin {well,packet,verify,observables}``.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

from wavespin import __version__
from wavespin import fields_io as fio
from wavespin import packet as pk
from wavespin import verify as vf
from wavespin import well as wl
from wavespin.constants import compton_wavelength, rest_energy
from wavespin.numerics import GridSpec

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12, "fm": 1e-15}
_LENGTH_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-z]*)\s*$")


def parse_length(text: str) -> float:
    """'10nm', '1e-8' and '1e-8m' all mean 1e-8 metres."""
    m = _LENGTH_RE.match(text)
    if not m or m.group(2) not in ("",) + tuple(_LENGTH_UNITS):
        raise argparse.ArgumentTypeError(f"cannot parse length {text!r} (use e.g. 10nm, 1e-8 or 1e-8m)")
    value = float(m.group(1)) * _LENGTH_UNITS.get(m.group(2) or "m")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"length must be positive, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def _time(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a time in seconds: {text!r}") from None
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"time must be >= 0 s, got {text!r}")
    return value


def _grid_nodes(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 9:
        raise argparse.ArgumentTypeError(f"need at least 9 nodes per axis, got {n}")
    return n


def _grid_list(text: str) -> list[int]:
    grids = [_grid_nodes(part) for part in text.split(",") if part.strip()]
    if len(grids) < 3:
        raise argparse.ArgumentTypeError("need at least 3 grids for a convergence slope, e.g. 65,129,257")
    if any(b <= a for a, b in zip(grids, grids[1:])):
        raise argparse.ArgumentTypeError("grids must be strictly increasing")
    return grids


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {n}")
        return n

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavespin",
        description="Dirac 4-spinor well eigenstate and Gaussian wavepacket: fields, observables, checks.",
    )
    parser.add_argument("--version", action="version", version=f"wavespin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    well = sub.add_parser("well", help="sample the well ground state and write fields, images, manifest")
    well.add_argument("--L", type=parse_length, default=10e-9, help="well half-width in m (accepts 10nm) [10nm]")
    well.add_argument("--grid", type=_grid_nodes, default=201, help="nodes per axis [201]")
    well.add_argument("--order", type=_count(2), default=wl.DEFAULT_ORDER,
                      help="Gauss-Legendre nodes per axis for spin integrals [32]")
    well.add_argument("--stride", type=_count(1), default=10, help="quiver arrow stride in nodes [10]")
    well.add_argument("--out", type=Path, default=Path("run"), help="output directory [run]")

    packet = sub.add_parser("packet", help="sample the Gaussian packet on the z = 0 plane at time t")
    packet.add_argument("--d", type=parse_length, default=10e-9, help="Gaussian width in m (accepts 10nm) [10nm]")
    packet.add_argument("--t", type=_time, default=0.0, help="time in s [0]")
    packet.add_argument("--grid", type=_grid_nodes, default=201, help="nodes per axis [201]")
    packet.add_argument("--extent", type=_positive_float, default=4.0, help="plane half-width in units of d [4]")
    packet.add_argument("--stride", type=_count(1), default=10, help="quiver arrow stride in nodes [10]")
    packet.add_argument("--out", type=Path, default=Path("run"), help="output directory [run]")

    ver = sub.add_parser("verify", help="residual sweeps, Gordon split, spin quadrature, momentum oracle")
    ver.add_argument("target", choices=("well", "packet"))
    ver.add_argument("--L", type=parse_length, default=10e-9, help="well half-width in m [10nm]")
    ver.add_argument("--d", type=parse_length, default=10e-9, help="packet width in m [10nm]")
    ver.add_argument("--grids", type=_grid_list, default=[65, 129, 257],
                     help="comma-separated nodes per axis for convergence sweeps [65,129,257]")
    ver.add_argument("--nodes", type=_count(8), default=24, help="Gauss-Hermite nodes per axis for the oracle [24]")
    ver.add_argument("--points", type=_count(1), default=1000, help="oracle sample points within 3 d [1000]")
    ver.add_argument("--gordon-points", type=_count(16), default=16, help="random points for the Gordon split [16]")
    ver.add_argument("--order", type=_count(2), default=wl.DEFAULT_ORDER, help="Gauss-Legendre order [32]")
    ver.add_argument("--seed", type=int, default=0, help="seed for the random sample points [0]")
    ver.add_argument("--out", type=Path, default=Path("verify"), help="output directory [verify]")
    defaults = vf.Tolerances()
    for name in vf.Tolerances.__dataclass_fields__:
        ver.add_argument(f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}", type=_positive_float,
                         default=getattr(defaults, name),
                         help=f"tolerance for the {name.replace('_', ' ')} check [{getattr(defaults, name):g}]")

    obs = sub.add_parser("observables", help="print eta, E, N, S^2, S_z for the well")
    obs.add_argument("--L", type=parse_length, default=10e-9, help="well half-width in m (accepts 10nm) [10nm]")
    obs.add_argument("--order", type=_count(2), default=wl.DEFAULT_ORDER, help="Gauss-Legendre order [32]")
    obs.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def well_observables(state: wl.WellState, order: int) -> dict:
    hbar = state.consts.hbar
    S = wl.spin_vector(state, order)
    return {
        "eta": fio.quantity(state.eta, "1"),
        "E": fio.quantity(state.E, "J"),
        "E_minus_mc2": fio.quantity(state.kinetic, "J"),
        "N": fio.quantity(state.N, "1/m"),
        "norm_integral": fio.quantity(wl.norm(state, order), "1"),
        "S2": fio.quantity(wl.spin_squared(state, order), "J^2 s^2"),
        "S2_over_hbar2": fio.quantity(wl.spin_squared(state, order) / hbar**2, "1"),
        "S": fio.quantity(S, "J s"),
        "Sz_over_hbar": fio.quantity(S[2] / hbar, "1"),
        "Sz_closed_form_over_hbar": fio.quantity(wl.spin_z_closed_form(state) / hbar, "1"),
        "Sz_deficit_over_hbar": fio.quantity(wl.spin_z_deficit(state) / hbar, "1"),
    }


def cmd_well(args) -> int:
    state = wl.solve_ground(wl.WellConfig(args.L))
    grid = GridSpec.square(args.L, args.grid)
    table = fio.sample_well(state, grid)
    manifest = fio.ObservablesManifest(
        config={"command": "well", "L": fio.quantity(args.L, "m"), "grid": args.grid, "order": args.order,
                "stride": args.stride},
        scalars=well_observables(state, args.order),
        residuals=None,
        provenance=fio.provenance(state.consts),
    )
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    fio.write_field_csv(table, out / "field.csv")
    fio.write_heatmap(table, "rho_rel", out / "rho.ppm")
    fio.write_heatmap(table, "jmag", out / "jmag.ppm")
    fio.write_quiver_svg(table, out / "current.svg", stride=args.stride)
    fio.write_manifest(manifest, out / "manifest.json")
    print(f"eta = {state.eta:.6e}  E - mc^2 = {state.kinetic:.6e} J  -> {out}")
    return EXIT_OK


def cmd_packet(args) -> int:
    state = pk.prepare(pk.PacketConfig(args.d))
    grid = GridSpec.square(args.extent * args.d, args.grid)
    table = fio.sample_packet(state, grid, args.t)
    manifest = fio.ObservablesManifest(
        config={"command": "packet", "d": fio.quantity(args.d, "m"), "t": fio.quantity(args.t, "s"),
                "grid": args.grid, "extent_over_d": args.extent, "stride": args.stride},
        scalars={
            "t_c": fio.quantity(pk.decoherence_time(state), "s"),
            "t_over_t_c": fio.quantity(args.t / state.t_c, "1"),
            "width_ratio": fio.quantity(pk.width_ratio(state, args.t), "1"),
            "norm": fio.quantity(state.norm, "m^-3/2 (J s)^-3"),
            "compton_wavelength": fio.quantity(compton_wavelength(state.consts), "m"),
        },
        residuals=None,
        provenance=fio.provenance(state.consts),
    )
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    fio.write_field_csv(table, out / "field.csv")
    fio.write_heatmap(table, "rho_rel", out / "rho.ppm")
    fio.write_quiver_svg(table, out / "current.svg", stride=args.stride)
    fio.write_manifest(manifest, out / "manifest.json")
    print(f"t_c = {state.t_c:.6e} s  width ratio = {float(pk.width_ratio(state, args.t)):.6f}  -> {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = vf.Tolerances(**{name: getattr(args, f"tol_{name}") for name in vf.Tolerances.__dataclass_fields__})
    if args.target == "well":
        state = wl.solve_ground(wl.WellConfig(args.L))
        checks = vf.well_checks(state, args.grids, tol, args.seed, args.gordon_points, args.order)
        config = {"target": "well", "L": fio.quantity(args.L, "m")}
        consts = state.consts
    else:
        state = pk.prepare(pk.PacketConfig(args.d))
        checks = vf.packet_checks(state, args.grids, tol, args.seed, args.nodes, args.points, args.gordon_points)
        config = {"target": "packet", "d": fio.quantity(args.d, "m"), "nodes": args.nodes, "points": args.points}
        consts = state.consts
    config.update({"command": "verify", "grids": args.grids, "seed": args.seed, "gordon_points": args.gordon_points})
    manifest = fio.ObservablesManifest(
        config=config,
        scalars={},
        residuals={c.name: c.detail.get("reports") for c in checks if "reports" in c.detail},
        checks=[c.as_dict() for c in checks],
        provenance=fio.provenance(consts),
    )
    args.out.mkdir(parents=True, exist_ok=True)
    fio.write_manifest(manifest, args.out / "verification.json")
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        for c in failed:
            print(f"verification failed: {c.name} = {c.value!r}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_observables(args) -> int:
    state = wl.solve_ground(wl.WellConfig(args.L))
    scalars = well_observables(state, args.order)
    scalars["rest_energy"] = fio.quantity(rest_energy(state.consts), "J")
    if args.json:
        sys.stdout.write(fio.dumps_manifest({"L": fio.quantity(args.L, "m"), "observables": scalars}))
        return EXIT_OK
    width = max(len(k) for k in scalars)
    for key, q in scalars.items():
        value = q["value"]
        text = ", ".join(f"{v:.10e}" for v in value) if isinstance(value, list) else f"{value:.10e}"
        print(f"{key:<{width}}  {text}  {q['unit']}")
    return EXIT_OK


COMMANDS = {"well": cmd_well, "packet": cmd_packet, "verify": cmd_verify, "observables": cmd_observables}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"wavespin {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"wavespin {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
