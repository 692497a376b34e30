"""Residual tables for the well and packet over a ladder of grids, with fitted orders.

    python scripts/convergence_study.py --grids 33,65,129,257,513
"""

import argparse

from wavespin import numerics as nm, packet as pk, well as wl


def table(title, reports):
    print(title)
    print(f"  {'h (m)':>12}  {'L2':>12}  {'relative':>10}")
    for r in reports:
        print(f"  {r.h:12.4e}  {r.l2:12.4e}  {r.relative:10.3e}")
    est = nm.convergence_order(reports)
    print(f"  observed order {est.order:.3f} (monotone: {est.monotone})\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grids", default="33,65,129,257")
    parser.add_argument("--L", type=float, default=10e-9)
    parser.add_argument("--d", type=float, default=10e-9)
    args = parser.parse_args()
    grids = [int(g) for g in args.grids.split(",")]

    s = wl.solve_ground(wl.WellConfig(args.L))
    table("well: Dirac residual", [nm.dirac_residual(wl.field(s), wl.field_dt(s), nm.GridSpec.square(args.L, g))
                                   for g in grids])
    rho_fn, j_fn = nm.current_fields(wl.field(s))
    L = args.L
    table("well: continuity residual (x/y spacings differ)",
          [nm.continuity_residual(rho_fn, j_fn, nm.GridSpec((-L, -0.75 * L), (L, 0.75 * L), (g, g))) for g in grids])

    p = pk.prepare(pk.PacketConfig(args.d))
    t = p.t_c / 2
    plane = [nm.GridSpec.square(4 * args.d, g) for g in grids]
    table("packet: Dirac residual at t_c/2", [nm.dirac_residual(pk.field(p), pk.field_dt(p), g, t) for g in plane])
    rho_fn, j_fn = nm.current_fields(pk.field(p))
    table("packet: continuity residual at t_c/2",
          [nm.continuity_residual(rho_fn, j_fn, g, t, 1e-4 * p.t_c) for g in plane])


if __name__ == "__main__":
    main()
