"""Write the well and packet figure sets (PPM heatmaps, SVG quivers) under one directory.

    python scripts/reproduce_figures.py --out figures
"""

import argparse
from pathlib import Path

from wavespin import cli, packet as pk


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("figures"))
    parser.add_argument("--L", default="10nm")
    parser.add_argument("--d", default="10nm")
    args = parser.parse_args()

    t_c = pk.prepare(pk.PacketConfig(cli.parse_length(args.d))).t_c
    runs = {
        "well": ["well", "--L", args.L, "--grid", "201"],
        "packet_t0": ["packet", "--d", args.d, "--t", "0"],
        "packet_tc": ["packet", "--d", args.d, "--t", repr(t_c)],
    }
    for name, argv in runs.items():
        code = cli.main(argv + ["--out", str(args.out / name)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
