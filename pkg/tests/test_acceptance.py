"""Exit criteria. Each test records one PASS/FAIL line, printed in the pytest summary."""

import filecmp
import json
import math
import time

import numpy as np
import pytest

from wavespin import cli, fields_io as fio, numerics as nm, packet as pk, verify as vf, well as wl
from wavespin.constants import DEFAULTS, compton_wavelength

pytestmark = pytest.mark.acceptance

REFERENCE_ETA = 3.033e-5
REFERENCE_TC = 8.638e-13
REFERENCE_COMPTON = 3.862e-13
GRIDS = (65, 129, 257)


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_01_geometric_factor(capsys, criterion):
    code, elapsed = _timed(lambda: cli.main(["observables", "--L", "10nm", "--json"]))
    eta = json.loads(capsys.readouterr().out)["observables"]["eta"]["value"]
    rel = abs(eta / REFERENCE_ETA - 1)
    criterion("1 geometric factor eta(10 nm)", code == 0 and rel <= 1e-3 and elapsed < 1.0,
              f"eta = {eta:.6e}, rel dev {rel:.2e}, {elapsed:.2f} s")


def test_02_decoherence_time(tmp_path, capsys, criterion):
    code, elapsed = _timed(lambda: cli.main(["packet", "--d", "10nm", "--out", str(tmp_path)]))
    capsys.readouterr()
    tc = json.loads((tmp_path / "manifest.json").read_text())["scalars"]["t_c"]["value"]
    rel = abs(tc / REFERENCE_TC - 1)
    criterion("2 decoherence time t_c(10 nm)", code == 0 and rel <= 5e-3 and elapsed < 1.0,
              f"t_c = {tc:.6e} s, rel dev {rel:.2e}, {elapsed:.2f} s")


def test_03_compton_wavelength(criterion):
    lc = compton_wavelength(DEFAULTS)
    rel = abs(lc / REFERENCE_COMPTON - 1)
    criterion("3 Compton wavelength", rel <= 1e-3, f"lambda_c = {lc:.6e} m, rel dev {rel:.2e}")


def test_04_spin_magnitude(criterion):
    def run():
        return [wl.spin_squared(wl.solve_ground(wl.WellConfig(L))) / (0.75 * DEFAULTS.hbar**2) - 1
                for L in (5e-9, 10e-9, 50e-9)]

    devs, elapsed = _timed(run)
    worst = max(abs(d) for d in devs)
    criterion("4 spin magnitude S^2 = 3/4 hbar^2", worst <= 1e-10 and elapsed < 5.0,
              f"max rel dev {worst:.2e}, {elapsed:.2f} s")


def test_05_spin_z(well10, criterion):
    sz = wl.spin_vector(well10)[2]
    closed = wl.spin_z_closed_form(well10)
    rel = abs(sz / closed - 1)
    deficit = DEFAULTS.hbar / 2 - sz
    drel = abs(deficit / (DEFAULTS.hbar * 2 * well10.eta**2 / (1 + 2 * well10.eta**2)) - 1)
    criterion("5 spin z-component and confinement deficit", rel <= 1e-12 and drel <= 1e-2,
              f"S_z rel dev {rel:.2e}, deficit/hbar {deficit / DEFAULTS.hbar:.4e} (rel dev {drel:.2e})")


def test_06_eigenvalue_relation(criterion):
    residuals = [wl.eigenvalue_residual(wl.solve_ground(wl.WellConfig(L))) for L in np.logspace(-10, -6, 10)]
    worst = max(abs(r) for r in residuals)
    criterion("6 eigenvalue relation over 10 widths", worst <= 1e-12, f"max rel residual {worst:.2e}")


def test_07_dirac_residual_convergence(well10, criterion):
    def run():
        well_reports = [nm.dirac_residual(wl.field(well10), wl.field_dt(well10), nm.GridSpec.square(well10.L, g))
                        for g in GRIDS]
        P = DEFAULTS.hbar * (2 * math.pi / 10e-9) * np.array([1.0, 2.0, 2.0]) / 3.0
        plane = [nm.dirac_residual(pk.plane_wave_field(P), pk.plane_wave_field_dt(P), nm.GridSpec.square(10e-9, g))
                 for g in GRIDS]
        return nm.convergence_order(well_reports), nm.convergence_order(plane)

    (w, p), elapsed = _timed(run)
    ok = all(abs(e.order - 2) <= 0.2 and e.monotone for e in (w, p)) and elapsed < 60
    criterion("7 Dirac residual order (well, plane wave)", ok,
              f"well {w.order:.3f}, plane wave {p.order:.3f}, {elapsed:.2f} s")


def test_08_gordon_identity(well10, packet10, criterion):
    rng = np.random.default_rng(8)
    L, d = well10.L, packet10.d
    hs_w, errs_w, terms = vf.gordon_sweep(wl.field(well10), wl.field_dt(well10),
                                          vf.interior_points(rng, 16, 0.8 * L), 0.0, L / 20)
    hs_p, errs_p, _ = vf.gordon_sweep(pk.field(packet10), pk.field_dt(packet10),
                                      vf.random_ball(rng, 16, 2 * d), 0.0, 0.1 * d)
    ow, op = nm.order_from_errors(hs_w, errs_w), nm.order_from_errors(hs_p, errs_p)
    scale = float(np.max(np.linalg.norm(terms.direct, axis=-1)))
    pol = float(np.max(np.abs(terms.polarization))) / scale
    ok = all(abs(o.order - 2) <= 0.2 and o.monotone for o in (ow, op)) and pol <= 1e-12
    criterion("8 Gordon identity", ok,
              f"order well {ow.order:.3f}, packet {op.order:.3f}; stationary polarization {pol:.1e} of scale")


def test_09_superposition_oracle(packet10, criterion):
    pts = vf.random_ball(np.random.default_rng(9), 1000, 3 * packet10.d)

    def run():
        return [vf.oracle_study(packet10, f * packet10.t_c, pts, nodes=24) for f in (0.0, 0.5, 1.0)]

    studies, elapsed = _timed(run)
    gap = max(s["one_minus_overlap"] for s in studies)
    ok = gap <= 1e-6 and all(s["monotone"] for s in studies) and elapsed < 60
    criterion("9 superposition oracle", ok, f"max 1 - overlap {gap:.1e}, monotone ladders, {elapsed:.2f} s")


def test_10_divergence_free_current(well10, criterion):
    L = well10.L
    rho_fn, j_fn = nm.current_fields(wl.field(well10))
    # x/y spacings differ so the discrete divergence does not cancel by symmetry
    reports = [nm.continuity_residual(rho_fn, j_fn, nm.GridSpec((-L, -0.75 * L), (L, 0.75 * L), (g, g)), 0.0)
               for g in GRIDS]
    est = nm.convergence_order(reports)
    pts = np.random.default_rng(10).uniform(-L, L, size=(10_000, 2))
    div = float(np.max(np.abs(wl.current_divergence(well10, pts[:, 0], pts[:, 1])))) / wl.divergence_scale(well10)
    ok = abs(est.order - 2) <= 0.2 and est.monotone and div <= 1e-10
    criterion("10 divergence-free well current", ok, f"continuity order {est.order:.3f}, analytic {div:.1e} of scale")


def test_11_velocity_bound(well10, criterion):
    X, Y, _ = nm.GridSpec.square(well10.L, 1001).mesh()
    vmax = float(np.nanmax(wl.velocity(well10, X, Y, corners="nan")))
    v0 = float(wl.velocity(well10, 0.0, 0.0))
    pts = np.random.default_rng(11).uniform(-0.999 * well10.L, 0.999 * well10.L, size=(10_000, 2))
    v = wl.velocity(well10, pts[:, 0], pts[:, 1])
    ref = wl.velocity_tan_form(well10, pts[:, 0], pts[:, 1])
    mask = ref > 0
    rel = float(np.max(np.abs(v[mask] / ref[mask] - 1)))
    ok = vmax < DEFAULTS.c and v0 == 0.0 and rel <= 1e-10
    criterion("11 velocity bound", ok, f"max v/c {vmax / DEFAULTS.c:.4f}, v(0,0) = {v0}, closed-form rel dev {rel:.1e}")


def _luminance(img):
    return img @ np.array([0.2126, 0.7152, 0.0722])


def test_12_figure_reproduction(tmp_path, capsys, criterion):
    assert cli.main(["well", "--L", "10nm", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    n, L = 201, 10e-9
    table = fio.read_field_csv(tmp_path / "field.csv", (n, n))
    c = n // 2

    rho_img = _luminance(read := fio.read_ppm(tmp_path / "rho.ppm").astype(float))
    rho_peak = np.unravel_index(np.argmax(table.grid("rho_rel")), (n, n)) == (c, c)
    rho_ok = rho_peak and rho_img[c, c] == rho_img.max() and read.shape == (n, n, 3)

    jmag = table.grid("jmag")
    crater = jmag[c, c] / jmag.max()
    jimg = _luminance(fio.read_ppm(tmp_path / "jmag.ppm").astype(float))
    crater_ok = crater < 1e-2 and jimg[c, c] == jimg.min() and jimg[c, c] < jimg.max()

    # electric current of a negative charge runs opposite to the particle flux;
    # circulation sense is asserted on the flux j/e
    shafts = np.array(fio.read_svg_arrows(tmp_path / "current.svg"))
    px, py = shafts[:, 0] - 300, 300 - shafts[:, 1]
    dx, dy = shafts[:, 2] - shafts[:, 0], shafts[:, 1] - shafts[:, 3]
    flux_lz = np.sign(DEFAULTS.e) * (px * dy - py * dx)
    ccw_ok = len(shafts) > 0 and bool(np.all(flux_lz > 0))

    X, Y, JX, JY = (table.grid(k) for k in ("x", "y", "jx", "jy"))
    worst = 0.0
    for sl, along_y in (((slice(None), 1), True), ((slice(None), n - 2), True),
                        ((1, slice(None)), False), ((n - 2, slice(None)), False)):
        s = Y[sl] if along_y else X[sl]
        keep = np.abs(s) <= 0.8 * L
        par, perp = (JY[sl], JX[sl]) if along_y else (JX[sl], JY[sl])
        worst = max(worst, float(np.degrees(np.max(np.arctan2(np.abs(perp), np.abs(par))[keep]))))
    criterion("12 figure reproduction", rho_ok and crater_ok and ccw_ok and worst <= 5.0,
              f"rho peak centred {rho_ok}, |j| centre/ring {crater:.1e}, "
              f"{len(shafts)} arrows counterclockwise (flux) {ccw_ok}, wall angle {worst:.2f} deg")


def test_13_packet_spreading(packet10, criterion):
    ratio = float(pk.width_ratio(packet10, packet10.t_c))
    mom = abs(vf.numeric_variance(packet10, packet10.t_c) / float(pk.width_variance(packet10, packet10.t_c)) - 1)
    dev = abs(ratio - math.sqrt(2))
    criterion("13 packet spreading", dev <= 1e-3 and mom <= 1e-6,
              f"width ratio {ratio:.6f} (|dev| {dev:.1e}), numeric moment rel dev {mom:.1e}")


COMMANDS = [
    ["well", "--L", "10nm", "--grid", "101"],
    ["packet", "--d", "10nm", "--t", "4e-13", "--grid", "101"],
    ["observables", "--L", "10nm", "--json"],
    ["verify", "well", "--L", "10nm"],
    ["verify", "packet", "--d", "10nm", "--points", "100", "--grids", "33,65,129"],
]


def _run_tree(argv, root, capsys, monkeypatch):
    # identical flags, including the relative output path, in a fresh working directory
    root.mkdir()
    monkeypatch.chdir(root)
    extra = [] if argv[0] == "observables" else ["--out", "out"]
    code = cli.main(argv + extra)
    (root / "stdout.txt").write_text(capsys.readouterr().out)
    return code


def _identical(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(_identical(a / s, b / s) for s in cmp.common_dirs)


def test_14_determinism(tmp_path, capsys, monkeypatch, criterion):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    results = []
    for i, argv in enumerate(COMMANDS):
        a, b = tmp_path / f"{i}a", tmp_path / f"{i}b"
        codes = (_run_tree(argv, a, capsys, monkeypatch), _run_tree(argv, b, capsys, monkeypatch))
        results.append((argv[0], codes, _identical(a, b)))
    ok = all(same and codes == (0, 0) for _, codes, same in results)
    criterion("14 determinism", ok, ", ".join(f"{name}: {'identical' if same else 'DIFFERS'}"
                                              for name, _, same in results))
