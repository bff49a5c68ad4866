"""Command-line front end.

One command per process; every command reads a JSON config (exact ChainConfig
field names, with the drive amplitude under the key "lambda"), writes CSV for
array data and JSON for structured results into --out, and closes the run by
appending to the directory's run manifest. Exit codes: 0 success (physics
markers such as a closed gap are data, not errors), 2 config error, 3
regime/validity error, 4 numeric failure.

Scan loops honor KERRCHAIN_THREADS for concurrent per-point evaluation; the
points are independent and all output writing stays serialized at the end.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, bands, bdg, edge, fock
from .errors import (ConfigurationError, GapClosed, KerrChainError,
                     NumericalError, ValidityError)
from .model import Boundary, ChainConfig, classify_regime, derive_params
from .semiclassical import bulk_window, solve_newton, solve_obc_analytic, solve_pbc
from .serialize import (config_hash, verify_manifest, write_csv, write_json,
                        write_manifest)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_NUMERIC = 4


def _jsonable(value):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats to strings."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _parse_grid(spec: str) -> np.ndarray:
    """Grid spec: 'start:stop:count' or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"bad grid spec {spec!r}; "
                                     "expected start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(start, stop, count)
    return np.array([float(x) for x in spec.split(",")])


def _named(args, base: str) -> str:
    return f"{args.tag}_{base}" if getattr(args, "tag", "") else base


def _mapper():
    threads = int(os.environ.get("KERRCHAIN_THREADS", "1"))
    if threads > 1:
        pool = ThreadPoolExecutor(max_workers=threads)
        return pool.map
    return map


# --------------------------------------------------------------------------
# commands; each returns the list of files it wrote

def cmd_bands(cfg: ChainConfig, out: Path, args) -> list[Path]:
    grid_kind = (bands.BandGrid.EXACT_FBZ if args.grid == "exact"
                 else bands.BandGrid.DENSE)
    outputs = []

    def zak_entries(point_cfg, delta):
        entries = []
        for band in ("-", "+"):
            try:
                z = bands.zak_phase(point_cfg, band)
                entries.append({"band": band, "winding": z.winding,
                                "phase_accumulated": z.phase_accumulated,
                                "delta": z.delta})
            except GapClosed as exc:
                entries.append({"band": band, "delta": delta,
                                "marker": "GapClosed", "detail": str(exc)})
        return entries

    if args.delta_grid is None:
        bs = bands.band_structure(cfg, grid_kind, args.grid_points)
        path = out / _named(args, "bands.csv")
        write_csv(path, ["k", "e_minus", "e_plus", "re_jk", "im_jk",
                         "nu_minus", "nu_plus"],
                  zip(bs.k_values, bs.e_minus, bs.e_plus, bs.j_k.real,
                      bs.j_k.imag, bs.nu_minus, bs.nu_plus))
        outputs.append(path)
        d = derive_params(cfg)
        zpath = out / _named(args, "zak.json")
        write_json(zpath, {"entries": _jsonable(zak_entries(cfg, d.delta)),
                           "distinct_level_count": bs.distinct_level_count})
        outputs.append(zpath)
        return outputs

    deltas = _parse_grid(args.delta_grid)
    sweep_rows = []
    gap_rows = []
    zak_all = []
    for delta in deltas:
        point_cfg = cfg.at_delta(float(delta))
        bs = bands.band_structure(point_cfg, grid_kind, args.grid_points)
        for i in range(len(bs.k_values)):
            sweep_rows.append((delta, bs.k_values[i], bs.e_minus[i],
                               bs.e_plus[i], bs.j_k[i].real, bs.j_k[i].imag,
                               bs.nu_minus[i], bs.nu_plus[i]))
        em_pi, ep_pi = bands.dispersion(point_cfg, math.pi)
        em_0, ep_0 = bands.dispersion(point_cfg, 0.0)
        entries = zak_entries(point_cfg, float(delta))
        zak_all.extend(entries)
        windings = {e["band"]: e.get("winding") for e in entries}
        gap_rows.append((delta, float(ep_pi - em_pi), float(em_pi),
                         float(ep_pi), float(em_0), float(ep_0),
                         windings.get("-"), windings.get("+")))
    p1 = out / _named(args, "bands_sweep.csv")
    write_csv(p1, ["delta", "k", "e_minus", "e_plus", "re_jk", "im_jk",
                   "nu_minus", "nu_plus"], sweep_rows)
    p2 = out / _named(args, "gap_vs_delta.csv")
    write_csv(p2, ["delta", "gap", "e_pi_minus", "e_pi_plus", "e_0_minus",
                   "e_0_plus", "winding_minus", "winding_plus"], gap_rows)
    p3 = out / _named(args, "zak.json")
    write_json(p3, {"entries": _jsonable(zak_all)})
    return [p1, p2, p3]


def cmd_ground_state(cfg: ChainConfig, out: Path, args) -> list[Path]:
    if args.solver == "newton":
        profile = solve_newton(cfg)
    elif cfg.boundary is Boundary.PBC:
        profile = solve_pbc(cfg)
    else:
        profile = solve_obc_analytic(cfg)
    n = np.arange(1, cfg.n_cells + 1)
    p1 = out / _named(args, "profile.csv")
    write_csv(p1, ["n", "alpha_sq", "beta_sq"],
              zip(n, profile.alpha_sq, profile.beta_sq))
    d = derive_params(cfg)
    window = None
    if d.tau is not None:
        w = bulk_window(d, cfg.n_cells)
        window = {"n_lo": w.n_lo, "n_hi": w.n_hi, "empty": w.empty}
    p2 = out / _named(args, "profile.json")
    write_json(p2, _jsonable({
        "source": profile.source.value, "residual": profile.residual,
        "boundary": profile.boundary.value, "config_hash": config_hash(cfg),
        "derived": d.to_dict(), "bulk_window": window,
        "regime": classify_regime(cfg).value}))
    return [p1, p2]


def cmd_spectrum(cfg: ChainConfig, out: Path, args) -> list[Path]:
    deltas = _parse_grid(args.delta_grid)
    points = bdg.spectrum_vs_delta(cfg, deltas, fit=True, mapper=_mapper())
    rows = []
    edge_rows = []
    errors = []
    for pt in points:
        if pt.error is not None:
            errors.append({"delta": pt.delta, "error": pt.error})
            continue
        for rec in pt.records:
            rows.append((pt.delta, rec.index, rec.energy, rec.in_gap,
                         rec.xi_formula, rec.xi_fit, rec.weight_edge))
        em_pi, ep_pi, em_0, ep_0 = pt.edges
        edge_rows.append((pt.delta, em_pi, ep_pi, em_0, ep_0))
    p1 = out / _named(args, "spectrum.csv")
    write_csv(p1, ["delta", "level_index", "energy", "in_gap", "xi_formula",
                   "xi_fit", "weight_edge"], rows)
    p2 = out / _named(args, "band_edges.csv")
    write_csv(p2, ["delta", "e_minus_pi", "e_plus_pi", "e_minus_0",
                   "e_plus_0"], edge_rows)
    outputs = [p1, p2]
    if errors:
        p3 = out / _named(args, "scan_errors.json")
        write_json(p3, {"errors": _jsonable(errors)})
        outputs.append(p3)
    return outputs


def cmd_husimi(cfg: ChainConfig, out: Path, args) -> list[Path]:
    cell = fock.build_cell(cfg, args.cutoff)
    gs = fock.ground_state(cell)
    d = derive_params(cfg)
    range_ = args.range
    if range_ is None:
        range_ = 1.5 * math.sqrt(d.g_sq) if d.g_sq > 0 else 3.0
    slice_ = fock.husimi_slice(gs.vector, args.cutoff, range_,
                               args.resolution)
    verdict = fock.ring_detector(slice_)
    p1 = out / _named(args, "husimi.csv")
    rows = ((x, y, slice_.values[i, j])
            for i, x in enumerate(slice_.coords)
            for j, y in enumerate(slice_.coords))
    write_csv(p1, ["x", "y", "value"], rows)
    p2 = out / _named(args, "husimi.json")
    write_json(p2, _jsonable({
        "range": range_, "resolution": args.resolution, "cutoff": args.cutoff,
        "peaks": [{"x": x, "y": y, "value": v} for x, y, v in slice_.peaks],
        "verdict": {"kind": verdict.kind, "radius": verdict.radius,
                    "radius_diagonal": verdict.radius_diagonal,
                    "n_components": verdict.n_components,
                    "angular_coverage": verdict.angular_coverage},
        "ground_energy": gs.energy, "parity": list(gs.parity),
        "gap": gs.gap, "convergence_shift": gs.convergence_shift,
        "config_hash": config_hash(cfg)}))
    return [p1, p2]


def cmd_edge_scan(cfg: ChainConfig, out: Path, args) -> list[Path]:
    deltas = _parse_grid(args.delta_grid)
    analysis = edge.edge_scan(cfg, deltas)
    p1 = out / _named(args, "edge_analysis.json")
    write_json(p1, _jsonable({
        "omega_e_top": analysis.omega_e_top,
        "omega_e_top_numeric": analysis.omega_e_top_numeric,
        "omega_spur_leading": analysis.omega_spur.leading,
        "omega_spur_exact": analysis.omega_spur.exact,
        "delta_spur_analytic": analysis.delta_spur_analytic,
        "delta_spur_numeric": analysis.delta_spur_numeric,
        "delta_top": analysis.delta_top,
        "ssh_fit": analysis.ssh_fit,
        "delta_spur_curve": analysis.delta_spur_curve,
        "config_hash": config_hash(cfg)}))
    p2 = out / _named(args, "xi_vs_delta.csv")
    write_csv(p2, ["delta", "xi_topological", "xi_spurious", "source"],
              ((r.delta, r.xi_topological, r.xi_spurious, r.source)
               for r in analysis.xi_curves))
    return [p1, p2]


def cmd_derived(cfg: ChainConfig, out: Path, args) -> list[Path]:
    if args.mu_grid is None and args.delta_grid is None:
        p = out / _named(args, "derived.json")
        write_json(p, _jsonable({"config": cfg.to_dict(),
                                 "derived": derive_params(cfg).to_dict(),
                                 "regime": classify_regime(cfg).value}))
        return [p]
    mus = (_parse_grid(args.mu_grid) if args.mu_grid is not None
           else [derive_params(cfg).mu])
    deltas = (_parse_grid(args.delta_grid) if args.delta_grid is not None
              else [derive_params(cfg).delta or 0.0])
    rows = []
    for mu in mus:
        for delta in deltas:
            point = ChainConfig.from_ratios(
                float(mu), float(delta), omega=cfg.omega, lam=cfg.lam,
                eps_L=cfg.eps_L, n_cells=cfg.n_cells, boundary=cfg.boundary)
            d = derive_params(point)
            rows.append((mu, delta, d.g_sq, d.gbar_sq, d.tau, d.omega_h))
    p = out / _named(args, "derived.csv")
    write_csv(p, ["mu", "delta", "g_sq", "gbar_sq", "tau", "omega_h"], rows)
    return [p]


COMMANDS = {
    "bands": cmd_bands,
    "ground-state": cmd_ground_state,
    "spectrum": cmd_spectrum,
    "husimi": cmd_husimi,
    "edge-scan": cmd_edge_scan,
    "derived": cmd_derived,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrchain",
        description="Kerr resonator chain: equilibria, bands, invariants, "
                    "and edge modes")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--verify", action="store_true",
                       help="recompute outputs and compare hashes against "
                            "the recorded manifest")
        p.add_argument("--tag", default="",
                       help="output filename prefix; lets several runs of "
                            "one command share a directory and manifest")

    p = sub.add_parser("bands", help="band structure and winding invariant")
    common(p)
    p.add_argument("--grid", choices=["exact", "dense"], default="dense")
    p.add_argument("--grid-points", type=int, default=1024)
    p.add_argument("--delta-grid", default=None,
                   help="sweep delta: start:stop:count or comma list")

    p = sub.add_parser("ground-state", help="semiclassical equilibrium profile")
    common(p)
    p.add_argument("--solver", choices=["analytic", "newton"],
                   default="analytic")

    p = sub.add_parser("spectrum", help="open-chain spectrum over a delta grid")
    common(p)
    p.add_argument("--delta-grid", default="-1:1:41")

    p = sub.add_parser("husimi", help="single-cell ground state Husimi slice")
    common(p)
    p.add_argument("--cutoff", type=int, default=50)
    p.add_argument("--range", type=float, default=None)
    p.add_argument("--resolution", type=int, default=201)

    p = sub.add_parser("edge-scan", help="boundary-mode analysis over delta")
    common(p)
    p.add_argument("--delta-grid", default="-1:1:41")

    p = sub.add_parser("derived", help="derived adimensional parameters")
    common(p)
    p.add_argument("--mu-grid", default=None)
    p.add_argument("--delta-grid", default=None)

    return parser


def _run(args, argv) -> int:
    cfg = ChainConfig.from_json(args.config)
    out = Path(args.out)
    command = COMMANDS[args.command]

    if args.verify:
        with tempfile.TemporaryDirectory() as tmp:
            tmp_out = Path(tmp)
            fresh = command(cfg, tmp_out, args)
            problems = []
            recorded = {}
            manifest_path = out / "run_manifest.json"
            if not manifest_path.exists():
                print(f"verify: no manifest in {out}", file=sys.stderr)
                return EXIT_NUMERIC
            with open(manifest_path) as fh:
                manifest = json.load(fh)
            for run in manifest.get("runs", []):
                if run["command"] == args.command \
                        and run.get("tag", "") == args.tag:
                    recorded = {o["path"]: o["sha256"] for o in run["outputs"]}
            from .serialize import sha256_of
            for path in fresh:
                want = recorded.get(path.name)
                got = sha256_of(path)
                if want is None:
                    problems.append(f"{path.name}: not in manifest")
                elif want != got:
                    problems.append(f"{path.name}: hash mismatch")
            problems.extend(verify_manifest(out))
            if problems:
                for item in problems:
                    print(f"verify: {item}", file=sys.stderr)
                return EXIT_NUMERIC
            print("verify: ok")
            return EXIT_OK

    out.mkdir(parents=True, exist_ok=True)
    outputs = command(cfg, out, args)
    write_manifest(out, args.command, argv, cfg, outputs, tag=args.tag)
    for path in outputs:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return _run(args, argv)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NumericalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except KerrChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
