"""Drive the primary CLI to produce the single-manifest figure dataset.

The plotting layer talks to the physics package exclusively through its
command line and file formats; this module shells out to `kerrchain` with
tagged runs so that everything lands in one directory under one manifest.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

CLI = [sys.executable, "-m", "kerrchain.cli"]


def _config(path: Path, mu: float, delta: float, *, omega=1.0, lam=2.0,
            eps_l=0.02, n_cells=25, boundary="OBC", delta_lambda=0.0) -> Path:
    data = {"omega": omega, "lambda": lam, "eps_L": eps_l,
            "eps_1": mu * eps_l * (1.0 - delta),
            "eps_2": mu * eps_l * (1.0 + delta),
            "n_cells": n_cells, "boundary": boundary,
            "delta_lambda": delta_lambda}
    path.write_text(json.dumps(data, indent=1))
    return path


def _run(args: list[str]) -> None:
    proc = subprocess.run(CLI + args, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"kerrchain {' '.join(args)} failed "
                           f"({proc.returncode}):\n{proc.stderr}")


def build_dataset(out_dir: Path, fast: bool = False) -> Path:
    """Produce every input the figure recipes need; returns the manifest path.

    ``fast`` shrinks chain lengths, grids, and the Fock cutoff so the whole
    dataset builds in seconds (for tests); the default settings reproduce the
    reference figures at publication scale.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_dir = out_dir / "configs"
    cfg_dir.mkdir(exist_ok=True)

    n = 10 if fast else 25
    scan_grid = "-1:1:21" if fast else "-1:1:41"
    dense = "128" if fast else "1024"
    cutoff = "16" if fast else "50"
    resolution = "41" if fast else "201"
    par_grid = "0.05:0.95:10" if fast else "0.02:0.98:33"
    par_delta = "-0.95:0.95:11" if fast else "-0.95:0.95:33"

    out = ["--out", str(out_dir)]

    # closed-chain bands vs delta (fig3b)
    pbc = _config(cfg_dir / "pbc.json", 0.1, 0.5, boundary="PBC", n_cells=n)
    _run(["bands", str(pbc), *out, "--grid", "dense", "--grid-points", dense,
          f"--delta-grid={scan_grid}"])

    # correlation-length heatmap grid (figS2)
    _run(["derived", str(pbc), *out, "--mu-grid", par_grid,
          f"--delta-grid={par_delta}"])

    # equilibrium profiles (fig3a, figS1, figS5, figS7)
    profiles = [
        ("fig3a", 0.9, 0.5, 0.0, "analytic"),
        ("s1_mu010", 0.1, 0.5, 0.0, "analytic"),
        ("s1_mu050", 0.5, 0.5, 0.0, "analytic"),
        ("s1_mu090", 0.9, 0.5, 0.0, "analytic"),
        ("s5_dl0", 0.1, 1.0, 0.0, "newton"),
        ("s5_dl", 0.1, 1.0, 0.04, "newton"),
        ("s7_dl0", 0.1, -1.0, 0.0, "newton"),
        ("s7_dl", 0.1, -1.0, 0.04, "newton"),
    ]
    for tag, mu, delta, dl, solver in profiles:
        cfg = _config(cfg_dir / f"{tag}.json", mu, delta, n_cells=n,
                      delta_lambda=dl)
        if fast:
            solver = "newton"      # short chains are outside the closed form
        _run(["ground-state", str(cfg), *out, "--tag", tag,
              "--solver", solver])

    # open-chain spectra (fig3c/figS3, fig4a/figS4, figS6)
    s3 = _config(cfg_dir / "s3.json", 0.1, 0.5, n_cells=n)
    _run(["spectrum", str(s3), *out, "--tag", "s3",
          f"--delta-grid={scan_grid}"])
    s4 = _config(cfg_dir / "s4.json", 0.1, 0.5, n_cells=n, delta_lambda=0.04)
    _run(["spectrum", str(s4), *out, "--tag", "s4",
          f"--delta-grid={scan_grid}"])

    # boundary-mode analysis in the strong-drive convention
    # (fig4b, figS6, figS8, figS9)
    for tag, mu in (("mu005", 0.05), ("mu010", 0.1), ("mu020", 0.2)):
        cfg = _config(cfg_dir / f"{tag}.json", mu, 0.5, omega=0.0, lam=1.0,
                      n_cells=n, delta_lambda=0.02)
        _run(["edge-scan", str(cfg), *out, "--tag", tag,
              f"--delta-grid={scan_grid}"])

    # single-cell Husimi panels (fig2)
    for tag, lam, ratio in (("h_a", 0.0, 0.5), ("h_b", 2.0, 0.5),
                            ("h_c", 2.0, 1.0), ("h_d", 2.0, 1.5)):
        cfg = _config(cfg_dir / f"{tag}.json", ratio, -1.0, lam=lam, n_cells=2)
        _run(["husimi", str(cfg), *out, "--tag", tag, "--cutoff", cutoff,
              "--resolution", resolution])

    return out_dir / "run_manifest.json"
