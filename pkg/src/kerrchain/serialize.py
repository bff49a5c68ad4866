"""Deterministic CSV/JSON serialization and run manifests.

Floats are written with 17 significant digits so every CSV body round-trips
exactly and identical runs are byte-identical (the manifest timestamp is the
only run-dependent output, and it lives outside the hashed files).

A run manifest per output directory records, for each command invocation,
the echoed config, derived parameters, and a sha256 per output file; repeated
commands into the same directory merge into the single manifest file so one
multi-command data run is closed by one manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

from . import __version__
from .model import ChainConfig, derive_params

MANIFEST_NAME = "run_manifest.json"


def fmt(value) -> str:
    """Serialize one CSV cell: floats at 17 significant digits, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(cfg: ChainConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out_dir: Path, command: str, argv: list[str],
                   cfg: ChainConfig, outputs: list[Path],
                   tag: str = "") -> Path:
    """Append this run's record to the directory manifest (written last, after
    every listed output exists). Runs are keyed by (command, tag) so tagged
    re-runs of one command coexist in a single manifest."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    manifest = {"tool": "kerrchain", "version": __version__, "runs": []}
    if manifest_path.exists():
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    run = {
        "command": command,
        "tag": tag,
        "argv": argv,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "derived": derive_params(cfg).to_dict(),
        "outputs": [{"path": p.name, "sha256": sha256_of(p)} for p in outputs],
    }
    manifest["runs"] = [r for r in manifest["runs"]
                        if (r["command"], r.get("tag", "")) != (command, tag)]
    manifest["runs"].append(run)
    manifest["version"] = __version__
    write_json(manifest_path, manifest)
    return manifest_path


def verify_manifest(out_dir: Path) -> list[str]:
    """Recompute hashes of every file listed in the manifest; return a list of
    mismatch descriptions (empty means verified)."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    if not manifest_path.exists():
        return [f"no manifest at {manifest_path}"]
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    problems = []
    for run in manifest.get("runs", []):
        for out in run["outputs"]:
            path = out_dir / out["path"]
            if not path.exists():
                problems.append(f"{run['command']}: missing {out['path']}")
            elif sha256_of(path) != out["sha256"]:
                problems.append(f"{run['command']}: hash mismatch {out['path']}")
    return problems
