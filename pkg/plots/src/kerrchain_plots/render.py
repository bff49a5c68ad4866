"""Resolve recipe inputs against a run manifest and draw the figures.

Recipes only see files that the manifest declares: a stray file in the
directory that no run produced is invisible, and a declared-but-deleted file
counts as missing. Rendering is strictly read-only over the primary outputs.
"""

from __future__ import annotations

import fnmatch
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .recipes import RECIPES, FigureRecipe, MissingInputs  # noqa: E402


def load_manifest(manifest_path: Path) -> dict:
    with open(manifest_path) as fh:
        return json.load(fh)


def declared_files(manifest: dict, base_dir: Path) -> list[Path]:
    names = {out["path"] for run in manifest.get("runs", [])
             for out in run["outputs"]}
    return [base_dir / name for name in sorted(names)]


def resolve_inputs(recipe: FigureRecipe, manifest: dict,
                   base_dir: Path) -> dict:
    available = declared_files(manifest, base_dir)
    resolved: dict = {"__manifest__": manifest}
    unmet = []
    for pattern in recipe.inputs:
        matches = [p for p in available
                   if fnmatch.fnmatch(p.name, pattern) and p.exists()]
        if not matches:
            unmet.append(pattern)
        resolved[pattern] = matches
    if unmet:
        raise MissingInputs(recipe.figure_id, unmet)
    return resolved


def render(recipe_id: str, manifest_path: Path, out_dir: Path) -> list[Path]:
    """Render one recipe to PNG and SVG; returns the written paths."""
    if recipe_id not in RECIPES:
        raise KeyError(f"unknown recipe {recipe_id!r}; "
                       f"known: {', '.join(sorted(RECIPES))}")
    recipe = RECIPES[recipe_id]
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    files = resolve_inputs(recipe, manifest, manifest_path.parent)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig = plt.figure(figsize=(7.0, 5.0), dpi=110)
    try:
        recipe.draw(files, fig)
        written = []
        for suffix in (".png", ".svg"):
            target = out_dir / f"{recipe_id}{suffix}"
            fig.savefig(target, bbox_inches="tight")
            written.append(target)
    finally:
        plt.close(fig)
    return written


def render_all(manifest_path: Path, out_dir: Path) -> dict[str, list[Path]]:
    """Render every known recipe; raises on the first missing input."""
    return {recipe_id: render(recipe_id, manifest_path, out_dir)
            for recipe_id in sorted(RECIPES)}
