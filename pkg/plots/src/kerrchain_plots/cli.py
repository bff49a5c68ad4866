"""Script entry point: render figure analogues from a run manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .recipes import RECIPES, MissingInputs
from .render import render, render_all


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kerrchain-plots",
        description="Render figure analogues from kerrchain CSV/JSON outputs")
    parser.add_argument("manifest", help="path to a run_manifest.json")
    parser.add_argument("recipe",
                        help=f"recipe id or 'all' ({', '.join(sorted(RECIPES))})")
    parser.add_argument("out_dir", help="directory for PNG/SVG output")
    parser.add_argument("--build-dataset", action="store_true",
                        help="invoke the kerrchain CLI first to produce the "
                             "dataset next to the manifest path")
    args = parser.parse_args(argv)

    manifest = Path(args.manifest)
    if args.build_dataset:
        from .dataset import build_dataset
        manifest = build_dataset(manifest.parent)

    try:
        if args.recipe == "all":
            written = render_all(manifest, Path(args.out_dir))
            for recipe_id, paths in written.items():
                for path in paths:
                    print(path)
        else:
            for path in render(args.recipe, manifest, Path(args.out_dir)):
                print(path)
    except MissingInputs as exc:
        print(f"missing inputs: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
