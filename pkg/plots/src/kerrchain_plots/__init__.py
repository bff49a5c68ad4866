"""Figure analogues rendered from kerrchain CLI output files.

This package never recomputes physics: every recipe reads CSV/JSON files
declared in a run manifest and draws them. Deleting it leaves the primary
package fully functional.
"""

__version__ = "0.1.0"

from .recipes import RECIPES, FigureRecipe, MissingInputs
from .render import render
