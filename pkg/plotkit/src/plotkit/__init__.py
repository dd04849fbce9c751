"""Render figures from flocklab run directories.

Strictly downstream of the CSV/JSON contract: this package never imports the
simulator and never recomputes dynamics.
"""

__version__ = "0.1.0"

from .figures import FIGURE_IDS, FigureSpec, MissingInputError, ParseError, render

__all__ = ["FIGURE_IDS", "FigureSpec", "MissingInputError", "ParseError", "render"]
