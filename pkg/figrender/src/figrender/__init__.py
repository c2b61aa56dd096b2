"""Figure renderer for the multimode-qed CSV outputs."""

from .recipes import FigureRecipe, MissingInputError, RECIPES, render

__all__ = ["FigureRecipe", "MissingInputError", "RECIPES", "render"]
__version__ = "0.1.0"
