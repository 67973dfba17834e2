from .render import (EmptyInputError, FigureSpec, SchemaError,
                     render_sweep_figure, render_training_curves)

__version__ = "0.1.0"

__all__ = ["EmptyInputError", "FigureSpec", "SchemaError",
           "render_sweep_figure", "render_training_curves", "__version__"]
