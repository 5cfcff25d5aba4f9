from .render import FigureSpec, render, read_table

__all__ = ["FigureSpec", "render", "read_table"]
