"""Renderers for run outputs: CSV tables and SVG figures."""

from src.renderers.csv_tables import read_rows, write_rows

__all__ = ["read_rows", "write_rows"]
