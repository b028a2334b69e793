"""Mullins-Sekerka interface dynamics with an implicit boundary integral
Laplace solver on level set grids."""

__version__ = '0.1.0'
