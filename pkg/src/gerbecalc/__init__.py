"""Exact Cech-simplicial calculus on finite semi-simplicial sets.

Subpackages are organized by layer: abelian (integer linear algebra),
delta_set (combinatorial spaces and the simplicial oracle), covers
(covers, locally split maps, towers), cech (cochains and their calculus),
multicomplex (grids and zig-zag descent), and the gerbe / bigerbe /
multigerbe modules on top.  `cli` is the command-line surface.
"""

__version__ = "0.1.0"
