"""Square-tiled surfaces, cyclic covers, and the linear algebra around them.

The package is organized around a small pipeline: load a square-tiled
surface, enumerate its PSL(2,Z)-orbit, build cyclic covers, compute the
monodromy of the orbit graph on homology eigenspaces, and evaluate both
exact Lyapunov-sum formulas and Monte-Carlo exponent estimates.
"""

from .cyclotomic import CycloNum, CycloMatrix, CycloPoly, IntPoly, ZETA, ONE, ZERO
from .surface import SquareTiledSurface, Stratum, OrbitGraph, load_surface, psl2z_orbit
from .cover import BranchData, CoveringSurface, cyclic_cover

__all__ = [
    "CycloNum", "CycloMatrix", "CycloPoly", "IntPoly", "ZETA", "ONE", "ZERO",
    "SquareTiledSurface", "Stratum", "OrbitGraph", "load_surface", "psl2z_orbit",
    "BranchData", "CoveringSurface", "cyclic_cover",
]
