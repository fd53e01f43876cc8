"""Cyclic covers of genus-zero square-tiled surfaces.

A degree-d cover branched over a chosen set of vertices is produced by
solving for a sheet cocycle on the gluings: crossing a gluing from its
first slot to its second adds the cocycle value (mod d) to the sheet
index, and the total around each vertex must equal the prescribed
residue, +1 at branch vertices and 0 elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from . import zlinalg
from .surface import (CORNER_EXIT, Gluing, SquareTiledSurface, Stratum,
                      SurfaceError, stratum)


@dataclass
class BranchData:
    base: SquareTiledSurface
    branch_vertices: tuple      # vertex ids, as ordered by corner_cycles()
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("cover degree must be at least 2")
        if len(self.branch_vertices) % self.d:
            raise ValueError(
                f"degree {self.d} must divide the number of branch points "
                f"({len(self.branch_vertices)})")
        if self.base.genus() != 0:
            raise ValueError("the base surface must have genus zero")


@dataclass
class CoveringSurface:
    total: SquareTiledSurface
    deck: list                  # permutation of the squares, order d
    cocycle: list               # value in Z/d per gluing of the base
    base: SquareTiledSurface
    d: int

    def to_json(self):
        out = self.total.to_json()
        out["deck"] = list(self.deck)
        out["cocycle"] = list(self.cocycle)
        return out


def singular_vertices(surface: SquareTiledSurface):
    """Vertex ids with cone angle different from 2*pi."""
    return tuple(i for i, cyc in enumerate(surface.corner_cycles())
                 if len(cyc) != 4)


def _vertex_holonomy_rows(surface: SquareTiledSurface):
    """Rows of the holonomy map: crossing counts of each gluing per vertex."""
    cycles = surface.corner_cycles()
    rows = []
    for cyc in cycles:
        row = [0] * len(surface.gluings)
        for (s, corner) in cyc:
            side = CORNER_EXIT[corner]
            gi = surface.slot_to_gluing[(s, side)]
            g = surface.gluings[gi]
            row[gi] += 1 if g.a == (s, side) else -1
        rows.append(row)
    return rows


def cyclic_cover(branch: BranchData) -> CoveringSurface:
    """Build the degree-d cyclic cover branched over the chosen vertices."""
    base, d = branch.base, branch.d
    n_vertices = len(base.corner_cycles())
    for v in branch.branch_vertices:
        if not 0 <= v < n_vertices:
            raise ValueError(f"branch vertex {v} out of range")
    residues = [1 if v in set(branch.branch_vertices) else 0
                for v in range(n_vertices)]
    rows = _vertex_holonomy_rows(base)
    cocycle = zlinalg.solve_mod(rows, residues, d)
    if cocycle is None:
        raise SurfaceError("holonomy system for the cover is unsolvable")
    # sheets: square (s, k) is index s + n*k
    n = base.n
    total_gluings = []
    for gi, g in enumerate(base.gluings):
        c = cocycle[gi]
        for k in range(d):
            a = (g.a[0] + n * k, g.a[1])
            b = (g.b[0] + n * ((k + c) % d), g.b[1])
            total_gluings.append(Gluing(a, b, g.flip))
    total = SquareTiledSurface(n * d, total_gluings)
    deck = [(s % n) + n * ((s // n + 1) % d) for s in range(n * d)]
    cover = CoveringSurface(total, deck, [c % d for c in cocycle], base, d)
    _check_cover(cover, branch)
    return cover


def _check_cover(cover: CoveringSurface, branch: BranchData):
    total, base, d = cover.total, cover.base, cover.d
    # deck transformation: order d, no fixed squares, gluing-equivariant
    perm = cover.deck
    orbit = list(range(total.n))
    power = list(range(total.n))
    for step in range(1, d + 1):
        power = [perm[x] for x in power]
        if step < d:
            assert all(power[x] != x for x in range(total.n)), \
                "deck transformation has fixed squares"
    assert power == orbit, "deck transformation has wrong order"
    for g in total.gluings:
        img = ((perm[g.a[0]], g.a[1]), (perm[g.b[0]], g.b[1]))
        gi = total.slot_to_gluing[img[0]]
        g2 = total.gluings[gi]
        assert {g2.a, g2.b} == set(img) and g2.flip == g.flip, \
            "deck transformation does not preserve the gluing"
    # Riemann-Hurwitz
    chi_total = total.euler_characteristic()
    chi_base = base.euler_characteristic()
    assert chi_total == d * chi_base - (d - 1) * len(branch.branch_vertices), \
        "Riemann-Hurwitz identity fails"


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def eigenspace_profile(n: int, d: int, k: int):
    """Dimension and signature of the k-th deck eigenspace of the cover.

    The signature brackets are ceilings: (ceil(nk/d)-1, ceil(n(1-k/d))-1);
    the dimension is n-2 when d divides kn and n-1 otherwise.  The pair
    (p, q) is asserted to sum to the dimension.
    """
    if not 1 <= k <= d - 1:
        raise ValueError("need 1 <= k <= d-1")
    if n < 4:
        raise ValueError("need n >= 4")
    dim = n - 2 if (k * n) % d == 0 else n - 1
    p = ceil(Fraction(n * k, d)) - 1
    q = ceil(n * (1 - Fraction(k, d))) - 1
    assert p + q == dim, f"signature ({p},{q}) does not sum to dim {dim}"
    return {"dim": dim, "signature": (p, q)}


def cover_stratum(n: int, d: int) -> Stratum:
    """Stratum of the cyclic cover of Q(n-5, -1^(n-1)) branched everywhere."""
    if d < 2 or n % d or n < 5:
        raise ValueError("need d >= 2, d | n, n >= 5")
    if d % 2:
        orders = [d * (n - 3) - 2] + [d - 2] * (n - 1)
        kind = "quadratic"
    else:
        orders = [d * (n - 3) // 2 - 1] + [d // 2 - 1] * (n - 1)
        kind = "abelian"
    orders = [o for o in orders if o]
    total = sum(orders)
    genus = (total + 4) // 4 if kind == "quadratic" else (total + 2) // 2
    expected = 4 * genus - 4 if kind == "quadratic" else 2 * genus - 2
    assert total == expected
    return Stratum(kind, tuple(sorted(orders, reverse=True)), genus)


def sv_factor(d: int) -> Fraction:
    """Ratio of the cover's area Siegel-Veech constant to the base one."""
    if d <= 2:
        raise ValueError("need d > 2")
    return Fraction(1, d) if d % 2 else Fraction(4, d)


def carea_genus0(st: Stratum) -> Fraction:
    """(pi^2/3) * c_area for a genus-zero quadratic stratum, exact."""
    if st.genus != 0 or st.kind != "quadratic":
        raise ValueError("closed form only holds in genus zero")
    return -Fraction(1, 24) * sum(Fraction(dj * (dj + 4), dj + 2)
                                  for dj in st.orders)


def carea_cover(n: int, d: int) -> Fraction:
    """(pi^2/3) * c_area of the degree-d cover of Q(n-5, -1^(n-1))."""
    if d <= 2 or n % d:
        raise ValueError("need d > 2 and d | n")
    k = 1 if d % 2 else 4
    return Fraction(k, 12 * d) * Fraction((n - 1) * (n - 2), n - 3)
