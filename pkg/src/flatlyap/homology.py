"""Integer homology of square-tiled surfaces and the orbit monodromy.

Each surface is triangulated by cutting every square along a diagonal;
homology, the intersection form (via the simplicial cup product and
Poincare duality) and all induced maps are computed exactly over Z.
The generators h and r act by explicit chain maps: r is a relabeling,
while h shears and re-cuts.  In the chart of the sheared surface the old
vertical edges become the diagonals of the new squares and the old
antidiagonals become the new vertical edges, so a chain map defined on
the antidiagonal triangulation is cellular on the nose.

Deck eigenspace computations happen over the cube-root-of-unity field;
restricted monodromy matrices preserve the pseudo-Hermitian form
(z - z^2) * Omega(v, conj w) exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import zlinalg
from .cyclotomic import (CycloMatrix, CycloNum, CycloPoly, I_SQRT3, ONE,
                         UNIT_SCALARS, ZERO, complex_embed, galois_norm,
                         is_cyclotomic, sqrt_rational, wedge_square,
                         zeta_integral_kernel, zeta_power_of_order)
from .surface import (CORNER_EXIT, CORNER_POS, SIDE_CCW, VERTICAL,
                      QUARTER_SIDE, PI_SIDE, RecutData, SquareTiledSurface,
                      _phi_region, _row_of, as_deck_pair, canonical_form,
                      quarter_rotate, region_of_slot, shear_recut,
                      _transport_deck_shear)

# oriented new-chart segment -> cell of the diagonal-cut complex
_SEGMENT_CELL = {}
for _side, (_c0, _c1) in SIDE_CCW.items():
    _SEGMENT_CELL[(CORNER_POS[_c0], CORNER_POS[_c1])] = (_side, 1)
    _SEGMENT_CELL[(CORNER_POS[_c1], CORNER_POS[_c0])] = (_side, -1)
_SEGMENT_CELL[((0, 0), (1, 1))] = ("cut", 1)
_SEGMENT_CELL[((1, 1), (0, 0))] = ("cut", -1)


class CellComplex:
    """Triangulated cell complex of a square-tiled surface.

    ``cuts`` maps each square to "d" (diagonal BL-TR, the default) or "a"
    (antidiagonal BR-TL).  Edges are the glued side pairs followed by one
    cut edge per square; a gluing edge is oriented counterclockwise as seen
    from its lexicographically first slot.  Homology data is built lazily.
    """

    def __init__(self, surface: SquareTiledSurface, cuts=None):
        self.surface = surface
        self.cuts = dict(cuts) if cuts else {s: "d" for s in range(surface.n)}
        self.n_gluings = len(surface.gluings)
        self.n_edges = self.n_gluings + surface.n
        self.rep_slot = [min(g.a, g.b) for g in surface.gluings]
        self.vertex_of_corner = surface.vertex_of_corner()
        self.n_vertices = 1 + max(self.vertex_of_corner.values())
        self._build_triangles()
        self._hom = None

    # -- chains ------------------------------------------------------------

    def slot_coef(self, slot):
        """(edge, coef) of the slot's side traversed counterclockwise."""
        gi = self.surface.slot_to_gluing[slot]
        return gi, 1 if self.rep_slot[gi] == slot else -1

    def cut_edge(self, square):
        return self.n_gluings + square

    def edge_endpoints(self, e):
        """(tail vertex, head vertex) of the canonical orientation."""
        if e < self.n_gluings:
            s, side = self.rep_slot[e]
            c0, c1 = SIDE_CCW[side]
        else:
            s = e - self.n_gluings
            c0, c1 = ("BL", "TR") if self.cuts[s] == "d" else ("BR", "TL")
        return (self.vertex_of_corner[(s, c0)], self.vertex_of_corner[(s, c1)])

    def _build_triangles(self):
        tris = []
        for s in range(self.surface.n):
            b = self.slot_coef((s, "B"))
            r = self.slot_coef((s, "R"))
            t = self.slot_coef((s, "T"))
            l = self.slot_coef((s, "L"))
            cut = (self.cut_edge(s), 1)
            if self.cuts[s] == "d":
                # [BL,BR,TR] and [BL,TR,TL]
                tris.append({"f01": b, "f12": r, "f02": cut})
                tris.append({"f01": cut, "f12": t, "f02": (l[0], -l[1])})
            else:
                # [BL,BR,TL] and [BR,TR,TL]
                tris.append({"f01": b, "f12": cut, "f02": (l[0], -l[1])})
                tris.append({"f01": r, "f12": t, "f02": cut})
        self.triangles = tris

    def boundary2_column(self, t):
        tri = self.triangles[t]
        col = [0] * self.n_edges
        for key, sign in (("f01", 1), ("f12", 1), ("f02", -1)):
            e, c = tri[key]
            col[e] += sign * c
        return col

    # -- homology ------------------------------------------------------------

    def _homology(self):
        if self._hom is not None:
            return self._hom
        ne, nv = self.n_edges, self.n_vertices
        d1 = [[0] * ne for _ in range(nv)]
        for e in range(ne):
            tail, head = self.edge_endpoints(e)
            d1[head][e] += 1
            d1[tail][e] -= 1
        kernel = zlinalg.kernel_basis(d1)   # list of columns
        z = len(kernel)
        k1 = [[kernel[j][i] for j in range(z)] for i in range(ne)]  # ne x z
        d2_cols = [self.boundary2_column(t) for t in range(len(self.triangles))]
        x = zlinalg.qsolve(k1, [list(col) for col in zip(*d2_cols)])
        assert x is not None, "a 2-cell boundary is not a 1-cycle"
        assert all(v.denominator == 1 for row in x for v in row)
        x = [[int(v) for v in row] for row in x]
        d, u, _v = zlinalg.smith_normal_form(x)
        assert all(di == 1 for di in d), "torsion in H1 of an oriented surface"
        r = len(d)
        assert r == len(self.triangles) - 1, "unexpected rank of the 2-boundary"
        uinv = zlinalg.inverse_unimodular(u)
        basis = []
        for j in range(r, z):
            y = [uinv[i][j] for i in range(z)]
            basis.append(zlinalg.matvec(k1, y))
        # left inverse of k1, for fast projection of cycles
        k1t = zlinalg.transpose(k1)
        ident = [[int(i == j) for j in range(z)] for i in range(z)]
        pt = zlinalg.qsolve(k1t, ident)
        assert pt is not None
        p = zlinalg.transpose(pt)           # z x ne, Fractions
        self._hom = {"k1": k1, "u": u, "rank2": r, "betti": z - r,
                     "basis": basis, "proj": p}
        return self._hom

    @property
    def betti(self):
        return self._homology()["betti"]

    @property
    def basis_cycles(self):
        return self._homology()["basis"]

    def project(self, chain):
        """Coordinates of a 1-cycle in the homology basis."""
        hom = self._homology()
        y = [sum(pi * c for pi, c in zip(row, chain) if c) for row in hom["proj"]]
        assert all(v.denominator == 1 for v in y), "chain is not an integer cycle"
        y = [int(v) for v in y]
        check = zlinalg.matvec(hom["k1"], y)
        assert check == list(chain), "chain is not a cycle"
        w = zlinalg.matvec(hom["u"], y)
        return w[hom["rank2"]:]

    def _edge_end_at(self, slot, corner):
        """Which end (0 = tail, 1 = head) of a gluing edge sits at a corner."""
        gi = self.surface.slot_to_gluing[slot]
        g = self.surface.gluings[gi]
        rep = self.rep_slot[gi]
        c0, c1 = SIDE_CCW[rep[1]]
        if slot == rep:
            tail, head = c0, c1
        else:
            tail = g.corner_image(rep, c0)[1]
            head = g.corner_image(rep, c1)[1]
        if corner == tail:
            return 0
        assert corner == head
        return 1

    def _vertex_rotations(self):
        """Counterclockwise cyclic order of edge ends around each vertex.

        An end is (edge, 0|1).  Within one corner the cut end (when the cut
        touches that corner) precedes the exit side end, matching the
        angular order of the rays inside the square.
        """
        rotations = []
        for cyc in self.surface.corner_cycles():
            ends = []
            for (s, corner) in cyc:
                cut_corners = ("BL", "TR") if self.cuts[s] == "d" else ("BR", "TL")
                if corner == cut_corners[0]:
                    ends.append((self.cut_edge(s), 0))
                elif corner == cut_corners[1]:
                    ends.append((self.cut_edge(s), 1))
                side = CORNER_EXIT[corner]
                ends.append((self.surface.slot_to_gluing[(s, side)],
                             self._edge_end_at((s, side), corner)))
            rotations.append(ends)
        return rotations

    @property
    def omega(self):
        """Intersection form on the homology basis (exact, unimodular).

        A spanning tree of the 1-skeleton is contracted inside the ribbon
        structure; the intersection number of the remaining loop edges is
        the signed interleaving of their ends in the single rotation.
        """
        hom = self._homology()
        if "omega" in hom:
            return hom["omega"]
        rotations = self._vertex_rotations()
        # spanning tree over vertices
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = []
        for e in range(self.n_edges):
            t, h = self.edge_endpoints(e)
            rt, rh = find(t), find(h)
            if rt != rh:
                parent[rt] = rh
                tree.append(e)
        # contract tree edges by splicing rotations
        rots = {v: list(r) for v, r in enumerate(rotations)}
        home = {}
        for v, r in rots.items():
            for end in r:
                home[end] = v
        for e in tree:
            u, v = home[(e, 0)], home[(e, 1)]
            assert u != v
            ru, rv = rots[u], rots[v]
            k = rv.index((e, 1))
            seq = rv[k + 1:] + rv[:k]
            i = ru.index((e, 0))
            merged = ru[:i] + seq + ru[i + 1:]
            rots[u] = merged
            del rots[v]
            for end in seq:
                home[end] = u
        assert len(rots) == 1
        circle = next(iter(rots.values()))
        pos = {end: i for i, end in enumerate(circle)}
        length = len(circle)
        tree_set = set(tree)
        loops = [e for e in range(self.n_edges) if e not in tree_set]

        def cross(ei, ej):
            hi, ti = pos[(ei, 1)], pos[(ei, 0)]
            hj, tj = pos[(ej, 1)], pos[(ej, 0)]
            a = (hj - hi) % length
            b = (ti - hi) % length
            c = (tj - hi) % length
            if 0 < a < b and c > b:
                return 1
            if 0 < c < b and a > b:
                return -1
            return 0

        loop_cross = {}
        for ei in loops:
            for ej in loops:
                if ei < ej:
                    loop_cross[(ei, ej)] = cross(ei, ej)
        bsize = hom["betti"]
        basis = hom["basis"]
        omega = [[0] * bsize for _ in range(bsize)]
        for i in range(bsize):
            for j in range(bsize):
                tot = 0
                for ei in loops:
                    xi = basis[i][ei]
                    if xi:
                        for ej in loops:
                            yj = basis[j][ej]
                            if yj and ei != ej:
                                cij = (loop_cross[(ei, ej)] if ei < ej
                                       else -loop_cross[(ej, ei)])
                                tot += xi * yj * cij
                omega[i][j] = tot
        for i in range(bsize):
            assert omega[i][i] == 0
            for j in range(bsize):
                assert omega[i][j] == -omega[j][i], "intersection form not skew"
        if bsize:
            assert abs(zlinalg.det(omega)) == 1, "intersection form not unimodular"
        hom["omega"] = omega
        return omega


# ---------------------------------------------------------------------------
# chain maps: dict source edge -> list of (target edge, coef)
# ---------------------------------------------------------------------------

def apply_chain_map(cmap, vector, n_target):
    out = [0] * n_target
    for e, v in enumerate(vector):
        if v:
            for (e2, c) in cmap[e]:
                out[e2] += v * c
    return out


def compose_chain_maps(first, second):
    """first then second."""
    out = {}
    for e, img in first.items():
        acc = {}
        for (e2, c) in img:
            for (e3, c3) in second[e2]:
                acc[e3] = acc.get(e3, 0) + c * c3
        out[e] = [(k, v) for k, v in acc.items() if v]
    return out


def retriangulation_map(kd: CellComplex, ka: CellComplex):
    """Chain map from the diagonal-cut to the antidiagonal-cut complex.

    Gluing edges are shared; the diagonal BL->TR is homotoped onto the
    route through BR (bottom side, then right side).
    """
    cmap = {e: [(e, 1)] for e in range(kd.n_gluings)}
    for s in range(kd.surface.n):
        cmap[kd.cut_edge(s)] = [ka.slot_coef((s, "B")), ka.slot_coef((s, "R"))]
    return cmap


def _new_cell_coef(complex_new, nu, pos_pair):
    """Cell of the new complex covering an oriented new-chart segment."""
    side, sign = _SEGMENT_CELL[pos_pair]
    if side == "cut":
        return (complex_new.cut_edge(nu), sign)
    e, c = complex_new.slot_coef((nu, side))
    return (e, c * sign)


def _region_of_half_slot(slot):
    s, side = slot
    if side in VERTICAL:
        return region_of_slot(slot)
    return (s, "LL") if side == "B" else (s, "UR")


def shear_transport_map(surface, rec: RecutData, ka: CellComplex,
                        kn: CellComplex):
    """Chain map K_anti(S) -> K_diag(h S) along the shear-and-recut."""

    def image_of_segment(region, corner_from, corner_to):
        nu, f = rec.placement[region]
        phi = _phi_region(region[1], f)
        p0 = phi(*CORNER_POS[corner_from])
        p1 = phi(*CORNER_POS[corner_to])
        return _new_cell_coef(kn, nu, (p0, p1))

    cmap = {}
    for gi, g in enumerate(surface.gluings):
        slot = ka.rep_slot[gi]
        c0, c1 = SIDE_CCW[slot[1]]
        cmap[gi] = [image_of_segment(_region_of_half_slot(slot), c0, c1)]
        # the partner slot must give the same image
        slot2 = g.other(slot)
        d0 = g.corner_image(slot, c0)[1]
        d1 = g.corner_image(slot, c1)[1]
        check = image_of_segment(_region_of_half_slot(slot2), d0, d1)
        assert check == cmap[gi][0], "inconsistent transport across a gluing"
    for s in range(surface.n):
        img1 = image_of_segment((s, "LL"), "BR", "TL")
        img2 = image_of_segment((s, "UR"), "BR", "TL")
        assert img1 == img2, "antidiagonal image disagrees between regions"
        cmap[ka.cut_edge(s)] = [img1]
    return cmap


def rotate_transport_map(surface, ka: CellComplex, kn: CellComplex):
    """Chain map K_anti(S) -> K_diag(r S) for the quarter rotation."""
    cmap = {}
    for gi in range(ka.n_gluings):
        s, side = ka.rep_slot[gi]
        cmap[gi] = [kn.slot_coef((s, QUARTER_SIDE[side]))]
    for s in range(surface.n):
        cmap[ka.cut_edge(s)] = [(kn.cut_edge(s), -1)]
    return cmap


def relabel_map(surface, labeling, kd_src: CellComplex, kd_dst: CellComplex):
    """Chain map of a square relabeling with per-square pi-rotations."""
    cmap = {}
    for gi in range(kd_src.n_gluings):
        s, side = kd_src.rep_slot[gi]
        lab, rot = labeling[s]
        cmap[gi] = [kd_dst.slot_coef((lab, PI_SIDE[side] if rot else side))]
    for s in range(surface.n):
        lab, rot = labeling[s]
        cmap[kd_src.cut_edge(s)] = [(kd_dst.cut_edge(lab), -1 if rot else 1)]
    return cmap


def _assert_chain_map(cmap, k_src: CellComplex, k_dst: CellComplex):
    """Boundaries must map to null-homologous cycles."""
    for t in range(len(k_src.triangles)):
        img = apply_chain_map(cmap, k_src.boundary2_column(t), k_dst.n_edges)
        assert all(v == 0 for v in k_dst.project(img)), "chain map breaks homology"


# ---------------------------------------------------------------------------
# homology of one surface
# ---------------------------------------------------------------------------

class H1Basis:
    """Homology data of one square-tiled surface.

    ``basis`` is a list of edge-chains; ``omega`` the intersection matrix
    in that basis.  An optional unimodular ``twist`` replaces the basis by
    basis * twist, used to check basis independence downstream.
    """

    def __init__(self, surface: SquareTiledSurface, twist=None):
        self.surface = surface
        self.complex = CellComplex(surface)
        self.rank = self.complex.betti
        if twist is None:
            self._twist = None
            self.basis = self.complex.basis_cycles
            self.omega = self.complex.omega
        else:
            self._twist = twist
            self._twist_inv = zlinalg.inverse_unimodular(twist)
            cycles = self.complex.basis_cycles
            self.basis = [
                [sum(cycles[i][e] * twist[i][j] for i in range(self.rank))
                 for e in range(self.complex.n_edges)]
                for j in range(self.rank)
            ]
            om = self.complex.omega
            self.omega = [[sum(twist[i][a] * om[i][j] * twist[j][b]
                               for i in range(self.rank)
                               for j in range(self.rank))
                           for b in range(self.rank)] for a in range(self.rank)]
        assert self.rank == 2 * surface.genus()

    def project(self, chain):
        coords = self.complex.project(chain)
        if self._twist is None:
            return coords
        return zlinalg.matvec(self._twist_inv, coords)


def build_h1(surface: SquareTiledSurface, twist=None) -> H1Basis:
    return H1Basis(surface, twist)


@dataclass
class HomologyMap:
    matrix: list
    source: object
    target: object

    def is_symplectic(self, omega_src, omega_dst):
        m = self.matrix
        mt = zlinalg.transpose(m)
        return zlinalg.matmul(mt, zlinalg.matmul(omega_dst, m)) == omega_src


def _edge_matrix(src: H1Basis, dst: H1Basis, cmap):
    cols = [dst.project(apply_chain_map(cmap, cyc, dst.complex.n_edges))
            for cyc in src.basis]
    return [[cols[j][i] for j in range(len(cols))] for i in range(dst.rank)]


def _generator_chain_map(surface, gen):
    """(chain map into the recut/rotated complex, image surface, recut data)."""
    ka = CellComplex(surface, {s: "a" for s in range(surface.n)})
    if gen == "h":
        img, rec = shear_recut(surface)
        kn = CellComplex(img)
        tmap = shear_transport_map(surface, rec, ka, kn)
    elif gen == "r":
        img, rec = quarter_rotate(surface), None
        kn = CellComplex(img)
        tmap = rotate_transport_map(surface, ka, kn)
    else:
        raise ValueError(f"no chain transport for generator {gen!r}")
    return ka, kn, tmap, img, rec


def induced_map(surface: SquareTiledSurface, gen: str, twist=None):
    """Homology map induced by a generator, onto the canonical image surface.

    Returns (HomologyMap, source H1Basis, target H1Basis, target surface).
    """
    src = build_h1(surface, twist)
    ka, kn, tmap, img, _rec = _generator_chain_map(surface, gen)
    r1 = retriangulation_map(src.complex, ka)
    canon, _deck, _key, labeling = canonical_form(img)
    dst = build_h1(canon)
    rmap = relabel_map(img, labeling, kn, dst.complex)
    full = compose_chain_maps(r1, compose_chain_maps(tmap, rmap))
    _assert_chain_map(full, src.complex, dst.complex)
    matrix = _edge_matrix(src, dst, full)
    hm = HomologyMap(matrix, surface.key(), canon.key())
    assert hm.is_symplectic(src.omega, dst.omega), "induced map is not symplectic"
    return hm, src, dst, canon


# ---------------------------------------------------------------------------
# deck action and isotypic pieces
# ---------------------------------------------------------------------------

def deck_action(surface: SquareTiledSurface, deck, h1: H1Basis):
    """Integer matrix of the deck generator on the chosen homology basis."""
    perm, rots = as_deck_pair(deck, surface.n)
    kd = h1.complex
    cmap = {}
    for gi in range(kd.n_gluings):
        s, side = kd.rep_slot[gi]
        cmap[gi] = [kd.slot_coef((perm[s], PI_SIDE[side] if rots[s] else side))]
    for s in range(surface.n):
        cmap[kd.cut_edge(s)] = [(kd.cut_edge(perm[s]), -1 if rots[s] else 1)]
    return _edge_matrix(h1, h1, cmap)


def cyclo_kernel(rows):
    """Nullspace basis (list of vectors) over the cyclotomic field."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [row[:] for row in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][col].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][col]:
                c = a[i][col]
                a[i] = [x - c * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [ZERO] * n
        vec[fc] = ONE
        for i, pc in enumerate(pivots):
            vec[pc] = -a[i][fc]
        basis.append(vec)
    return basis


def cyclo_solve(a_rows, b_rows):
    """Solve A X = B over the field; A m x n of full column rank."""
    m = len(a_rows)
    n = len(a_rows[0])
    aug = [a_rows[i][:] + b_rows[i][:] for i in range(m)]
    r = 0
    pivots = []
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = aug[r][col].inverse()
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    assert len(pivots) == n, "system is underdetermined"
    for i in range(r, m):
        assert all(not x for x in aug[i][n:]), "inconsistent linear system"
    x = [[ZERO] * len(b_rows[0]) for _ in range(n)]
    for i, col in enumerate(pivots):
        x[col] = aug[i][n:]
    return x


@dataclass
class IsotypicBasis:
    k: int
    d: int
    columns: list          # basis vectors over the field, length = H1 rank
    gram: CycloMatrix      # pseudo-Hermitian form on the basis
    signature: tuple

    @property
    def dim(self):
        return len(self.columns)


def hermitian_signature(h: CycloMatrix):
    """Signature (p, q) of a nondegenerate Hermitian cyclotomic matrix.

    Congruence diagonalization; diagonal entries of a Hermitian matrix over
    the field are rational, so pivots carry signs directly.
    """
    n = h.dim
    a = [row[:] for row in h.rows]
    p = q = 0
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][i]), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n)
                         if a[i][j]), None)
            assert pair is not None, "degenerate Hermitian form"
            i, j = pair
            lam = None
            for cand in (ONE, I_SQRT3):
                val = cand.conj() * a[i][j]
                if val + val.conj():
                    lam = cand
                    break
            assert lam is not None
            # congruence e_i <- e_i + lam e_j
            for y in range(n):
                a[i][y] = a[i][y] + lam * a[j][y]
            lamc = lam.conj()
            for x in range(n):
                a[x][i] = a[x][i] + lamc * a[x][j]
            piv = i
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            for row in a:
                row[k], row[piv] = row[piv], row[k]
        d = a[k][k]
        assert d.is_rational() and d.a != 0
        if d.a > 0:
            p += 1
        else:
            q += 1
        dinv = d.inverse()
        for x in range(k + 1, n):
            if a[x][k]:
                c = a[x][k] * dinv
                for y in range(n):
                    a[x][y] = a[x][y] - c * a[k][y]
                cc = c.conj()
                for y in range(n):
                    a[y][x] = a[y][x] - cc * a[y][k]
    return (p, q)


def isotypic_basis(t_star, omega, k, d) -> IsotypicBasis:
    """Exact basis of ker(T_* - zeta_d^k) with its pseudo-Hermitian form.

    The basis spans the saturated lattice over the ring of integers of the
    field, so restricted monodromy matrices are integral with unit
    determinants.
    """
    if k % d == 0:
        raise ValueError("k = 0 is excluded: no deck-invariant homology")
    lam = zeta_power_of_order(d, k)
    n = len(t_star)
    rows = [[CycloNum(t_star[i][j]) - (lam if i == j else ZERO)
             for j in range(n)] for i in range(n)]
    cols = zeta_integral_kernel(rows)
    m = len(cols)
    gram_rows = []
    for i in range(m):
        row = []
        for j in range(m):
            tot = ZERO
            for A in range(n):
                via = cols[i][A].conj()
                if via:
                    for B in range(n):
                        if omega[A][B] and cols[j][B]:
                            tot = tot + via * CycloNum(omega[A][B]) * cols[j][B]
            row.append(I_SQRT3 * tot)
        gram_rows.append(row)
    if m == 0:
        return IsotypicBasis(k, d, [], CycloMatrix([[ONE]]), (0, 0))
    gram = CycloMatrix(gram_rows)
    assert gram == gram.conj_transpose(), "pseudo-Hermitian form is not Hermitian"
    sig = hermitian_signature(gram)
    return IsotypicBasis(k, d, cols, gram, sig)


# ---------------------------------------------------------------------------
# monodromy representation over an orbit
# ---------------------------------------------------------------------------

class MonodromyRep:
    """Homology monodromy of the h and r edges over a PSL(2,Z)-orbit.

    For a cover with deck group Z/d the representation restricts to each
    deck eigenspace; restricted matrices are CycloMatrix instances that
    preserve the node's pseudo-Hermitian form exactly.  No projective
    normalization is applied, so loop relations hold up to unit scalars.
    """

    def __init__(self, surface: SquareTiledSurface, deck=None, d=None,
                 cap=4096, twists=None):
        self.d = d
        base_surface, base_deck, key, _ = canonical_form(surface, deck)
        self.nodes = [base_surface]
        self.decks = [base_deck]
        index = {key: 0}
        self.h_map = {}
        self.r_map = {}
        self._edge_raw = {}
        todo = [0]
        while todo:
            v = todo.pop(0)
            cur, cur_deck = self.nodes[v], self.decks[v]
            for gen in ("h", "r"):
                ka, kn, tmap, img, rec = _generator_chain_map(cur, gen)
                if cur_deck is None:
                    img_deck = None
                elif gen == "h":
                    img_deck = _transport_deck_shear(cur, cur_deck, rec)
                else:
                    img_deck = cur_deck
                canon, cdeck, ckey, labeling = canonical_form(img, img_deck)
                w = index.get(ckey)
                if w is None:
                    if len(self.nodes) >= cap:
                        raise RuntimeError(f"orbit exceeds cap {cap}")
                    w = len(self.nodes)
                    index[ckey] = w
                    self.nodes.append(canon)
                    self.decks.append(cdeck)
                    todo.append(w)
                elif cdeck is not None:
                    assert self.decks[w] == cdeck, "deck transport mismatch"
                (self.h_map if gen == "h" else self.r_map)[v] = w
                self._edge_raw[(v, gen)] = (ka, kn, tmap, img, labeling, w)
        self.n_nodes = len(self.nodes)
        self.h1 = [build_h1(self.nodes[v], twists[v] if twists else None)
                   for v in range(self.n_nodes)]
        self.edge_matrix = {}
        for (v, gen), (ka, kn, tmap, img, labeling, w) in self._edge_raw.items():
            src, dst = self.h1[v], self.h1[w]
            r1 = retriangulation_map(src.complex, ka)
            rmap = relabel_map(img, labeling, kn, dst.complex)
            full = compose_chain_maps(r1, compose_chain_maps(tmap, rmap))
            _assert_chain_map(full, src.complex, dst.complex)
            mat = _edge_matrix(src, dst, full)
            hm = HomologyMap(mat, v, w)
            assert hm.is_symplectic(src.omega, dst.omega), \
                "monodromy is not symplectic"
            self.edge_matrix[(v, gen)] = mat
        del self._edge_raw
        self.t_star = []
        for v in range(self.n_nodes):
            if self.decks[v] is None:
                self.t_star.append(None)
                continue
            t = deck_action(self.nodes[v], self.decks[v], self.h1[v])
            self.t_star.append(t)
            if self.d:
                power = zlinalg.identity(len(t))
                for _ in range(self.d):
                    power = zlinalg.matmul(t, power)
                assert power == zlinalg.identity(len(t)), "deck order mismatch"
        self._isotypic = {}
        self._restricted = {}
        self._h_inverse = {w: v for v, w in self.h_map.items()}

    # -- integer-level structure -------------------------------------------

    def neighbor(self, v, letter):
        if letter == "h":
            return self.h_map[v]
        if letter == "r":
            return self.r_map[v]
        if letter == "h-1":
            return self._h_inverse[v]
        raise ValueError(f"unknown letter {letter!r}")

    def integer_step(self, v, letter):
        """(matrix, next node) for one letter applied at node v."""
        if letter in ("h", "r"):
            return self.edge_matrix[(v, letter)], self.neighbor(v, letter)
        u = self._h_inverse[v]
        return zlinalg.inverse_unimodular(self.edge_matrix[(u, "h")]), u

    # -- eigenspace level -----------------------------------------------------

    def isotypic(self, v, k) -> IsotypicBasis:
        key = (v, k)
        if key not in self._isotypic:
            assert self.d, "isotypic pieces need a cover with deck data"
            self._isotypic[key] = isotypic_basis(
                self.t_star[v], self.h1[v].omega, k, self.d)
        return self._isotypic[key]

    def restricted_step(self, v, letter, k):
        """(CycloMatrix, next node) of one letter on E(zeta_d^k)."""
        key = (v, letter, k)
        if key in self._restricted:
            return self._restricted[key]
        m, w = self.integer_step(v, letter)
        ts, td = self.t_star[v], self.t_star[w]
        assert zlinalg.matmul(m, ts) == zlinalg.matmul(td, m), \
            "monodromy does not commute with the deck action"
        src = self.isotypic(v, k)
        dst = self.isotypic(w, k)
        n = self.h1[v].rank
        img_cols = []
        for col in src.columns:
            img_cols.append([
                sum((CycloNum(m[i][j]) * col[j] for j in range(n) if m[i][j]),
                    ZERO) for i in range(n)])
        a_rows = [[dst.columns[j][i] for j in range(dst.dim)] for i in range(n)]
        b_rows = [[img_cols[j][i] for j in range(src.dim)] for i in range(n)]
        mat = CycloMatrix(cyclo_solve(a_rows, b_rows))
        lhs = mat.conj_transpose() * dst.gram * mat
        assert lhs == src.gram, "restricted monodromy does not preserve the form"
        detv = mat.det()
        assert any(detv == u for u in UNIT_SCALARS), \
            "restricted determinant is not a unit scalar"
        self._restricted[key] = (mat, w)
        return self._restricted[key]

    def structural_names(self):
        """Nodes named by graph shape (the r-fixed and the h-fixed node)."""
        out = {}
        for v in range(self.n_nodes):
            if self.r_map[v] == v:
                out.setdefault("r_fixed", v)
            if self.h_map[v] == v:
                out.setdefault("h_fixed", v)
        return out

    def monodromy_json(self, k=1):
        out = {}
        for v in range(self.n_nodes):
            for gen in ("h", "r"):
                mat, w = self.restricted_step(v, gen, k)
                out[f"node{v}:{gen}"] = {"target": w, "matrix": mat.to_json()}
        return out


def word_monodromy(rep: MonodromyRep, start: int, word, k=1):
    """Product of restricted edge matrices along a closed word.

    ``word`` is an iterable of letters from {"h", "h-1", "r"}, applied left
    to right.  The result is well-defined up to a unit scalar.
    """
    v = start
    mat = None
    for letter in word:
        step, v = rep.restricted_step(v, letter, k)
        mat = step if mat is None else step * mat
    if v != start:
        raise ValueError("word does not close up at the start node")
    if mat is None:
        return CycloMatrix.identity(rep.isotypic(start, k).dim)
    return mat


def word_monodromy_integer(rep: MonodromyRep, start: int, word):
    v = start
    mat = None
    for letter in word:
        step, v = rep.integer_step(v, letter)
        mat = step if mat is None else zlinalg.matmul(step, mat)
    if v != start:
        raise ValueError("word does not close up at the start node")
    return mat if mat is not None else zlinalg.identity(rep.h1[start].rank)


# the two commutator loops used by the irreducibility certificate,
# read left to right: h rh^-3r h rh^-2r   and   rh^-1r h^3 rh^-1r
RHO1 = ("h", "r", "h-1", "h-1", "h-1", "r", "h", "r", "h-1", "h-1", "r")
RHO2 = ("r", "h-1", "r", "h", "h", "h", "r", "h-1", "r")
# loops at the h-fixed node: h itself and the square of the vertical shear
MU1 = ("h",)
MU2 = ("r", "h-1", "r", "r", "h-1", "r")


def _abs_det(m: CycloMatrix):
    return sqrt_rational(m.det().abs2())


def irreducibility_certificate(rep: MonodromyRep, node: int, k=1,
                               words=(RHO1, RHO2)):
    """Commutator-determinant certificate for irreducibility of E(zeta^k).

    det1 = |det(XY - YX)| rules out common 1-dim (and, by duality through
    the nondegenerate form, 3-dim) invariant subspaces; det2 repeats the
    test on the second exterior power to rule out 2-dim ones.  Unit scalar
    ambiguities cancel in the absolute values.
    """
    x = word_monodromy(rep, node, words[0], k)
    y = word_monodromy(rep, node, words[1], k)
    if x.dim != 4:
        raise ValueError("certificate needs rank-4 fibers")
    det1 = _abs_det(x * y - y * x)
    u, v = wedge_square(x), wedge_square(y)
    det2 = _abs_det(u * v - v * u)
    return {
        "det1": det1,
        "det2": det2,
        "verdict": "irreducible" if det1 and det2 else "inconclusive",
    }


def conjugate_spectrum_test(c: CycloMatrix, tol=1e-8):
    """Minimal polynomial and conjugate-spectrum analysis of a 4x4 monodromy.

    The unit-scalar ambiguity is normalized so that 1 is an eigenvalue; the
    complementary cubic factor is split off and its Galois norm taken to
    land in Z[T].  Sixth powers of the matrix kill the scalar ambiguity, so
    the spectra of C^6 and conj(C)^6 are compared numerically.
    """
    if c.dim != 4:
        raise ValueError("expected a 4x4 monodromy matrix")
    char = c.char_poly()
    units = [u for u in UNIT_SCALARS if not char.eval(u)]
    if not units:
        raise ValueError("no unit scalar makes 1 an eigenvalue")
    s = units[0]
    sinv4 = s ** (-4)
    scaled = CycloPoly([coef * (s ** i) * sinv4
                        for i, coef in enumerate(char.coeffs)])
    cubic, rem = scaled.divmod(CycloPoly([-1, 1]))
    assert rem.is_zero()
    min_poly = galois_norm(cubic)

    import numpy as np

    c6 = np.linalg.matrix_power(complex_embed(c), 6)
    conj6 = np.linalg.matrix_power(complex_embed(c.conj()), 6)
    ev1 = np.linalg.eigvals(c6)
    ev2 = np.linalg.eigvals(conj6)
    gap = min(
        max(abs(ev1[i] - ev2[p[i]]) for i in range(4))
        for p in itertools.permutations(range(4))
    )
    if tol / 2 < gap < 2 * tol:
        raise ValueError("conjugate-spectrum comparison inconclusive")
    return {
        "min_poly": min_poly,
        "cubic_factor": cubic,
        "unit_normalization": s,
        "cyclotomic": is_cyclotomic(min_poly),
        "distinct_from_conjugate": bool(gap > tol),
        "spectrum_gap": float(gap),
    }


def waist_homology(surface: SquareTiledSurface, cylinder, h1: H1Basis = None):
    """Class of a horizontal cylinder's core circle in the homology basis."""
    if h1 is None:
        h1 = build_h1(surface)
    states = _row_of(surface, (min(cylinder.squares), 1))
    chain = [0] * h1.complex.n_edges
    for (sq, o) in states:
        e, coef = h1.complex.slot_coef((sq, "B" if o == 1 else "T"))
        chain[e] += coef
    return h1.project(chain)
