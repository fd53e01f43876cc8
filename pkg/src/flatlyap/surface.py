"""Square-tiled surfaces and their PSL(2,Z) combinatorics.

A surface is a finite set of unit squares with a fixed-point-free matching
of the 4n sides.  A matched pair is glued either by a translation (which
joins opposite side types, R-L or T-B) or by a rotation by pi (a "flip",
which joins equal side types).  Holonomy is therefore contained in {+1,-1}
and the surface carries a quadratic differential; the all-translation case
is the Abelian (origami) one.

Convention: x to the right, y up.  The generator h is the shear (1 1; 0 1)
and r is the counterclockwise rotation (0 -1; 1 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

SIDES = ("R", "L", "T", "B")
SIDE_INDEX = {s: i for i, s in enumerate(SIDES)}
OPPOSITE = {"R": "L", "L": "R", "T": "B", "B": "T"}
VERTICAL = {"R", "L"}
HORIZONTAL = {"T", "B"}

CORNERS = ("BL", "BR", "TR", "TL")
CORNER_POS = {"BL": (0, 0), "BR": (1, 0), "TR": (1, 1), "TL": (0, 1)}
POS_CORNER = {v: k for k, v in CORNER_POS.items()}

# endpoints of each side in the order of its parametrization
SIDE_ENDPOINTS = {"B": ("BL", "BR"), "T": ("TL", "TR"),
                  "L": ("BL", "TL"), "R": ("BR", "TR")}
# endpoints of each side when traversed counterclockwise around the square
SIDE_CCW = {"B": ("BL", "BR"), "R": ("BR", "TR"), "T": ("TR", "TL"), "L": ("TL", "BL")}

# rotating the chart by pi relabels sides and corners
PI_SIDE = {"R": "L", "L": "R", "T": "B", "B": "T"}
PI_CORNER = {"BL": "TR", "TR": "BL", "BR": "TL", "TL": "BR"}

# quarter turn counterclockwise: old side X becomes new side QUARTER_SIDE[X]
QUARTER_SIDE = {"B": "R", "R": "T", "T": "L", "L": "B"}
QUARTER_CORNER = {"BL": "BR", "BR": "TR", "TR": "TL", "TL": "BL"}

# walking counterclockwise around a vertex, the side crossed from each corner
CORNER_EXIT = {"BL": "L", "TL": "T", "TR": "R", "BR": "B"}


class SurfaceError(ValueError):
    """Raised for malformed or inconsistent surface data."""


@dataclass(frozen=True)
class Gluing:
    a: tuple  # (square, side)
    b: tuple
    flip: bool

    def other(self, slot):
        if slot == self.a:
            return self.b
        assert slot == self.b
        return self.a

    def corner_image(self, slot, corner):
        """Image of a corner of ``slot``'s side on the partner side."""
        src, dst = (self.a, self.b) if slot == self.a else (self.b, self.a)
        ends_src = SIDE_ENDPOINTS[src[1]]
        ends_dst = SIDE_ENDPOINTS[dst[1]]
        i = ends_src.index(corner)
        return dst[0], ends_dst[1 - i] if self.flip else ends_dst[i]


class SquareTiledSurface:
    """Immutable labeled square-tiled surface."""

    def __init__(self, n_squares, gluings, validate=True):
        self.n = int(n_squares)
        self.gluings = tuple(
            g if isinstance(g, Gluing) else Gluing(tuple(g[0]), tuple(g[1]), bool(g[2]))
            for g in gluings)
        self.slot_to_gluing = {}
        for idx, g in enumerate(self.gluings):
            for slot in (g.a, g.b):
                if slot in self.slot_to_gluing:
                    raise SurfaceError(f"slot {slot} glued more than once")
                self.slot_to_gluing[slot] = idx
        if validate:
            self._validate()

    # -- structure checks ------------------------------------------------

    def _validate(self):
        if self.n < 1:
            raise SurfaceError("need at least one square")
        if len(self.gluings) != 2 * self.n:
            raise SurfaceError("wrong number of gluings")
        for s in range(self.n):
            for side in SIDES:
                if (s, side) not in self.slot_to_gluing:
                    raise SurfaceError(f"unmatched slot {(s, side)}")
        for g in self.gluings:
            if g.a == g.b:
                raise SurfaceError(f"slot {g.a} glued to itself")
            sa, sb = g.a[1], g.b[1]
            if g.flip:
                if sa != sb:
                    raise SurfaceError(
                        f"flip gluing must join equal side types, got {g.a}-{g.b}")
            else:
                if OPPOSITE[sa] != sb:
                    raise SurfaceError(
                        f"translation gluing must join opposite sides, got {g.a}-{g.b}")
            if not (0 <= g.a[0] < self.n and 0 <= g.b[0] < self.n):
                raise SurfaceError("square index out of range")
        if not self._connected():
            raise SurfaceError("surface is not connected")

    def _connected(self):
        seen = {0}
        todo = [0]
        while todo:
            s = todo.pop()
            for side in SIDES:
                u = self.gluings[self.slot_to_gluing[(s, side)]].other((s, side))[0]
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        return len(seen) == self.n

    # -- basic queries -----------------------------------------------------

    def partner(self, slot):
        return self.gluings[self.slot_to_gluing[slot]].other(slot)

    def gluing_at(self, slot):
        return self.gluings[self.slot_to_gluing[slot]]

    def is_abelian(self):
        """True iff the holonomy is trivial (a consistent 2-coloring exists)."""
        color = {0: 0}
        todo = [0]
        while todo:
            s = todo.pop()
            for side in SIDES:
                g = self.gluing_at((s, side))
                u = g.other((s, side))[0]
                c = color[s] ^ (1 if g.flip else 0)
                if u in color:
                    if color[u] != c:
                        return False
                else:
                    color[u] = c
                    todo.append(u)
        return True

    # -- vertices and stratum ----------------------------------------------

    def corner_cycles(self):
        """Vertex classes as cycles of the counterclockwise corner walk."""
        nxt = {}
        for s in range(self.n):
            for c in CORNERS:
                side = CORNER_EXIT[c]
                g = self.gluing_at((s, side))
                nxt[(s, c)] = g.corner_image((s, side), c)
        cycles = []
        seen = set()
        for start in sorted(nxt):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            cur = nxt[start]
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                cur = nxt[cur]
            cycles.append(cyc)
        return cycles

    def vertex_of_corner(self):
        """Map corner -> vertex id, ids ordered as in corner_cycles()."""
        out = {}
        for i, cyc in enumerate(self.corner_cycles()):
            for corner in cyc:
                out[corner] = i
        return out

    def stratum(self):
        return stratum(self)

    def euler_characteristic(self):
        return len(self.corner_cycles()) - 2 * self.n + self.n

    def genus(self):
        chi = self.euler_characteristic()
        assert chi % 2 == 0
        return (2 - chi) // 2

    # -- serialization -------------------------------------------------------

    def to_json(self):
        return {
            "squares": self.n,
            "gluings": [
                {"a": [g.a[0], g.a[1]], "b": [g.b[0], g.b[1]],
                 "kind": "flip" if g.flip else "translation"}
                for g in self.gluings
            ],
        }

    @classmethod
    def from_json(cls, data):
        try:
            n = data["squares"]
            gluings = [
                ((item["a"][0], item["a"][1]), (item["b"][0], item["b"][1]),
                 {"translation": False, "flip": True}[item["kind"]])
                for item in data["gluings"]
            ]
        except (KeyError, TypeError, IndexError) as exc:
            raise SurfaceError(f"malformed surface description: {exc}") from exc
        return cls(n, gluings)

    def key(self):
        """Hashable label-sensitive key (not isomorphism-invariant)."""
        return tuple(sorted(
            (min(g.a, g.b), max(g.a, g.b), g.flip) for g in self.gluings))


@dataclass(frozen=True)
class Stratum:
    kind: str              # "abelian" | "quadratic"
    orders: tuple          # zero/pole orders, sorted decreasingly
    genus: int

    def __str__(self):
        letter = "H" if self.kind == "abelian" else "Q"
        inside = ",".join(str(d) for d in self.orders)
        return f"{letter}({inside})"

    def ekz_local_term(self):
        """The combinatorial summand of the exponent-sum formula, exact."""
        if self.kind == "quadratic":
            return Fraction(1, 24) * sum(
                Fraction(d * (d + 4), d + 2) for d in self.orders)
        return Fraction(1, 12) * sum(
            Fraction(m * (m + 2), m + 1) for m in self.orders)


def stratum(surface: SquareTiledSurface) -> Stratum:
    """Stratum from cone angles, via counterclockwise corner walks."""
    cycles = surface.corner_cycles()
    abelian = surface.is_abelian()
    orders = []
    for cyc in cycles:
        quarter_turns = len(cyc)
        if quarter_turns % 2:
            raise SurfaceError("cone angle is not a multiple of pi")
        if abelian:
            if quarter_turns % 4:
                raise SurfaceError("abelian surface with angle not multiple of 2*pi")
            m = quarter_turns // 4 - 1
            if m:
                orders.append(m)
        else:
            d = quarter_turns // 2 - 2
            if d:
                orders.append(d)
    genus = surface.genus()
    total = sum(orders)
    expected = 2 * genus - 2 if abelian else 4 * genus - 4
    assert total == expected, f"stratum {orders} inconsistent with genus {genus}"
    return Stratum("abelian" if abelian else "quadratic",
                   tuple(sorted(orders, reverse=True)), genus)


def load_surface(spec) -> SquareTiledSurface:
    """Load and validate a surface from a JSON dict, JSON text, or file path."""
    if isinstance(spec, SquareTiledSurface):
        return spec
    if isinstance(spec, str):
        text = spec
        if not spec.lstrip().startswith("{"):
            with open(spec) as fh:
                text = fh.read()
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SurfaceError(f"invalid JSON: {exc}") from exc
    return SquareTiledSurface.from_json(spec)


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cylinder:
    width: int
    height: int
    squares: frozenset

    def modulus(self):
        return Fraction(self.height, self.width)


@dataclass
class CylinderDecomposition:
    cylinders: list

    def widths_heights(self):
        return sorted(((c.width, c.height) for c in self.cylinders), reverse=True)

    def total_area(self):
        return sum(c.width * c.height for c in self.cylinders)


def _row_of(surface, start_state):
    """Trace the horizontal core circle through ``start_state``=(square, orient)."""
    states = []
    state = start_state
    while True:
        states.append(state)
        s, o = state
        side = "R" if o == 1 else "L"
        g = surface.gluing_at((s, side))
        u, _ = g.other((s, side))
        state = (u, o if not g.flip else -o)
        if state == start_state:
            break
    return states


def horizontal_cylinders(surface: SquareTiledSurface) -> CylinderDecomposition:
    """Horizontal cylinder decomposition.

    Rows of squares are traced through the vertical-side gluings; stacked
    rows are merged while the circle separating them carries no singularity.
    """
    singular = set()
    for cyc in surface.corner_cycles():
        if len(cyc) != 4:
            singular.update(cyc)

    row_of_square = {}
    rows = []
    for s in range(surface.n):
        if s in row_of_square:
            continue
        states = _row_of(surface, (s, 1))
        idx = len(rows)
        rows.append(states)
        for (sq, _o) in states:
            assert sq not in row_of_square, "square crossed twice by one circle"
            row_of_square[sq] = idx

    def top_circle_corners(states):
        out = []
        for (sq, o) in states:
            out.extend([(sq, "TL"), (sq, "TR")] if o == 1 else [(sq, "BL"), (sq, "BR")])
        return out

    def bottom_circle_corners(states):
        out = []
        for (sq, o) in states:
            out.extend([(sq, "BL"), (sq, "BR")] if o == 1 else [(sq, "TL"), (sq, "TR")])
        return out

    def row_above(idx):
        targets = set()
        for (sq, o) in rows[idx]:
            side = "T" if o == 1 else "B"
            u, _ = surface.gluing_at((sq, side)).other((sq, side))
            targets.add(row_of_square[u])
        return targets

    top_singular = [any(c in singular for c in top_circle_corners(states))
                    for states in rows]
    bottom_singular = [any(c in singular for c in bottom_circle_corners(states))
                       for states in rows]

    cylinders = []
    used = set()
    for start in range(len(rows)):
        if start in used:
            continue
        if any(bottom_singular) and not bottom_singular[start]:
            continue
        stack = [start]
        used.add(start)
        cur = start
        while not top_singular[cur]:
            above = row_above(cur)
            assert len(above) == 1, "non-singular circle with ambiguous upper row"
            nxt = above.pop()
            if nxt in used:
                break  # closed up (torus-like cylinder)
            stack.append(nxt)
            used.add(nxt)
            cur = nxt
        widths = {len(rows[i]) for i in stack}
        assert len(widths) == 1, "merged rows of unequal circumference"
        squares = frozenset(sq for i in stack for (sq, _o) in rows[i])
        cylinders.append(Cylinder(widths.pop(), len(stack), squares))
    assert sum(c.width * c.height for c in cylinders) == surface.n
    return CylinderDecomposition(sorted(
        cylinders, key=lambda c: (-c.width, -c.height, min(c.squares))))


# ---------------------------------------------------------------------------
# the PSL(2,Z) generators
# ---------------------------------------------------------------------------

@dataclass
class RecutData:
    """Bookkeeping of the shear-and-recut: how old cells sit in new squares.

    placement maps (square, region) with region in {"LL","UR"} to a pair
    (new square, presented_flip).  The two triangular regions of an old
    square are cut by its antidiagonal; LL owns the bottom side, UR the top.
    New squares are indexed by the old vertical gluings (their diagonal
    seams); the new vertical edges are the old antidiagonals.
    """
    placement: dict
    seam_of_new_square: dict       # new square -> old vertical gluing index
    new_square_of_seam: dict       # old vertical gluing index -> new square


def region_of_slot(slot):
    s, side = slot
    assert side in VERTICAL
    return (s, "LL" if side == "L" else "UR")


def _phi_region(region_type, flip):
    """Placement map of a region into its new square's chart."""
    if region_type == "LL":
        if not flip:
            return lambda x, y: (x + y, y)
        return lambda x, y: (1 - x - y, 1 - y)
    if not flip:
        return lambda x, y: (x + y - 1, y)
    return lambda x, y: (2 - x - y, 1 - y)


def _is_lower(region_type, flip):
    return (region_type == "LL") != flip


def place_corner(placement, region, corner):
    """New (square, corner) position of an old corner seen inside ``region``."""
    nu, f = placement[region]
    phi = _phi_region(region[1], f)
    pos = phi(*CORNER_POS[corner])
    return nu, POS_CORNER[pos]


def shear_recut(surface: SquareTiledSurface):
    """Apply h = (1 1; 0 1) and re-cut along integer vertical lines.

    Returns (new_surface, RecutData).  New square k is built on the k-th
    vertical gluing of the old surface; its chart is chosen so that the
    first slot of that gluing is presented unrotated.
    """
    vertical_gluings = [i for i, g in enumerate(surface.gluings)
                        if g.a[1] in VERTICAL]
    placement = {}
    seam_of_new = {}
    new_of_seam = {}
    for nu, gi in enumerate(vertical_gluings):
        g = surface.gluings[gi]
        placement[region_of_slot(g.a)] = (nu, False)
        placement[region_of_slot(g.b)] = (nu, g.flip)
        ra, fa = region_of_slot(g.a), False
        rb, fb = region_of_slot(g.b), g.flip
        assert _is_lower(ra[1], fa) != _is_lower(rb[1], fb)
        seam_of_new[nu] = gi
        new_of_seam[gi] = nu
    assert len(placement) == 2 * surface.n

    def new_slot_of_region(region):
        nu, f = placement[region]
        if _is_lower(region[1], f):
            return (nu, "B")
        return (nu, "T")

    new_gluings = []
    # horizontal new gluings come from old horizontal gluings
    for g in surface.gluings:
        if g.a[1] not in HORIZONTAL:
            continue
        regions = []
        for slot in (g.a, g.b):
            s, side = slot
            regions.append((s, "LL") if side == "B" else (s, "UR"))
        slot_a = new_slot_of_region(regions[0])
        slot_b = new_slot_of_region(regions[1])
        fa = placement[regions[0]][1]
        fb = placement[regions[1]][1]
        new_gluings.append(Gluing(slot_a, slot_b, g.flip ^ fa ^ fb))
    # vertical new gluings come from old antidiagonals
    for s in range(surface.n):
        rl, ru = (s, "LL"), (s, "UR")
        nul, fl = placement[rl]
        nuu, fu = placement[ru]
        side_l = "R" if _is_lower("LL", fl) else "L"
        side_u = "L" if not _is_lower("UR", fu) else "R"
        new_gluings.append(Gluing((nul, side_l), (nuu, side_u), fl ^ fu))

    new_surface = SquareTiledSurface(surface.n, new_gluings)
    return new_surface, RecutData(placement, seam_of_new, new_of_seam)


def quarter_rotate(surface: SquareTiledSurface) -> SquareTiledSurface:
    """Apply r: rotate every chart counterclockwise by a quarter turn."""
    new_gluings = [
        Gluing((g.a[0], QUARTER_SIDE[g.a[1]]), (g.b[0], QUARTER_SIDE[g.b[1]]), g.flip)
        for g in surface.gluings
    ]
    return SquareTiledSurface(surface.n, new_gluings)


def apply_generator(surface: SquareTiledSurface, gen: str) -> SquareTiledSurface:
    """Surface after acting by h, h^-1 or r (up to relabeling)."""
    if gen == "h":
        return shear_recut(surface)[0]
    if gen == "r":
        return quarter_rotate(surface)
    if gen == "h-1":
        # (hr)^3 = id gives h^{-1} = r h r h r in PSL(2,Z)
        out = surface
        for letter in ("r", "h", "r", "h", "r"):
            out = apply_generator(out, letter)
        return out
    raise ValueError(f"unknown generator {gen!r}")


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------

def as_deck_pair(deck, n):
    """Normalize a deck map to the pair (permutation, rotation flags)."""
    if deck is None:
        return None
    if isinstance(deck, tuple) and len(deck) == 2 and not isinstance(deck[0], int):
        perm, rots = deck
        return (tuple(perm), tuple(bool(r) for r in rots))
    return (tuple(deck), (False,) * n)


def deck_is_automorphism(surface: SquareTiledSurface, deck) -> bool:
    """Check that a (permutation, rotations) pair preserves the gluings."""
    perm, rots = as_deck_pair(deck, surface.n)

    def image(slot):
        s, side = slot
        return (perm[s], PI_SIDE[side] if rots[s] else side)

    for g in surface.gluings:
        ia, ib = image(g.a), image(g.b)
        gi = surface.slot_to_gluing.get(ia)
        if gi is None:
            return False
        g2 = surface.gluings[gi]
        if {g2.a, g2.b} != {ia, ib}:
            return False
        if g2.flip != g.flip ^ rots[g.a[0]] ^ rots[g.b[0]]:
            return False
    return True


def canonical_data(surface: SquareTiledSurface, deck=None):
    """Canonical encoding of a surface, optionally together with a deck map.

    Returns (key, labeling) where labeling maps each old square to
    (new_label, rotated).  Isomorphisms are square bijections composed with
    per-square chart rotations by pi; the encoding is minimized over all
    starting squares and starting orientations.  When a deck map is given
    it takes part in the encoding, so matching keys identify pairs.
    """
    n = surface.n
    deck = as_deck_pair(deck, n)
    best = None
    best_label = None
    for start in range(n):
        for start_rot in (False, True):
            label = {start: (0, start_rot)}
            order = [start]
            encoding = []
            qi = 0
            while qi < len(order):
                s = order[qi]
                qi += 1
                _, rot = label[s]
                for norm_side in SIDES:
                    side = PI_SIDE[norm_side] if rot else norm_side
                    g = surface.gluing_at((s, side))
                    u, uside = g.other((s, side))
                    if u not in label:
                        label[u] = (len(order), rot ^ g.flip)
                        order.append(u)
                    ulabel, urot = label[u]
                    norm_uside = PI_SIDE[uside] if urot else uside
                    norm_flip = g.flip ^ rot ^ urot
                    encoding.append((ulabel, SIDE_INDEX[norm_uside], norm_flip))
            if deck is not None:
                perm, rots = deck
                for s in order:
                    t = perm[s]
                    encoding.append(
                        (label[t][0], int(label[s][1] ^ rots[s] ^ label[t][1]),
                         False))
            key = tuple(encoding)
            if best is None or key < best:
                best = key
                best_label = dict(label)
    return best, best_label


def relabel(surface: SquareTiledSurface, labeling, deck=None):
    """Rewrite the surface (and deck) through a labeling square->(label, rot)."""
    def map_slot(slot):
        s, side = slot
        lab, rot = labeling[s]
        return (lab, PI_SIDE[side] if rot else side)

    new_gluings = [
        Gluing(map_slot(g.a), map_slot(g.b),
               g.flip ^ labeling[g.a[0]][1] ^ labeling[g.b[0]][1])
        for g in surface.gluings
    ]
    out = SquareTiledSurface(surface.n, new_gluings)
    if deck is None:
        return out, None
    perm, rots = as_deck_pair(deck, surface.n)
    new_perm = [0] * surface.n
    new_rots = [False] * surface.n
    for s in range(surface.n):
        lab, rot = labeling[s]
        tlab, trot = labeling[perm[s]]
        new_perm[lab] = tlab
        new_rots[lab] = rot ^ rots[s] ^ trot
    new_deck = (tuple(new_perm), tuple(new_rots))
    assert deck_is_automorphism(out, new_deck), "relabeled deck is broken"
    return out, new_deck


def canonical_form(surface: SquareTiledSurface, deck=None):
    """Canonically relabeled surface plus its hashable key."""
    key, labeling = canonical_data(surface, deck)
    out, new_deck = relabel(surface, labeling, deck)
    return out, new_deck, key, labeling


def isomorphic(s1: SquareTiledSurface, s2: SquareTiledSurface) -> bool:
    return canonical_data(s1)[0] == canonical_data(s2)[0]


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

class OrbitError(RuntimeError):
    pass


@dataclass
class OrbitGraph:
    nodes: list            # canonical SquareTiledSurface per node
    decks: list            # deck permutation per node (or None)
    h_map: list            # node -> node under h
    r_map: list            # node -> node under r
    base: int = 0

    def degree(self):
        return len(self.nodes)

    def cusps(self):
        """Cycles of h_map, as lists of node indices."""
        seen = set()
        out = []
        for v in range(len(self.nodes)):
            if v in seen:
                continue
            cyc = [v]
            seen.add(v)
            cur = self.h_map[v]
            while cur != v:
                cyc.append(cur)
                seen.add(cur)
                cur = self.h_map[cur]
            out.append(cyc)
        return out

    def cusp_widths(self):
        return sorted(len(c) for c in self.cusps())

    def r_fixed_nodes(self):
        return [v for v in range(len(self.nodes)) if self.r_map[v] == v]

    def hr_fixed_nodes(self):
        return [v for v in range(len(self.nodes))
                if self.h_map[self.r_map[v]] == v]

    def to_dot(self):
        lines = ["digraph orbit {"]
        for v, s in enumerate(self.nodes):
            lines.append(f'  n{v} [label="S{v} ({s.n} sq)"];')
        for v in range(len(self.nodes)):
            lines.append(f'  n{v} -> n{self.h_map[v]} [label="h"];')
        drawn = set()
        for v in range(len(self.nodes)):
            w = self.r_map[v]
            if (w, v) not in drawn:
                lines.append(f'  n{v} -> n{w} [label="r", dir=none, style=dashed];')
                drawn.add((v, w))
        lines.append("}")
        return "\n".join(lines) + "\n"


def psl2z_orbit(surface: SquareTiledSurface, cap: int = 4096,
                deck=None) -> OrbitGraph:
    """Breadth-first closure of a surface under h and r, on canonical forms."""
    base_surface, base_deck, key, _ = canonical_form(surface,
                                                     as_deck_pair(deck, surface.n))
    nodes = [base_surface]
    decks = [base_deck]
    index = {key: 0}
    h_map = {}
    r_map = {}
    todo = [0]
    while todo:
        v = todo.pop(0)
        cur = nodes[v]
        cur_deck = decks[v]
        for gen, gmap in (("h", h_map), ("r", r_map)):
            if gen == "h":
                img, rec = shear_recut(cur)
                img_deck = None
                if cur_deck is not None:
                    img_deck = _transport_deck_shear(cur, cur_deck, rec)
            else:
                img = quarter_rotate(cur)
                img_deck = cur_deck
            cimg, cdeck, ckey, _ = canonical_form(img, img_deck)
            if ckey not in index:
                if len(nodes) >= cap:
                    raise OrbitError(f"orbit exceeds cap {cap}")
                index[ckey] = len(nodes)
                nodes.append(cimg)
                decks.append(cdeck)
                todo.append(index[ckey])
            w = index[ckey]
            if cdeck is not None:
                assert decks[w] == cdeck, "deck transport mismatch at node reunion"
            gmap[v] = w

    h_list = [h_map[v] for v in range(len(nodes))]
    r_list = [r_map[v] for v in range(len(nodes))]
    graph = OrbitGraph(nodes, decks, h_list, r_list, base=0)
    # PSL(2,Z) relations must hold on node maps
    for v in range(len(nodes)):
        assert r_list[r_list[v]] == v, "r is not an involution on the orbit"
        w = v
        for _ in range(3):
            w = h_list[r_list[w]]
        assert w == v, "(hr)^3 is not the identity on the orbit"
    return graph


_REGION_CORNERS = {"LL": ("BL", "BR"), "UR": ("TR", "TL")}


def _transport_deck_shear(surface, deck, rec: RecutData):
    """Deck map on the recut surface (new squares = old vertical gluings)."""
    perm, rots = as_deck_pair(deck, surface.n)
    n = surface.n
    new_perm = [None] * n
    new_rots = [None] * n

    def deck_region(region):
        s, rtype = region
        src_slot = (s, "L" if rtype == "LL" else "R")
        side = PI_SIDE[src_slot[1]] if rots[s] else src_slot[1]
        return region_of_slot((perm[s], side))

    for region, (nu, f) in rec.placement.items():
        region2 = deck_region(region)
        nu2, f2 = rec.placement[region2]
        phi = _phi_region(region[1], f)
        phi2 = _phi_region(region2[1], f2)
        s = region[0]
        flags = set()
        for corner in _REGION_CORNERS[region[1]]:
            p = phi(*CORNER_POS[corner])
            c2 = PI_CORNER[corner] if rots[s] else corner
            p2 = phi2(*CORNER_POS[c2])
            if p2 == p:
                flags.add(False)
            else:
                assert p2 == (1 - p[0], 1 - p[1]), "deck image is not affine"
                flags.add(True)
        assert len(flags) == 1, "deck image twists within a square"
        flag = flags.pop()
        if new_perm[nu] is None:
            new_perm[nu], new_rots[nu] = nu2, flag
        else:
            assert (new_perm[nu], new_rots[nu]) == (nu2, flag), \
                "deck image disagrees between the halves of a new square"
    return (tuple(new_perm), tuple(new_rots))


def graph_report(graph: OrbitGraph):
    """Degree, cusp widths, and counts of r- and hr-fixed nodes."""
    return {
        "degree": graph.degree(),
        "cusp_widths": graph.cusp_widths(),
        "r_fixed": len(graph.r_fixed_nodes()),
        "hr_fixed": len(graph.hr_fixed_nodes()),
    }


# ---------------------------------------------------------------------------
# counting cylinders in all rational directions
# ---------------------------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


def _isqrt_frac_floor(x: Fraction) -> int:
    """Largest integer k with k^2 <= x (x >= 0)."""
    from math import isqrt

    k = isqrt(x.numerator // x.denominator)
    while Fraction((k + 1) ** 2) <= x:
        k += 1
    while Fraction(k ** 2) > x:
        k -= 1
    return k


def _primitive_directions(l2: Fraction):
    """Unoriented primitive (p, q) with p^2 + q^2 < l2; q >= 0, plus (1, 0)."""
    yield (1, 0)
    q = 1
    while Fraction(q * q) < l2:
        pmax = _isqrt_frac_floor(l2 - q * q)
        for p in range(-pmax, pmax + 1):
            if p * p + q * q < l2 and gcd(abs(p), q) == 1:
                yield (p, q)
        q += 1


class _WalkTable:
    """Generator action on labeled surfaces, memoized as an index table."""

    def __init__(self, surface, budget):
        self.surfaces = [surface]
        self.index = {surface.key(): 0}
        self.trans = [{}]
        self.budget = budget
        self.steps = 0

    def step(self, i, gen):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"direction enumeration exceeded budget {self.budget}")
        hit = self.trans[i].get(gen)
        if hit is not None:
            return hit
        img = apply_generator(self.surfaces[i], gen)
        k = img.key()
        j = self.index.get(k)
        if j is None:
            j = len(self.surfaces)
            self.index[k] = j
            self.surfaces.append(img)
            self.trans.append({})
        self.trans[i][gen] = j
        return j


def count_cylinders(surface: SquareTiledSurface, length_bound,
                    budget: int = 5_000_000):
    """N_area(surface, L): cylinder-area-weighted count of core geodesics.

    Enumerates unoriented primitive directions (p, q); each is reduced to
    the horizontal one by a subtractive Euclidean algorithm whose h/r
    letters are applied to a working copy of the surface, whose horizontal
    cylinders are then read off.  Widths are compared exactly: a cylinder
    counts iff width^2 * (p^2 + q^2) < L^2.
    """
    l2 = Fraction(length_bound) ** 2
    table = _WalkTable(surface, budget)
    cyl_cache = {}
    total = Fraction(0)
    for (p, q) in _primitive_directions(l2):
        v2 = p * p + q * q
        # reduce (p, q) projectively to (1, 0), acting on the surface in step
        i = 0
        pp, qq = p, q
        while qq != 0:
            if pp < 0:
                pp += qq
                i = table.step(i, "h")
            elif pp >= qq:
                pp -= qq
                i = table.step(i, "h-1")
            else:
                pp, qq = -qq, pp
                i = table.step(i, "r")
                if qq == 0:
                    pp = abs(pp)
        assert pp == 1
        cyls = cyl_cache.get(i)
        if cyls is None:
            cyls = [(c.width, c.height)
                    for c in horizontal_cylinders(table.surfaces[i]).cylinders]
            cyl_cache[i] = cyls
        for (cw, chgt) in cyls:
            if cw * cw * v2 < l2:
                total += cw * chgt
    return total / surface.n
