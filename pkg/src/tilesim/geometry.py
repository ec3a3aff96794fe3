"""Lamplighter-group and Diestel-Leader arithmetic, plus generation of the
finite labelled windows (balls, tetrahedra, grid patches) that everything
else runs on.

A group point is a marker height n plus a finitely supported assignment of
digits to half-integer positions; position k + 1/2 is stored as the integer
k.  Digits strictly below the marker take values in {0..q-1}, those at or
above it in {0..p-1}; the lamplighter is the (2,2) case, where a digit is
just a lamp and the generators act by

    a: step up, touch nothing;        b: step up, flipping the lamp crossed.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools

from .graphs import CapacityError, LabelGraph, alphabet


@dataclass(frozen=True)
class GroupPoint:
    """A point of the lamplighter group or of DL(p,q).

    digits is a sorted tuple of (stored position, value) with no zero
    values, so equality and hashing are structural.
    """

    marker: int
    digits: tuple = ()
    p: int = 2
    q: int = 2

    def digit(self, k):
        for pos, val in self.digits:
            if pos == k:
                return val
        return 0

    def support(self):
        return tuple(pos for pos, _ in self.digits)

    def is_identity(self):
        return self.marker == 0 and not self.digits


def identity(p=2, q=2):
    return GroupPoint(0, (), p, q)


def _pack(marker, vals, p, q):
    out = []
    for k in sorted(vals):
        base = q if k < marker else p
        v = vals[k] % base
        if v:
            out.append((k, v))
    return GroupPoint(marker, tuple(out), p, q)


def multiply(x, y):
    """Product (r,m)(s,n) = (t, m+n) with t_i = r_i + s_{i-m}, digits taken
    mod the base relevant to the resulting marker."""
    if (x.p, x.q) != (y.p, y.q):
        raise ValueError("mixed (p,q) parameters")
    m = x.marker + y.marker
    vals = {}
    for k, v in x.digits:
        vals[k] = vals.get(k, 0) + v
    for k, v in y.digits:
        kk = k + x.marker
        vals[kk] = vals.get(kk, 0) + v
    return _pack(m, vals, x.p, x.q)


def inverse(x):
    vals = {}
    for k, v in x.digits:
        vals[k - x.marker] = -v
    return _pack(-x.marker, vals, x.p, x.q)


def _flip(digits, k):
    vals = dict(digits)
    vals[k] = vals.get(k, 0) + 1
    return vals


def step(x, token):
    """One lamplighter generator step (tokens a, A, b, B)."""
    if token == "a":
        return GroupPoint(x.marker + 1, x.digits, x.p, x.q)
    if token == "A":
        return GroupPoint(x.marker - 1, x.digits, x.p, x.q)
    if token == "b":
        return _pack(x.marker + 1, _flip(x.digits, x.marker), x.p, x.q)
    if token == "B":
        return _pack(x.marker - 1, _flip(x.digits, x.marker - 1), x.p, x.q)
    raise ValueError("unknown generator %r" % (token,))


def dl_step(x, direction, i, j):
    """One DL(p,q) move along an (i,j)-labelled edge, 'up' or 'dn'."""
    if direction == "up":
        if x.digit(x.marker) != i:
            raise ValueError("no up-edge labelled (%r,%r) here" % (i, j))
        vals = dict(x.digits)
        vals[x.marker] = j
        return _pack(x.marker + 1, vals, x.p, x.q)
    if direction == "dn":
        if x.digit(x.marker - 1) != j:
            raise ValueError("no down-edge labelled (%r,%r) here" % (i, j))
        vals = dict(x.digits)
        vals[x.marker - 1] = i
        return _pack(x.marker - 1, vals, x.p, x.q)
    raise ValueError("direction must be 'up' or 'dn'")


def evaluate_word(word, p=2, q=2):
    """Evaluate a generator word left to right.

    For the lamplighter, the word is a string of a/A/b/B characters
    (whitespace ignored).  For DL, whitespace-separated tokens up:i:j and
    dn:i:j are also accepted.
    """
    x = identity(p, q)
    for tok in word.split() if (" " in word or ":" in word) else word:
        if tok in ("a", "A", "b", "B"):
            x = step(x, tok)
        else:
            parts = tok.split(":")
            if len(parts) != 3 or parts[0] not in ("up", "dn"):
                raise ValueError("bad token %r" % (tok,))
            x = dl_step(x, parts[0], int(parts[1]), int(parts[2]))
    return x


def canonical(x):
    """Canonical form "(n; k1, k2, ...)" (lamplighter) or "(n; k:d, ...)"."""
    if x.p == 2 and x.q == 2:
        parts = ["%d" % k for k, _ in x.digits]
    else:
        parts = ["%d:%d" % (k, v) for k, v in x.digits]
    return "(%d;%s)" % (x.marker, " " + ", ".join(parts) if parts else "")


def height(x):
    return x.marker


GENERATORS = ("a", "b", "A", "B")
GEN_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


def cayley_label_graph():
    """One-vertex alphabet with edges a, b and their inverses A, B."""
    return alphabet([1], {g: (1, 1) for g in GENERATORS}, dict(GEN_INVERSE))


def dl_label_graph(p, q):
    """One-vertex alphabet with an up-edge per digit pair (i,j)."""
    spec = {}
    rev = {}
    for i in range(p):
        for j in range(q):
            spec[("up", i, j)] = (1, 1)
            spec[("dn", i, j)] = (1, 1)
            rev[("up", i, j)] = ("dn", i, j)
            rev[("dn", i, j)] = ("up", i, j)
    return alphabet([1], spec, rev)


def dl_collapse_label(label):
    """The lamplighter reading of a DL(2,2) edge label."""
    direction, i, j = label
    if direction == "up":
        return "a" if i == j else "b"
    return "A" if i == j else "B"


def alphabet_label_graph(symbols, base):
    """Alphabet for graphs decorated by a symbol per vertex: one vertex per
    symbol, one (s, g, t)-edge per symbol pair and base-alphabet edge g."""
    spec = {}
    rev = {} if base.reversal is not None else None
    symbols = sorted(symbols, key=repr)
    for g in base.edge_ids():
        for s in symbols:
            for t in symbols:
                spec[(s, g, t)] = (s, t)
                if rev is not None:
                    rev[(s, g, t)] = (t, base.reversal[g], s)
    return alphabet(symbols, spec, rev)


# -- windows -----------------------------------------------------------------


@dataclass(eq=False)
class Window:
    """A finite induced piece of a Cayley or DL graph, with group points as
    vertex ids."""

    graph: LabelGraph
    kind: str
    params: tuple
    mode: str  # "cayley" or "dl"
    p: int = 2
    q: int = 2

    def points(self):
        return self.graph.vertices()

    def __contains__(self, pt):
        return pt in self.graph.vlabel


def point_neighbors(pt, mode):
    """All Cayley/DL neighbours of a point (whether or not in a window)."""
    if mode == "cayley":
        return [step(pt, g) for g in GENERATORS]
    out = []
    i = pt.digit(pt.marker)
    for j in range(pt.q):
        out.append(dl_step(pt, "up", i, j))
    j = pt.digit(pt.marker - 1)
    for i2 in range(pt.p):
        out.append(dl_step(pt, "dn", i2, j))
    return out


def _cayley_window(points, kind, params, budget):
    if len(points) > budget:
        raise CapacityError("window exceeds %d vertices" % budget)
    a = cayley_label_graph()
    vlabel = {pt: 1 for pt in points}
    edges = {}
    elabel = {}
    rev = {}
    for pt in points:
        for g in ("a", "b"):
            im = step(pt, g)
            if im in vlabel:
                gi = GEN_INVERSE[g]
                edges[(pt, g)] = (pt, im)
                elabel[(pt, g)] = g
                edges[(im, gi)] = (im, pt)
                elabel[(im, gi)] = gi
                rev[(pt, g)] = (im, gi)
                rev[(im, gi)] = (pt, g)
    return LabelGraph(vlabel, edges, elabel, rev, a)


def ball(r, budget=500000):
    """Word-metric ball of radius r around the identity."""
    if r < 0:
        raise ValueError("negative radius")
    seen = {identity()}
    frontier = [identity()]
    for _ in range(r):
        nxt = []
        for pt in frontier:
            for g in GENERATORS:
                im = step(pt, g)
                if im not in seen:
                    seen.add(im)
                    nxt.append(im)
        if len(seen) > budget:
            raise CapacityError("ball exceeds %d vertices" % budget)
        frontier = nxt
    g = _cayley_window(seen, "ball", (r,), budget)
    return Window(g, "ball", (r,), "cayley")


def tetrahedron(lo, hi, budget=500000):
    """All points with marker in [lo,hi] and lamp support inside (lo,hi)."""
    if lo > hi:
        raise ValueError("empty height range")
    positions = list(range(lo, hi))
    if (hi - lo + 1) * 2 ** len(positions) > budget:
        raise CapacityError("tetrahedron exceeds %d vertices" % budget)
    points = []
    for n in range(lo, hi + 1):
        for size in range(len(positions) + 1):
            for supp in itertools.combinations(positions, size):
                points.append(GroupPoint(n, tuple((k, 1) for k in supp)))
    g = _cayley_window(points, "tetra", (lo, hi), budget)
    return Window(g, "tetra", (lo, hi), "cayley")


def dl_window(p, q, lo, hi, budget=500000):
    """The DL(p,q) analogue of a tetrahedron: markers in [lo,hi], digit
    support inside (lo,hi)."""
    if p < 2 or q < 2:
        raise ValueError("p, q must be at least 2")
    if lo > hi:
        raise ValueError("empty height range")
    count = sum(q ** (n - lo) * p ** (hi - n) for n in range(lo, hi + 1))
    if count > budget:
        raise CapacityError("window exceeds %d vertices" % budget)
    points = []
    for n in range(lo, hi + 1):
        below = list(range(lo, n))
        above = list(range(n, hi))
        ranges = [range(q)] * len(below) + [range(p)] * len(above)
        for combo in itertools.product(*ranges):
            digits = tuple((k, v) for k, v in zip(below + above, combo) if v)
            points.append(GroupPoint(n, digits, p, q))
    a = dl_label_graph(p, q)
    vlabel = {pt: 1 for pt in points}
    edges = {}
    elabel = {}
    rev = {}
    for pt in points:
        if pt.marker >= hi:
            continue
        i = pt.digit(pt.marker)
        for j in range(q):
            im = dl_step(pt, "up", i, j)
            if im in vlabel:
                edges[(pt, ("up", i, j))] = (pt, im)
                elabel[(pt, ("up", i, j))] = ("up", i, j)
                edges[(im, ("dn", i, j))] = (im, pt)
                elabel[(im, ("dn", i, j))] = ("dn", i, j)
                rev[(pt, ("up", i, j))] = (im, ("dn", i, j))
                rev[(im, ("dn", i, j))] = (pt, ("up", i, j))
    g = LabelGraph(vlabel, edges, elabel, rev, a)
    return Window(g, "dl", (lo, hi), "dl", p, q)


def boundary_vertices(window):
    """Window vertices with at least one graph neighbour outside."""
    out = set()
    for pt in window.graph.vlabel:
        for im in point_neighbors(pt, window.mode):
            if im not in window.graph.vlabel:
                out.add(pt)
                break
    return out


def interior_vertices(window, d):
    """Vertices all of whose walks of length <= d stay inside the window."""
    current = set(window.graph.vlabel)
    for _ in range(d):
        bad = boundary_vertices(window)
        current = {pt for pt in current
                   if pt not in bad
                   and all(im in current
                           for im in point_neighbors(pt, window.mode)
                           if im in window.graph.vlabel)}
    return current


# -- height-1 cells -----------------------------------------------------------


def cell_points(g):
    """The height-1 cell at g: (g, g ab^-1, g a, g b) for the lamplighter."""
    return (g, multiply(g, evaluate_word("aB")),
            step(g, "a"), step(g, "b"))


def window_cells(window):
    """Base points of complete lamplighter cells inside the window; the base
    of a cell is its lower point with no lamp at the marker position."""
    out = []
    for pt in window.graph.vlabel:
        if pt.digit(pt.marker) != 0:
            continue
        cell = cell_points(pt)
        if all(x in window.graph.vlabel for x in cell):
            out.append(pt)
    return sorted(out, key=repr)


def dl_cell_points(g):
    """The DL cell at a base point g (marker n, digit 0 at position n):
    p lower points followed by q upper points."""
    vals = dict(g.digits)
    lower = []
    for i in range(g.p):
        vals[g.marker] = i
        lower.append(_pack(g.marker, vals, g.p, g.q))
    upper = []
    for j in range(g.q):
        vals[g.marker] = j
        upper.append(_pack(g.marker + 1, vals, g.p, g.q))
    return tuple(lower), tuple(upper)


def dl_window_cells(window):
    out = []
    for pt in window.graph.vlabel:
        if pt.digit(pt.marker) != 0:
            continue
        lower, upper = dl_cell_points(pt)
        if all(x in window.graph.vlabel for x in lower + upper):
            out.append(pt)
    return sorted(out, key=repr)


# -- grid windows ---------------------------------------------------------------


PLANE_DIRS = ("E", "N", "W", "S")
PLANE_INVERSE = {"E": "W", "W": "E", "N": "S", "S": "N"}
PLANE_STEP = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}


def plane_label_graph():
    return alphabet([1], {g: (1, 1) for g in PLANE_DIRS}, dict(PLANE_INVERSE))


QUADRANT_LABELS = ("NE", "NES", "NEW", "NESW")


def quadrant_vertex_label(x, y):
    lab = "NE"
    if y > 0:
        lab += "S"
    if x > 0:
        lab += "W"
    return lab


def quadrant_label_graph():
    """Alphabet for the quarter plane: a vertex knows which of the four
    directions point to more quarter plane."""
    vs = list(QUADRANT_LABELS)
    spec = {}
    rev = {}
    moves = {"E": [("NE", "NEW"), ("NEW", "NEW"), ("NES", "NESW"),
                   ("NESW", "NESW")],
             "N": [("NE", "NES"), ("NES", "NES"), ("NEW", "NESW"),
                   ("NESW", "NESW")]}
    for d, pairs in moves.items():
        di = PLANE_INVERSE[d]
        for s, t in pairs:
            spec[(d, s, t)] = (s, t)
            spec[(di, t, s)] = (t, s)
            rev[(d, s, t)] = (di, t, s)
            rev[(di, t, s)] = (d, s, t)
    return alphabet(vs, spec, rev)


def plane_window(xlo, xhi, ylo, yhi):
    """Grid patch of the plane, over the one-vertex E/N/W/S alphabet."""
    a = plane_label_graph()
    vlabel = {(x, y): 1
              for x in range(xlo, xhi + 1) for y in range(ylo, yhi + 1)}
    edges = {}
    elabel = {}
    rev = {}
    for (x, y) in vlabel:
        for d in ("E", "N"):
            dx, dy = PLANE_STEP[d]
            t = (x + dx, y + dy)
            if t in vlabel:
                di = PLANE_INVERSE[d]
                edges[((x, y), d)] = ((x, y), t)
                elabel[((x, y), d)] = d
                edges[(t, di)] = (t, (x, y))
                elabel[(t, di)] = di
                rev[((x, y), d)] = (t, di)
                rev[(t, di)] = ((x, y), d)
    return LabelGraph(vlabel, edges, elabel, rev, a)


def quadrant_window(w, h):
    """Grid patch [0,w) x [0,h) of the quarter plane, over the quadrant
    alphabet (vertex labels say which directions stay in the quarter)."""
    a = quadrant_label_graph()
    vlabel = {(x, y): quadrant_vertex_label(x, y)
              for x in range(w) for y in range(h)}
    edges = {}
    elabel = {}
    rev = {}
    for (x, y) in sorted(vlabel):
        for d in ("E", "N"):
            dx, dy = PLANE_STEP[d]
            t = (x + dx, y + dy)
            if t in vlabel:
                di = PLANE_INVERSE[d]
                lab = (d, vlabel[(x, y)], vlabel[t])
                labi = (di, vlabel[t], vlabel[(x, y)])
                edges[((x, y), d)] = ((x, y), t)
                elabel[((x, y), d)] = lab
                edges[(t, di)] = (t, (x, y))
                elabel[(t, di)] = labi
                rev[((x, y), d)] = (t, di)
                rev[(t, di)] = ((x, y), d)
    return LabelGraph(vlabel, edges, elabel, rev, a)
