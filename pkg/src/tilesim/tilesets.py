"""Tile systems: Wang tiles and tetrahedron systems on the lamplighter
group, their Diestel-Leader variants, target graphs for hom-shifts, the
conversions between all three, and the concrete builtin systems (the comb,
the one-directional rays, and the sea-level family).

Conventions.  A Wang tile is a 4-tuple of edge colours in direction order
(a, b, a-inverse, b-inverse); two tiles match along an a-edge when the first
coordinate of the tail tile equals the third of the head tile, and likewise
b against fourth.  A tetrahedron system constrains the height-1 cells
(g, g a b^-1, g a, g b); since the same cell is read from both of its lower
points, a constraint set is only meaningful once it is closed under swapping
(positions 1,2) and (3,4), and construction enforces that closure by
intersection.  DL systems constrain the (p+q)-point cells of DL(p,q), lower
points first, ordered by digit value; these cells have a single reading, so
no closure is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools
import random
import shlex
import warnings

from .graphs import LabelGraph, alphabet, skey, _fmt, _parse_token
from .geometry import (GroupPoint, evaluate_word, cayley_label_graph,
                       window_cells, cell_points, dl_window_cells,
                       dl_cell_points)


def _swap(t):
    return (t[1], t[0], t[3], t[2])


@dataclass(eq=True)
class WangTileset:
    """Finite set of diamond tiles over an edge-colour set.

    tiles is an ordered tuple of 4-tuples (a, b, a^-1, b^-1); tile ids are
    positions in it.  seeds pins tiles at points: tuple of (GroupPoint, id).
    """

    colors: frozenset
    tiles: tuple
    seeds: tuple = ()
    names: tuple | None = None

    def __post_init__(self):
        self.colors = frozenset(self.colors)
        self.tiles = tuple(tuple(t) for t in self.tiles)
        self.seeds = tuple(self.seeds)
        for t in self.tiles:
            if len(t) != 4 or any(c not in self.colors for c in t):
                raise ValueError("bad tile %r" % (t,))
        if len(set(self.tiles)) != len(self.tiles):
            raise ValueError("duplicate tiles")
        if self.names is not None and len(self.names) != len(self.tiles):
            raise ValueError("names do not match tiles")
        _check_seeds(self.seeds, len(self.tiles))


@dataclass(eq=True)
class TetraSystem:
    """Vertex colours constrained on height-1 cells.

    mode "cayley": cells are the lamplighter (g, g a b^-1, g a, g b) and
    allowed is closed under the two-base swap (closure by intersection, with
    a warning, since a tuple whose swap is missing can never occur anyway).
    mode "dl": cells are the DL(p,q) cells, p lower points then q upper.
    """

    alphabet: tuple
    allowed: frozenset
    seeds: tuple = ()
    mode: str = "cayley"
    p: int = 2
    q: int = 2
    names: tuple | None = None

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.allowed = frozenset(tuple(t) for t in self.allowed)
        self.seeds = tuple(self.seeds)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate symbols")
        if self.mode not in ("cayley", "dl"):
            raise ValueError("mode must be 'cayley' or 'dl'")
        n = self.arity()
        ok = set(self.alphabet)
        for t in self.allowed:
            if len(t) != n or any(x not in ok for x in t):
                raise ValueError("bad cell tuple %r" % (t,))
        if self.mode == "cayley":
            closed = frozenset(t for t in self.allowed
                               if _swap(t) in self.allowed)
            if closed != self.allowed:
                warnings.warn("cell constraints not swap-closed; dropping "
                              "%d unusable tuples" %
                              (len(self.allowed) - len(closed)))
                self.allowed = closed
        if self.names is not None and len(self.names) != len(self.alphabet):
            raise ValueError("names do not match alphabet")
        _check_seeds(self.seeds, len(self.alphabet))

    def arity(self):
        return 4 if self.mode == "cayley" else self.p + self.q


@dataclass(eq=True)
class DhsTarget:
    """A finite labelled graph as tiling target; tiles are its vertices in
    deterministic order."""

    graph: LabelGraph
    seeds: tuple = ()

    def __post_init__(self):
        self.seeds = tuple(self.seeds)
        _check_seeds(self.seeds, self.graph.num_vertices())

    def tile_vertices(self):
        return self.graph.vertices()


def _check_seeds(seeds, ntiles):
    for pt, idx in seeds:
        if not isinstance(pt, GroupPoint):
            raise ValueError("seed location %r is not a group point" % (pt,))
        if not 0 <= idx < ntiles:
            raise ValueError("seed tile %r out of range" % (idx,))


def tetra_system(alphabet_, allowed, seeds=(), strict=False, mode="cayley",
                 p=2, q=2, names=None):
    """Build a TetraSystem; with strict=True an input that is not already
    swap-closed is rejected instead of being closed."""
    if strict and mode == "cayley":
        allowed = frozenset(tuple(t) for t in allowed)
        if any(_swap(t) not in allowed for t in allowed):
            raise ValueError("cell constraints not swap-closed")
    return TetraSystem(tuple(alphabet_), frozenset(allowed), tuple(seeds),
                       mode, p, q, names)


def tile_count(ts):
    if isinstance(ts, WangTileset):
        return len(ts.tiles)
    if isinstance(ts, TetraSystem):
        return len(ts.alphabet)
    return ts.graph.num_vertices()


def tile_label(ts, idx):
    """Display string for a tile id: its name when one was given."""
    if getattr(ts, "names", None):
        return ts.names[idx]
    if isinstance(ts, WangTileset):
        return repr(ts.tiles[idx])
    if isinstance(ts, TetraSystem):
        return repr(ts.alphabet[idx])
    return repr(ts.tile_vertices()[idx])


def parse_tile_ref(ts, token):
    """A tile id from user input: a 0-based index or a builtin tile name."""
    names = getattr(ts, "names", None)
    if names and token in names:
        return names.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise ValueError("unknown tile %r" % (token,))
    if not 0 <= idx < tile_count(ts):
        raise ValueError("tile id %d out of range" % idx)
    return idx


def decoration_symbols(ts):
    """Concrete per-tile symbols, indexed like tile ids.

    These are the values a decorated window carries as vertex labels:
    tile names when given, otherwise the tiles themselves.
    """
    if isinstance(ts, WangTileset):
        return tuple(ts.names) if ts.names else tuple(ts.tiles)
    if isinstance(ts, TetraSystem):
        return tuple(ts.alphabet)
    return tuple(ts.tile_vertices())


# -- conversions ---------------------------------------------------------------


def wang_to_tetra(w):
    """Cell constraints equivalent to a Wang tileset: the cell colours are
    the tiles themselves and a cell is allowed when its four internal edges
    match."""
    allowed = set()
    for al, ga in itertools.product(w.tiles, repeat=2):
        if al[0] != ga[2]:
            continue
        for be, de in itertools.product(w.tiles, repeat=2):
            if be[0] == de[2] and al[1] == de[3] and be[1] == ga[3]:
                allowed.add((al, be, ga, de))
    return TetraSystem(w.tiles, frozenset(allowed), w.seeds,
                       names=w.names)


def tetra_to_wang(t):
    """Wang tiles equivalent to a cell system: a tile records the cell above
    and the cell below a point, which must agree on the point's colour."""
    if t.mode != "cayley":
        raise ValueError("only lamplighter cell systems convert to tiles")
    if t.seeds:
        raise ValueError("seeds do not transport through this conversion; "
                         "re-seed the result")
    cells = sorted(t.allowed, key=skey)
    tiles = []
    for above in cells:
        for below in cells:
            if above[0] == below[2]:
                tiles.append((above, above, below, _swap(below)))
    return WangTileset(frozenset(cells), tuple(tiles))


def wang_to_dhs(w):
    """The target graph whose homomorphisms from a window are exactly its
    Wang tilings: one vertex per tile, one a/b-edge per matching pair."""
    base = cayley_label_graph()
    vlabel = {t: 1 for t in w.tiles}
    edges = {}
    elabel = {}
    rev = {}
    pairs = {"a": (0, 2), "b": (1, 3)}
    for g, (i, j) in pairs.items():
        gi = {"a": "A", "b": "B"}[g]
        for s in w.tiles:
            for t in w.tiles:
                if s[i] == t[j]:
                    edges[(s, g, t)] = (s, t)
                    elabel[(s, g, t)] = g
                    edges[(t, gi, s)] = (t, s)
                    elabel[(t, gi, s)] = gi
                    rev[(s, g, t)] = (t, gi, s)
                    rev[(t, gi, s)] = (s, g, t)
    graph = LabelGraph(vlabel, edges, elabel, rev, base)
    order = graph.vertices()
    seeds = tuple((pt, order.index(w.tiles[idx])) for pt, idx in w.seeds)
    return DhsTarget(graph, seeds)


def sft_words(gens, n):
    """All words of length at most n over the generator tuple, in (length,
    position) order; patterns are symbol tuples aligned with this list."""
    out = []
    for k in range(n + 1):
        out.extend(itertools.product(gens, repeat=k))
    return out


def sft_to_dhs(gens, n, symbols, allowed):
    """Pattern graph of a word SFT: one vertex per allowed pattern and an
    s-edge P -> P' whenever P' agrees with P shifted by s."""
    words = sft_words(gens, n)
    pos = {w: i for i, w in enumerate(words)}
    short = sft_words(gens, n - 1) if n > 0 else []
    base = alphabet([1], {g: (1, 1) for g in gens})
    allowed = sorted(set(allowed), key=skey)
    for p in allowed:
        if len(p) != len(words) or any(x not in symbols for x in p):
            raise ValueError("bad pattern %r" % (p,))
    vlabel = {p: 1 for p in allowed}
    edges = {}
    elabel = {}
    for p in allowed:
        for s in gens:
            for p2 in allowed:
                if all(p2[pos[w]] == p[pos[(s,) + w]] for w in short):
                    edges[(p, s, p2)] = (p, p2)
                    elabel[(p, s, p2)] = s
    return DhsTarget(LabelGraph(vlabel, edges, elabel, None, base))


def dhs_to_sft(target):
    """Radius-1 word SFT of an oriented target graph: patterns record a
    vertex and one successor choice per generator."""
    g = target.graph
    if g.reversal is not None:
        raise ValueError("expected an oriented target")
    gens = tuple(sorted({g.elabel[e] for e in g.edges}, key=skey))
    succ = {(g.tail(e), g.elabel[e], g.head(e)) for e in g.edges}
    symbols = tuple(g.vertices())
    words = sft_words(gens, 1)
    allowed = set()
    for combo in itertools.product(symbols, repeat=len(words)):
        p = dict(zip(words, combo))
        if all((p[()], s, p[(s,)]) in succ for s in gens):
            allowed.add(combo)
    return gens, 1, symbols, frozenset(allowed)


# -- builtin systems -----------------------------------------------------------


COMB_TILE_NAMES = ("spine", "tooth", "web", "antitooth", "above", "below")


def comb_tileset():
    """Six Wang tiles marking a spine line with teeth rays above and
    antiteeth rays below it."""
    tiles = (("a", "b", "a", "d"),   # spine
             ("t", "b", "s", "b"),   # tooth
             ("s", "o", "s", "o"),   # web
             ("s", "d", "r", "d"),   # antitooth
             ("t", "o", "t", "o"),   # above
             ("r", "o", "r", "o"))   # below
    return WangTileset(frozenset("abdorst"), tiles, names=COMB_TILE_NAMES)


def _bool_quads(rule):
    out = set()
    for t in itertools.product((False, True), repeat=4):
        if rule(*t) and rule(*_swap(t)):
            out.add(t)
    return frozenset(out)


def ray_left_system():
    """Marked points propagate up both ways and continue down one way: the
    marked set is a left-pointing ray bundle."""
    def rule(al, be, ga, de):
        return ((not (al or be) or (ga and de))
                and (not (ga or de) or (al != be)))
    return TetraSystem((False, True), _bool_quads(rule))


def ray_right_system():
    """Mirror of the left ray: up one way, down both ways."""
    def rule(al, be, ga, de):
        return ((not (al or be) or (ga != de))
                and (not (ga or de) or (al and be)))
    return TetraSystem((False, True), _bool_quads(rule))


def product_tileset(t1, t2, joint=None):
    """Componentwise product of two cell systems, filtered by an optional
    joint constraint; the joint is applied in both cell readings so the
    result is swap-closed whenever the factors are.

    joint may be a callable on a pair of component cells, or an explicit
    set of allowed (cell1, cell2) pairs.
    """
    if t1.mode != "cayley" or t2.mode != "cayley":
        raise ValueError("products are for lamplighter cell systems")
    if joint is None:
        ok = lambda c1, c2: True
    elif callable(joint):
        ok = joint
    else:
        table = set(joint)
        ok = lambda c1, c2: (c1, c2) in table
    symbols = tuple((x, y) for x in t1.alphabet for y in t2.alphabet)
    allowed = set()
    for c1 in t1.allowed:
        for c2 in t2.allowed:
            if (ok(c1, c2) and ok(_swap(c1), _swap(c2))):
                allowed.add(tuple(zip(c1, c2)))
    return TetraSystem(symbols, frozenset(allowed))


def lr_system():
    """Left and right rays forced to share their marked line: doubly-marked
    points persist along the a-direction."""
    def joint(c1, c2):
        al = (c1[0], c2[0])
        ga = (c1[2], c2[2])
        return (al == (True, True)) == (ga == (True, True))
    return product_tileset(ray_left_system(), ray_right_system(), joint)


SEA_SYMBOLS = ("NW", "UP", "NE", "SEA", "SW", "DN", "SE")
_LEVEL = {"NW": 1, "UP": 1, "NE": 1, "SEA": 0, "SW": -1, "DN": -1, "SE": -1}


def sea_system():
    """Sea-level cells: a marked level with a binary tree above each column
    and below each row, in free directions."""
    def rule(t):
        al, be, ga, de = t
        if _LEVEL[al] != _LEVEL[be] or _LEVEL[ga] != _LEVEL[de]:
            return False
        if _LEVEL[ga] - _LEVEL[al] not in (0, 1):
            return False
        if al == "SEA" and {ga, de} != {"NW", "NE"}:
            return False
        if ga == "SEA" and {al, be} != {"SW", "SE"}:
            return False
        if _LEVEL[al] == 1 and not (be == al and {ga, de} == {"UP", al}):
            return False
        if _LEVEL[ga] == -1 and not (de == ga and {al, be} == {"DN", ga}):
            return False
        return True

    allowed = {t for t in itertools.product(SEA_SYMBOLS, repeat=4)
               if rule(t) and rule(_swap(t))}
    return TetraSystem(SEA_SYMBOLS, frozenset(allowed))


def sea_level_system():
    """The full sea-level system: the doubly-marked line of lr_system pins
    the tree directions, leaving a rigid grid at the marked level."""
    def joint(c1, c2):
        al_lr, ga_lr = c1[0], c1[2]
        al_s, be_s, ga_s, de_s = c2
        if al_lr[0]:
            if al_s == "SEA" and not (ga_s == "NW" and de_s == "NE"):
                return False
            if al_s == "NW" and ga_s != "NW":
                return False
            if al_s == "NE" and de_s != "NE":
                return False
        if ga_lr[1]:
            if ga_s == "SEA" and not (al_s == "SW" and be_s == "SE"):
                return False
            if ga_s == "SW" and al_s != "SW":
                return False
            if ga_s == "SE" and be_s != "SE":
                return False
        return True
    return product_tileset(lr_system(), sea_system(), joint)


def dl_ray_system(p, q):
    """DL(p,q) version of the left ray: a marked lower point forces every
    upper point, and any marked upper point forces exactly one lower."""
    if p < 2 or q < 2:
        raise ValueError("p, q must be at least 2")
    allowed = set()
    for t in itertools.product((False, True), repeat=p + q):
        lows, ups = t[:p], t[p:]
        if any(lows) and not all(ups):
            continue
        if any(ups) and sum(lows) != 1:
            continue
        allowed.add(t)
    return TetraSystem((False, True), frozenset(allowed), mode="dl", p=p, q=q)


def builtin_tileset(name):
    """A builtin system by name; dl_ray takes parameters as dl_ray:p:q."""
    parts = name.split(":")
    fixed = {"comb": comb_tileset, "ray_left": ray_left_system,
             "ray_right": ray_right_system, "omega_lr": lr_system,
             "omega_sea": sea_system, "omega_full": sea_level_system}
    if parts[0] in fixed:
        if len(parts) != 1:
            raise ValueError("%s takes no parameters" % parts[0])
        return fixed[parts[0]]()
    if parts[0] == "dl_ray":
        if len(parts) != 3:
            raise ValueError("expected dl_ray:p:q")
        return dl_ray_system(int(parts[1]), int(parts[2]))
    raise ValueError("unknown builtin tileset %r" % (name,))


BUILTIN_TILESETS = ("comb", "ray_left", "ray_right", "omega_lr", "omega_sea",
                    "omega_full", "dl_ray:p:q")


# -- reference configurations ---------------------------------------------------


def lamp_runs(pt):
    """Maximal runs of lit lamps, as (lowest, highest) stored positions."""
    runs = []
    for k, _ in pt.digits:
        if runs and runs[-1][1] == k - 1:
            runs[-1][1] = k
        else:
            runs.append([k, k])
    return [tuple(r) for r in runs]


def on_comb_spine_region(pt):
    """Whether the lamp state is a single contiguous run (or no lamps):
    the points where the comb geometry determines the tile."""
    return len(lamp_runs(pt)) <= 1


def comb_configuration(pt):
    """Tile id of the reference comb tiling: spine on the lamp-free line,
    teeth, webs and antiteeth along single lamp runs, background elsewhere."""
    runs = lamp_runs(pt)
    if not runs:
        return 0                                   # spine
    if len(runs) > 1:
        return 4                                   # above (background)
    (low, high), n = runs[0], pt.marker
    if n == high + 1:
        return 1                                   # tooth
    if n == low:
        return 3                                   # antitooth
    if low < n <= high:
        return 2                                   # web
    if n > high + 1:
        return 4                                   # above
    return 5                                       # below


def lr_configuration(pt):
    """The doubly-marked-line colours: (no lamp at or above the marker,
    no lamp below the marker)."""
    return (all(k < pt.marker for k, _ in pt.digits),
            all(k >= pt.marker for k, _ in pt.digits))


def omega_configuration(pt):
    """The unique sea-level configuration seeded at the identity."""
    n = pt.marker
    if n == 0:
        arrow = "SEA"
    elif n > 0:
        vals = [pt.digit(k) for k in range(0, n)]
        if not any(vals):
            arrow = "NW"
        elif all(vals):
            arrow = "NE"
        else:
            arrow = "UP"
    else:
        vals = [pt.digit(k) for k in range(n, 0)]
        if not any(vals):
            arrow = "SW"
        elif all(vals):
            arrow = "SE"
        else:
            arrow = "DN"
    return (lr_configuration(pt), arrow)


# -- window constraint scopes ----------------------------------------------------


_WANG_DIR = {"a": 0, "b": 1, "A": 2, "B": 3}
_WANG_INV = {"a": 2, "b": 3, "A": 0, "B": 1}


def window_scopes(ts, window):
    """Fully-contained constraint scopes of a tileset over a window, as
    (vertex tuple, set of allowed tile-id tuples) pairs, deterministically
    ordered.  Edge scopes are emitted once per reversal orbit; cell scopes
    once per cell."""
    if isinstance(ts, WangTileset):
        if window.mode != "cayley":
            raise ValueError("Wang tiles live on the lamplighter graph")
        out = []
        pair_cache = {}
        for e in window.graph.edge_ids():
            lab = window.graph.elabel[e]
            if lab not in ("a", "b"):
                continue
            if lab not in pair_cache:
                i, j = _WANG_DIR[lab], _WANG_INV[lab]
                pair_cache[lab] = frozenset(
                    (s, t) for s in range(len(ts.tiles))
                    for t in range(len(ts.tiles))
                    if ts.tiles[s][i] == ts.tiles[t][j])
            out.append((window.graph.edges[e], pair_cache[lab]))
        return out
    if isinstance(ts, TetraSystem):
        index = {x: i for i, x in enumerate(ts.alphabet)}
        allowed = frozenset(tuple(index[x] for x in t) for t in ts.allowed)
        if ts.mode == "cayley":
            if window.mode != "cayley":
                raise ValueError("cell system needs a lamplighter window")
            return [(cell_points(base), allowed)
                    for base in window_cells(window)]
        if window.mode != "dl" or (window.p, window.q) != (ts.p, ts.q):
            raise ValueError("DL system needs a DL(%d,%d) window"
                             % (ts.p, ts.q))
        out = []
        for base in dl_window_cells(window):
            lower, upper = dl_cell_points(base)
            out.append((lower + upper, allowed))
        return out
    return _dhs_scopes(ts, window)


def _dhs_scopes(ts, window):
    g = ts.graph
    order = {v: i for i, v in enumerate(g.vertices())}
    by_label = {}
    for e in g.edge_ids():
        by_label.setdefault(g.elabel[e], set()).add(
            (order[g.tail(e)], order[g.head(e)]))
    w = window.graph
    out = []
    done = set()
    for e in w.edge_ids():
        if e in done:
            continue
        if w.reversal is not None:
            done.add(w.reversal[e])
        pairs = by_label.get(w.elabel[e], set())
        out.append((w.edges[e], frozenset(pairs)))
    return out


def vertex_candidates(ts, window, pt):
    """Tile ids a window vertex may carry before any edge or cell
    constraints; only target graphs with vertex labels restrict this."""
    if isinstance(ts, DhsTarget):
        g = ts.graph
        want = window.graph.vlabel[pt]
        return [i for i, v in enumerate(g.vertices()) if g.vlabel[v] == want]
    return list(range(tile_count(ts)))


def tiling_ok(window, ts, assignment, extra_seeds=()):
    """Re-validate an assignment against the raw window constraints."""
    pts = window.points()
    if set(assignment) != set(pts):
        return False
    for pt in pts:
        if assignment[pt] not in vertex_candidates(ts, window, pt):
            return False
    for scope, allowed in window_scopes(ts, window):
        if tuple(assignment[v] for v in scope) not in allowed:
            return False
    for pt, idx in tuple(ts.seeds) + tuple(extra_seeds):
        if pt not in window.graph.vlabel or assignment[pt] != idx:
            return False
    return True


# -- random instances ------------------------------------------------------------


def random_wang_tileset(rng, ncolors=2, ntiles=4):
    """A small random Wang tileset (deterministic under a seeded rng)."""
    colors = tuple("c%d" % i for i in range(ncolors))
    tiles = set()
    guard = 0
    while len(tiles) < ntiles:
        tiles.add(tuple(rng.choice(colors) for _ in range(4)))
        guard += 1
        if guard > 1000:
            break
    return WangTileset(frozenset(colors), tuple(sorted(tiles)))


def random_tetra_system(rng, nsymbols=2, density=0.5):
    """A small random swap-closed cell system."""
    symbols = tuple(range(nsymbols))
    allowed = set()
    for t in itertools.product(symbols, repeat=4):
        if _swap(t) in allowed or rng.random() < density:
            allowed.add(t)
            allowed.add(_swap(t))
    return TetraSystem(symbols, frozenset(allowed))


# -- file format -----------------------------------------------------------------


def tileset_to_text(ts):
    """Line format: kind, colour/alphabet list, one line per tile or cell,
    seeds as generator words.  DL systems add a params line."""
    lines = []
    if isinstance(ts, WangTileset):
        lines.append("kind wang")
        lines.append("colors " + " ".join(_fmt(c)
                                          for c in sorted(ts.colors, key=skey)))
        for t in ts.tiles:
            lines.append("tile " + " ".join(_fmt(c) for c in t))
    elif isinstance(ts, TetraSystem):
        lines.append("kind tetra" if ts.mode == "cayley" else "kind dl")
        if ts.mode == "dl":
            lines.append("params %d %d" % (ts.p, ts.q))
        lines.append("alphabet " + " ".join(_fmt(x) for x in ts.alphabet))
        for t in sorted(ts.allowed, key=skey):
            lines.append("tetra " + " ".join(_fmt(x) for x in t))
    else:
        raise ValueError("cannot serialize %r" % type(ts).__name__)
    for pt, idx in ts.seeds:
        lines.append("seed %s %d" % (shlex.quote(_point_word(pt)), idx))
    return "\n".join(lines) + "\n"


def _point_word(pt):
    """A generator word evaluating to the point.

    Lamplighter: walk to each lit lamp, light it, walk to the marker.
    DL: descend to the lowest needed level writing zeros, ascend writing the
    below-marker digits, then descend to the marker writing the rest.
    """
    if (pt.p, pt.q) == (2, 2):
        word = []
        here = 0
        for k, _ in pt.digits:
            word.append("a" * (k - here) if k >= here else "A" * (here - k))
            word.append("bA")
            here = k
        k = pt.marker
        word.append("a" * (k - here) if k >= here else "A" * (here - k))
        return "".join(word) or "aA"
    m = pt.marker
    positions = [k for k, _ in pt.digits]
    lo = min([0, m] + positions)
    hi = max([0, m] + [k + 1 for k in positions])
    toks = ["dn:0:0"] * (0 - lo)
    for k in range(lo, hi):
        toks.append("up:0:%d" % (pt.digit(k) if k < m else 0))
    for k in range(hi - 1, m - 1, -1):
        toks.append("dn:%d:0" % pt.digit(k))
    return " ".join(toks) or "up:0:0 dn:0:0"


def tileset_from_text(text):
    kind = None
    colors = None
    symbols = None
    p = q = 2
    tiles = []
    seeds = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = shlex.split(line)
        key, rest = toks[0], toks[1:]
        if key == "kind":
            kind = rest[0]
            if kind not in ("wang", "tetra", "dl"):
                raise ValueError("unknown kind %r" % (kind,))
        elif key == "params":
            p, q = int(rest[0]), int(rest[1])
        elif key == "colors":
            colors = [_parse_token(t) for t in rest]
        elif key == "alphabet":
            symbols = [_parse_token(t) for t in rest]
        elif key in ("tile", "tetra"):
            tiles.append(tuple(_parse_token(t) for t in rest))
        elif key == "seed":
            seeds.append((rest[0], int(rest[1])))
        else:
            raise ValueError("bad tileset line: %r" % raw)
    placed = tuple((evaluate_word(w, p, q), idx) for w, idx in seeds)
    if kind == "wang":
        if colors is None:
            raise ValueError("missing colors line")
        return WangTileset(frozenset(colors), tuple(tiles), placed)
    if kind in ("tetra", "dl"):
        if symbols is None:
            raise ValueError("missing alphabet line")
        mode = "cayley" if kind == "tetra" else "dl"
        return TetraSystem(tuple(symbols), frozenset(tiles), placed,
                           mode, p, q)
    raise ValueError("missing kind line")
