"""Simulators: finite translation devices between labelled-graph alphabets.

A simulator from alphabet A to alphabet B is a finite graph carrying two
labellings: one over the path subdivision of B (so each state either sits
over a B-vertex, a "settled" state, or over an edge midpoint, an "in
transit" state) and one over A.  Applying a simulator to a window labelled
over A pulls the window back along the A-labelling and flattens the result:
coherent chains of transit states collapse into single B-edges between
settled pairs.

The same data can be repackaged as a graph-walking automaton: one
relabelling of the A-vertices plus, per B-edge, a finite word acceptor whose
accepted walks through the window trace out the simulated edges.  Both
directions of that repackaging live here, together with simulator
composition and the concrete simulators the rest of the package uses.

Everything is finite and windows have boundaries, so every operation that
walks a window also reports which output vertices may be missing edges
because a walk left the window.
"""

from __future__ import annotations

from dataclasses import dataclass
import shlex

from .graphs import (
    LabelGraph,
    Morphism,
    alpha_pullback,
    base_of_subdivision,
    flat,
    labelling_morphism,
    path_subdivision,
    skey,
    vertex_blowup,
    _dot_escape,
    _fmt,
    _parse_token,
)
from .geometry import (
    Window,
    alphabet_label_graph,
    boundary_vertices,
    cayley_label_graph,
    dl_label_graph,
    plane_label_graph,
    quadrant_label_graph,
    quadrant_vertex_label,
    PLANE_STEP,
)
from .tilesets import decoration_symbols, comb_tileset, sea_level_system


@dataclass
class Simulator:
    """A finite graph with two labellings.

    graph: labelled over path_subdivision(B) for the target alphabet B.
    alpha: a second labelling of the same graph, into the source alphabet A.
    names: optional display tags per state (used only by the DOT export).
    """

    graph: LabelGraph
    alpha: Morphism
    names: dict | None = None

    def __post_init__(self):
        if self.alpha.domain != self.graph:
            raise ValueError("alpha does not label the simulator graph")
        bstar = self.graph.label_graph
        if bstar is None:
            raise ValueError("simulator graph carries no target labelling")
        if bstar != path_subdivision(base_of_subdivision(bstar)):
            raise ValueError("target labelling is not over a subdivision")

    @property
    def beta(self):
        """The structural labelling into the subdivided target alphabet."""
        return labelling_morphism(self.graph)

    def source_alphabet(self):
        return self.alpha.codomain

    def target_alphabet(self):
        return base_of_subdivision(self.graph.label_graph)

    def num_states(self):
        return self.graph.num_vertices()


def identity_simulator(a):
    """The do-nothing simulator from an alphabet to itself: one settled
    state per vertex, one (0,e,0) edge per alphabet edge."""
    astar = path_subdivision(a)
    vlabel = {v: ("v", v) for v in a.vertices()}
    elabel = {e: (0, e, 0) for e in a.edges}
    rev = dict(a.reversal) if a.reversal is not None else None
    g = LabelGraph(vlabel, dict(a.edges), elabel, rev, astar)
    alpha = Morphism({v: v for v in a.vlabel}, {e: e for e in a.edges}, g, a)
    return Simulator(g, alpha)


def blowup_simulator(a, k):
    """Simulator from a to its vertex blow-up a^k; applying it blows up the
    window.  k maps vertices of a to copy counts."""
    ak = vertex_blowup(a, k)
    akstar = path_subdivision(ak)
    vlabel = {v: ("v", v) for v in ak.vertices()}
    elabel = {e: (0, e, 0) for e in ak.edges}
    rev = dict(ak.reversal) if ak.reversal is not None else None
    g = LabelGraph(vlabel, dict(ak.edges), elabel, rev, akstar)
    alpha = Morphism({(v, i): v for (v, i) in ak.vlabel},
                     {(i, e, j): e for (i, e, j) in ak.edges}, g, a)
    return Simulator(g, alpha)


def _window_graph(window, frontier):
    """Coerce a Window or bare LabelGraph plus optional frontier override."""
    if isinstance(window, Window):
        graph = window.graph
        if frontier is None:
            frontier = boundary_vertices(window)
    else:
        graph = window
        if frontier is None:
            frontier = ()
    return graph, set(frontier)


def apply_simulator(window, s, frontier=None):
    """Translate a window labelled over the simulator's source alphabet.

    Returns (graph, incomplete): a graph over the target alphabet whose
    vertices are (window vertex, settled state) pairs, plus the set of
    output vertices that may be missing edges because a coherent chain ran
    into the frontier.  The frontier defaults to the window boundary for a
    Window and to the empty set for a bare graph.
    """
    graph, frontier = _window_graph(window, frontier)
    if graph.label_graph != s.alpha.codomain:
        raise ValueError("window labels do not match the simulator source")
    pb = alpha_pullback(graph, s.graph, s.alpha)
    pb_frontier = {uv for uv in pb.vlabel if uv[0] in frontier}
    return flat(pb, frontier=pb_frontier)


# -- composition --------------------------------------------------------------


def subdivide_morphism(m):
    """The morphism induced between path subdivisions."""
    dom = path_subdivision(m.domain)
    cod = path_subdivision(m.codomain)
    vmap = {}
    for v in m.domain.vertices():
        vmap[("v", v)] = ("v", m.vmap[v])
    emap = {}
    for e in m.domain.edge_ids():
        vmap[("e", m.domain.edge_orbit(e))] = \
            ("e", m.codomain.edge_orbit(m.emap[e]))
        for i in (0, 1):
            for j in (0, 1):
                emap[(i, e, j)] = (i, m.emap[e], j)
    return Morphism(vmap, emap, dom, cod)


def compose_simulators(s, t):
    """The simulator that applies s and then t in one pass.

    States are pairs (state of s, cell of the subdivided t-graph): while s
    crosses one of its edges, t advances by half-transitions, and the pair
    is in transit whenever either component is.  Double subdivision tags
    (i,(i',c,j'),j) collapse to (max(i,i'), c, max(j,j')).
    """
    if base_of_subdivision(s.graph.label_graph) != t.alpha.codomain:
        raise ValueError("simulator targets do not chain")
    tsub = subdivide_morphism(t.alpha)
    u0 = alpha_pullback(s.graph, tsub.domain, tsub)
    cstar = t.graph.label_graph
    c = base_of_subdivision(cstar)

    def retag_vertex(lab):
        kind, x = lab
        if kind == "v":
            return x
        c0 = x[1]
        if c.reversal is None:
            return ("e", c0)
        return ("e", min(c0, c.reversal[c0], key=skey))

    def retag_edge(lab):
        i, (i2, c0, j2), j = lab
        return (max(i, i2), c0, max(j, j2))

    vlabel = {uv: retag_vertex(u0.vlabel[uv]) for uv in u0.vlabel}
    elabel = {ee: retag_edge(u0.elabel[ee]) for ee in u0.edges}
    rev = dict(u0.reversal) if u0.reversal is not None else None
    graph = LabelGraph(vlabel, dict(u0.edges), elabel, rev, cstar)
    alpha = Morphism({uv: s.alpha.vmap[uv[0]] for uv in vlabel},
                     {ee: s.alpha.emap[ee[0]] for ee in elabel},
                     graph, s.alpha.codomain)
    return Simulator(graph, alpha)


# -- graph-walking automata ----------------------------------------------------


@dataclass
class GwaAutomaton:
    """A nondeterministic acceptor whose letters are source-alphabet edges.
    Initial and final states must be disjoint, so accepted runs are
    nonempty."""

    states: frozenset
    initial: frozenset
    final: frozenset
    transitions: frozenset  # of (state, letter, state) triples

    def __post_init__(self):
        self.states = frozenset(self.states)
        self.initial = frozenset(self.initial)
        self.final = frozenset(self.final)
        self.transitions = frozenset(self.transitions)
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("initial or final states not among the states")
        if self.initial & self.final:
            raise ValueError("initial and final states must be disjoint")
        for (q, _, q2) in self.transitions:
            if q not in self.states or q2 not in self.states:
                raise ValueError("transition through unknown state")


@dataclass
class Gwa:
    """A graph-walking translator: a partial relabelling of source-alphabet
    vertices (None marking vertices that vanish) plus one automaton per
    target edge whose accepted walks become the simulated edges."""

    lam: dict       # source vertex -> target vertex or None
    machines: dict  # target edge -> GwaAutomaton
    source: LabelGraph
    target: LabelGraph

    def __post_init__(self):
        if set(self.lam) != set(self.source.vlabel):
            raise ValueError("lam is not total on source vertices")
        for w in self.lam.values():
            if w is not None and w not in self.target.vlabel:
                raise ValueError("lam image %r missing from target" % (w,))
        if set(self.machines) != set(self.target.edges):
            raise ValueError("need exactly one machine per target edge")
        for m in self.machines.values():
            for (_, letter, _) in m.transitions:
                if letter not in self.source.edges:
                    raise ValueError("letter %r is not a source edge"
                                     % (letter,))


def _tail_index(graph):
    by_tail = {}
    for e, (t, _) in graph.edges.items():
        by_tail.setdefault(t, []).append(e)
    return by_tail


def _compile_machine(machine):
    trans = {}
    live = set()
    for (q, letter, q2) in machine.transitions:
        trans.setdefault((q, letter), []).append(q2)
        live.add(q)
    return trans, live


def _run(graph, by_tail, machine, trans, live, u, boundary):
    touched = u in boundary
    seen = {(u, q) for q in machine.initial}
    queue = list(seen)
    out = set()
    while queue:
        v, q = queue.pop()
        for e in by_tail.get(v, ()):
            for q2 in trans.get((q, graph.elabel[e]), ()):
                w = graph.head(e)
                if (w, q2) in seen:
                    continue
                seen.add((w, q2))
                queue.append((w, q2))
                if w in boundary and (q2 not in machine.final or q2 in live):
                    touched = True
                if q2 in machine.final:
                    out.add(w)
    return out, touched


def run_gwa(graph, machine, u, boundary=()):
    """Successor vertices of u under one automaton: every v reachable by a
    walk from u spelling an accepted word.  Also reports whether the search
    touched the boundary mid-run, in which case the set may be incomplete.

    graph may be a Window (boundary then defaults to its boundary vertices)
    or a bare LabelGraph with an explicit boundary.
    """
    graph, boundary = _window_graph(graph, boundary or None)
    trans, live = _compile_machine(machine)
    return _run(graph, _tail_index(graph), machine, trans, live, u, boundary)


def gwa_simulated_graph(graph, gwa, boundary=()):
    """Run every machine from every surviving vertex.

    Returns (simulated graph over the target alphabet, incomplete sources).
    The output is oriented: each accepted run contributes one directed
    edge.  Runs landing on a vertex whose relabelling does not match the
    machine's edge head are ignored; a well-formed walker never produces
    them.
    """
    if graph.label_graph != gwa.source:
        raise ValueError("graph labels do not match the walker source")
    boundary = set(boundary)
    vlabel = {}
    for u in graph.vertices():
        w = gwa.lam[graph.vlabel[u]]
        if w is not None:
            vlabel[u] = w
    by_tail = _tail_index(graph)
    by_target_tail = {}
    for e in gwa.target.edge_ids():
        by_target_tail.setdefault(gwa.target.tail(e), []).append(e)
    compiled = {e: _compile_machine(m) for e, m in gwa.machines.items()}
    edges = {}
    elabel = {}
    incomplete = set()
    for u in sorted(vlabel, key=skey):
        for e in by_target_tail.get(vlabel[u], ()):
            trans, live = compiled[e]
            succ, touched = _run(graph, by_tail, gwa.machines[e],
                                 trans, live, u, boundary)
            if touched:
                incomplete.add(u)
            for v in succ:
                if vlabel.get(v) == gwa.target.head(e):
                    edges[(u, e, v)] = (u, v)
                    elabel[(u, e, v)] = e
    out = LabelGraph(vlabel, edges, elabel, None, gwa.target)
    return out, frozenset(incomplete)


def _state_copies(s):
    """Simulator states grouped by source label, in deterministic order."""
    copies = {}
    for v in s.graph.vertices():
        copies.setdefault(s.alpha.vmap[v], []).append(v)
    return copies


def simulator_to_gwa(s):
    """Unroll a simulator into a walker over the blown-up source alphabet.

    Each source vertex gets one copy per simulator state carried over it;
    the copy indices baked into the blown-up edge labels make accepted runs
    correspond exactly to coherent chains.  Returns (gwa, copy counts).
    """
    a = s.alpha.codomain
    b = base_of_subdivision(s.graph.label_graph)
    copies = _state_copies(s)
    k = {lab: len(copies.get(lab, ())) for lab in a.vlabel}
    ak = vertex_blowup(a, k)
    lam = {}
    for (lab, i) in ak.vlabel:
        blab = s.graph.vlabel[copies[lab][i]]
        lam[(lab, i)] = blab[1] if blab[0] == "v" else None
    idx = {}
    for vs in copies.values():
        for i, v in enumerate(vs):
            idx[v] = i
    by_beta = {}
    for es in s.graph.edge_ids():
        by_beta.setdefault(s.graph.elabel[es], []).append(es)
    machines = {}
    for e in b.edge_ids():
        orb = b.edge_orbit(e)
        states = set()
        initial = set()
        final = set()
        for v in s.graph.vertices():
            blab = s.graph.vlabel[v]
            if blab == ("v", b.tail(e)):
                states.add((v, 1))
                initial.add((v, 1))
            if blab == ("e", orb):
                states.add((v, 2))
            if blab == ("v", b.head(e)):
                states.add((v, 3))
                final.add((v, 3))
        transitions = set()
        for i in (0, 1):
            for j in (0, 1):
                for es in by_beta.get((i, e, j), ()):
                    t, h = s.graph.edges[es]
                    letter = (idx[t], s.alpha.emap[es], idx[h])
                    transitions.add(((t, 1 + i), letter, (h, 3 - j)))
        machines[e] = GwaAutomaton(states, initial, final, transitions)
    return Gwa(lam, machines, ak, b), k


def _alive_states(gwa, machine, e):
    """States lying on some complete run of the machine for edge e: forward
    reachable from a legal entry and backward reachable from a legal exit."""
    et, eh = gwa.target.edges[e]
    succ = {}
    pred = {}
    entries = set()
    exits = set()
    for (q, letter, q2) in machine.transitions:
        succ.setdefault(q, set()).add(q2)
        pred.setdefault(q2, set()).add(q)
        at, ah = gwa.source.edges[letter]
        if q in machine.initial and gwa.lam[at] == et:
            entries.add(q2)
        if q2 in machine.final and gwa.lam[ah] == eh:
            exits.add(q)

    def closure(start, step):
        seen = set(start)
        queue = list(start)
        while queue:
            q = queue.pop()
            for q2 in step.get(q, ()):
                if q2 not in seen:
                    seen.add(q2)
                    queue.append(q2)
        return seen

    return closure(entries, succ) & closure(exits, pred)


def gwa_to_simulator(gwa):
    """Repackage a walker as a simulator.

    Surviving source vertices become settled states; each machine state
    that some complete run passes through becomes a transit state over the
    machine's edge (states no complete run visits are dropped, so a walker
    with only one-step runs yields a simulator with only (0,e,0) edges).
    The result is oriented: runs have a direction.
    """
    a, b = gwa.source, gwa.target
    bstar = path_subdivision(b)
    vlabel = {}
    avmap = {}
    for u in a.vertices():
        if gwa.lam[u] is not None:
            vlabel[("lam", u)] = ("v", gwa.lam[u])
            avmap[("lam", u)] = u
    edges = {}
    elabel = {}
    aemap = {}
    for e in b.edge_ids():
        machine = gwa.machines[e]
        orb = b.edge_orbit(e)
        et, eh = b.edges[e]
        alive = _alive_states(gwa, machine, e)
        forced = {}

        def force(q, w):
            if forced.setdefault(q, w) != w:
                raise ValueError("machine state %r would need two source "
                                 "labels" % (q,))

        def add(tag, tr, tail, head, blab, aedge):
            eid = (tag, e, tr)
            edges[eid] = (tail, head)
            elabel[eid] = blab
            aemap[eid] = aedge

        for tr in sorted(machine.transitions, key=skey):
            q, aedge, q2 = tr
            at, ah = a.edges[aedge]
            enters = q in machine.initial and gwa.lam[at] == et
            leaves = q2 in machine.final and gwa.lam[ah] == eh
            if enters and leaves:
                add("full", tr, ("lam", at), ("lam", ah), (0, e, 0), aedge)
            if enters and q2 in alive:
                add("in", tr, ("lam", at), ("q", e, q2), (0, e, 1), aedge)
                force(q2, ah)
            if q in alive and q2 in alive:
                add("mid", tr, ("q", e, q), ("q", e, q2), (1, e, 1), aedge)
                force(q, at)
                force(q2, ah)
            if q in alive and leaves:
                add("out", tr, ("q", e, q), ("lam", ah), (1, e, 0), aedge)
                force(q, at)
        for q in sorted(forced, key=skey):
            vlabel[("q", e, q)] = ("e", orb)
            avmap[("q", e, q)] = forced[q]
    graph = LabelGraph(vlabel, edges, elabel, None, bstar)
    alpha = Morphism(avmap, aemap, graph, a)
    return Simulator(graph, alpha)


def apply_simulator_gwa(window, s, frontier=None):
    """Apply a simulator by the walker route: blow up the window, run the
    unrolled walker, and rename blown copies back to (point, state) pairs.
    Output matches apply_simulator up to parallel-edge bookkeeping.
    """
    graph, frontier = _window_graph(window, frontier)
    if graph.label_graph != s.alpha.codomain:
        raise ValueError("window labels do not match the simulator source")
    gwa, k = simulator_to_gwa(s)
    blown = vertex_blowup(graph, k)
    boundary = {(w, i) for (w, i) in blown.vlabel if w in frontier}
    sim, incomplete = gwa_simulated_graph(blown, gwa, boundary)
    copies = _state_copies(s)

    def rename(wi):
        w, i = wi
        return (w, copies[graph.vlabel[w]][i])

    return (rename_vertices(sim, rename),
            frozenset(rename(x) for x in incomplete))


# -- decorated windows ---------------------------------------------------------


def relabel_graph(g, symbol_of, symbols):
    """Redecorate a labelled graph by a symbol per vertex; edge labels
    become (tail symbol, old label, head symbol) over the matching decorated
    alphabet."""
    a = alphabet_label_graph(tuple(symbols), g.label_graph)
    vlabel = {v: symbol_of(v) for v in g.vlabel}
    elabel = {e: (vlabel[t], g.elabel[e], vlabel[h])
              for e, (t, h) in g.edges.items()}
    rev = dict(g.reversal) if g.reversal is not None else None
    return LabelGraph(vlabel, dict(g.edges), elabel, rev, a)


def decorate_window(window, ts, assignment):
    """A copy of the window whose vertex labels are the tile symbols of an
    assignment (point -> tile id)."""
    symbols = decoration_symbols(ts)
    graph = window.graph if isinstance(window, Window) else window
    return relabel_graph(graph, lambda v: symbols[assignment[v]], symbols)


def patch_frontier(g):
    """Frontier of a bare grid patch: vertices whose out-degree falls short
    of what their label promises (4 in the plane, one per letter of a
    quarter-plane label)."""
    deg = {v: 0 for v in g.vlabel}
    for (t, _) in g.edges.values():
        deg[t] += 1
    out = set()
    for v, lab in g.vlabel.items():
        expected = 4 if lab == 1 else len(lab)
        if deg[v] < expected:
            out.add(v)
    return out


def plane_patch(points):
    """The plane-labelled grid graph induced on a set of (x, y) points."""
    a = plane_label_graph()
    vlabel = {p: 1 for p in points}
    edges = {}
    elabel = {}
    rev = {}
    for (x, y) in sorted(vlabel):
        for d in ("E", "N"):
            dx, dy = PLANE_STEP[d]
            t = (x + dx, y + dy)
            if t in vlabel:
                di = {"E": "W", "N": "S"}[d]
                edges[((x, y), d)] = ((x, y), t)
                elabel[((x, y), d)] = d
                edges[(t, di)] = (t, (x, y))
                elabel[(t, di)] = di
                rev[((x, y), d)] = (t, di)
                rev[(t, di)] = ((x, y), d)
    return LabelGraph(vlabel, edges, elabel, rev, a)


def quadrant_patch(points):
    """The quarter-plane-labelled grid graph induced on points of N x N."""
    a = quadrant_label_graph()
    vlabel = {p: quadrant_vertex_label(*p) for p in points}
    edges = {}
    elabel = {}
    rev = {}
    for (x, y) in sorted(vlabel):
        for d in ("E", "N"):
            dx, dy = PLANE_STEP[d]
            t = (x + dx, y + dy)
            if t in vlabel:
                di = {"E": "W", "N": "S"}[d]
                lab = (d, vlabel[(x, y)], vlabel[t])
                edges[((x, y), d)] = ((x, y), t)
                elabel[((x, y), d)] = lab
                edges[(t, di)] = (t, (x, y))
                elabel[(t, di)] = (di, vlabel[t], vlabel[(x, y)])
                rev[((x, y), d)] = (t, di)
                rev[(t, di)] = ((x, y), d)
    return LabelGraph(vlabel, edges, elabel, rev, a)


# -- comparisons ---------------------------------------------------------------


def edge_triples(g, loops=True):
    """The set of (tail, label, head) triples of a graph."""
    out = set()
    for e, (t, h) in g.edges.items():
        if not loops and t == h:
            continue
        out.add((t, g.elabel[e], h))
    return frozenset(out)


def rename_vertices(g, fn):
    """Rebuild a graph through an injective vertex renaming; edge ids become
    (tail, label, head) triples, merging parallel duplicates."""
    vmap = {v: fn(v) for v in g.vlabel}
    if len(set(vmap.values())) != len(vmap):
        raise ValueError("vertex renaming is not injective")
    vlabel = {vmap[v]: lab for v, lab in g.vlabel.items()}
    edges = {}
    elabel = {}
    witness = {}
    for e, (t, h) in g.edges.items():
        eid = (vmap[t], g.elabel[e], vmap[h])
        edges[eid] = (vmap[t], vmap[h])
        elabel[eid] = g.elabel[e]
        if g.reversal is not None:
            rl = g.elabel[g.reversal[e]]
            if witness.setdefault(eid, rl) != rl:
                raise ValueError("reversal label ambiguous under renaming")
    rev = None
    if g.reversal is not None:
        rev = {(t, lab, h): (h, witness[(t, lab, h)], t)
               for (t, lab, h) in edges}
    return LabelGraph(vlabel, edges, elabel, rev, g.label_graph)


# -- the concrete simulators -----------------------------------------------------


class _SimBuilder:
    """Accumulates states and drawn edges; every drawn edge gets its
    reversal added automatically (both alphabets must be unoriented)."""

    def __init__(self, a, b):
        self.a = a
        self.bstar = path_subdivision(b)
        self.vlabel = {}
        self.avmap = {}
        self.edges = {}
        self.elabel = {}
        self.aemap = {}
        self.rev = {}

    def state(self, sid, alab, blab):
        self.vlabel[sid] = blab
        self.avmap[sid] = alab

    def edge(self, eid, t, h, alab, blab):
        rid = ("r", eid)
        self.edges[eid] = (t, h)
        self.elabel[eid] = blab
        self.aemap[eid] = alab
        self.edges[rid] = (h, t)
        self.elabel[rid] = self.bstar.reversal[blab]
        self.aemap[rid] = self.a.reversal[alab]
        self.rev[eid] = rid
        self.rev[rid] = eid

    def build(self, names=None):
        g = LabelGraph(self.vlabel, self.edges, self.elabel, self.rev,
                       self.bstar)
        return Simulator(g, Morphism(self.avmap, self.aemap, g, self.a),
                         names)


def quadrant_to_plane():
    """Fold a quarter-plane-labelled graph out to a whole plane.

    Nine states, one per sign pair: moving east in the quarter plane moves
    east or west in the plane depending on the tracked sign of x, and the
    walk branches both ways on the axis; same for north/south.
    """
    bld = _SimBuilder(quadrant_label_graph(), plane_label_graph())

    def qlab(i, j):
        return "NE" + ("S" if j else "") + ("W" if i else "")

    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            bld.state((i, j), qlab(i, j), ("v", 1))
    for j in (-1, 0, 1):
        lab0, lab1 = qlab(0, j), qlab(1, j)
        bld.edge(((0, j), (1, j), "E"), (0, j), (1, j),
                 ("E", lab0, lab1), (0, "E", 0))
        bld.edge(((0, j), (-1, j), "E"), (0, j), (-1, j),
                 ("E", lab0, lab1), (0, "W", 0))
        bld.edge(((1, j), (1, j), "E"), (1, j), (1, j),
                 ("E", lab1, lab1), (0, "E", 0))
        bld.edge(((-1, j), (-1, j), "E"), (-1, j), (-1, j),
                 ("E", lab1, lab1), (0, "W", 0))
    for i in (-1, 0, 1):
        lab0, lab1 = qlab(i, 0), qlab(i, 1)
        bld.edge(((i, 0), (i, 1), "N"), (i, 0), (i, 1),
                 ("N", lab0, lab1), (0, "N", 0))
        bld.edge(((i, 0), (i, -1), "N"), (i, 0), (i, -1),
                 ("N", lab0, lab1), (0, "S", 0))
        bld.edge(((i, 1), (i, 1), "N"), (i, 1), (i, 1),
                 ("N", lab1, lab1), (0, "N", 0))
        bld.edge(((i, -1), (i, -1), "N"), (i, -1), (i, -1),
                 ("N", lab1, lab1), (0, "S", 0))
    return bld.build()


# Comb states in transit, as (circuit, stage) pairs, with the comb tile
# their stage sits on.  The raise circuit climbs a tooth one notch; the
# lower circuit slides an antitooth one notch down.
_COMB_RAISE = (("turn", "antitooth"), ("down", "web"), ("spine", "spine"),
               ("cross", "antitooth"), ("up", "web"), ("tooth", "tooth"))
_COMB_LOWER = (("turn", "tooth"), ("up", "web"), ("spine", "spine"),
               ("cross", "tooth"), ("down", "web"), ("land", "antitooth"))


def comb_to_plane():
    """Simulate a plane from the reference comb decoration.

    Teeth rows track x > 0 and antiteeth rows x < 0; east/west moves are
    single lamplighter steps along a row, while north/south moves walk a
    hexagonal circuit over the neighbouring web and spine tiles.
    """
    a = alphabet_label_graph(decoration_symbols(comb_tileset()),
                             cayley_label_graph())
    bld = _SimBuilder(a, plane_label_graph())
    for tile in ("spine", "tooth", "antitooth"):
        bld.state(tile, tile, ("v", 1))
    for stage, tile in _COMB_RAISE:
        bld.state(("raise", stage), tile, ("e", "N"))
    for stage, tile in _COMB_LOWER:
        bld.state(("lower", stage), tile, ("e", "N"))

    def draw(t, h, gen, blab):
        alab = (bld.avmap[t], gen, bld.avmap[h])
        bld.edge((t, h, gen), t, h, alab, blab)

    draw("spine", "tooth", "b", (0, "E", 0))
    draw("spine", "spine", "a", (0, "N", 0))
    draw("antitooth", "spine", "b", (0, "E", 0))
    draw("antitooth", "antitooth", "b", (0, "E", 0))
    draw("tooth", "tooth", "b", (0, "E", 0))
    # the raise circuit: A (down the tooth), b (cross the gap), a* (back
    # up), b (onto the raised tooth)
    draw("tooth", ("raise", "turn"), "A", (0, "N", 1))
    draw("tooth", ("raise", "down"), "A", (0, "N", 1))
    draw(("raise", "down"), ("raise", "turn"), "A", (1, "N", 1))
    draw(("raise", "down"), ("raise", "down"), "A", (1, "N", 1))
    draw(("raise", "turn"), ("raise", "spine"), "b", (1, "N", 1))
    draw(("raise", "turn"), ("raise", "cross"), "b", (1, "N", 1))
    draw(("raise", "cross"), ("raise", "up"), "a", (1, "N", 1))
    draw(("raise", "cross"), ("raise", "tooth"), "a", (1, "N", 1))
    draw(("raise", "up"), ("raise", "up"), "a", (1, "N", 1))
    draw(("raise", "up"), ("raise", "tooth"), "a", (1, "N", 1))
    draw(("raise", "tooth"), "tooth", "b", (1, "N", 0))
    draw(("raise", "spine"), "tooth", "b", (1, "N", 0))
    # the lower circuit mirrors it below the spine: a* (up the antitooth),
    # B (cross), A* (down), B (onto the lowered antitooth)
    draw("antitooth", ("lower", "turn"), "a", (0, "S", 1))
    draw("antitooth", ("lower", "up"), "a", (0, "S", 1))
    draw(("lower", "up"), ("lower", "turn"), "a", (1, "S", 1))
    draw(("lower", "up"), ("lower", "up"), "a", (1, "S", 1))
    draw(("lower", "turn"), ("lower", "spine"), "B", (1, "S", 1))
    draw(("lower", "turn"), ("lower", "cross"), "B", (1, "S", 1))
    draw(("lower", "cross"), ("lower", "down"), "A", (1, "S", 1))
    draw(("lower", "cross"), ("lower", "land"), "A", (1, "S", 1))
    draw(("lower", "down"), ("lower", "down"), "A", (1, "S", 1))
    draw(("lower", "down"), ("lower", "land"), "A", (1, "S", 1))
    draw(("lower", "land"), "antitooth", "B", (1, "S", 0))
    draw(("lower", "spine"), "antitooth", "B", (1, "S", 0))
    return bld.build()


_QUAD_OF = {(True, True): "NE", (True, False): "NES",
            (False, True): "NEW", (False, False): "NESW"}


def sea_to_quadrant():
    """Simulate the quarter plane from the sea-level decoration.

    Marker-zero points are grid points; an east step is the binary
    increment walk b^t a B A^t through the lamps above the marker and a
    north step is its mirror below.  Each circuit is instantiated once per
    quarter-plane edge and fanned out over the four line-colour pairs.
    """
    ts = sea_level_system()
    a = alphabet_label_graph(ts.alphabet, cayley_label_graph())
    b = quadrant_label_graph()
    bld = _SimBuilder(a, b)
    inv_quad = {v: k for k, v in _QUAD_OF.items()}
    pairs = sorted(_QUAD_OF)
    for p in pairs:
        bld.state(("sea", p), (p, "SEA"), ("v", _QUAD_OF[p]))
    families = (("east", "E", "NW", "a", "b"),
                ("north", "N", "SW", "A", "B"))
    slots = ("carry", "flip", "back")
    for fam, d, arrow, x, y in families:
        xi = {"a": "A", "A": "a", "b": "B", "B": "b"}[x]
        yi = {"a": "A", "A": "a", "b": "B", "B": "b"}[y]
        for (e, (q1, q2)) in [(eid, eid[1:]) for eid in b.edge_ids()
                              if eid[0] == d]:
            p1, p2 = inv_quad[q1], inv_quad[q2]
            sea1, sea2 = ("sea", p1), ("sea", p2)
            for slot in slots:
                for p in pairs:
                    bld.state((fam, (q1, q2), slot, p), (p, arrow),
                              ("e", e))

            def st(slot, p, inst=(q1, q2)):
                return (fam, inst, slot, p)

            def draw(t, h, gen, blab):
                alab = (bld.avmap[t], gen, bld.avmap[h])
                bld.edge((t, h, gen), t, h, alab, blab)

            for p in pairs:
                draw(sea1, st("flip", p), x, (0, e, 1))
                draw(st("flip", p), sea2, yi, (1, e, 0))
                draw(sea1, st("carry", p), y, (0, e, 1))
                draw(st("back", p), sea2, xi, (1, e, 0))
                for p2_ in pairs:
                    draw(st("carry", p), st("carry", p2_), y, (1, e, 1))
                    draw(st("carry", p), st("flip", p2_), x, (1, e, 1))
                    draw(st("flip", p), st("back", p2_), yi, (1, e, 1))
                    draw(st("back", p), st("back", p2_), xi, (1, e, 1))
    return bld.build()


def rectangle_compress():
    """Compress runs over bad vertices of a good/bad-decorated plane graph:
    good points survive and stretches of bad points in a row or column
    collapse into single edges."""
    a = alphabet_label_graph(("bad", "good"), plane_label_graph())
    b = plane_label_graph()
    bld = _SimBuilder(a, b)
    bld.state("keep", "good", ("v", 1))
    for d in ("E", "N", "W", "S"):
        bld.state(("skip", d), "bad", ("e", min(d, {"E": "W", "W": "E",
                                                    "N": "S", "S": "N"}[d])))
    for d in ("E", "N"):
        bld.edge(("keep", "keep", d), "keep", "keep",
                 ("good", d, "good"), (0, d, 0))
    for d in ("E", "N", "W", "S"):
        bld.edge(("keep", ("skip", d), d), "keep", ("skip", d),
                 ("good", d, "bad"), (0, d, 1))
        bld.edge((("skip", d), ("skip", d), d), ("skip", d), ("skip", d),
                 ("bad", d, "bad"), (1, d, 1))
        bld.edge((("skip", d), "keep", d), ("skip", d), "keep",
                 ("bad", d, "good"), (1, d, 0))
    return bld.build()


BUILTIN_SIMULATORS = ("quadrant_to_plane", "comb_to_plane",
                      "sea_to_quadrant", "rectangle_compress")


def builtin_simulator(name):
    builders = {"quadrant_to_plane": quadrant_to_plane,
                "comb_to_plane": comb_to_plane,
                "sea_to_quadrant": sea_to_quadrant,
                "rectangle_compress": rectangle_compress}
    if name not in builders:
        raise ValueError("unknown simulator %r" % (name,))
    return builders[name]()


def random_simulator(rng, a, b, settled=2, transit=2, nedges=6):
    """A small random simulator between one-vertex unoriented alphabets,
    for property tests."""
    if len(a.vlabel) != 1 or len(b.vlabel) != 1:
        raise ValueError("random simulators use one-vertex alphabets")
    av = a.vertices()[0]
    bv = b.vertices()[0]
    bedges = b.edge_ids()
    aedges = a.edge_ids()
    orbs = sorted({b.edge_orbit(e) for e in bedges}, key=skey)
    bld = _SimBuilder(a, b)
    states = []
    torb = {}
    for i in range(settled):
        bld.state(("s", i), av, ("v", bv))
        states.append(("s", i))
    for i in range(transit):
        orb = rng.choice(orbs)
        torb[("t", i)] = orb
        bld.state(("t", i), av, ("e", orb))
        states.append(("t", i))
    count = 0
    attempts = 0
    while count < nedges and attempts < 50 * nedges:
        attempts += 1
        t = rng.choice(states)
        h = rng.choice(states)
        alab = rng.choice(aedges)
        if t[0] == "s" and h[0] == "s":
            blab = (0, rng.choice(bedges), 0)
        elif t[0] == "s":
            c = rng.choice((torb[h], b.reversal[torb[h]]))
            blab = (0, c, 1)
        elif h[0] == "s":
            c = rng.choice((torb[t], b.reversal[torb[t]]))
            blab = (1, c, 0)
        else:
            if torb[t] != torb[h]:
                continue
            c = rng.choice((torb[t], b.reversal[torb[t]]))
            blab = (1, c, 1)
        bld.edge(("e", count), t, h, alab, blab)
        count += 1
    return bld.build()


# -- serialization ---------------------------------------------------------------


_BASE_ALPHABETS = (("cayley", cayley_label_graph),
                   ("plane", plane_label_graph),
                   ("quadrant", quadrant_label_graph))


def _dl_params(edge_ids):
    ps = set()
    qs = set()
    for e in edge_ids:
        if not (isinstance(e, tuple) and len(e) == 3
                and e[0] in ("up", "dn")
                and isinstance(e[1], int) and isinstance(e[2], int)):
            return None
        ps.add(e[1])
        qs.add(e[2])
    if not ps:
        return None
    return max(ps) + 1, max(qs) + 1


def _alphabet_spec(a):
    """Recognize an alphabet as (spec string, decoration symbols)."""
    for name, build in _BASE_ALPHABETS:
        if a == build():
            return name, ()
    pq = _dl_params(a.edge_ids())
    if pq is not None and a == dl_label_graph(*pq):
        return "dl %d %d" % pq, ()
    symbols = tuple(a.vertices())
    for name, build in _BASE_ALPHABETS:
        if a == alphabet_label_graph(symbols, build()):
            return name, symbols
    inner = sorted({e[1] for e in a.edges
                    if isinstance(e, tuple) and len(e) == 3}, key=skey)
    pq = _dl_params(inner)
    if pq is not None and a == alphabet_label_graph(symbols,
                                                    dl_label_graph(*pq)):
        return "dl %d %d" % pq, symbols
    raise ValueError("alphabet has no serializable description")


def _parse_alphabet(toks, symbols):
    kind = toks[0]
    if kind == "dl":
        base = dl_label_graph(int(toks[1]), int(toks[2]))
    else:
        builders = dict(_BASE_ALPHABETS)
        if kind not in builders:
            raise ValueError("unknown alphabet kind %r" % (kind,))
        base = builders[kind]()
    if symbols:
        return alphabet_label_graph(tuple(symbols), base)
    return base


def simulator_to_text(s):
    """Text form: alphabet descriptions, then one line per state and edge
    with both labels."""
    lines = ["simulator"]
    for tag, alphabet_ in (("alpha", s.alpha.codomain),
                           ("beta", s.target_alphabet())):
        spec, symbols = _alphabet_spec(alphabet_)
        lines.append("%s %s" % (tag, spec))
        for sym in symbols:
            lines.append("symbol %s" % _fmt(sym))
    g = s.graph
    for v in g.vertices():
        lines.append("vertex %s %s %s"
                     % (_fmt(v), _fmt(s.alpha.vmap[v]), _fmt(g.vlabel[v])))
    for e in g.edge_ids():
        t, h = g.edges[e]
        line = "edge %s %s %s %s %s" % (_fmt(e), _fmt(t), _fmt(h),
                                        _fmt(s.alpha.emap[e]),
                                        _fmt(g.elabel[e]))
        if g.reversal is not None:
            line += " rev %s" % _fmt(g.reversal[e])
        lines.append(line)
    return "\n".join(lines) + "\n"


def simulator_from_text(text):
    specs = {}
    symbols = {"alpha": [], "beta": []}
    current = None
    vlabel = {}
    avmap = {}
    edges = {}
    elabel = {}
    aemap = {}
    rev = {}
    saw_rev = False
    saw_header = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = shlex.split(line)
        if not saw_header:
            if toks != ["simulator"]:
                raise ValueError("expected a simulator header")
            saw_header = True
        elif toks[0] in ("alpha", "beta"):
            specs[toks[0]] = toks[1:]
            current = toks[0]
        elif toks[0] == "symbol" and len(toks) == 2:
            if current is None:
                raise ValueError("symbol line before alpha/beta")
            symbols[current].append(_parse_token(toks[1]))
        elif toks[0] == "vertex" and len(toks) == 4:
            v = _parse_token(toks[1])
            avmap[v] = _parse_token(toks[2])
            vlabel[v] = _parse_token(toks[3])
        elif toks[0] == "edge" and len(toks) in (6, 8):
            e = _parse_token(toks[1])
            edges[e] = (_parse_token(toks[2]), _parse_token(toks[3]))
            aemap[e] = _parse_token(toks[4])
            elabel[e] = _parse_token(toks[5])
            if len(toks) == 8:
                if toks[6] != "rev":
                    raise ValueError("bad edge line: %r" % raw)
                rev[e] = _parse_token(toks[7])
                saw_rev = True
        else:
            raise ValueError("bad simulator line: %r" % raw)
    if "alpha" not in specs or "beta" not in specs:
        raise ValueError("missing alphabet description")
    a = _parse_alphabet(specs["alpha"], symbols["alpha"])
    b = _parse_alphabet(specs["beta"], symbols["beta"])
    g = LabelGraph(vlabel, edges, elabel, rev if saw_rev else None,
                   path_subdivision(b))
    return Simulator(g, Morphism(avmap, aemap, g, a))


def simulator_to_dot(s, name="simulator"):
    """GraphViz export; node labels show state, source label and target
    label, edges show both labels."""
    g = s.graph
    idx = {v: i for i, v in enumerate(g.vertices())}
    lines = ["digraph %s {" % name]
    for v in g.vertices():
        disp = s.names.get(v, v) if s.names else v
        lines.append('  n%d [label="%s : %s : %s"];'
                     % (idx[v], _dot_escape(disp),
                        _dot_escape(s.alpha.vmap[v]),
                        _dot_escape(g.vlabel[v])))
    done = set()
    for e in g.edge_ids():
        if e in done:
            continue
        t, h = g.edges[e]
        attrs = 'label="%s : %s"' % (_dot_escape(s.alpha.emap[e]),
                                     _dot_escape(g.elabel[e]))
        if g.reversal is not None:
            ep = g.reversal[e]
            done.add(ep)
            if ep != e:
                attrs += ", dir=both"
        lines.append("  n%d -> n%d [%s];" % (idx[t], idx[h], attrs))
    lines.append("}")
    return "\n".join(lines) + "\n"
