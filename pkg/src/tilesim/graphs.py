"""Graphs with labels in a fixed "alphabet" graph, and the operations on
them that the rest of the package is built from.

A graph here is a set of vertices and a set of directed edges, each edge
knowing its tail and head.  An unoriented graph additionally carries an
involution ' on edges (reversal) that swaps tail and head; a fixed point of
the involution is a "half" edge and is allowed.  A labelled graph carries a
reference to another graph (its label graph) and labels every cell by a cell
of the label graph, consistently: edge labels are edges, vertex labels are
vertices, the label of an endpoint is the corresponding endpoint of the edge
label, and reversal commutes with labelling.

Cell ids are arbitrary hashable values.  Operations build ids out of the
input ids (pairs, tuples, tagged values) so that provenance survives
composition; nothing below ever depends on ids being integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import ast
import shlex


class CapacityError(Exception):
    """Raised when an enumeration or construction exceeds its budget."""


def skey(x):
    """Deterministic sort key for arbitrary hashable ids."""
    return repr(x)


@dataclass(eq=True)
class LabelGraph:
    """A graph, possibly unoriented, possibly labelled over another graph.

    vlabel: vertex id -> label.
    edges:  edge id -> (tail id, head id).
    elabel: edge id -> label.
    reversal: None for an oriented graph, else an involution on edge ids.
    label_graph: None when this graph is itself an alphabet (in which case
        every cell is labelled by its own id), else the alphabet graph.
    """

    vlabel: dict
    edges: dict
    elabel: dict
    reversal: dict | None = None
    label_graph: "LabelGraph | None" = None

    def __post_init__(self):
        validate(self)

    # -- small conveniences ------------------------------------------------

    def vertices(self):
        return sorted(self.vlabel, key=skey)

    def edge_ids(self):
        return sorted(self.edges, key=skey)

    def tail(self, e):
        return self.edges[e][0]

    def head(self, e):
        return self.edges[e][1]

    def is_unoriented(self):
        return self.reversal is not None

    def num_vertices(self):
        return len(self.vlabel)

    def num_edges(self):
        return len(self.edges)

    def edge_orbit(self, e):
        """Representative of {e, e'} (e itself when oriented)."""
        if self.reversal is None:
            return e
        return min(e, self.reversal[e], key=skey)


def validate(g):
    """Check the graph axioms; raise ValueError on violation."""
    for e, (t, h) in g.edges.items():
        if t not in g.vlabel or h not in g.vlabel:
            raise ValueError("edge %r has a dangling endpoint" % (e,))
        if e not in g.elabel:
            raise ValueError("edge %r has no label" % (e,))
    if set(g.elabel) != set(g.edges):
        raise ValueError("elabel keys differ from edge ids")
    if g.reversal is not None:
        for e, f in g.reversal.items():
            if e not in g.edges or f not in g.edges:
                raise ValueError("reversal mentions unknown edge")
            if g.reversal.get(f) != e:
                raise ValueError("reversal is not an involution at %r" % (e,))
            if g.edges[f] != (g.edges[e][1], g.edges[e][0]):
                raise ValueError("reversal of %r does not swap endpoints" % (e,))
        if set(g.reversal) != set(g.edges):
            raise ValueError("reversal is not total on edges")
    b = g.label_graph
    if b is None:
        # Alphabet graph: cells are labelled by their own ids.
        for v, lab in g.vlabel.items():
            if lab != v:
                raise ValueError("alphabet vertex %r not self-labelled" % (v,))
        for e, lab in g.elabel.items():
            if lab != e:
                raise ValueError("alphabet edge %r not self-labelled" % (e,))
        return
    for v, lab in g.vlabel.items():
        if lab not in b.vlabel:
            raise ValueError("vertex %r labelled by unknown %r" % (v, lab))
    for e, (t, h) in g.edges.items():
        lab = g.elabel[e]
        if lab not in b.edges:
            raise ValueError("edge %r labelled by unknown %r" % (e, lab))
        bt, bh = b.edges[lab]
        if g.vlabel[t] != bt or g.vlabel[h] != bh:
            raise ValueError("labelling of edge %r is not a morphism" % (e,))
    if g.reversal is not None:
        if b.reversal is None:
            raise ValueError("unoriented graph over an oriented alphabet")
        for e, f in g.reversal.items():
            if g.elabel[f] != b.reversal[g.elabel[e]]:
                raise ValueError("labelling of %r ignores reversal" % (e,))


def alphabet(vertex_names, edge_spec, reversal=None):
    """Build an alphabet graph.

    edge_spec: edge name -> (tail name, head name).
    reversal: None, or edge name -> edge name (involution).
    """
    vlabel = {v: v for v in vertex_names}
    edges = dict(edge_spec)
    elabel = {e: e for e in edges}
    rev = dict(reversal) if reversal is not None else None
    return LabelGraph(vlabel, edges, elabel, rev, None)


def rose(edge_names, reversal=None):
    """One-vertex alphabet whose vertex is named 1."""
    return alphabet([1], {e: (1, 1) for e in edge_names}, reversal)


def labelled(b, vlabel, edges, elabel, reversal=None):
    return LabelGraph(dict(vlabel), dict(edges), dict(elabel),
                      dict(reversal) if reversal is not None else None, b)


def disjoint_union(g1, g2):
    """Disjoint union; ids become (0, id) and (1, id)."""
    if g1.label_graph != g2.label_graph:
        raise ValueError("disjoint union over different alphabets")
    vlabel = {(0, v): lab for v, lab in g1.vlabel.items()}
    vlabel.update({(1, v): lab for v, lab in g2.vlabel.items()})
    edges = {(0, e): ((0, t), (0, h)) for e, (t, h) in g1.edges.items()}
    edges.update({(1, e): ((1, t), (1, h)) for e, (t, h) in g2.edges.items()})
    elabel = {(0, e): lab for e, lab in g1.elabel.items()}
    elabel.update({(1, e): lab for e, lab in g2.elabel.items()})
    rev = None
    if g1.reversal is not None and g2.reversal is not None:
        rev = {(0, e): (0, f) for e, f in g1.reversal.items()}
        rev.update({(1, e): (1, f) for e, f in g2.reversal.items()})
    b = g1.label_graph
    if b is None:
        # The union of two alphabets is again an alphabet, so relabel cells
        # by their new ids.
        vlabel = {v: v for v in vlabel}
        elabel = {e: e for e in edges}
    return LabelGraph(vlabel, edges, elabel, rev, b)


def induced_subgraph(g, keep_vertices):
    """Subgraph on a vertex subset, keeping edges with both endpoints kept."""
    keep = set(keep_vertices)
    vlabel = {v: g.vlabel[v] for v in keep}
    edges = {e: th for e, th in g.edges.items() if th[0] in keep and th[1] in keep}
    elabel = {e: g.elabel[e] for e in edges}
    rev = None
    if g.reversal is not None:
        rev = {e: g.reversal[e] for e in edges}
    return LabelGraph(vlabel, edges, elabel, rev, g.label_graph)


# -- morphisms -------------------------------------------------------------


@dataclass(eq=True)
class Morphism:
    """A graph morphism: vertex map + edge map commuting with tail, head and
    (when both sides are unoriented) reversal.  When domain and codomain are
    labelled over the same alphabet the maps must preserve labels."""

    vmap: dict
    emap: dict
    domain: LabelGraph
    codomain: LabelGraph

    def __post_init__(self):
        validate_morphism(self)

    def key(self):
        """Hashable canonical form of the underlying maps."""
        return (tuple(sorted(self.vmap.items(), key=lambda kv: skey(kv[0]))),
                tuple(sorted(self.emap.items(), key=lambda kv: skey(kv[0]))))


def validate_morphism(m):
    g, h = m.domain, m.codomain
    if set(m.vmap) != set(g.vlabel) or set(m.emap) != set(g.edges):
        raise ValueError("morphism maps have wrong domains")
    for v, w in m.vmap.items():
        if w not in h.vlabel:
            raise ValueError("vertex image %r missing" % (w,))
    for e, d in m.emap.items():
        if d not in h.edges:
            raise ValueError("edge image %r missing" % (d,))
        if h.edges[d] != (m.vmap[g.tail(e)], m.vmap[g.head(e)]):
            raise ValueError("morphism breaks endpoints at %r" % (e,))
    if g.reversal is not None and h.reversal is not None:
        for e, d in m.emap.items():
            if m.emap[g.reversal[e]] != h.reversal[d]:
                raise ValueError("morphism breaks reversal at %r" % (e,))
    if g.label_graph is not None and g.label_graph == h.label_graph:
        for v, w in m.vmap.items():
            if g.vlabel[v] != h.vlabel[w]:
                raise ValueError("morphism breaks vertex label at %r" % (v,))
        for e, d in m.emap.items():
            if g.elabel[e] != h.elabel[d]:
                raise ValueError("morphism breaks edge label at %r" % (e,))


def labelling_morphism(g):
    """The structural morphism from a labelled graph to its alphabet."""
    if g.label_graph is None:
        raise ValueError("graph has no alphabet")
    return Morphism(dict(g.vlabel), dict(g.elabel), g, g.label_graph)


def compose_morphisms(m2, m1):
    """m2 after m1."""
    if m1.codomain != m2.domain:
        raise ValueError("morphisms do not compose")
    return Morphism({v: m2.vmap[w] for v, w in m1.vmap.items()},
                    {e: m2.emap[d] for e, d in m1.emap.items()},
                    m1.domain, m2.codomain)


# -- hom enumeration -------------------------------------------------------


def enumerate_homs(g, h, limit=None, budget=10 ** 6):
    """All label-preserving morphisms g -> h, in a deterministic order.

    Backtracking over vertices (ordered so that each vertex after the first
    in its component touches an already-placed one), with edge images chosen
    per reversal orbit afterwards.  `limit` stops early with a partial list;
    `budget` bounds the number of explored assignments and raises
    CapacityError when exhausted.
    """
    if g.label_graph != h.label_graph:
        raise ValueError("hom between graphs over different alphabets")
    order = _vertex_order(g)
    incident = {v: [] for v in g.vlabel}
    for e, (t, hd) in g.edges.items():
        incident[t].append((e, 0))
        incident[hd].append((e, 1))
    by_label = {}
    for w in h.vertices():
        by_label.setdefault(h.vlabel[w], []).append(w)
    results = []
    vmap = {}
    spent = [0]

    def edge_ok(e, vmap):
        t, hd = g.edges[e]
        if t not in vmap or hd not in vmap:
            return True
        lab = g.elabel[e]
        return any(h.edges[d] == (vmap[t], vmap[hd])
                   for d in _edges_by_label(h, lab))

    def place(i):
        if limit is not None and len(results) >= limit:
            return
        if i == len(order):
            results.extend(_expand_edge_maps(g, h, dict(vmap), limit, spent, budget,
                                             len(results) if limit is None else limit - len(results)))
            return
        v = order[i]
        for w in by_label.get(g.vlabel[v], []):
            spent[0] += 1
            if spent[0] > budget:
                raise CapacityError("hom enumeration budget exceeded")
            vmap[v] = w
            if all(edge_ok(e, vmap) for e, _ in incident[v]):
                place(i + 1)
            del vmap[v]
            if limit is not None and len(results) >= limit:
                return

    place(0)
    return results


def _vertex_order(g):
    seen = set()
    order = []
    adj = {v: set() for v in g.vlabel}
    for t, h in g.edges.values():
        adj[t].add(h)
        adj[h].add(t)
    for start in g.vertices():
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(adj[v], key=skey):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _edges_by_label(h, lab):
    cache = getattr(h, "_edges_by_label", None)
    if cache is None:
        cache = {}
        for e, l in h.elabel.items():
            cache.setdefault(l, []).append(e)
        for l in cache:
            cache[l].sort(key=skey)
        object.__setattr__(h, "_edges_by_label", cache)
    return cache.get(lab, [])


def _expand_edge_maps(g, h, vmap, limit, spent, budget, room):
    """Given a full vertex map, enumerate compatible edge maps orbitwise."""
    unoriented = g.reversal is not None and h.reversal is not None
    orbits = []
    seen = set()
    for e in g.edge_ids():
        if e in seen:
            continue
        seen.add(e)
        partner = None
        if unoriented:
            partner = g.reversal[e]
            seen.add(partner)
        orbits.append((e, partner))
    choice_lists = []
    for e, partner in orbits:
        t, hd = g.edges[e]
        want = (vmap[t], vmap[hd])
        cands = [d for d in _edges_by_label(h, g.elabel[e]) if h.edges[d] == want]
        if unoriented and partner == e:
            cands = [d for d in cands if h.reversal[d] == d]
        if not cands:
            return []
        choice_lists.append(cands)
    out = []
    idx = [0] * len(orbits)
    while True:
        spent[0] += 1
        if spent[0] > budget:
            raise CapacityError("hom enumeration budget exceeded")
        emap = {}
        for (e, partner), lst, i in zip(orbits, choice_lists, idx):
            d = lst[i]
            emap[e] = d
            if partner is not None and partner != e:
                emap[partner] = h.reversal[d]
        out.append(Morphism(vmap, emap, g, h))
        if limit is not None and len(out) >= room:
            return out
        k = len(orbits) - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < len(choice_lists[k]):
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            return out


def hom_exists(g, h, budget=10 ** 6):
    return bool(enumerate_homs(g, h, limit=1, budget=budget))


# -- pullback and exponential ----------------------------------------------


def pullback(g1, g2):
    """Fibre product over the common alphabet: cells are pairs of cells with
    equal labels, structure maps act componentwise."""
    if g1.label_graph != g2.label_graph or g1.label_graph is None:
        raise ValueError("pullback needs a common alphabet")
    vlabel = {}
    for u1 in g1.vertices():
        for u2 in g2.vertices():
            if g1.vlabel[u1] == g2.vlabel[u2]:
                vlabel[(u1, u2)] = g1.vlabel[u1]
    edges = {}
    elabel = {}
    for e1 in g1.edge_ids():
        for e2 in _edges_by_label(g2, g1.elabel[e1]):
            e = (e1, e2)
            edges[e] = ((g1.tail(e1), g2.tail(e2)), (g1.head(e1), g2.head(e2)))
            elabel[e] = g1.elabel[e1]
    rev = None
    if g1.reversal is not None and g2.reversal is not None:
        rev = {(e1, e2): (g1.reversal[e1], g2.reversal[e2]) for (e1, e2) in edges}
    return LabelGraph(vlabel, edges, elabel, rev, g1.label_graph)


def identity_over(b):
    """b seen as a graph labelled over itself (identity labelling)."""
    rev = dict(b.reversal) if b.reversal is not None else None
    return LabelGraph(dict(b.vlabel), dict(b.edges), dict(b.elabel), rev, b)


def alpha_pullback(g1, g2, alpha):
    """Pullback of g1 (over A) and g2 matched through an extra labelling
    alpha: g2 -> A, keeping g2's own labelling on the result.

    Cells are pairs (c1, c2) with the A-label of c1 equal to the alpha-image
    of c2; the label of the pair is the g2-label of c2, so the result lives
    over g2's alphabet.
    """
    a = alpha.codomain
    if g1.label_graph != a:
        raise ValueError("first factor is not labelled over alpha's target")
    if alpha.domain != g2:
        raise ValueError("alpha is not a labelling of the second factor")
    by_alpha_v = {}
    for u2 in g2.vertices():
        by_alpha_v.setdefault(alpha.vmap[u2], []).append(u2)
    by_alpha_e = {}
    for e2 in g2.edge_ids():
        by_alpha_e.setdefault(alpha.emap[e2], []).append(e2)
    vlabel = {}
    for u1 in g1.vertices():
        for u2 in by_alpha_v.get(g1.vlabel[u1], []):
            vlabel[(u1, u2)] = g2.vlabel[u2]
    edges = {}
    elabel = {}
    for e1 in g1.edge_ids():
        for e2 in by_alpha_e.get(g1.elabel[e1], []):
            edges[(e1, e2)] = ((g1.tail(e1), g2.tail(e2)),
                               (g1.head(e1), g2.head(e2)))
            elabel[(e1, e2)] = g2.elabel[e2]
    rev = None
    if g1.reversal is not None and g2.reversal is not None:
        rev = {(e1, e2): (g1.reversal[e1], g2.reversal[e2])
               for (e1, e2) in edges}
    return LabelGraph(vlabel, edges, elabel, rev, g2.label_graph)


def _generic_fiber(g2, alpha, a, is_edge):
    """The fiber of alpha over the abstract closure of the alphabet cell a,
    as a graph labelled like g2.

    For a vertex a this is the discrete graph on pairs ('T', u2) with
    alpha(u2) = a.  For an edge a it has tail-side copies ('T', u2) over the
    tail of a, head-side copies ('H', u2) over the head, forward edges
    ('F', e2) per e2 over a, and (in the unoriented case) backward edges
    ('R', e2) per e2 over a'.  Tail-side and head-side copies stay distinct
    even when a is a self-loop in the alphabet, which is what makes currying
    against the pullback work.
    """
    av = alpha.codomain
    if not is_edge:
        vlabel = {("T", u2): g2.vlabel[u2]
                  for u2 in g2.vlabel if alpha.vmap[u2] == a}
        rev = {} if g2.reversal is not None else None
        return LabelGraph(vlabel, {}, {}, rev, g2.label_graph)
    ta, ha = av.edges[a]
    vlabel = {}
    for u2 in g2.vlabel:
        if alpha.vmap[u2] == ta:
            vlabel[("T", u2)] = g2.vlabel[u2]
        if alpha.vmap[u2] == ha:
            vlabel[("H", u2)] = g2.vlabel[u2]
    edges = {}
    elabel = {}
    for e2 in g2.edges:
        if alpha.emap[e2] == a:
            edges[("F", e2)] = (("T", g2.tail(e2)), ("H", g2.head(e2)))
            elabel[("F", e2)] = g2.elabel[e2]
    rev = None
    if av.reversal is not None and g2.reversal is not None:
        ap = av.reversal[a]
        for e2 in g2.edges:
            if alpha.emap[e2] == ap:
                edges[("R", e2)] = (("H", g2.tail(e2)), ("T", g2.head(e2)))
                elabel[("R", e2)] = g2.elabel[e2]
        rev = {}
        for (side, e2) in edges:
            other = "R" if side == "F" else "F"
            rev[(side, e2)] = (other, g2.reversal[e2])
    return LabelGraph(vlabel, edges, elabel, rev, g2.label_graph)


def exponential(g1, g2, alpha=None, max_cells=10 ** 5, budget=10 ** 6):
    """The graph of local maps from g2 into g1.

    g1 is labelled over B, g2 over B with an extra labelling alpha into A
    (alpha defaults to g2's own labelling, i.e. A = B).  The result is
    labelled over A: a cell over an A-cell a is a pair (f, a) with f a
    B-respecting morphism from the fiber of alpha over the closure of a
    into g1.  Tail and head of (f, a) restrict f to the tail and head side
    of the fiber; reversal swaps the sides.  Raises CapacityError when more
    than max_cells cells would be produced.
    """
    if alpha is None:
        alpha = labelling_morphism(g2)
    av = alpha.codomain
    if g1.label_graph != g2.label_graph or g1.label_graph is None:
        raise ValueError("exponential needs both graphs over one alphabet")
    if (g1.reversal is None) != (g2.reversal is None):
        raise ValueError("exponential needs matching orientedness")
    vlabel = {}
    for a in av.vertices():
        fiber = _generic_fiber(g2, alpha, a, False)
        for f in enumerate_homs(fiber, g1, budget=budget):
            vlabel[(f.key(), a)] = a
        if len(vlabel) > max_cells:
            raise CapacityError("exponential exceeds %d cells" % max_cells)
    edges = {}
    elabel = {}
    for c in av.edge_ids():
        fiber = _generic_fiber(g2, alpha, c, True)
        for f in enumerate_homs(fiber, g1, budget=budget):
            k = f.key()
            edges[(k, c)] = ((_side_key(k, "T"), av.tail(c)),
                             (_side_key(k, "H"), av.head(c)))
            elabel[(k, c)] = c
        if len(edges) > max_cells:
            raise CapacityError("exponential exceeds %d cells" % max_cells)
    rev = None
    if av.reversal is not None and g1.reversal is not None and g2.reversal is not None:
        rev = {(k, c): (_swap_key(k, g1), av.reversal[c]) for (k, c) in edges}
    return LabelGraph(vlabel, edges, elabel, rev, av)


def _side_key(key, side):
    vitems, _ = key
    kept = tuple((("T", u2), img) for ((s, u2), img) in vitems if s == side)
    return (tuple(sorted(kept, key=lambda kv: skey(kv[0]))), ())


def _swap_key(key, g1):
    vitems, eitems = key
    sv = tuple(sorted(((("H" if s == "T" else "T", u2), img)
                       for ((s, u2), img) in vitems),
                      key=lambda kv: skey(kv[0])))
    se = tuple(sorted(((("R" if s == "F" else "F", e2), img)
                       for ((s, e2), img) in eitems),
                      key=lambda kv: skey(kv[0])))
    return (sv, se)


def curry(lam, g1, g2, alpha, expg):
    """Turn lam: alpha_pullback(g1, g2, alpha) -> g3 into g1 -> g3^{g2}."""
    av = alpha.codomain
    vmap = {}
    for u1 in g1.vertices():
        a = g1.vlabel[u1]
        vitems = tuple(sorted(((("T", u2), lam.vmap[(u1, u2)])
                               for u2 in g2.vlabel
                               if alpha.vmap[u2] == a),
                              key=lambda kv: skey(kv[0])))
        vmap[u1] = ((vitems, ()), a)
    emap = {}
    for e1 in g1.edge_ids():
        c = g1.elabel[e1]
        ta, ha = av.edges[c]
        vitems = []
        for u2 in g2.vlabel:
            if alpha.vmap[u2] == ta:
                vitems.append((("T", u2), lam.vmap[(g1.tail(e1), u2)]))
            if alpha.vmap[u2] == ha:
                vitems.append((("H", u2), lam.vmap[(g1.head(e1), u2)]))
        eitems = []
        for e2 in g2.edges:
            if alpha.emap[e2] == c:
                eitems.append((("F", e2), lam.emap[(e1, e2)]))
        if av.reversal is not None and g1.reversal is not None:
            cp = av.reversal[c]
            e1p = g1.reversal[e1]
            for e2 in g2.edges:
                if alpha.emap[e2] == cp:
                    eitems.append((("R", e2), lam.emap[(e1p, e2)]))
        key = (tuple(sorted(vitems, key=lambda kv: skey(kv[0]))),
               tuple(sorted(eitems, key=lambda kv: skey(kv[0]))))
        emap[e1] = (key, c)
    return Morphism(vmap, emap, g1, expg)


def uncurry(rho, g1, g2, alpha, g3):
    """Turn rho: g1 -> g3^{g2} into alpha_pullback(g1, g2, alpha) -> g3."""
    prod = alpha_pullback(g1, g2, alpha)
    vmap = {}
    for (u1, u2) in prod.vlabel:
        (vitems, _), _a = rho.vmap[u1]
        vmap[(u1, u2)] = dict(vitems)[("T", u2)]
    emap = {}
    for (e1, e2) in prod.edges:
        (_, eitems), _c = rho.emap[e1]
        emap[(e1, e2)] = dict(eitems)[("F", e2)]
    return Morphism(vmap, emap, prod, g3)


# -- path subdivision, flat, sharp ------------------------------------------


def path_subdivision(g):
    """Subdivide every edge into a path of length two through a new midpoint
    vertex shared by an edge and its reversal, and add the four edge pieces
    (0,e,0), (0,e,1), (1,e,1), (1,e,0) per edge e.

    Works both for alphabets (the result is again an alphabet) and for
    labelled graphs (the result is labelled over the subdivided alphabet).
    """
    vlabel = {}
    for v in g.vertices():
        vlabel[("v", v)] = ("v", g.vlabel[v])
    for e in g.edge_ids():
        orb = g.edge_orbit(e)
        vlabel[("e", orb)] = ("e", _label_orbit(g, e))
    edges = {}
    elabel = {}
    for e in g.edge_ids():
        orb = g.edge_orbit(e)
        t, h = ("v", g.tail(e)), ("v", g.head(e))
        mid = ("e", orb)
        lab = g.elabel[e]
        edges[(0, e, 0)] = (t, h)
        edges[(0, e, 1)] = (t, mid)
        edges[(1, e, 1)] = (mid, mid)
        edges[(1, e, 0)] = (mid, h)
        llab = _label_orbit(g, e)
        elabel[(0, e, 0)] = (0, lab, 0)
        elabel[(0, e, 1)] = (0, lab, 1)
        elabel[(1, e, 1)] = (1, lab, 1)
        elabel[(1, e, 0)] = (1, lab, 0)
    rev = None
    if g.reversal is not None:
        rev = {}
        for e in g.edges:
            ep = g.reversal[e]
            for i in (0, 1):
                for j in (0, 1):
                    rev[(i, e, j)] = (j, ep, i)
    if g.label_graph is None:
        vlabel = {v: v for v in vlabel}
        elabel = {e: e for e in edges}
        return LabelGraph(vlabel, edges, elabel, rev, None)
    bstar = path_subdivision(g.label_graph)
    return LabelGraph(vlabel, edges, elabel, rev, bstar)


def _label_orbit(g, e):
    b = g.label_graph
    lab = g.elabel[e]
    if b is None:
        return g.edge_orbit(e)
    if b.reversal is None:
        return lab
    return min(lab, b.reversal[lab], key=skey)


def base_of_subdivision(bstar):
    """Recover b from path_subdivision(b)."""
    vlabel = {}
    for v in bstar.vertices():
        if isinstance(v, tuple) and len(v) == 2 and v[0] == "v":
            vlabel[v[1]] = v[1]
    edges = {}
    for e in bstar.edge_ids():
        if isinstance(e, tuple) and len(e) == 3 and e[0] == 0 and e[2] == 0:
            (_, t), (_, h) = bstar.edges[e]
            edges[e[1]] = (t, h)
    elabel = {e: e for e in edges}
    rev = None
    if bstar.reversal is not None:
        rev = {e: bstar.reversal[(0, e, 0)][1] for e in edges}
    return LabelGraph(vlabel, edges, elabel, rev, None)


def flat(g, frontier=None):
    """Collapse a graph labelled over a subdivided alphabet back to one over
    the alphabet: keep the vertices sitting over original vertices, and put
    one c-labelled edge u -> v for every coherent path from u to v, i.e.
    either a single (0,c,0)-labelled edge or a path reading
    (0,c,1) (1,c,1)* (1,c,0).

    With frontier (a set of vertex ids of g), also returns the set of kept
    vertices whose incident flattened edges cannot be trusted: those in the
    frontier themselves and those from which some coherent path meets a
    frontier midpoint.  Returns graph or (graph, incomplete) accordingly.
    """
    if g.label_graph is None:
        raise ValueError("flat needs a labelled graph")
    b = base_of_subdivision(g.label_graph)
    frontier_set = set(frontier) if frontier is not None else set()

    by_label_tail = {}
    for e, (t, h) in g.edges.items():
        by_label_tail.setdefault((g.elabel[e], t), []).append(e)

    keep = [v for v in g.vertices()
            if isinstance(g.vlabel[v], tuple) and g.vlabel[v][0] == "v"]
    vlabel = {v: g.vlabel[v][1] for v in keep}
    edges = {}
    elabel = {}
    incomplete = set(v for v in keep if v in frontier_set)

    for u in keep:
        for c in b.edge_ids():
            heads, touched = _coherent_heads(g, u, c, by_label_tail)
            if touched & frontier_set:
                incomplete.add(u)
            for v in heads:
                e = (u, c, v)
                edges[e] = (u, v)
                elabel[e] = c
    rev = None
    if g.reversal is not None:
        rev = {(u, c, v): (v, b.reversal[c], u) for (u, c, v) in edges}
    out = LabelGraph(vlabel, edges, elabel, rev, b)
    if frontier is None:
        return out
    return out, frozenset(incomplete)


def _coherent_heads(g, u, c, by_label_tail):
    """Heads of coherent c-paths out of u, plus the midpoints visited."""
    heads = set()
    for e in by_label_tail.get(((0, c, 0), u), []):
        heads.add(g.head(e))
    seen = set()
    queue = []
    for e in by_label_tail.get(((0, c, 1), u), []):
        m = g.head(e)
        if m not in seen:
            seen.add(m)
            queue.append(m)
    while queue:
        m = queue.pop(0)
        for e in by_label_tail.get(((1, c, 0), m), []):
            heads.add(g.head(e))
        for e in by_label_tail.get(((1, c, 1), m), []):
            m2 = g.head(e)
            if m2 not in seen:
                seen.add(m2)
                queue.append(m2)
    return heads, seen


def sharp(g, b=None):
    """Right adjoint-ish companion of flat: subdivide g and add, per
    alphabet edge c, a pair of sink vertices absorbing unfinished coherent
    paths.  The result is labelled over the subdivision of the alphabet.

    Per edge e of g with label c the new edges are: one (0,c,1) edge from
    the tail of e into the minus sink of c, one (1,c,0) edge from the plus
    sink of c onto the head of e, and five (1,c,1) edges: plus->plus,
    plus->minus, plus->midpoint(e), midpoint(e)->minus, minus->minus.
    """
    if b is None:
        b = g.label_graph
    if b is None:
        raise ValueError("sharp needs a labelled graph")
    gs = path_subdivision(g)
    vlabel = dict(gs.vlabel)
    edges = dict(gs.edges)
    elabel = dict(gs.elabel)
    rev = dict(gs.reversal) if gs.reversal is not None else None

    def plus(c):
        if b.reversal is None:
            return ("sink", c, "+")
        orb = min(c, b.reversal[c], key=skey)
        return ("sink", orb, "+" if c == orb else "-")

    def minus(c):
        if b.reversal is None:
            return ("sink", c, "-")
        return plus(b.reversal[c])

    for c in b.edge_ids():
        orb = c if b.reversal is None else min(c, b.reversal[c], key=skey)
        vlabel[plus(c)] = ("e", orb)
        vlabel[minus(c)] = ("e", orb)

    for e in g.edge_ids():
        c = g.elabel[e]
        mid = ("e", g.edge_orbit(e))
        edges[("start", e)] = (("v", g.tail(e)), minus(c))
        elabel[("start", e)] = (0, c, 1)
        edges[("end", e)] = (plus(c), ("v", g.head(e)))
        elabel[("end", e)] = (1, c, 0)
        for name, (t, h) in (("m1", (plus(c), plus(c))),
                             ("m2", (plus(c), minus(c))),
                             ("m3", (plus(c), mid)),
                             ("m4", (mid, minus(c))),
                             ("m5", (minus(c), minus(c)))):
            edges[(name, e)] = (t, h)
            elabel[(name, e)] = (1, c, 1)
    if rev is not None:
        for e in g.edge_ids():
            ep = g.reversal[e]
            rev[("start", e)] = ("end", ep)
            rev[("end", e)] = ("start", ep)
            rev[("m1", e)] = ("m5", ep)
            rev[("m5", e)] = ("m1", ep)
            rev[("m2", e)] = ("m2", ep)
            rev[("m3", e)] = ("m4", ep)
            rev[("m4", e)] = ("m3", ep)
    return LabelGraph(vlabel, edges, elabel, rev, path_subdivision(b))


# -- weak etaleness and simplification --------------------------------------


def is_weakly_etale(g):
    """True iff any two same-label edges sharing a tail (or sharing a head)
    share both endpoints."""
    by_tail = {}
    by_head = {}
    for e, (t, h) in g.edges.items():
        lab = g.elabel[e]
        if by_tail.setdefault((lab, t), h) != h:
            return False
        if by_head.setdefault((lab, h), t) != t:
            return False
    return True


def is_etale(g):
    """True iff no two distinct same-label edges share a tail or a head."""
    seen_t = set()
    seen_h = set()
    for e, (t, h) in g.edges.items():
        lab = g.elabel[e]
        if (lab, t) in seen_t or (lab, h) in seen_h:
            return False
        seen_t.add((lab, t))
        seen_h.add((lab, h))
    return True


def simplify(g):
    """Merge parallel edges with equal labels; edge ids become
    (tail, label, head) triples."""
    vlabel = dict(g.vlabel)
    edges = {}
    elabel = {}
    witness_rev_label = {}
    for e, (t, h) in g.edges.items():
        lab = g.elabel[e]
        edges[(t, lab, h)] = (t, h)
        elabel[(t, lab, h)] = lab
        if g.reversal is not None:
            rl = g.elabel[g.reversal[e]]
            prev = witness_rev_label.setdefault((t, lab, h), rl)
            if prev != rl:
                raise ValueError("reversal label ambiguous under simplification")
    rev = None
    if g.reversal is not None:
        rev = {}
        for (t, lab, h) in edges:
            rev[(t, lab, h)] = (h, witness_rev_label[(t, lab, h)], t)
    return LabelGraph(vlabel, edges, elabel, rev, g.label_graph)


def full_simplify(g):
    """Simplify and additionally drop self-loops."""
    s = simplify(g)
    drop = [e for e, (t, h) in s.edges.items() if t == h]
    for e in drop:
        del s.edges[e]
        del s.elabel[e]
        if s.reversal is not None:
            del s.reversal[e]
    validate(s)
    return s


# -- vertex blow-up ----------------------------------------------------------


def vertex_blowup(g, k):
    """Replace each vertex u by k(label(u)) copies and each edge by all
    copy-to-copy variants.  k maps alphabet vertices to counts >= 0.  The
    result is labelled over the blown-up alphabet (and a blown-up alphabet is
    again an alphabet)."""
    b = g.label_graph

    def count(v):
        lab = g.vlabel[v]
        return k[lab]

    vlabel = {}
    for v in g.vertices():
        for i in range(count(v)):
            vlabel[(v, i)] = (g.vlabel[v], i)
    edges = {}
    elabel = {}
    for e in g.edge_ids():
        t, h = g.edges[e]
        for i in range(count(t)):
            for j in range(count(h)):
                edges[(i, e, j)] = ((t, i), (h, j))
                elabel[(i, e, j)] = (i, g.elabel[e], j)
    rev = None
    if g.reversal is not None:
        rev = {(i, e, j): (j, g.reversal[e], i) for (i, e, j) in edges}
    if b is None:
        vlabel = {v: v for v in vlabel}
        elabel = {e: e for e in edges}
        return LabelGraph(vlabel, edges, elabel, rev, None)
    return LabelGraph(vlabel, edges, elabel, rev, vertex_blowup(b, k))


# -- serialization -----------------------------------------------------------


def _fmt(x):
    return shlex.quote(repr(x))


def _parse_token(tok):
    try:
        return ast.literal_eval(tok)
    except (ValueError, SyntaxError):
        return tok


def to_text(g):
    """Canonical text form: one line per cell, sorted deterministically."""
    lines = []
    for v in sorted(g.vlabel, key=skey):
        lines.append("vertex %s %s" % (_fmt(v), _fmt(g.vlabel[v])))
    for e in sorted(g.edges, key=skey):
        t, h = g.edges[e]
        line = "edge %s %s %s %s" % (_fmt(e), _fmt(t), _fmt(h), _fmt(g.elabel[e]))
        if g.reversal is not None:
            line += " rev %s" % _fmt(g.reversal[e])
        lines.append(line)
    return "\n".join(lines) + "\n"


def from_text(text, label_graph=None):
    vlabel = {}
    edges = {}
    elabel = {}
    rev = {}
    saw_rev = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = shlex.split(line)
        if toks[0] == "vertex" and len(toks) == 3:
            vlabel[_parse_token(toks[1])] = _parse_token(toks[2])
        elif toks[0] == "edge" and len(toks) in (5, 7):
            e = _parse_token(toks[1])
            edges[e] = (_parse_token(toks[2]), _parse_token(toks[3]))
            elabel[e] = _parse_token(toks[4])
            if len(toks) == 7:
                if toks[5] != "rev":
                    raise ValueError("bad edge line: %r" % raw)
                rev[e] = _parse_token(toks[6])
                saw_rev = True
        else:
            raise ValueError("bad graph line: %r" % raw)
    return LabelGraph(vlabel, edges, elabel, rev if saw_rev else None, label_graph)


def to_dot(g, name="g"):
    """GraphViz export; one arrow per reversal orbit when unoriented."""
    lines = ["digraph %s {" % name]
    idx = {v: i for i, v in enumerate(sorted(g.vlabel, key=skey))}
    for v, i in sorted(idx.items(), key=lambda kv: kv[1]):
        lines.append('  n%d [label="%s"];' % (i, _dot_escape(g.vlabel[v])))
    done = set()
    for e in sorted(g.edges, key=skey):
        if e in done:
            continue
        t, h = g.edges[e]
        attrs = 'label="%s"' % _dot_escape(g.elabel[e])
        if g.reversal is not None:
            ep = g.reversal[e]
            done.add(ep)
            if ep != e:
                attrs += ", dir=both"
        lines.append("  n%d -> n%d [%s];" % (idx[t], idx[h], attrs))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(x):
    return str(x).replace("\\", "\\\\").replace('"', '\\"')


def canonical_text(g):
    """Alias used by tests asserting determinism."""
    return to_text(g)
