"""Finite-window tilings as CNF.

encode() turns a window plus tileset into clauses over one variable per
(point, tile) pair: an exactly-one group per point, plus the fully-contained
constraint scopes of the tileset.  An embedded clause-learning solver handles
solving, enumeration (by blocking found solutions) and forced-value queries
(one assumption per candidate).  Everything is deterministic: branching takes
the lowest unassigned variable, trying it positively first, so the same
instance always produces the same models in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import itertools

from .geometry import GroupPoint, canonical, interior_vertices
from .graphs import skey, CapacityError
from .tilesets import (tile_count, tile_label, vertex_candidates,
                       window_scopes)


@dataclass
class CnfInstance:
    """Clauses plus the meaning of the tiling variables.

    Variables 1..num_vars; var_of maps (point, tile id) to a variable and
    meaning inverts it.  Auxiliary variables (sequential counters, scope
    selectors) have no meaning entry.
    """

    num_vars: int = 0
    clauses: list = field(default_factory=list)
    var_of: dict = field(default_factory=dict)
    meaning: dict = field(default_factory=dict)

    def new_var(self, key=None):
        self.num_vars += 1
        if key is not None:
            self.var_of[key] = self.num_vars
            self.meaning[self.num_vars] = key
        return self.num_vars

    def add(self, lits):
        self.clauses.append(tuple(lits))


@dataclass
class TilingAssignment:
    """A total tile choice on a window, one tile id per point."""

    values: dict

    def tile(self, pt):
        return self.values[pt]

    def to_text(self, ts=None):
        lines = []
        for pt in sorted(self.values, key=_point_key):
            t = self.values[pt]
            shown = tile_label(ts, t) if ts is not None else t
            lines.append("%s %s" % (_point_str(pt), shown))
        return "\n".join(lines) + "\n"


def _point_str(pt):
    return canonical(pt) if isinstance(pt, GroupPoint) else repr(pt)


def _point_key(pt):
    return _point_str(pt)


_PAIRWISE_LIMIT = 8


def encode(window, ts, seeds=()):
    """CNF whose models are the tilings of the window.

    Per point: one variable per candidate tile, at-least-one, and at-most-one
    (pairwise up to 8 candidates, a sequential counter beyond).  Per scope:
    either one blocking clause per forbidden tuple or a selector variable per
    allowed tuple, whichever needs fewer clauses.  Seeds (the tileset's plus
    the extra ones) become unit clauses; a seed outside the window is an
    error.
    """
    cnf = CnfInstance()
    pts = window.points()
    cands = {}
    for pt in pts:
        cs = vertex_candidates(ts, window, pt)
        cands[pt] = cs
        for t in cs:
            cnf.new_var((pt, t))
    for pt in pts:
        group = [cnf.var_of[(pt, t)] for t in cands[pt]]
        cnf.add(group)
        if len(group) <= _PAIRWISE_LIMIT:
            for x, y in itertools.combinations(group, 2):
                cnf.add((-x, -y))
        else:
            regs = [cnf.new_var() for _ in range(len(group) - 1)]
            cnf.add((-group[0], regs[0]))
            for i in range(1, len(group) - 1):
                cnf.add((-regs[i - 1], regs[i]))
                cnf.add((-group[i], regs[i]))
                cnf.add((-group[i], -regs[i - 1]))
            cnf.add((-group[-1], -regs[-1]))
    for scope, allowed in window_scopes(ts, window):
        _encode_scope(cnf, scope, [cands[v] for v in scope], allowed)
    for pt, t in tuple(ts.seeds) + tuple(seeds):
        if pt not in window:
            raise ValueError("seed %s lies outside the window"
                             % _point_str(pt))
        var = cnf.var_of.get((pt, t))
        if var is None:
            cnf.add(())
        else:
            cnf.add((var,))
    return cnf


def _encode_scope(cnf, scope, cand_lists, allowed):
    total = 1
    for cs in cand_lists:
        total *= len(cs)
    cand_sets = [set(cs) for cs in cand_lists]
    usable = [t for t in sorted(allowed)
              if all(x in s for x, s in zip(t, cand_sets))]
    forbidden = total - len(usable)
    selector_cost = len(usable) * (len(scope) + 1) + 1
    if forbidden <= selector_cost:
        # few tuples are forbidden, and then total is within a small factor
        # of the allowed count, so walking the product is affordable
        allowed_set = set(usable)
        for combo in itertools.product(*cand_lists):
            if combo not in allowed_set:
                cnf.add(tuple(-cnf.var_of[(v, t)]
                              for v, t in zip(scope, combo)))
    else:
        # one selector per allowed tuple; the exactly-one groups make the
        # true selector unique, so models stay one-to-one with tilings
        sels = []
        for combo in usable:
            s = cnf.new_var()
            sels.append(s)
            for v, t in zip(scope, combo):
                cnf.add((-s, cnf.var_of[(v, t)]))
        cnf.add(tuple(sels))
        # each tile choice names the selectors it tolerates, which lets unit
        # propagation prune scopes the way the blocking form would
        for i, (v, cs) in enumerate(zip(scope, cand_lists)):
            support = {t: [] for t in cs}
            for s, combo in zip(sels, usable):
                support[combo[i]].append(s)
            for t in cs:
                cnf.add(tuple([-cnf.var_of[(v, t)]] + support[t]))


# -- the solver -------------------------------------------------------------------


class Solver:
    """Small clause-learning SAT solver (watched literals, first-UIP
    learning, backjumping).  Deterministic: decisions take the lowest
    unassigned variable, positive phase first.  Assumptions are placed as
    the first decisions; learned clauses survive between calls."""

    def __init__(self, num_vars):
        self.nvars = num_vars
        self.db = []
        self.watches = {}
        self.assign = {}
        self.reason = {}
        self.levels = {}
        self.trail = []
        self.lim = []
        self.qhead = 0
        self.ok = True
        self.search_from = 1

    def value(self, lit):
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return v == (lit > 0)

    def level(self):
        return len(self.lim)

    def add_clause(self, lits):
        # only ever called at the root level, so literal values are permanent
        if not self.ok:
            return
        seen = set()
        out = []
        for q in lits:
            if -q in seen:
                return
            if q in seen:
                continue
            val = self.value(q)
            if val is True:
                return
            if val is False:
                continue
            seen.add(q)
            out.append(q)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return
        self._attach(out)

    def _attach(self, lits):
        self.db.append(lits)
        ci = len(self.db) - 1
        self.watches.setdefault(lits[0], []).append(ci)
        self.watches.setdefault(lits[1], []).append(ci)
        return ci

    def _enqueue(self, lit, reason):
        val = self.value(lit)
        if val is not None:
            return val
        v = abs(lit)
        self.assign[v] = lit > 0
        self.levels[v] = self.level()
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self):
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            neg = -lit
            ws = self.watches.get(neg, [])
            self.watches[neg] = []
            keep = self.watches[neg]
            i = 0
            while i < len(ws):
                ci = ws[i]
                i += 1
                cl = self.db[ci]
                if cl[0] == neg:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                if self.value(first) is True:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self.value(cl[k]) is not False:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if self.value(first) is False:
                    keep.extend(ws[i:])
                    self.qhead = len(self.trail)
                    return cl
                self._enqueue(first, ci)
        return None

    def _analyze(self, confl):
        learnt = []
        seen = set()
        pathc = 0
        p = None
        idx = len(self.trail) - 1
        cur = self.level()
        clause = confl
        while True:
            for q in clause:
                if p is not None and q == p:
                    continue
                v = abs(q)
                if v in seen or self.levels[v] == 0:
                    continue
                seen.add(v)
                if self.levels[v] >= cur:
                    pathc += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            pathc -= 1
            if pathc == 0:
                break
            clause = self.db[self.reason[abs(p)]]
        learnt.insert(0, -p)
        if len(learnt) == 1:
            return learnt, 0
        bl = max(self.levels[abs(q)] for q in learnt[1:])
        k = max(range(1, len(learnt)),
                key=lambda i: self.levels[abs(learnt[i])])
        learnt[1], learnt[k] = learnt[k], learnt[1]
        return learnt, bl

    def _backjump(self, bl):
        while len(self.lim) > bl:
            mark = self.lim.pop()
            while len(self.trail) > mark:
                lit = self.trail.pop()
                v = abs(lit)
                del self.assign[v]
                del self.levels[v]
                del self.reason[v]
                if v < self.search_from:
                    self.search_from = v
        self.qhead = len(self.trail)

    def _decide(self):
        v = self.search_from
        while v <= self.nvars and v in self.assign:
            v += 1
        self.search_from = v
        return v if v <= self.nvars else None

    def solve(self, assumptions=()):
        """A model dict (var -> bool) or None; learned clauses are kept."""
        if not self.ok:
            return None
        self._backjump(0)
        if self._propagate() is not None:
            self.ok = False
            return None
        while True:
            confl = self._propagate()
            if confl is not None:
                if self.level() == 0:
                    self.ok = False
                    return None
                if self.level() <= len(assumptions):
                    # cannot flip an assumption: unsatisfiable under them
                    self._backjump(0)
                    return None
                learnt, bl = self._analyze(confl)
                self._backjump(bl)
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        self.ok = False
                        return None
                else:
                    ci = self._attach(list(learnt))
                    self._enqueue(learnt[0], ci)
                continue
            lvl = self.level()
            if lvl < len(assumptions):
                lit = assumptions[lvl]
                val = self.value(lit)
                self.lim.append(len(self.trail))
                if val is False:
                    self._backjump(0)
                    return None
                if val is None:
                    self._enqueue(lit, None)
                continue
            v = self._decide()
            if v is None:
                model = dict(self.assign)
                self._backjump(0)
                return model
            self.lim.append(len(self.trail))
            self._enqueue(v, None)


def solver_for(cnf):
    s = Solver(cnf.num_vars)
    for cl in cnf.clauses:
        s.add_clause(list(cl))
    return s


def _decode(cnf, model, window):
    values = {}
    for pt in window.points():
        values[pt] = None
    for var, (pt, t) in cnf.meaning.items():
        if model.get(var):
            if values.get(pt) is not None:
                raise ValueError("two tiles at %s" % _point_str(pt))
            values[pt] = t
    missing = [pt for pt, t in values.items() if t is None]
    if missing:
        raise ValueError("no tile at %s" % _point_str(missing[0]))
    return TilingAssignment(values)


def solve_tiling(window, ts, seeds=()):
    """The first tiling of the window, or None."""
    cnf = encode(window, ts, seeds)
    model = solver_for(cnf).solve()
    if model is None:
        return None
    return _decode(cnf, model, window)


def enumerate_tilings(window, ts, seeds=(), limit=None):
    """All tilings in deterministic order, as (solutions, complete).

    complete is False when a limit stopped the enumeration early, which is
    not the same thing as the instance being unsatisfiable.
    """
    cnf = encode(window, ts, seeds)
    s = solver_for(cnf)
    out = []
    while True:
        if limit is not None and len(out) >= limit:
            return out, False
        model = s.solve()
        if model is None:
            return out, True
        asg = _decode(cnf, model, window)
        out.append(asg)
        block = [-cnf.var_of[(pt, t)] for pt, t in asg.values.items()]
        s.add_clause(block)


def count_tilings(window, ts, seeds=(), limit=None):
    sols, complete = enumerate_tilings(window, ts, seeds, limit)
    if not complete:
        raise CapacityError("more than %d tilings" % limit)
    return len(sols)


def forced_values(window, ts, seeds=(), d=2, at=None):
    """Feasible tiles per deep-interior point: point -> sorted tile tuple.

    A point is deep interior when its whole d-ball lies in the window; a
    tile is feasible when the instance stays satisfiable with it pinned.
    Models found along the way settle other pending pairs for free.  With
    at= only the given points are queried (still restricted to the deep
    interior).
    """
    cnf = encode(window, ts, seeds)
    s = solver_for(cnf)
    inner = sorted(interior_vertices(window, d), key=skey)
    if at is not None:
        chosen = set(at)
        inner = [pt for pt in inner if pt in chosen]
    pending = {pt: set(vertex_candidates(ts, window, pt)) for pt in inner}
    feasible = {pt: set() for pt in inner}

    def harvest(model):
        asg = _decode(cnf, model, window)
        for pt in inner:
            t = asg.values[pt]
            if t in pending[pt]:
                pending[pt].discard(t)
                feasible[pt].add(t)

    model = s.solve()
    if model is not None:
        harvest(model)
        for pt in inner:
            for t in sorted(pending[pt]):
                if t not in pending[pt]:
                    continue
                m = s.solve((cnf.var_of[(pt, t)],))
                pending[pt].discard(t)
                if m is not None:
                    feasible[pt].add(t)
                    harvest(m)
    return {pt: tuple(sorted(feasible[pt])) for pt in inner}


# -- exact counting ---------------------------------------------------------------


def _join_factors(f1, f2):
    v1, t1 = f1
    v2, t2 = f2
    pos1 = {v: i for i, v in enumerate(v1)}
    shared = [(pos1[v], i) for i, v in enumerate(v2) if v in pos1]
    extra = [i for i, v in enumerate(v2) if v not in pos1]
    out_vars = v1 + tuple(v2[i] for i in extra)
    index = {}
    for a2, w2 in t2.items():
        key = tuple(a2[i] for _, i in shared)
        index.setdefault(key, []).append(
            (tuple(a2[i] for i in extra), w2))
    out = {}
    for a1, w1 in t1.items():
        key = tuple(a1[i] for i, _ in shared)
        for rest, w2 in index.get(key, ()):
            out[a1 + rest] = w1 * w2
    return out_vars, out


def _sum_out(factor, v):
    varlist, table = factor
    i = varlist.index(v)
    out_vars = varlist[:i] + varlist[i + 1:]
    out = {}
    for a, w in table.items():
        key = a[:i] + a[i + 1:]
        out[key] = out.get(key, 0) + w
    return out_vars, out


def exact_count(window, ts, seeds=(), max_table=10 ** 6):
    """The number of tilings, by sparse variable elimination.

    Independent of the clause solver: constraint scopes become weight-one
    tables, points are summed out in min-degree order, and the result is the
    product of the remaining constants.  Exact for any solution count, but
    the intermediate tables grow with the window's induced width; a table
    beyond max_table entries raises CapacityError.
    """
    for pt, _ in tuple(ts.seeds) + tuple(seeds):
        if pt not in window:
            raise ValueError("seed %s lies outside the window"
                             % _point_str(pt))
    pinned = {}
    for pt, t in tuple(ts.seeds) + tuple(seeds):
        if pt in pinned and pinned[pt] != t:
            return 0
        pinned[pt] = t
    factors = {}
    fid = 0
    for pt in window.points():
        cs = vertex_candidates(ts, window, pt)
        if pt in pinned:
            cs = [t for t in cs if t == pinned[pt]]
        factors[fid] = ((pt,), {(t,): 1 for t in cs})
        fid += 1
    for scope, allowed in window_scopes(ts, window):
        factors[fid] = (tuple(scope), {t: 1 for t in sorted(allowed)})
        fid += 1
    remaining = set(window.points())
    while remaining:
        touching = {}
        for f, (vs, _) in factors.items():
            for v in vs:
                touching.setdefault(v, set()).add(f)
        cheapest = min(
            remaining,
            key=lambda v: (len({u for f in touching.get(v, ())
                                for u in factors[f][0]}), skey(v)))
        fids = sorted(touching.get(cheapest, ()))
        joined = factors[fids[0]]
        for f in fids[1:]:
            joined = _join_factors(joined, factors[f])
            if len(joined[1]) > max_table:
                raise CapacityError("elimination table exceeds %d entries"
                                    % max_table)
        for f in fids:
            del factors[f]
        factors[fid] = _sum_out(joined, cheapest)
        fid += 1
        remaining.discard(cheapest)
    result = 1
    for vs, table in factors.values():
        result *= table.get((), 0)
    return result


# -- DIMACS interchange -----------------------------------------------------------


def export_dimacs(cnf):
    """DIMACS text with one comment per tiling variable."""
    lines = []
    for var in sorted(cnf.meaning):
        pt, t = cnf.meaning[var]
        lines.append("c v %d = %s %s" % (var, _point_str(pt), t))
    lines.append("p cnf %d %d" % (cnf.num_vars, len(cnf.clauses)))
    for cl in cnf.clauses:
        lines.append(" ".join(str(q) for q in cl) + " 0")
    return "\n".join(lines) + "\n"


def import_solution(cnf, text, window):
    """Decode an external solver's output into a tiling.

    Accepts "v"-prefixed model lines or bare literal lines; an explicit
    UNSATISFIABLE status or a malformed model line is an error.
    """
    true_vars = set()
    saw_lits = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line == "SAT":
            continue
        if line.startswith("s"):
            if "UNSAT" in line:
                raise ValueError("solver reported unsatisfiable")
            continue
        if line == "UNSAT" or line.startswith("UNSAT"):
            raise ValueError("solver reported unsatisfiable")
        toks = line.split()
        if toks[0] == "v":
            toks = toks[1:]
        for tok in toks:
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError("malformed model line: %r" % raw)
            saw_lits = True
            if lit > 0:
                true_vars.add(lit)
    if not saw_lits:
        raise ValueError("no model in solver output")
    model = {v: (v in true_vars) for v in range(1, cnf.num_vars + 1)}
    return _decode(cnf, model, window)
