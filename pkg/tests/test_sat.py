import itertools
import random

import pytest

from tilesim.geometry import (
    ball, cell_points, dl_window, evaluate_word, identity, interior_vertices,
    tetrahedron, window_cells)
from tilesim.graphs import CapacityError, enumerate_homs
from tilesim.sat import (
    CnfInstance, Solver, TilingAssignment, count_tilings, encode,
    enumerate_tilings, exact_count, export_dimacs, forced_values,
    import_solution, solve_tiling, solver_for)
from tilesim.tilesets import (
    comb_configuration, comb_tileset, dl_ray_system, lr_system,
    random_wang_tileset, ray_left_system, tetra_to_wang, tiling_ok,
    vertex_candidates, wang_to_dhs, wang_to_tetra, window_scopes)


def brute_tilings(window, ts):
    # independent ground truth: depth-first over points, checking scopes
    pts = window.points()
    pos = {p: i for i, p in enumerate(pts)}
    scopes_at = [[] for _ in pts]
    for scope, allowed in window_scopes(ts, window):
        last = max(pos[v] for v in scope)
        scopes_at[last].append((tuple(pos[v] for v in scope), allowed))
    cands = [vertex_candidates(ts, window, p) for p in pts]
    out = []
    assign = [None] * len(pts)

    def place(i):
        if i == len(pts):
            out.append(dict(zip(pts, assign)))
            return
        for t in cands[i]:
            assign[i] = t
            if all(tuple(assign[j] for j in sc) in allowed
                   for sc, allowed in scopes_at[i]):
                place(i + 1)

    place(0)
    return out


def test_solver_basics():
    s = Solver(0)
    assert s.solve() == {}
    s = Solver(1)
    s.add_clause([1])
    s.add_clause([-1])
    assert s.solve() is None
    s = Solver(2)
    s.add_clause([1, 2])
    s.add_clause([-1, 2])
    model = s.solve()
    assert model[2] is True


def test_solver_deterministic_branching():
    s = Solver(3)
    s.add_clause([1, 2, 3])
    # nothing is forced, so the lowest variable is tried positively first
    assert s.solve() == {1: True, 2: True, 3: True}


def test_solver_assumptions():
    s = Solver(3)
    s.add_clause([-1, 2])
    s.add_clause([-2, 3])
    m = s.solve((1,))
    assert m[1] and m[2] and m[3]
    assert s.solve((1, -3)) is None
    # the solver stays usable after an assumption failure
    m = s.solve((-1,))
    assert m[1] is False


def test_solver_learns_and_survives():
    # pigeonhole 3 pigeons, 2 holes: forces real conflict analysis
    s = Solver(6)
    for p in range(3):
        s.add_clause([2 * p + 1, 2 * p + 2])
    for h in (1, 2):
        for p1, p2 in itertools.combinations(range(3), 2):
            s.add_clause([-(2 * p1 + h), -(2 * p2 + h)])
    assert s.solve() is None
    assert s.solve() is None


def test_encode_single_vertex_group():
    cnf = encode(ball(0), comb_tileset())
    assert cnf.num_vars == 6
    assert len(cnf.clauses) == 1 + 15  # at-least-one plus pairwise


def test_encode_seed_errors():
    with pytest.raises(ValueError):
        encode(ball(0), comb_tileset(), seeds=((evaluate_word("aaa"), 0),))


def test_comb_seeded_ball_is_satisfiable():
    asg = solve_tiling(ball(2), comb_tileset(), seeds=((identity(), 0),))
    assert asg is not None
    assert asg.tile(identity()) == 0
    assert tiling_ok(ball(2), comb_tileset(), asg.values)


def test_enumerate_matches_brute_force():
    win = tetrahedron(0, 1)
    ts = comb_tileset()
    sols, complete = enumerate_tilings(win, ts)
    assert complete
    brute = brute_tilings(win, ts)
    assert sorted([s.values for s in sols], key=repr) == \
        sorted(brute, key=repr)
    again, _ = enumerate_tilings(win, ts)
    assert [s.values for s in again] == [s.values for s in sols]


def test_enumerate_limit_is_not_unsat():
    win = tetrahedron(0, 1)
    sols, complete = enumerate_tilings(win, comb_tileset(), limit=3)
    assert len(sols) == 3
    assert not complete
    with pytest.raises(CapacityError):
        count_tilings(win, comb_tileset(), limit=3)


def test_counts_match_hom_counts():
    # tile assignments on a window are exactly graph homomorphisms into the
    # one-vertex-per-tile target
    for win in (ball(1), tetrahedron(0, 2)):
        for w in (comb_tileset(), random_wang_tileset(random.Random(13))):
            homs = enumerate_homs(win.graph, wang_to_dhs(w).graph)
            assert count_tilings(win, w) == len(homs)


def test_wang_tetra_counts_on_saturated_window():
    win = tetrahedron(0, 2)
    w = comb_tileset()
    assert count_tilings(win, w) == count_tilings(win, wang_to_tetra(w))


def test_wang_tetra_on_ball_window_injection():
    # ball windows carry edges whose cells stick out, so the converted
    # system keeps every tile solution (and, per the tileset tests, gains
    # strictly more)
    win = ball(2)
    w = comb_tileset()
    t = wang_to_tetra(w)
    wang_sols, complete = enumerate_tilings(
        win, w, seeds=((identity(), 0),))
    assert complete
    assert wang_sols
    for s in wang_sols:
        assert tiling_ok(win, t, s.values,
                         extra_seeds=((identity(), 0),))


def test_unsat_on_contradictory_seeds():
    seeds = ((identity(), 0), (identity(), 1))
    assert solve_tiling(ball(1), comb_tileset(), seeds) is None


def test_forced_values_soundness_and_seed():
    win = ball(3)
    ts = comb_tileset()
    forced = forced_values(win, ts, seeds=((identity(), 0),))
    inner = interior_vertices(win, 2)
    assert set(forced) == set(inner)
    assert forced[identity()] == (0,)
    for pt, feasible in forced.items():
        assert comb_configuration(pt) in feasible


def test_forced_values_unsat_instance():
    seeds = ((identity(), 0), (identity(), 1))
    forced = forced_values(ball(2), comb_tileset(), seeds)
    assert forced
    assert all(v == () for v in forced.values())


def test_forced_values_respects_depth():
    win = ball(3)
    shallow = forced_values(win, comb_tileset(), d=1)
    deep = forced_values(win, comb_tileset(), d=3)
    assert set(deep) < set(shallow)


def test_lr_seeded_window():
    ts = lr_system()
    both = ts.alphabet.index((True, True))
    win = tetrahedron(-2, 2)
    asg = solve_tiling(win, ts, seeds=((identity(), both),))
    assert asg is not None
    assert tiling_ok(win, ts, asg.values)
    assert asg.tile(identity()) == both


def test_dl_ray_window():
    ts = dl_ray_system(2, 2)
    win = dl_window(2, 2, 0, 2)
    top = ts.alphabet.index(True)
    asg = solve_tiling(win, ts, seeds=((identity(), top),))
    assert asg is not None
    assert tiling_ok(win, ts, asg.values)
    sols, complete = enumerate_tilings(win, ts)
    assert complete
    brute = brute_tilings(win, ts)
    assert sorted([s.values for s in sols], key=repr) == \
        sorted(brute, key=repr)


def test_export_dimacs_format():
    win = ball(1)
    cnf = encode(win, comb_tileset())
    text = export_dimacs(cnf)
    lines = text.splitlines()
    head = [ln for ln in lines if ln.startswith("p ")]
    assert head == ["p cnf %d %d" % (cnf.num_vars, len(cnf.clauses))]
    assert lines[0].startswith("c v 1 = ")
    clause_lines = [ln for ln in lines if not ln.startswith(("c", "p"))]
    assert len(clause_lines) == len(cnf.clauses)
    assert all(ln.endswith(" 0") for ln in clause_lines)


def test_import_solution_round_trip():
    win = ball(1)
    ts = comb_tileset()
    cnf = encode(win, ts)
    sols, _ = enumerate_tilings(win, ts, limit=1)
    model_lits = []
    for pt, t in sols[0].values.items():
        model_lits.append(cnf.var_of[(pt, t)])
    negs = [-v for v in range(1, cnf.num_vars + 1) if v not in model_lits]
    text = "s SATISFIABLE\nv %s 0\n" % " ".join(
        str(x) for x in sorted(model_lits) + negs)
    asg = import_solution(cnf, text, win)
    assert asg.values == sols[0].values
    assert tiling_ok(win, ts, asg.values)


def test_import_solution_errors():
    win = ball(0)
    cnf = encode(win, comb_tileset())
    with pytest.raises(ValueError):
        import_solution(cnf, "s UNSATISFIABLE\n", win)
    with pytest.raises(ValueError):
        import_solution(cnf, "v 1 banana 0\n", win)
    with pytest.raises(ValueError):
        import_solution(cnf, "c nothing here\n", win)
    # a model that picks two tiles at one point is rejected
    with pytest.raises(ValueError):
        import_solution(cnf, "v 1 2 3 4 5 6 0\n", win)


def test_assignment_dump_format():
    ts = comb_tileset()
    asg = TilingAssignment({identity(): 0, evaluate_word("a"): 4})
    text = asg.to_text()
    assert text.splitlines() == ["(0;) 0", "(1;) 4"]
    named = asg.to_text(ts)
    assert named.splitlines() == ["(0;) spine", "(1;) above"]


def test_exact_count_matches_enumeration():
    cases = [
        (ball(1), comb_tileset(), ()),
        (tetrahedron(0, 1), comb_tileset(), ()),
        (tetrahedron(0, 1), wang_to_tetra(comb_tileset()), ()),
        (ball(2), comb_tileset(), ((identity(), 0),)),
        (dl_window(2, 2, 0, 2), dl_ray_system(2, 2), ()),
    ]
    for win, ts, seeds in cases:
        sols, complete = enumerate_tilings(win, ts, seeds)
        assert complete
        assert exact_count(win, ts, seeds) == len(sols)


def test_exact_count_handles_large_counts():
    # ball(2) has 19060 unseeded comb tilings; elimination gets the number
    # without enumerating them
    n = exact_count(ball(2), comb_tileset())
    assert n == 19060
    homs = enumerate_homs(ball(2).graph, wang_to_dhs(comb_tileset()).graph)
    assert len(homs) == n


def test_exact_count_seed_handling():
    with pytest.raises(ValueError):
        exact_count(ball(0), comb_tileset(),
                    seeds=((evaluate_word("aaa"), 0),))
    clash = ((identity(), 0), (identity(), 1))
    assert exact_count(ball(1), comb_tileset(), seeds=clash) == 0


def test_round_trip_tile_count_formula():
    # converting cells to tiles multiplies boundary freedom in: each point
    # with no complete cell above it picks any matching above-cell, and
    # likewise below, so the tile count inflates by the exact product below
    win = tetrahedron(0, 1)
    t = ray_left_system()
    w = tetra_to_wang(t)
    cells = sorted(t.allowed, key=repr)
    f_above = lambda x: sum(1 for c in cells if c[0] == x)
    f_below = lambda y: sum(1 for c in cells if c[2] == y)
    covered_above = set()
    covered_below = set()
    for base in window_cells(win):
        al, be, ga, de = cell_points(base)
        covered_above.update((al, be))
        covered_below.update((ga, de))
    total = 0
    for sol in brute_tilings(win, t):
        term = 1
        for pt, sym_idx in sol.items():
            sym = t.alphabet[sym_idx]
            if pt not in covered_above:
                term *= f_above(sym)
            if pt not in covered_below:
                term *= f_below(sym)
        total += term
    assert count_tilings(win, w) == total
    assert total == 8
    assert len(brute_tilings(win, t)) == 3


def test_scope_selector_encoding_kicks_in():
    # a cell scope over 6 symbols has 1296 combinations; the selector form
    # must be chosen and the count must still be right
    win = tetrahedron(0, 1)
    ts = wang_to_tetra(comb_tileset())
    cnf = encode(win, ts)
    assert cnf.num_vars > 4 * 6
    assert count_tilings(win, ts) == len(brute_tilings(win, ts))
