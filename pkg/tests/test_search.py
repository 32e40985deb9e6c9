import pytest

from fdsolver.generators import gen_nqueens
from fdsolver.model import Domain, new_domain
from fdsolver.parser import parse_model
from fdsolver.search import (
    LnsConfig,
    SearchConfig,
    SharedBest,
    Solution,
    lns_optimize,
    select_value,
    select_variable,
    solve_optimize,
    solve_satisfy,
)
from fdsolver.state import SearchStats

from oracles import brute_force, brute_optimum, domain_of, random_model

EXAMPLE = "var x1 in 1..5;\nvar x2 in 1..10;\nconstraint x1 > 3;\nconstraint x1 < x2;\n"
ALL = SearchConfig(max_solutions=None)


def sizes(*ns):
    return [new_domain(0, n - 1) for n in ns]


def test_select_variable():
    ff = SearchConfig(var_heuristic="first_fail")
    assert select_variable(sizes(3, 2, 5), ff) == 1
    assert select_variable(sizes(1, 1, 1), ff) is None
    assert select_variable(sizes(2, 2), ff) == 0
    assert select_variable(sizes(1, 3, 2), SearchConfig(var_heuristic="input_order")) == 1


@pytest.mark.parametrize("vals, expected", [({4, 5}, 4), ({7}, 7), ({2, 9, 11}, 2)])
def test_select_value(vals, expected):
    assert select_value(domain_of(vals)) == expected


def test_example_solution_count():
    m = parse_model(EXAMPLE + "solve satisfy;")
    sols = [s.assignment for s in solve_satisfy(m, ALL)]
    assert len(brute_force(m)) == 11
    assert sorted(sols) == brute_force(m)


@pytest.mark.parametrize("n, count", [(1, 1), (4, 2), (5, 10), (6, 4)])
def test_nqueens_counts(n, count):
    m = parse_model(gen_nqueens(n))
    assert len(list(solve_satisfy(m, ALL))) == count


def test_pigeonhole_fails_at_root():
    m = parse_model("var a in 1..2; var b in 1..2; var c in 1..2; "
                    "constraint alldifferent(a, b, c); solve satisfy;")
    stats = SearchStats()
    assert list(solve_satisfy(m, ALL, stats)) == []
    assert stats.nodes == 0 and stats.failures == 1


def test_max_solutions():
    m = parse_model(EXAMPLE + "solve satisfy;")
    assert len(list(solve_satisfy(m, SearchConfig(max_solutions=3)))) == 3


def test_minimize_and_maximize():
    m = parse_model(EXAMPLE + "solve minimize x2;")
    best = solve_optimize(m)
    assert best == Solution((4, 5), 5)
    m = parse_model(EXAMPLE + "solve maximize x2;")
    assert solve_optimize(m).objective == 10


def test_optimize_unsat():
    m = parse_model("var x in 1..2; constraint x > 3; solve minimize x;")
    assert solve_optimize(m) is None


@pytest.mark.parametrize("seed", range(50))
def test_solution_sets_match_brute_force(seed):
    m = random_model(seed)
    want = brute_force(m)
    for h in ("first_fail", "input_order"):
        for level in ("gac", "fc"):
            cfg = SearchConfig(var_heuristic=h, alldiff=level, max_solutions=None)
            got = [s.assignment for s in solve_satisfy(m, cfg)]
            assert len(got) == len(set(got))
            assert sorted(got) == want


@pytest.mark.parametrize("seed", range(30))
def test_branch_and_bound(seed):
    m = random_model(seed, goal="minimize" if seed % 2 else "maximize")
    best = solve_optimize(m)
    want = brute_optimum(m)
    assert (best is None and want is None) or best.objective == want


def test_determinism_of_stats():
    m = parse_model(gen_nqueens(6))
    runs = []
    for threads in (1, 1, 3):
        st = SearchStats()
        sols = [s.assignment for s in solve_satisfy(m, SearchConfig(max_solutions=None, thread_count=threads), st)]
        runs.append((sols, st))
    assert runs[0] == runs[1] == runs[2]


def test_lns_full_destroy_reaches_optimum():
    m = parse_model(EXAMPLE + "solve maximize x2;")
    res = lns_optimize(m, LnsConfig(destroy_rate=1.0, iterations=1, per_iteration_node_limit=None))
    assert res.objective == 10
    assert res.initial.objective <= 10


def test_lns_reproducible():
    m = parse_model(gen_nqueens(6).replace("solve satisfy;", "solve minimize q1;"))
    cfg = LnsConfig(destroy_rate=0.5, iterations=1, neighborhoods=1, seed=42)
    a, b = lns_optimize(m, cfg), lns_optimize(m, cfg)
    assert a.solution == b.solution and a.history == b.history and a.stats == b.stats


def test_lns_threads_do_not_change_result():
    m = parse_model(gen_nqueens(7).replace("solve satisfy;", "solve maximize q3;"))
    base = LnsConfig(destroy_rate=0.4, iterations=4, neighborhoods=4, seed=9, per_iteration_node_limit=30)
    one = lns_optimize(m, base)
    many = lns_optimize(m, LnsConfig(**{**base.__dict__, "thread_count": 4}))
    assert one.solution == many.solution and one.history == many.history


@pytest.mark.parametrize("seed", range(10))
def test_lns_monotone_history(seed):
    m = random_model(seed, goal="minimize")
    res = lns_optimize(m, LnsConfig(destroy_rate=0.5, iterations=5, neighborhoods=2, seed=seed,
                                    per_iteration_node_limit=5))
    if res.solution is None:
        assert brute_optimum(m) is None
        return
    h = res.history
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert res.objective <= res.initial.objective


def test_lns_config_guards():
    with pytest.raises(ValueError):
        LnsConfig(iterations=0)
    with pytest.raises(ValueError):
        LnsConfig(destroy_rate=0)
    with pytest.raises(ValueError):
        LnsConfig(destroy_rate=1.5)
    with pytest.raises(ValueError):
        SearchConfig(thread_count=0)


def test_lns_requires_objective():
    with pytest.raises(ValueError):
        lns_optimize(parse_model("var x in 1..2; solve satisfy;"))


def test_shared_best_strict():
    cell = SharedBest(1, Solution((3,), 3))
    assert not cell.offer(Solution((3,), 3))
    assert cell.offer(Solution((2,), 2))
    assert not cell.offer(Solution((5,), 5))
    assert cell.get().objective == 2
    cell = SharedBest(-1)
    assert cell.offer(Solution((1,), 1)) and cell.offer(Solution((4,), 4))


def test_invalid_model_rejected():
    m = parse_model("var x in 1..2; solve satisfy;")
    m.domains.append(Domain(0, 1, 1))
    with pytest.raises(ValueError):
        list(solve_satisfy(m))
