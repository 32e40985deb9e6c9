"""DFS labeling, branch-and-bound and large neighbourhood search."""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .model import Domain, Maximize, Minimize, Model, model_validate
from .propagation import group_batches, propagate_fixpoint, watch_lists
from .state import SearchState, SearchStats

__all__ = [
    "SearchConfig",
    "LnsConfig",
    "Solution",
    "LnsResult",
    "select_variable",
    "select_value",
    "solve_satisfy",
    "solve_optimize",
    "lns_optimize",
    "SharedBest",
]

VAR_HEURISTICS = ("input_order", "first_fail")


@dataclass(frozen=True)
class SearchConfig:
    var_heuristic: str = "first_fail"
    value_heuristic: str = "min_value"
    max_solutions: int | None = 1
    thread_count: int = 1
    seed: int = 0
    alldiff: str = "gac"

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if self.var_heuristic not in VAR_HEURISTICS:
            raise ValueError(f"var_heuristic must be one of {VAR_HEURISTICS}")
        if self.value_heuristic != "min_value":
            raise ValueError("value_heuristic must be 'min_value'")
        if self.max_solutions is not None and self.max_solutions < 1:
            raise ValueError("max_solutions must be positive or None")


@dataclass(frozen=True)
class LnsConfig:
    destroy_rate: float = 0.3
    iterations: int = 10
    neighborhoods: int = 1
    seed: int = 0
    per_iteration_node_limit: int | None = 1000
    thread_count: int = 1
    var_heuristic: str = "first_fail"
    alldiff: str = "gac"

    def __post_init__(self):
        if not 0 < self.destroy_rate <= 1:
            raise ValueError("destroy_rate must be in (0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.neighborhoods < 1:
            raise ValueError("neighborhoods must be >= 1")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if self.per_iteration_node_limit is not None and self.per_iteration_node_limit < 1:
            raise ValueError("per_iteration_node_limit must be positive or None")


@dataclass(frozen=True)
class Solution:
    assignment: tuple[int, ...]
    objective: int | None = None

    def named(self, m: Model) -> dict[str, int]:
        return {v.name: self.assignment[v.id] for v in m.variables}


def select_variable(store: Sequence[Domain], cfg: SearchConfig) -> int | None:
    best, best_size = None, None
    for i, d in enumerate(store):
        size = d.size
        if size <= 1:
            continue
        if cfg.var_heuristic == "input_order":
            return i
        if best_size is None or size < best_size:
            best, best_size = i, size
    return best


def select_value(d: Domain) -> int:
    return d.min


class _NodeLimit(Exception):
    pass


class _DFS:
    """Binary-branching depth-first search: ``x = v`` first, then ``x != v``.

    With an objective, every solution tightens a bound that is re-imposed on
    the objective variable before each propagation (branch-and-bound).
    """

    def __init__(self, model: Model, domains: Sequence[Domain], *, var_heuristic="first_fail",
                 alldiff="gac", threads=1, objective: tuple[int, int] | None = None,
                 bound: int | None = None, node_limit: int | None = None):
        self.model = model
        self.cfg = SearchConfig(var_heuristic=var_heuristic, max_solutions=None, alldiff=alldiff)
        self.batches = group_batches(model.constraints)
        self.watch = watch_lists(self.batches, len(domains))
        self.state = SearchState(domains)
        self.alldiff = alldiff
        self.threads = threads
        # objective = (var, sense) with sense +1 minimize, -1 maximize
        self.objective = objective
        self.bound = bound
        self.node_limit = node_limit
        self.exhausted = False

    @property
    def stats(self) -> SearchStats:
        return self.state.stats

    def _apply_bound(self, changed: set[int]) -> bool:
        if self.objective is None or self.bound is None:
            return True
        var, sense = self.objective
        d = self.state[var]
        if sense > 0:
            nd = d.remove_mask(d.mask_range(self.bound, None))
        else:
            nd = d.remove_mask(d.mask_range(None, self.bound))
        if nd is not d:
            self.state[var] = nd
            changed.add(var)
        return not nd.is_empty()

    def _propagate(self, changed: set[int] | None) -> bool:
        extra: set[int] = set()
        if not self._apply_bound(extra):
            self.stats.failures += 1
            return False
        if changed is not None:
            changed = changed | extra
        r = propagate_fixpoint(self.state, self.batches, alldiff=self.alldiff,
                               threads=self.threads, changed=changed, watch=self.watch)
        self.stats.rounds += r.rounds
        if not r.ok:
            self.stats.failures += 1
        return r.ok

    def _count_node(self):
        if self.node_limit is not None and self.stats.nodes >= self.node_limit:
            raise _NodeLimit
        self.stats.nodes += 1

    def run(self) -> Iterator[Solution]:
        st = self.state
        ok = self._propagate(None)
        trail: list[tuple[int, int, bool]] = []  # (var, value, right branch taken)
        try:
            while True:
                if ok:
                    var = select_variable(st.domains, self.cfg)
                    if var is None:
                        values = tuple(d.min for d in st.domains)
                        obj = None
                        if self.objective is not None:
                            obj = values[self.objective[0]]
                            self.bound = obj
                        self.stats.solutions += 1
                        yield Solution(values, obj)
                        ok = False
                        continue
                    value = select_value(st[var])
                    self._count_node()
                    st.push_level()
                    trail.append((var, value, False))
                    st[var] = st[var].assign(value)
                    ok = self._propagate({var})
                    continue
                while trail:
                    var, value, right = trail.pop()
                    st.pop_level()
                    if not right:
                        self._count_node()
                        st.push_level()
                        trail.append((var, value, True))
                        st[var] = st[var].remove((value,))
                        if st[var].is_empty():
                            self.stats.failures += 1
                            ok = False
                        else:
                            ok = self._propagate({var})
                        break
                else:
                    self.exhausted = True
                    return
        except _NodeLimit:
            return


def _check(m: Model) -> None:
    problems = model_validate(m)
    if problems:
        raise ValueError("invalid model: " + "; ".join(map(str, problems)))


def _copy_stats(src: SearchStats, dst: SearchStats | None) -> None:
    if dst is not None:
        dst.nodes, dst.failures, dst.rounds, dst.solutions = (
            src.nodes, src.failures, src.rounds, src.solutions)


def solve_satisfy(m: Model, cfg: SearchConfig = SearchConfig(),
                  stats: SearchStats | None = None) -> Iterator[Solution]:
    """Yield solutions in DFS order, up to ``cfg.max_solutions``.

    ``stats``, when given, is kept up to date with the search counters.
    """
    _check(m)
    dfs = _DFS(m, m.domains, var_heuristic=cfg.var_heuristic, alldiff=cfg.alldiff,
               threads=cfg.thread_count)
    count = 0
    try:
        for sol in dfs.run():
            _copy_stats(dfs.stats, stats)
            yield sol
            count += 1
            if cfg.max_solutions is not None and count >= cfg.max_solutions:
                return
    finally:
        _copy_stats(dfs.stats, stats)


def _objective(m: Model) -> tuple[int, int]:
    if isinstance(m.goal, Minimize):
        return m.goal.var, 1
    if isinstance(m.goal, Maximize):
        return m.goal.var, -1
    raise ValueError("model has no objective")


def _better(a: int, b: int | None, sense: int) -> bool:
    return b is None or (a < b if sense > 0 else a > b)


def solve_optimize(m: Model, cfg: SearchConfig = SearchConfig(max_solutions=None),
                   stats: SearchStats | None = None, *, first_only: bool = False) -> Solution | None:
    """Branch-and-bound; returns the optimum, or None if the model is unsatisfiable.

    ``first_only`` stops at the first incumbent.
    """
    _check(m)
    objective = _objective(m)
    dfs = _DFS(m, m.domains, var_heuristic=cfg.var_heuristic, alldiff=cfg.alldiff,
               threads=cfg.thread_count, objective=objective)
    best = None
    for sol in dfs.run():
        best = sol
        if first_only:
            break
    _copy_stats(dfs.stats, stats)
    return best


class SharedBest:
    """Best-solution cell shared by LNS workers; accepts strict improvements only."""

    def __init__(self, sense: int, solution: Solution | None = None):
        self.sense = sense
        self.solution = solution
        self._lock = threading.Lock()

    def offer(self, sol: Solution) -> bool:
        with self._lock:
            cur = None if self.solution is None else self.solution.objective
            if _better(sol.objective, cur, self.sense):
                self.solution = sol
                return True
            return False

    def get(self) -> Solution | None:
        with self._lock:
            return self.solution


@dataclass
class LnsResult:
    solution: Solution | None
    initial: Solution | None = None
    history: list[int] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def objective(self) -> int | None:
        return None if self.solution is None else self.solution.objective


def _neighbourhood(m: Model, incumbent: Solution, cfg: LnsConfig, iteration: int, index: int,
                   objective: tuple[int, int]) -> tuple[Solution | None, SearchStats]:
    n = len(m.variables)
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, iteration, index])
    k = min(n, math.ceil(cfg.destroy_rate * n))
    relaxed = set(int(i) for i in rng.choice(n, size=k, replace=False))
    domains = [d if i in relaxed else d.assign(incumbent.assignment[i])
               for i, d in enumerate(m.domains)]
    dfs = _DFS(m, domains, var_heuristic=cfg.var_heuristic, alldiff=cfg.alldiff,
               objective=objective, bound=incumbent.objective,
               node_limit=cfg.per_iteration_node_limit)
    best = None
    for sol in dfs.run():
        best = sol
    return best, dfs.stats


def lns_optimize(m: Model, cfg: LnsConfig = LnsConfig()) -> LnsResult:
    """Large neighbourhood search from the first branch-and-bound incumbent.

    Each iteration every neighbourhood starts from the current global best,
    resets a random subset of variables to their declared domains and fixes
    the rest. Improvements are offered to the shared best in neighbourhood
    order once all workers of the iteration are done, so the outcome does
    not depend on ``thread_count``.
    """
    _check(m)
    objective = _objective(m)
    stats = SearchStats()
    initial = solve_optimize(
        m, SearchConfig(var_heuristic=cfg.var_heuristic, alldiff=cfg.alldiff, max_solutions=None),
        stats, first_only=True)
    result = LnsResult(None, initial, stats=stats)
    if initial is None:
        return result
    shared = SharedBest(objective[1], initial)
    result.history.append(initial.objective)
    pool = ThreadPoolExecutor(max_workers=cfg.thread_count) if cfg.thread_count > 1 else None
    try:
        for it in range(cfg.iterations):
            start = shared.get()
            jobs = [(start, it, w) for w in range(cfg.neighborhoods)]
            if pool is None:
                outs = [_neighbourhood(m, s, cfg, i, w, objective) for s, i, w in jobs]
            else:
                outs = list(pool.map(lambda j: _neighbourhood(m, j[0], cfg, j[1], j[2], objective), jobs))
            for sol, st in outs:
                stats.nodes += st.nodes
                stats.failures += st.failures
                stats.rounds += st.rounds
                stats.solutions += st.solutions
                if sol is not None:
                    shared.offer(sol)
            result.history.append(shared.get().objective)
    finally:
        if pool is not None:
            pool.shutdown()
    result.solution = shared.get()
    return result
