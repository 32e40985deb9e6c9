"""Constraint propagators and the batched, bulk-synchronous fixpoint engine.

A propagation round works on a frozen snapshot of all domains. Every batch
(all constraints of one type) runs its members against that snapshot, each
member producing a private :class:`RemovalSet`. The sets are OR-merged per
variable and applied in one step. Members never see each other's removals
inside a round, so the schedule (sequential or threaded) cannot change the
outcome.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, MutableSequence, Sequence

from .model import (
    INT64_MAX,
    INT64_MIN,
    AllDifferent,
    ArithmeticOverflow,
    Constraint,
    Domain,
    Linear,
    RelBin,
)

__all__ = [
    "RemovalSet",
    "PropagatorBatch",
    "snapshot",
    "prop_rel_bin",
    "prop_linear",
    "prop_alldiff_fc",
    "prop_alldiff_gac",
    "propagate_constraint",
    "group_batches",
    "run_batch",
    "RoundStatus",
    "RoundResult",
    "FixpointResult",
    "propagate_round",
    "propagate_fixpoint",
]

ALLDIFF_LEVELS = ("gac", "fc")


class RemovalSet:
    """Per-variable masks of values to delete, aligned to each variable's domain."""

    __slots__ = ("masks",)

    def __init__(self, masks: dict[int, int] | None = None):
        self.masks: dict[int, int] = {}
        if masks:
            for v, m in masks.items():
                self.add(v, m)

    def add(self, var: int, mask: int) -> None:
        if mask:
            self.masks[var] = self.masks.get(var, 0) | mask

    def update(self, other: RemovalSet) -> None:
        for v, m in other.masks.items():
            self.add(v, m)

    def __bool__(self):
        return bool(self.masks)

    def __eq__(self, other):
        return isinstance(other, RemovalSet) and self.masks == other.masks

    def __repr__(self):
        return f"RemovalSet({self.masks!r})"

    def values(self, snap: Sequence[Domain]) -> dict[int, set[int]]:
        """Decode masks into explicit value sets."""
        out = {}
        for v, m in self.masks.items():
            d = snap[v]
            out[v] = set(Domain(d.offset, d.width, m))
        return out


@dataclass(frozen=True)
class PropagatorBatch:
    kind: str
    members: tuple[int, ...]
    constraints: tuple[Constraint, ...] = field(repr=False)


def snapshot(domains: Iterable[Domain]) -> tuple[Domain, ...]:
    # Domain is immutable, so a tuple of references is a frozen copy.
    return tuple(domains)


# -- binary relations --------------------------------------------------------

def _shift_into(src: Domain, dst: Domain, delta: int) -> int:
    """Mask over ``dst`` of the values ``w + delta`` for ``w`` in ``src``."""
    s = src.offset + delta - dst.offset
    bits = src.bits << s if s >= 0 else src.bits >> -s
    return bits & dst.full_mask


def _rel_literal(x: Domain, op: str, c: int) -> int:
    """Mask of values in ``x`` that fail ``x op c``."""
    if op == "<":
        bad = x.mask_range(c, None)
    elif op == "<=":
        bad = x.mask_range(c + 1, None)
    elif op == ">":
        bad = x.mask_range(None, c)
    elif op == ">=":
        bad = x.mask_range(None, c - 1)
    elif op == "=":
        bad = x.full_mask & ~x.mask_range(c, c)
    else:
        bad = x.mask_range(c, c)
    return x.bits & bad


def prop_rel_bin(c: RelBin, s: Sequence[Domain]) -> RemovalSet:
    x = s[c.lhs]
    out = RemovalSet()
    if not c.rhs_is_var:
        out.add(c.lhs, _rel_literal(x, c.op, c.rhs))
        return out
    y, k = s[c.rhs], c.offset
    if x.is_empty() or y.is_empty():
        return out
    op = c.op
    if op == "<":
        # x < y + k
        out.add(c.lhs, x.bits & x.mask_range(y.max + k, None))
        out.add(c.rhs, y.bits & y.mask_range(None, x.min - k))
    elif op == "<=":
        out.add(c.lhs, x.bits & x.mask_range(y.max + k + 1, None))
        out.add(c.rhs, y.bits & y.mask_range(None, x.min - k - 1))
    elif op == "=":
        out.add(c.lhs, x.bits & ~_shift_into(y, x, k))
        out.add(c.rhs, y.bits & ~_shift_into(x, y, -k))
    elif op == "!=":
        if y.is_singleton():
            out.add(c.lhs, x.bits & x.mask_range(y.min + k, y.min + k))
        if x.is_singleton():
            out.add(c.rhs, y.bits & y.mask_range(x.min - k, x.min - k))
    else:  # pragma: no cover - RelBin normalizes > and >=
        raise ValueError(op)
    return out


# -- linear ------------------------------------------------------------------

def _checked(v: int) -> int:
    if v < INT64_MIN or v > INT64_MAX:
        raise ArithmeticOverflow(f"intermediate value {v} exceeds 64-bit range")
    return v


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _linear_le(terms, s: Sequence[Domain], bound: int, out: RemovalSet) -> None:
    """Bounds filtering for ``sum(a*x) <= bound``."""
    lows = []
    total = 0
    for a, v in terms:
        d = s[v]
        lo = _checked(a * (d.min if a > 0 else d.max))
        lows.append(lo)
        total = _checked(total + lo)
    for (a, v), lo in zip(terms, lows):
        d = s[v]
        slack = _checked(bound - (total - lo))  # a*x <= slack
        if a > 0:
            out.add(v, d.bits & d.mask_range(slack // a + 1, None))
        else:
            out.add(v, d.bits & d.mask_range(None, _ceil_div(slack, a) - 1))


def prop_linear(c: Linear, s: Sequence[Domain]) -> RemovalSet:
    out = RemovalSet()
    if any(s[v].is_empty() for _, v in c.terms):
        return out
    _linear_le(c.terms, s, c.bound, out)
    if c.op == "=":
        _linear_le(tuple((-a, v) for a, v in c.terms), s, _checked(-c.bound), out)
    return out


# -- alldifferent ------------------------------------------------------------

def prop_alldiff_fc(c: AllDifferent, s: Sequence[Domain]) -> RemovalSet:
    """Remove each fixed member's value from every other member."""
    out = RemovalSet()
    for i in c.vars:
        di = s[i]
        if not di.is_singleton():
            continue
        v = di.min
        for j in c.vars:
            if j != i:
                dj = s[j]
                out.add(j, dj.bits & dj.mask_range(v, v))
    return out


def _max_matching(adj: list[list[int]], nvals: int) -> tuple[list[int], list[int]]:
    """Augmenting-path bipartite matching. Returns (var->val, val->var), -1 if free."""
    n = len(adj)
    var_to = [-1] * n
    val_to = [-1] * nvals
    # greedy seed
    for x in range(n):
        for w in adj[x]:
            if val_to[w] < 0:
                var_to[x], val_to[w] = w, x
                break
    for root in range(n):
        if var_to[root] >= 0:
            continue
        parent_val = {}  # val -> var it was reached from
        seen_var = {root}
        frontier = [root]
        found = -1
        while frontier and found < 0:
            nxt = []
            for x in frontier:
                for w in adj[x]:
                    if w in parent_val:
                        continue
                    parent_val[w] = x
                    y = val_to[w]
                    if y < 0:
                        found = w
                        break
                    if y not in seen_var:
                        seen_var.add(y)
                        nxt.append(y)
                if found >= 0:
                    break
            frontier = nxt
        if found < 0:
            continue
        w = found
        while w >= 0:
            x = parent_val[w]
            prev = var_to[x]
            var_to[x], val_to[w] = w, x
            w = prev
    return var_to, val_to


def _scc(n: int, succ: list[list[int]]) -> list[int]:
    """Iterative Tarjan; returns a component id per node."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for start in range(n):
        if index[start] >= 0:
            continue
        work = [(start, 0)]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack[start] = True
        while work:
            node, i = work[-1]
            if i < len(succ[node]):
                work[-1] = (node, i + 1)
                nb = succ[node][i]
                if index[nb] < 0:
                    index[nb] = low[nb] = counter
                    counter += 1
                    stack.append(nb)
                    on_stack[nb] = True
                    work.append((nb, 0))
                elif on_stack[nb]:
                    low[node] = min(low[node], index[nb])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == node:
                        break
                ncomp += 1
    return comp


def prop_alldiff_gac(c: AllDifferent, s: Sequence[Domain]) -> RemovalSet:
    """Keep exactly the values that appear in some covering matching.

    Without a matching that covers every member, the lowest-id member is
    emptied. Matched edges point variable -> value and free edges value ->
    variable.
    A free edge survives when both ends share a strongly connected component
    or its value is reachable from an unmatched value (even alternating path).
    """
    out = RemovalSet()
    xs = c.vars
    n = len(xs)
    val_index: dict[int, int] = {}
    vals: list[int] = []
    adj: list[list[int]] = []
    for x in xs:
        row = []
        for v in s[x]:
            k = val_index.get(v)
            if k is None:
                k = val_index[v] = len(vals)
                vals.append(v)
            row.append(k)
        adj.append(row)
    var_to, val_to = _max_matching(adj, len(vals))
    if min(var_to) < 0:
        # always the same member, so the failure output stays monotone
        victim = min(xs)
        out.add(victim, s[victim].bits)
        return out
    m = len(vals)
    # nodes: vars 0..n-1, values n..n+m-1
    succ: list[list[int]] = [[] for _ in range(n + m)]
    for i, row in enumerate(adj):
        for w in row:
            if var_to[i] == w:
                succ[i].append(n + w)
            else:
                succ[n + w].append(i)
    reach = [False] * (n + m)
    todo = [n + w for w in range(m) if val_to[w] < 0]
    for t in todo:
        reach[t] = True
    while todo:
        u = todo.pop()
        for nb in succ[u]:
            if not reach[nb]:
                reach[nb] = True
                todo.append(nb)
    comp = _scc(n + m, succ)
    for i, row in enumerate(adj):
        d = s[xs[i]]
        bad = 0
        for w in row:
            if var_to[i] == w or reach[n + w] or comp[n + w] == comp[i]:
                continue
            bad |= 1 << (vals[w] - d.offset)
        out.add(xs[i], bad)
    return out


# -- batches and rounds ------------------------------------------------------

def propagate_constraint(c: Constraint, s: Sequence[Domain], alldiff: str = "gac") -> RemovalSet:
    if isinstance(c, RelBin):
        return prop_rel_bin(c, s)
    if isinstance(c, Linear):
        return prop_linear(c, s)
    if alldiff == "gac":
        return prop_alldiff_gac(c, s)
    if alldiff == "fc":
        return prop_alldiff_fc(c, s)
    raise ValueError(f"alldiff level must be one of {ALLDIFF_LEVELS}, got {alldiff!r}")


def group_batches(constraints: Sequence[Constraint]) -> list[PropagatorBatch]:
    """Stable partition of constraint indices by constraint type."""
    groups: dict[str, list[int]] = {}
    for i, c in enumerate(constraints):
        groups.setdefault(c.kind, []).append(i)
    return [
        PropagatorBatch(kind, tuple(idx), tuple(constraints[i] for i in idx))
        for kind, idx in groups.items()
    ]


def _run_members(constraints, s, alldiff, threads) -> list[RemovalSet]:
    if threads <= 1 or len(constraints) < 2:
        return [propagate_constraint(c, s, alldiff) for c in constraints]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: propagate_constraint(c, s, alldiff), constraints))


def run_batch(
    b: PropagatorBatch,
    s: Sequence[Domain],
    *,
    alldiff: str = "gac",
    threads: int = 1,
    order: Sequence[int] | None = None,
) -> RemovalSet:
    """Union of every member's removals against the same snapshot.

    ``order`` permutes member execution (positions into ``b.members``); the
    result does not depend on it.
    """
    cons = b.constraints if order is None else [b.constraints[k] for k in order]
    out = RemovalSet()
    for r in _run_members(cons, s, alldiff, threads):
        out.update(r)
    return out


class RoundStatus(enum.Enum):
    CHANGED = "changed"
    STABLE = "stable"
    FAILED = "failed"


@dataclass(frozen=True)
class RoundResult:
    status: RoundStatus
    failed_var: int | None = None
    changed: frozenset[int] = frozenset()


@dataclass(frozen=True)
class FixpointResult:
    ok: bool
    failed_var: int | None = None
    rounds: int = 0

    def __bool__(self):
        return self.ok


def _apply(store: MutableSequence[Domain], removals: RemovalSet) -> RoundResult:
    changed = set()
    failed = None
    for v in sorted(removals.masks):
        d = store[v]
        nd = d.remove_mask(removals.masks[v])
        if nd is not d:
            store[v] = nd
            changed.add(v)
            if nd.is_empty() and failed is None:
                failed = v
    if failed is not None:
        return RoundResult(RoundStatus.FAILED, failed, frozenset(changed))
    if changed:
        return RoundResult(RoundStatus.CHANGED, None, frozenset(changed))
    return RoundResult(RoundStatus.STABLE)


def propagate_round(
    store: MutableSequence[Domain],
    batches: Sequence[PropagatorBatch],
    *,
    alldiff: str = "gac",
    threads: int = 1,
    active: set[int] | None = None,
) -> RoundResult:
    """One snapshot -> run all batches -> merge -> apply step.

    ``store`` is any mutable sequence of domains (a list, or a search state
    that records writes for backtracking). ``active`` restricts the round to
    the given constraint indices; members outside it are skipped.
    """
    s = snapshot(store)
    merged = RemovalSet()
    for b in batches:
        if active is None:
            sub = b
        else:
            keep = [k for k, ci in enumerate(b.members) if ci in active]
            if not keep:
                continue
            sub = PropagatorBatch(b.kind, tuple(b.members[k] for k in keep),
                                  tuple(b.constraints[k] for k in keep))
        merged.update(run_batch(sub, s, alldiff=alldiff, threads=threads))
    return _apply(store, merged)


def watch_lists(batches: Sequence[PropagatorBatch], nvars: int) -> list[list[int]]:
    """Constraint indices touching each variable."""
    watch: list[list[int]] = [[] for _ in range(nvars)]
    for b in batches:
        for ci, c in zip(b.members, b.constraints):
            for v in c.scope:
                watch[v].append(ci)
    return watch


def propagate_fixpoint(
    store: MutableSequence[Domain],
    batches: Sequence[PropagatorBatch],
    *,
    alldiff: str = "gac",
    threads: int = 1,
    changed: Iterable[int] | None = None,
    watch: list[list[int]] | None = None,
) -> FixpointResult:
    """Repeat rounds until nothing changes or a domain empties.

    After the first round only constraints over a changed variable rerun;
    the others would reproduce removals that are already applied. Passing
    ``changed`` (variables modified since the store was last at a fixpoint)
    applies the same restriction to the first round.
    """
    if watch is None:
        watch = watch_lists(batches, len(store))
    active = None
    if changed is not None:
        active = {ci for v in changed for ci in watch[v]}
    rounds = 0
    while active is None or active:
        r = propagate_round(store, batches, alldiff=alldiff, threads=threads, active=active)
        rounds += 1
        if r.status is RoundStatus.FAILED:
            return FixpointResult(False, r.failed_var, rounds)
        if r.status is RoundStatus.STABLE:
            break
        active = {ci for v in r.changed for ci in watch[v]}
    return FixpointResult(True, None, rounds)
