"""Benchmark and test-corpus model generators. Both return model text."""

from __future__ import annotations

import random

from .model import AllDifferent, Linear, Maximize, Minimize, Model, RelBin
from .parser import emit_model

__all__ = ["gen_nqueens", "gen_random"]

_REL_OPS = ("<", "<=", ">", ">=", "=", "!=")


def gen_nqueens(n: int) -> str:
    """Queens ``q1..qn`` (row of the queen in each column), one per row and diagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = Model()
    qs = [m.add_variable(f"q{i + 1}", 1, n) for i in range(n)]
    if n > 1:
        m.constraints.append(AllDifferent(tuple(qs)))
    for i in range(n):
        for j in range(i + 1, n):
            d = j - i
            m.constraints.append(RelBin(qs[i], "!=", qs[j], offset=d))
            m.constraints.append(RelBin(qs[i], "!=", qs[j], offset=-d))
    return emit_model(m)


def gen_random(vars: int, width: int, constraints: int, seed: int, goal: str = "satisfy") -> str:
    """Reproducible random model; identical arguments give identical text.

    Domains are random sub-ranges of at most ``width`` values inside
    ``0..width``. Each constraint picks one of the three constraint types
    uniformly (alldifferent needs two variables, so single-variable models
    fall back to the other two).
    """
    if vars < 1 or width < 1 or constraints < 1:
        raise ValueError("vars, width and constraints must all be >= 1")
    if goal not in ("satisfy", "minimize", "maximize"):
        raise ValueError(f"unknown goal {goal!r}")
    rng = random.Random(seed)
    m = Model()
    for i in range(vars):
        size = rng.randint(1, width)
        lo = rng.randint(0, width - size + 1)
        m.add_variable(f"x{i}", lo, lo + size - 1)
    kinds = ["relbin", "linear", "alldifferent"] if vars >= 2 else ["relbin", "linear"]
    for _ in range(constraints):
        kind = rng.choice(kinds)
        if kind == "relbin":
            op = rng.choice(_REL_OPS)
            x = rng.randrange(vars)
            if vars >= 2 and rng.random() < 0.7:
                y = rng.choice([v for v in range(vars) if v != x])
                offset = rng.choice((0, 0, rng.randint(-3, 3)))
                m.constraints.append(RelBin(x, op, y, offset=offset))
            else:
                d = m.domains[x]
                c = rng.randint(d.offset - 1, d.hi + 1)
                m.constraints.append(RelBin(x, op, c, rhs_is_var=False))
        elif kind == "linear":
            k = rng.randint(1, min(3, vars))
            scope = rng.sample(range(vars), k)
            terms = tuple((rng.choice((-3, -2, -1, 1, 2, 3)), v) for v in scope)
            lo = sum(a * (m.domains[v].offset if a > 0 else m.domains[v].hi) for a, v in terms)
            hi = sum(a * (m.domains[v].hi if a > 0 else m.domains[v].offset) for a, v in terms)
            op = "=" if rng.random() < 0.25 else "<="
            m.constraints.append(Linear(terms, op, rng.randint(lo, hi)))
        else:
            k = rng.randint(2, min(4, vars))
            m.constraints.append(AllDifferent(tuple(sorted(rng.sample(range(vars), k)))))
    if goal == "minimize":
        m.goal = Minimize(rng.randrange(vars))
    elif goal == "maximize":
        m.goal = Maximize(rng.randrange(vars))
    return emit_model(m)
