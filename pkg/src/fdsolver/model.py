"""Core CSP types: bitset domains, variables, constraints and models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "MAX_WIDTH",
    "INT64_MIN",
    "INT64_MAX",
    "EmptyRange",
    "WidthExceeded",
    "ArithmeticOverflow",
    "Domain",
    "new_domain",
    "domain_remove",
    "Variable",
    "RelBin",
    "Linear",
    "AllDifferent",
    "Constraint",
    "Satisfy",
    "Minimize",
    "Maximize",
    "Model",
    "Diagnostic",
    "model_validate",
    "check_assignment",
]

MAX_WIDTH = 1024
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

REL_OPS = ("<", "<=", ">", ">=", "=", "!=")
LINEAR_OPS = ("<=", "=")


class EmptyRange(ValueError):
    pass


class WidthExceeded(ValueError):
    pass


class ArithmeticOverflow(ArithmeticError):
    """An intermediate value left the signed 64-bit range."""


@dataclass(frozen=True, slots=True)
class Domain:
    """Set of admissible integers, stored as a bitset anchored at ``offset``.

    Bit ``i`` of ``bits`` is set iff ``offset + i`` is in the domain. The
    width never changes after creation, so removals can only clear bits.
    Instances are immutable; every operation returns a new domain.
    """

    offset: int
    width: int
    bits: int
    min: int = field(init=False, compare=False)
    max: int = field(init=False, compare=False)
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        bits = self.bits & ((1 << self.width) - 1)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "size", bits.bit_count())
        if bits:
            object.__setattr__(self, "min", self.offset + (bits & -bits).bit_length() - 1)
            object.__setattr__(self, "max", self.offset + bits.bit_length() - 1)
        else:
            object.__setattr__(self, "min", None)
            object.__setattr__(self, "max", None)

    @property
    def full_mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def hi(self) -> int:
        """Highest representable value (not necessarily present)."""
        return self.offset + self.width - 1

    def is_empty(self) -> bool:
        return self.bits == 0

    def is_singleton(self) -> bool:
        return self.size == 1

    def is_interval(self) -> bool:
        return self.bits != 0 and self.size == self.max - self.min + 1

    def __contains__(self, value: int) -> bool:
        i = value - self.offset
        return 0 <= i < self.width and bool(self.bits >> i & 1)

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        bits, base = self.bits, self.offset
        while bits:
            low = bits & -bits
            yield base + low.bit_length() - 1
            bits ^= low

    def values(self) -> list[int]:
        return list(self)

    def mask_of(self, values: Iterable[int]) -> int:
        """Bit mask (aligned to this domain) of the representable ``values``."""
        m = 0
        for v in values:
            i = v - self.offset
            if 0 <= i < self.width:
                m |= 1 << i
        return m

    def mask_range(self, lo: int | None, hi: int | None) -> int:
        """Mask of every representable position with value in [lo, hi]."""
        lo_i = 0 if lo is None else max(lo - self.offset, 0)
        hi_i = self.width - 1 if hi is None else min(hi - self.offset, self.width - 1)
        if lo_i > hi_i:
            return 0
        return ((1 << (hi_i - lo_i + 1)) - 1) << lo_i

    def with_bits(self, bits: int) -> Domain:
        return Domain(self.offset, self.width, bits)

    def remove_mask(self, mask: int) -> Domain:
        if not self.bits & mask:
            return self
        return Domain(self.offset, self.width, self.bits & ~mask)

    def remove(self, values: Iterable[int]) -> Domain:
        return self.remove_mask(self.mask_of(values))

    def assign(self, value: int) -> Domain:
        return Domain(self.offset, self.width, self.bits & self.mask_range(value, value))

    def __repr__(self):
        vals = self.values()
        if self.is_interval() and len(vals) > 3:
            body = f"{vals[0]}..{vals[-1]}"
        else:
            body = ", ".join(map(str, vals))
        return f"Domain({{{body}}})"


def new_domain(lo: int, hi: int, max_width: int = MAX_WIDTH) -> Domain:
    if lo > hi:
        raise EmptyRange(f"empty range {lo}..{hi}")
    if lo < INT64_MIN or hi > INT64_MAX:
        raise ArithmeticOverflow(f"range {lo}..{hi} exceeds 64-bit values")
    width = hi - lo + 1
    if width > max_width:
        raise WidthExceeded(f"range {lo}..{hi} has {width} values, limit is {max_width}")
    return Domain(lo, width, (1 << width) - 1)


def domain_remove(d: Domain, values: Iterable[int]) -> Domain:
    return d.remove(values)


@dataclass(frozen=True, slots=True)
class Variable:
    id: int
    name: str


@dataclass(frozen=True)
class RelBin:
    """``lhs op rhs + offset``, where ``rhs`` is a variable id or a literal.

    With a variable on the right, ``>`` and ``>=`` are rewritten to ``<`` and
    ``<=`` with the operands swapped, so only four operators ever reach a
    var/var propagator.
    """

    lhs: int
    op: str
    rhs: int
    rhs_is_var: bool = True
    offset: int = 0

    kind = "relbin"

    def __post_init__(self):
        if self.op not in REL_OPS:
            raise ValueError(f"unknown relational operator {self.op!r}")
        if not self.rhs_is_var and self.offset:
            raise ValueError("offset only applies to a variable right-hand side")
        if self.rhs_is_var and self.op in (">", ">="):
            # x > y + k  <=>  y < x - k
            lhs, rhs = self.lhs, self.rhs
            object.__setattr__(self, "lhs", rhs)
            object.__setattr__(self, "rhs", lhs)
            object.__setattr__(self, "op", "<" if self.op == ">" else "<=")
            object.__setattr__(self, "offset", -self.offset)

    @property
    def scope(self) -> tuple[int, ...]:
        return (self.lhs, self.rhs) if self.rhs_is_var else (self.lhs,)


@dataclass(frozen=True)
class Linear:
    """``sum(coef * var) op bound`` with op in ``<=`` / ``=``."""

    terms: tuple[tuple[int, int], ...]
    op: str
    bound: int

    kind = "linear"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((int(a), int(v)) for a, v in self.terms))
        if self.op not in LINEAR_OPS:
            raise ValueError(f"linear operator must be <= or =, got {self.op!r}")

    @property
    def scope(self) -> tuple[int, ...]:
        return tuple(dict.fromkeys(v for _, v in self.terms))


@dataclass(frozen=True)
class AllDifferent:
    vars: tuple[int, ...]

    kind = "alldifferent"

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))

    @property
    def scope(self) -> tuple[int, ...]:
        return self.vars


Constraint = Union[RelBin, Linear, AllDifferent]


@dataclass(frozen=True)
class Satisfy:
    pass


@dataclass(frozen=True)
class Minimize:
    var: int


@dataclass(frozen=True)
class Maximize:
    var: int


Goal = Union[Satisfy, Minimize, Maximize]


@dataclass
class Model:
    variables: list[Variable] = field(default_factory=list)
    domains: list[Domain] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    goal: Goal = field(default_factory=Satisfy)

    def add_variable(self, name: str, lo: int, hi: int) -> int:
        vid = len(self.variables)
        self.variables.append(Variable(vid, name))
        self.domains.append(new_domain(lo, hi))
        return vid

    def var_id(self, name: str) -> int:
        for v in self.variables:
            if v.name == name:
                return v.id
        raise KeyError(name)

    @property
    def objective_var(self) -> int | None:
        return getattr(self.goal, "var", None)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    detail: str
    constraint: int | None = None

    def __str__(self):
        where = f"constraint {self.constraint}: " if self.constraint is not None else ""
        return f"{where}{self.kind}: {self.detail}"


def model_validate(m: Model) -> list[Diagnostic]:
    """Every invariant violation in ``m``; an empty list means the model is valid."""
    out: list[Diagnostic] = []
    n = len(m.variables)
    if len(m.domains) != n:
        out.append(Diagnostic("DomainCountMismatch", f"{n} variables but {len(m.domains)} domains"))
    names = set()
    for i, v in enumerate(m.variables):
        if v.id != i:
            out.append(Diagnostic("NonContiguousId", f"variable {v.name!r} has id {v.id}, expected {i}"))
        if v.name in names:
            out.append(Diagnostic("DuplicateVariable", v.name))
        names.add(v.name)
    for i, d in enumerate(m.domains):
        if d.is_empty():
            out.append(Diagnostic("EmptyDomain", f"variable {i}"))

    def known(vid, ci):
        if not 0 <= vid < n:
            out.append(Diagnostic("UnknownVariable", str(vid), ci))
            return False
        return True

    for ci, c in enumerate(m.constraints):
        if isinstance(c, RelBin):
            known(c.lhs, ci)
            if c.rhs_is_var:
                known(c.rhs, ci)
        elif isinstance(c, Linear):
            if not c.terms:
                out.append(Diagnostic("EmptyLinear", "linear constraint has no terms", ci))
            for a, vid in c.terms:
                known(vid, ci)
                if a == 0:
                    out.append(Diagnostic("ZeroCoefficient", f"variable {vid}", ci))
        elif isinstance(c, AllDifferent):
            for vid in c.vars:
                known(vid, ci)
            if len(set(c.vars)) != len(c.vars):
                out.append(Diagnostic("DuplicateVarInAllDifferent", str(list(c.vars)), ci))
            elif len(c.vars) < 2:
                out.append(Diagnostic("AllDifferentTooShort", "needs at least 2 variables", ci))
        else:
            out.append(Diagnostic("UnknownConstraint", type(c).__name__, ci))
    obj = m.objective_var
    if obj is not None and not 0 <= obj < n:
        out.append(Diagnostic("UnknownVariable", f"objective {obj}"))
    return out


def _holds(op: str, a: int, b: int) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "=":
        return a == b
    return a != b


def constraint_holds(c: Constraint, assignment: Sequence[int]) -> bool:
    """Evaluate one constraint on a full assignment (no propagation involved)."""
    if isinstance(c, RelBin):
        rhs = assignment[c.rhs] + c.offset if c.rhs_is_var else c.rhs
        return _holds(c.op, assignment[c.lhs], rhs)
    if isinstance(c, Linear):
        return _holds(c.op, sum(a * assignment[v] for a, v in c.terms), c.bound)
    vals = [assignment[v] for v in c.vars]
    return len(set(vals)) == len(vals)


def check_assignment(m: Model, assignment: Sequence[int]) -> list[int]:
    """Indices of violated constraints; -1 flags a value outside its declared domain."""
    bad = [-1] if any(assignment[i] not in d for i, d in enumerate(m.domains)) else []
    bad.extend(i for i, c in enumerate(m.constraints) if not constraint_holds(c, assignment))
    return bad
