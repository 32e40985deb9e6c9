"""Reader and writer for the plain-text model format.

Grammar::

    model      ::= item* solveItem
    item       ::= varDecl | constrDecl
    varDecl    ::= "var" IDENT "in" INT ".." INT ";"
    constrDecl ::= "constraint" body ";"
    body       ::= IDENT REL IDENT (("+"|"-") INT)?
                 | IDENT REL INT
                 | "alldifferent" "(" IDENT ("," IDENT)+ ")"
                 | linTerm (("+"|"-") linTerm)* ("<="|"=") INT
    linTerm    ::= (INT "*")? IDENT
    REL        ::= "<" | "<=" | ">" | ">=" | "=" | "!="
    solveItem  ::= "solve" ("satisfy" | "minimize" IDENT | "maximize" IDENT) ";"

``#`` starts a comment running to the end of the line. An identifier
followed directly by a relational operator is always read as a binary
relation, so a one-term linear constraint must spell its coefficient
(``1*x <= 3``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    AllDifferent,
    EmptyRange,
    Linear,
    Maximize,
    Minimize,
    Model,
    RelBin,
    Satisfy,
    Variable,
    WidthExceeded,
    ArithmeticOverflow,
    model_validate,
    new_domain,
)

__all__ = ["ParseError", "parse_model", "emit_model"]

KEYWORDS = frozenset(
    {"var", "in", "constraint", "solve", "satisfy", "minimize", "maximize", "alldifferent"}
)
REL = ("<", "<=", ">", ">=", "=", "!=")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|<=|>=|!=|[<>=;,()*+\-])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """A located error; ``kind`` is one of SyntaxError, UnknownVariable,
    DuplicateVariable, EmptyDomain, DomainTooWide, InvalidConstraint,
    MissingSolveItem."""

    def __init__(self, line, column, kind, message, *, expected=None, found=None, name=None):
        super().__init__(f"{line}:{column}: {kind}: {message}")
        self.line = line
        self.column = column
        self.kind = kind
        self.message = message
        self.expected = expected
        self.found = found
        self.name = name


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str  # int, ident, op, eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, "SyntaxError",
                             f"unexpected character {text[pos]!r}", expected="token", found=text[pos])
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        else:
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _describe(tok: _Tok) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.model = Model()
        self.names: dict[str, int] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = _describe(tok)
        raise ParseError(tok.line, tok.col, "SyntaxError", f"expected {expected}, found {found}",
                         expected=expected, found=found)

    def is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def expect_op(self, op: str) -> _Tok:
        if not self.is_op(op):
            self.fail(repr(op))
        return self.advance()

    def expect_keyword(self, *words) -> _Tok:
        if self.tok.kind != "ident" or self.tok.text not in words:
            self.fail(" or ".join(repr(w) for w in words))
        return self.advance()

    def ident(self) -> _Tok:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            self.fail("identifier")
        return self.advance()

    def var_ref(self) -> int:
        t = self.ident()
        try:
            return self.names[t.text]
        except KeyError:
            raise ParseError(t.line, t.col, "UnknownVariable",
                             f"unknown variable {t.text!r}", name=t.text) from None

    def integer(self) -> int:
        neg = False
        if self.is_op("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            self.fail("integer")
        v = int(self.advance().text)
        return -v if neg else v

    def starts_integer(self) -> bool:
        return self.tok.kind == "int" or (self.is_op("-") and self.peek().kind == "int")

    # model ::= item* solveItem
    def parse(self) -> Model:
        while True:
            t = self.tok
            if t.kind == "eof":
                raise ParseError(t.line, t.col, "MissingSolveItem", "model has no solve item")
            if t.kind != "ident":
                self.fail("'var', 'constraint' or 'solve'")
            if t.text == "var":
                self.var_decl()
            elif t.text == "constraint":
                self.constraint_decl()
            elif t.text == "solve":
                self.solve_item()
                break
            else:
                self.fail("'var', 'constraint' or 'solve'")
        if self.tok.kind != "eof":
            self.fail("end of input")
        return self.model

    def var_decl(self):
        self.advance()
        name_tok = self.ident()
        name = name_tok.text
        if name in self.names:
            raise ParseError(name_tok.line, name_tok.col, "DuplicateVariable",
                             f"variable {name!r} declared twice", name=name)
        self.expect_keyword("in")
        lo_tok = self.tok
        lo = self.integer()
        self.expect_op("..")
        hi = self.integer()
        self.expect_op(";")
        try:
            dom = new_domain(lo, hi)
        except EmptyRange:
            raise ParseError(lo_tok.line, lo_tok.col, "EmptyDomain", f"empty range {lo}..{hi}") from None
        except (WidthExceeded, ArithmeticOverflow) as e:
            raise ParseError(lo_tok.line, lo_tok.col, "DomainTooWide", str(e)) from None
        vid = len(self.model.variables)
        self.names[name] = vid
        self.model.variables.append(Variable(vid, name))
        self.model.domains.append(dom)

    def constraint_decl(self):
        start = self.advance()
        c = self.body()
        self.expect_op(";")
        self.model.constraints.append(c)
        problems = model_validate(Model(self.model.variables, self.model.domains, [c]))
        if problems:
            raise ParseError(start.line, start.col, "InvalidConstraint", str(problems[0]))

    def body(self):
        t = self.tok
        if t.kind == "ident" and t.text == "alldifferent":
            return self.alldifferent()
        if t.kind == "ident" and self.peek().kind == "op" and self.peek().text in REL:
            return self.relbin()
        return self.linear()

    def alldifferent(self) -> AllDifferent:
        self.advance()
        self.expect_op("(")
        vs = [self.var_ref()]
        self.expect_op(",")
        vs.append(self.var_ref())
        while self.is_op(","):
            self.advance()
            vs.append(self.var_ref())
        self.expect_op(")")
        return AllDifferent(tuple(vs))

    def relbin(self) -> RelBin:
        lhs = self.var_ref()
        op = self.advance().text
        if self.starts_integer():
            return RelBin(lhs, op, self.integer(), rhs_is_var=False)
        if self.tok.kind != "ident":
            self.fail("identifier or integer")
        rhs = self.var_ref()
        offset = 0
        if self.is_op("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            if self.tok.kind != "int":
                self.fail("integer")
            offset = sign * int(self.advance().text)
        return RelBin(lhs, op, rhs, rhs_is_var=True, offset=offset)

    def lin_term(self, sign: int) -> tuple[int, int]:
        coef = 1
        if self.starts_integer():
            coef = self.integer()
            self.expect_op("*")
        return sign * coef, self.var_ref()

    def linear(self) -> Linear:
        if self.tok.kind not in ("ident", "int") and not self.is_op("-"):
            self.fail("constraint")
        terms = [self.lin_term(1)]
        while self.is_op("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            terms.append(self.lin_term(sign))
        if not self.is_op("<=", "="):
            self.fail("'+', '-', '<=' or '='")
        op = self.advance().text
        return Linear(tuple(terms), op, self.integer())

    def solve_item(self):
        self.advance()
        kw = self.expect_keyword("satisfy", "minimize", "maximize")
        if kw.text == "satisfy":
            self.model.goal = Satisfy()
        else:
            vid = self.var_ref()
            self.model.goal = Minimize(vid) if kw.text == "minimize" else Maximize(vid)
        self.expect_op(";")


def parse_model(text: str) -> Model:
    """Parse model text; raises :class:`ParseError` at the first problem."""
    return _Parser(text).parse()


def _emit_linear(c: Linear, names) -> str:
    parts = []
    for k, (a, v) in enumerate(c.terms):
        name = names[v]
        if k == 0:
            if a == 1 and len(c.terms) > 1:
                parts.append(name)
            else:
                parts.append(f"{a}*{name}")
        else:
            mag = abs(a)
            term = name if mag == 1 else f"{mag}*{name}"
            parts.append(f"{'+' if a > 0 else '-'} {term}")
    return f"{' '.join(parts)} {c.op} {c.bound}"


def emit_model(m: Model) -> str:
    """Render ``m`` in the text format; ``parse_model`` reads it back unchanged.

    Declared domains must be full ranges, the only kind the format can express.
    """
    names = [v.name for v in m.variables]
    lines = []
    for v, d in zip(m.variables, m.domains):
        if d.bits != d.full_mask:
            raise ValueError(f"domain of {v.name!r} has holes and cannot be written")
        lines.append(f"var {v.name} in {d.offset}..{d.hi};")
    for c in m.constraints:
        if isinstance(c, RelBin):
            if c.rhs_is_var:
                rhs = names[c.rhs]
                if c.offset:
                    rhs += f" {'+' if c.offset > 0 else '-'} {abs(c.offset)}"
            else:
                rhs = str(c.rhs)
            body = f"{names[c.lhs]} {c.op} {rhs}"
        elif isinstance(c, Linear):
            body = _emit_linear(c, names)
        else:
            body = f"alldifferent({', '.join(names[v] for v in c.vars)})"
        lines.append(f"constraint {body};")
    g = m.goal
    if isinstance(g, Minimize):
        lines.append(f"solve minimize {names[g.var]};")
    elif isinstance(g, Maximize):
        lines.append(f"solve maximize {names[g.var]};")
    else:
        lines.append("solve satisfy;")
    return "\n".join(lines) + "\n"
