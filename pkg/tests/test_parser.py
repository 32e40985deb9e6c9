import random

import pytest
from hypothesis import given, settings, strategies as st

from fdsolver.generators import gen_nqueens, gen_random
from fdsolver.model import AllDifferent, Linear, Maximize, Minimize, Model, RelBin, Satisfy
from fdsolver.parser import ParseError, _tokenize, emit_model, parse_model

EXAMPLE = "var x1 in 1..5;\nvar x2 in 1..10;\nconstraint x1 > 3;\nconstraint x1 < x2;\nsolve satisfy;"


def test_parse_example():
    m = parse_model(EXAMPLE)
    assert [v.name for v in m.variables] == ["x1", "x2"]
    assert [list(d) for d in m.domains] == [list(range(1, 6)), list(range(1, 11))]
    assert m.constraints == [RelBin(0, ">", 3, rhs_is_var=False), RelBin(0, "<", 1)]
    assert m.goal == Satisfy()


def test_parse_empty_model():
    m = parse_model("solve satisfy;")
    assert m.variables == [] and m.constraints == []


def test_unknown_variable():
    with pytest.raises(ParseError) as e:
        parse_model("constraint x < y;")
    assert e.value.kind == "UnknownVariable" and e.value.name == "x"
    assert (e.value.line, e.value.column) == (1, 12)


def test_syntax_error_location():
    with pytest.raises(ParseError) as e:
        parse_model("var x in 1..3;\nvar y in 1 .. ;\nsolve satisfy;")
    err = e.value
    assert err.kind == "SyntaxError" and err.line == 2 and err.column == 15
    assert err.expected == "integer" and err.found == "';'"


@pytest.mark.parametrize(
    "text, kind",
    [
        ("var x in 1..2; var x in 1..3; solve satisfy;", "DuplicateVariable"),
        ("var x in 3..1; solve satisfy;", "EmptyDomain"),
        ("var x in 1..2;", "MissingSolveItem"),
        ("var x in 0..5000; solve satisfy;", "DomainTooWide"),
        ("var x in 1..2; constraint alldifferent(x, x); solve satisfy;", "InvalidConstraint"),
        ("var x in 1..2; constraint 0*x <= 1; solve satisfy;", "InvalidConstraint"),
        ("solve satisfy; var x in 1..2;", "SyntaxError"),
        ("var var in 1..2; solve satisfy;", "SyntaxError"),
        ("var x in 1..2; solve minimize y;", "UnknownVariable"),
        ("var x in 1..2 $ solve satisfy;", "SyntaxError"),
    ],
)
def test_error_kinds(text, kind):
    with pytest.raises(ParseError) as e:
        parse_model(text)
    assert e.value.kind == kind


def test_comments_and_whitespace():
    m = parse_model("# header\nvar  x in -2..2; # trailing\n\n  solve\tmaximize x ;")
    assert list(m.domains[0]) == [-2, -1, 0, 1, 2]
    assert m.goal == Maximize(0)


def test_linear_forms():
    m = parse_model(
        "var x in 0..9; var y in 0..9;\n"
        "constraint 2*x + 3*y <= 20;\n"
        "constraint x - 2*y = -1;\n"
        "constraint -1*x - y <= 4;\n"
        "constraint 1*x <= 3;\n"
        "solve minimize x;"
    )
    assert m.constraints == [
        Linear(((2, 0), (3, 1)), "<=", 20),
        Linear(((1, 0), (-2, 1)), "=", -1),
        Linear(((-1, 0), (-1, 1)), "<=", 4),
        Linear(((1, 0),), "<=", 3),
    ]
    assert m.goal == Minimize(0)


def test_offset_forms():
    m = parse_model("var x in 0..9; var y in 0..9; constraint x < y + 3; "
                    "constraint x != y - 2; constraint x >= y + 1; solve satisfy;")
    assert m.constraints == [
        RelBin(0, "<", 1, offset=3),
        RelBin(0, "!=", 1, offset=-2),
        RelBin(1, "<=", 0, offset=-1),
    ]


def test_alldifferent():
    m = parse_model("var a in 1..3; var b in 1..3; var c in 1..3; "
                    "constraint alldifferent(a, b, c); solve satisfy;")
    assert m.constraints == [AllDifferent((0, 1, 2))]


def test_emit_example_round_trip():
    m = parse_model(EXAMPLE)
    assert parse_model(emit_model(m)) == m


def test_emit_empty():
    assert emit_model(Model()) == "solve satisfy;\n"


def test_emit_linear_line():
    m = Model()
    x, y = m.add_variable("x", 0, 9), m.add_variable("y", 0, 9)
    m.constraints.append(Linear(((2, x), (3, y)), "<=", 20))
    assert "constraint 2*x + 3*y <= 20;" in emit_model(m).splitlines()


def test_emit_rejects_holes():
    m = Model()
    m.add_variable("x", 0, 3)
    m.domains[0] = m.domains[0].remove((1,))
    with pytest.raises(ValueError):
        emit_model(m)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 10), st.integers(1, 8),
       st.sampled_from(["satisfy", "minimize", "maximize"]))
def test_round_trip_random(seed, nvars, width, ncons, goal):
    m = parse_model(gen_random(nvars, width, ncons, seed, goal))
    assert parse_model(emit_model(m)) == m


def test_round_trip_nqueens():
    m = parse_model(gen_nqueens(6))
    assert parse_model(emit_model(m)) == m


@pytest.mark.parametrize("seed", range(30))
def test_single_token_corruption_reports_its_line(seed):
    text = gen_random(4, 6, 5, seed)
    toks = [t for t in _tokenize(text) if t.kind != "eof"]
    rng = random.Random(seed)
    lines = text.split("\n")
    for tok in rng.sample(toks, 10):
        line = lines[tok.line - 1]
        start = tok.col - 1
        corrupted = line[:start] + "$" + line[start + len(tok.text):]
        bad = "\n".join(lines[: tok.line - 1] + [corrupted] + lines[tok.line:])
        with pytest.raises(ParseError) as e:
            parse_model(bad)
        assert e.value.line == tok.line
