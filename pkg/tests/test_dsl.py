import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwlab.expr import Call, ListExpr, Name, Num
from rwlab.harness.dsl import ParseError, parse, parse_expr, parse_spec, parse_weight, tokenize

VALID = "e1 { p1=2 p2=2 w1=power(1) w2=one family=indicators(16) }"


def test_documented_valid_spec():
    spec = parse_spec(VALID)
    assert spec.experiment == "e1"
    trip = spec.exponents()
    assert (trip.p1, trip.p2, trip.p) == (2, 2, 1)
    assert spec.expr("w1") == Call("power", (Num(1.0, "1"),))
    assert spec.expr("w2") == Name("one")
    assert spec.family() == ("indicators", 16, 0)
    assert spec.grid().N == 4096 and spec.grid().L == 8


def error_of(text):
    with pytest.raises(ParseError) as exc:
        parse(text)
    return exc.value


def test_exponent_relation_violated():
    e = error_of("e1 { p1=2 p2=3 p=1 }")
    assert "exponent relation" in e.message
    # points at the value of p
    assert (e.line, e.col) == (1, 18)


def test_local_integrability():
    e = error_of("e1 {\n  w1=power(-2)\n}")
    assert "integrable" in e.message
    assert e.line == 2


def test_unknown_identifiers():
    assert "unknown identifier" in error_of("e9 { }").message
    assert "unknown identifier" in error_of("e1 { q9=1 }").message
    e = error_of("e1 { w1=powr(1) }")
    assert "unknown identifier" in e.message and (e.line, e.col) == (1, 9)
    assert "unknown identifier" in error_of("e3 { T=Q }").message
    assert "unknown identifier" in error_of("e1 { family=zigzag(3) }").message


@pytest.mark.parametrize("lit", ["2..5", "1e", "3x", "+-2", "1.2.3"])
def test_malformed_real(lit):
    e = error_of(f"e1 {{ p1={lit} }}")
    assert "malformed real literal" in e.message
    assert (e.line, e.col) == (1, 9)


def test_line_and_column_across_comments():
    text = "# header\ne2 {\n  p1=2 # fine\n  p2=2\n  w2=power(-1.5)\n}\n"
    e = error_of(text)
    assert (e.line, e.col) == (5, 12)


def test_structure_errors():
    for text in ("", "e1 {", "e1 { p1 }", "e1 { p1=2 p1=2 }", "e1 { p1=( }", "e1 } {"):
        with pytest.raises(ParseError):
            parse(text)


def test_weight_checks():
    for bad in ("hatq2(one, indicator(0,1), indicator(1,2), 2, 2)",
                "hatq2(one, indicator(0,1), indicator(1,2), 0.5, 0.5)",
                "a1max(indicator(1,0), 0.5)", "power(1, 2)", "zeta",
                "power(0.5)^x"):
        with pytest.raises(ParseError):
            parse_weight(bad)
    node = parse_weight("power(0.5) * a1max(indicator(0,1), -0.5)^2")
    assert node.op == "*"


def test_multiple_blocks_and_selection():
    text = "e1 { p1=2 p2=2 }\ne5 { mu=delta(0,0) }"
    assert [s.experiment for s in parse(text)] == ["e1", "e5"]
    assert parse_spec(text, "e5").measure().atoms == ((0.0, 0.0, 1.0),)
    with pytest.raises(ParseError):
        parse_spec(text)
    with pytest.raises(ParseError):
        parse_spec(text, "e7")


def test_e6_exponent_constraint():
    with pytest.raises(ParseError, match="1/q1"):
        parse("e6 { q1=2 q2=2 }")
    parse("e6 { p1=3 p2=3 p=1.5 q1=3 q2=3 }")


def test_grid_size_must_be_power_of_two():
    with pytest.raises(ParseError, match="power of two"):
        parse("e1 { N=1000 }")


def test_lists_and_overrides():
    spec = parse_spec("e3 { p0=[0.5, 1] u=[one, power(-0.5)] seed=3 }")
    assert spec.nums("p0") == [0.5, 1.0]
    assert len(spec.exprs("u")) == 2
    assert isinstance(spec.fields["u"], ListExpr)
    assert spec.seed == 3
    o = spec.with_overrides(N=1024, seed=None)
    assert o.grid().N == 1024 and o.seed == 3
    assert "N" not in spec


def test_tokenizer_positions():
    toks = tokenize("e1 {\n p1=2.5e-1 }")
    num = [t for t in toks if t.kind == "num"][0]
    assert (num.text, num.line, num.col) == ("2.5e-1", 2, 5)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_real_literals_round_trip(x):
    node = parse_expr(repr(x))
    assert isinstance(node, Num) and node.value == x


def test_parse_expr_trailing_input():
    with pytest.raises(ParseError, match="trailing"):
        parse_expr("power(1) power(2)")
