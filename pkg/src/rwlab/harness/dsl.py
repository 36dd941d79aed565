"""Parser for experiment configs.

A config is a sequence of blocks ``<experiment> { key=value ... }``.  Values
are reals, names, calls, ``[lists]`` and weight expressions built with ``*``
and ``^``::

    e1 { p1=2 p2=2 w1=power(1) w2=one family=indicators(16) }

``#`` starts a comment.  Every error carries the line and column of the
offending token.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..expr import BinOp, Call, ListExpr, Name, Num
from ..families import FAMILIES
from ..grid import Grid
from ..operators import AtomicMeasure, Op
from ..weights import ExponentTriple

EXPERIMENTS = ("e1", "e2", "e3", "e4", "e5", "e6", "e7")

_COMMON = {"N", "L", "seed", "family", "f1", "f2", "slack"}
KEYS = {
    "e1": _COMMON | {"p1", "p2", "p", "w1", "w2", "backend"},
    "e2": _COMMON | {"p1", "p2", "p", "w1", "w2"},
    "e3": _COMMON | {"T", "q", "p0", "w", "u", "v"},
    "e4": _COMMON | {"T", "q", "u", "v"},
    "e5": _COMMON | {"mu", "w1", "w2", "backend"},
    "e6": _COMMON | {"p1", "p2", "p", "q1", "q2", "mu", "w1", "w2", "backend"},
    "e7": _COMMON | {"p1", "p2", "p", "T1", "T2", "w1", "w2", "levels"},
}
NUMERIC = {"p1", "p2", "p", "q", "q1", "q2", "p0", "N", "L", "seed", "slack", "levels"}
WEIGHTS = {"w", "w1", "w2", "u", "v"}
FUNCTIONS = {"f1", "f2"}
OPS = {"T", "T1", "T2"}

# name -> allowed arities; argument kinds are checked separately
WEIGHT_CALLS = {"power": (1,), "a1max": (2,), "hatq2": (5,)}
FUNC_CALLS = {"indicator": (2,), "bump": (2,), "step": (2,)}

_REAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>[0-9.+-][0-9A-Za-z_.+-]*)
  | (?P<sym>[{}()\[\],=*^])
""", re.VERBOSE)


class ParseError(ValueError):
    """Config error at ``line``/``col`` (1-based)."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        col = i - start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "num":
            if not _REAL.match(tok):
                raise ParseError(f"malformed real literal {tok!r}", line, col)
            out.append(Token("num", tok, line, col))
        elif kind != "ws":
            out.append(Token(kind, tok, line, col))
        i = m.end()
    out.append(Token("eof", "", line, i - start + 1))
    return out


@dataclass
class InequalitySpec:
    """One parsed experiment block.

    ``fields`` maps keys to expression nodes; ``positions`` to their source
    location.  Typed accessors apply defaults.
    """

    experiment: str
    fields: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    pos: tuple = (1, 1)

    def __contains__(self, key):
        return key in self.fields

    def num(self, key: str, default=None) -> float:
        node = self.fields.get(key)
        if node is None:
            return default
        if isinstance(node, ListExpr):
            raise ValueError(f"{key} holds a list; use nums()")
        return node.value

    def nums(self, key: str, default=()) -> list[float]:
        node = self.fields.get(key)
        if node is None:
            return list(default)
        items = node.items if isinstance(node, ListExpr) else (node,)
        return [n.value for n in items]

    def exprs(self, key: str, default: str | None = None) -> list:
        """Expression nodes under ``key`` (lists flattened); ``default`` is DSL text."""
        node = self.fields.get(key)
        if node is None:
            if default is None:
                return []
            node = parse_expr(default)
        return list(node.items) if isinstance(node, ListExpr) else [node]

    def expr(self, key: str, default: str | None = None):
        items = self.exprs(key, default)
        if len(items) != 1:
            raise ValueError(f"{key} must hold a single expression")
        return items[0]

    def op(self, key: str, default: str) -> Op:
        node = self.fields.get(key)
        return Op.parse(node.id if node is not None else default)

    def exponents(self, p1: float = 2.0, p2: float = 2.0) -> ExponentTriple:
        return ExponentTriple(self.num("p1", p1), self.num("p2", p2), self.num("p"))

    def family(self, default: str = "indicators(16)") -> tuple[str, int, int]:
        """``(kind, count, seed)``; the family seed defaults to the config seed."""
        node = self.expr("family", default)
        args = [a.value for a in node.args]
        seed = int(args[1]) if len(args) > 1 else self.seed
        return node.func, int(args[0]), seed

    def measure(self, default: str = "atoms(0,0,0.25, 0.5,0,0.25, 0,0.5,0.25, 0.5,0.5,0.25)"
                ) -> AtomicMeasure:
        return build_measure(self.expr("mu", default))

    @property
    def seed(self) -> int:
        return int(self.num("seed", 0))

    def grid(self) -> Grid:
        return Grid(self.num("L", 8.0), int(self.num("N", 4096)))

    def with_overrides(self, **kw) -> InequalitySpec:
        fields = dict(self.fields)
        for k, v in kw.items():
            if v is not None:
                fields[k] = Num(float(v), str(v))
        return InequalitySpec(self.experiment, fields, dict(self.positions), self.pos)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", t.line, t.col)
        return self.next()

    def at(self, text: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == text

    # grammar -------------------------------------------------------------
    def specs(self) -> list[InequalitySpec]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.block())
        if not out:
            raise ParseError("empty config", self.tok.line, self.tok.col)
        return out

    def block(self) -> InequalitySpec:
        head = self.expect("id")
        if head.text not in EXPERIMENTS:
            raise ParseError(f"unknown identifier {head.text!r}: expected an experiment "
                             f"id ({', '.join(EXPERIMENTS)})", head.line, head.col)
        spec = InequalitySpec(head.text, pos=head.pos)
        self.expect("sym", "{")
        while not self.at("}"):
            key = self.expect("id")
            if key.text not in KEYS[head.text]:
                raise ParseError(f"unknown identifier {key.text!r} in {head.text}",
                                 key.line, key.col)
            if key.text in spec.fields:
                raise ParseError(f"duplicate key {key.text!r}", key.line, key.col)
            self.expect("sym", "=")
            start = self.tok
            spec.fields[key.text] = self.value()
            spec.positions[key.text] = start.pos
        self.expect("sym", "}")
        _validate(spec)
        return spec

    def value(self):
        left = self.power()
        while self.at("*"):
            t = self.next()
            left = BinOp("*", left, self.power(), pos=t.pos)
        return left

    def power(self):
        base = self.atom()
        if self.at("^"):
            t = self.next()
            exp = self.atom()
            if not isinstance(exp, Num):
                raise ParseError("exponent must be a real literal", *t.pos)
            return BinOp("^", base, exp, pos=t.pos)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            return Num(float(t.text), t.text, pos=t.pos)
        if t.kind == "id":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.value())
                    while self.at(","):
                        self.next()
                        args.append(self.value())
                self.expect("sym", ")")
                return Call(t.text, tuple(args), pos=t.pos)
            return Name(t.text, pos=t.pos)
        if self.at("["):
            self.next()
            items = []
            if not self.at("]"):
                items.append(self.value())
                while self.at(","):
                    self.next()
                    items.append(self.value())
            self.expect("sym", "]")
            return ListExpr(tuple(items), pos=t.pos)
        if self.at("("):
            self.next()
            inner = self.value()
            self.expect("sym", ")")
            return inner
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)


# --------------------------------------------------------------------------- validation

def _err(node, message, fallback=(1, 1)):
    line, col = getattr(node, "pos", None) or fallback
    return ParseError(message, line, col)


def _items(node):
    return node.items if isinstance(node, ListExpr) else (node,)


def _check_num(node, key):
    for n in _items(node):
        if not isinstance(n, Num):
            raise _err(n, f"{key} expects a real, got {n}")


def check_function(node):
    if not isinstance(node, Call):
        raise _err(node, f"expected a function expression, got {node}")
    if node.func not in FUNC_CALLS:
        raise _err(node, f"unknown identifier {node.func!r}: expected one of "
                         f"{', '.join(FUNC_CALLS)}")
    if len(node.args) not in FUNC_CALLS[node.func]:
        raise _err(node, f"{node.func} takes {FUNC_CALLS[node.func][0]} arguments")
    for a in node.args:
        _check_num(a, node.func)
    a, b = (x.value for x in node.args)
    if node.func == "indicator" and not a < b:
        raise _err(node, f"indicator needs a < b, got ({a:g}, {b:g})")
    if node.func == "bump" and not b > 0:
        raise _err(node, "bump radius must be positive")
    if node.func == "step" and b < 1:
        raise _err(node, "step count must be >= 1")


def check_weight(node):
    """Static checks on a weight expression (names, arities, integrability)."""
    if isinstance(node, Name):
        if node.id != "one":
            raise _err(node, f"unknown identifier {node.id!r} in weight expression")
        return
    if isinstance(node, BinOp):
        check_weight(node.left)
        if node.op == "*":
            check_weight(node.right)
        return
    if isinstance(node, Call):
        if node.func not in WEIGHT_CALLS:
            raise _err(node, f"unknown identifier {node.func!r}: expected one of "
                             f"one, {', '.join(WEIGHT_CALLS)}")
        if len(node.args) not in WEIGHT_CALLS[node.func]:
            raise _err(node, f"{node.func} takes {WEIGHT_CALLS[node.func][0]} arguments")
        if node.func == "power":
            _check_num(node.args[0], "power")
            a = node.args[0].value
            if a <= -1:
                raise _err(node.args[0], f"power({a:g}) is not locally integrable (need a > -1)")
        elif node.func == "a1max":
            check_function(node.args[0])
            _check_num(node.args[1], "a1max")
        else:
            check_weight(node.args[0])
            check_function(node.args[1])
            check_function(node.args[2])
            _check_num(node.args[3], "hatq2")
            _check_num(node.args[4], "hatq2")
            alpha, q = node.args[3].value, node.args[4].value
            if not 0 <= alpha <= 1:
                raise _err(node.args[3], "hatq2 needs 0 <= alpha <= 1")
            if q < 1:
                raise _err(node.args[4], "hatq2 needs q >= 1")
        return
    raise _err(node, f"expected a weight expression, got {node}")


def build_measure(node) -> AtomicMeasure:
    if not isinstance(node, Call) or node.func not in ("atoms", "delta"):
        raise _err(node, f"unknown identifier {getattr(node, 'func', node)!r}: "
                         "expected atoms(...) or delta(t,s)")
    for a in node.args:
        _check_num(a, node.func)
    vals = [a.value for a in node.args]
    if node.func == "delta":
        if len(vals) != 2:
            raise _err(node, "delta takes 2 arguments")
        return AtomicMeasure.delta(*vals)
    if len(vals) % 3:
        raise _err(node, "atoms takes (t, s, mass) triples")
    return AtomicMeasure(tuple(zip(vals[0::3], vals[1::3], vals[2::3])))


def _validate(spec: InequalitySpec):
    pos = spec.positions
    for key, node in spec.fields.items():
        if key in NUMERIC:
            _check_num(node, key)
        elif key in WEIGHTS:
            for n in _items(node):
                check_weight(n)
        elif key in FUNCTIONS:
            check_function(node)
        elif key in OPS:
            if not isinstance(node, Name):
                raise _err(node, f"{key} expects an operator name")
            try:
                Op.parse(node.id)
            except ValueError:
                raise _err(node, f"unknown identifier {node.id!r}: expected one of "
                                 f"{', '.join(o.value for o in Op)}") from None
        elif key == "family":
            if not isinstance(node, Call) or node.func not in FAMILIES:
                raise _err(node, f"unknown identifier {getattr(node, 'func', node)!r}: "
                                 f"expected one of {', '.join(FAMILIES)}")
            if len(node.args) not in (1, 2):
                raise _err(node, "family takes (count[, seed])")
            for a in node.args:
                _check_num(a, "family")
        elif key == "mu":
            try:
                build_measure(node)
            except ValueError as e:
                if isinstance(e, ParseError):
                    raise
                raise _err(node, str(e)) from None
        elif key == "backend":
            if not isinstance(node, Name) or node.id not in ("spectral", "pv"):
                raise _err(node, f"unknown identifier {node}: expected spectral or pv")

    if {"p1", "p2", "p"} & spec.fields.keys():
        try:
            spec.exponents()
        except ValueError as e:
            where = pos.get("p") or pos.get("p1") or spec.pos
            raise ParseError(str(e), *where) from None
    if spec.experiment == "e6":
        q1, q2 = spec.num("q1", 3.0), spec.num("q2", 3.0)
        if q1 < 1 or q2 < 1 or not 1 / q1 + 1 / q2 < 1:
            where = pos.get("q1") or pos.get("q2") or spec.pos
            raise ParseError(f"need q1, q2 >= 1 with 1/q1 + 1/q2 < 1, got ({q1:g}, {q2:g})",
                             *where)
    for key in ("N",):
        if key in spec.fields:
            n = spec.num(key)
            if n < 2 or int(n) != n or int(n) & (int(n) - 1):
                raise ParseError(f"N must be a power of two, got {n:g}", *pos[key])


def parse(text: str) -> list[InequalitySpec]:
    """Parse every block of a config."""
    return _Parser(text).specs()


def parse_spec(text: str, experiment: str | None = None) -> InequalitySpec:
    """Parse a config and return one block (the only one, or the one for ``experiment``)."""
    specs = parse(text)
    if experiment is None:
        if len(specs) > 1:
            raise ParseError("config holds several blocks; name the experiment", 1, 1)
        return specs[0]
    for s in specs:
        if s.experiment == experiment:
            return s
    raise ParseError(f"no block for experiment {experiment!r}", 1, 1)


def parse_expr(text: str):
    """Parse a bare value (e.g. a weight expression given on the command line)."""
    p = _Parser(text)
    node = p.value()
    if p.tok.kind != "eof":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.line, p.tok.col)
    return node


def parse_weight(text: str):
    node = parse_expr(text)
    check_weight(node)
    return node
