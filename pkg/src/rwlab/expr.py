"""Expression trees shared by the config parser and the weight/function builders.

``pos`` is the ``(line, column)`` of the node in its source text, when known;
it takes no part in equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field

_pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: float
    text: str = ""
    pos: tuple | None = _pos

    def __str__(self):
        return self.text or repr(self.value)


@dataclass(frozen=True)
class Name:
    id: str
    pos: tuple | None = _pos

    def __str__(self):
        return self.id


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    pos: tuple | None = _pos

    def __str__(self):
        return f"{self.func}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class BinOp:
    op: str  # "*" or "^"
    left: object
    right: object
    pos: tuple | None = _pos

    def __str__(self):
        return f"{self.left}{self.op}{self.right}"


@dataclass(frozen=True)
class ListExpr:
    items: tuple
    pos: tuple | None = _pos

    def __str__(self):
        return "[" + ",".join(map(str, self.items)) + "]"
