"""Ambient groups and exact element arithmetic.

Five ambient groups are supported: the integers, truncated products of
cyclic groups, the rationals, free groups on named generators, and finite
groups given by a multiplication table.  Elements are immutable values
paired with their ambient group; all operations are pure and exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Union


class GroupMismatchError(ValueError):
    """Raised when an operation mixes elements of different ambient groups."""


class NotAGroupError(ValueError):
    """Raised when a multiplication table fails the group laws."""


ElementValue = Union[int, Fraction, tuple]


@dataclass(frozen=True)
class GroupElement:
    group: "AmbientGroup"
    value: ElementValue

    def __str__(self) -> str:
        return self.group.format_value(self.value)

    def is_identity(self) -> bool:
        return self.value == self.group.identity_value()


class AmbientGroup:
    """Base class; subclasses implement the group law on raw values."""

    is_abelian: bool = True

    def identity_value(self) -> ElementValue:
        raise NotImplementedError

    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_value())

    def element(self, raw: Any) -> GroupElement:
        """Normalize and validate a raw value into an element."""
        return GroupElement(self, self._normalize(raw))

    def _normalize(self, raw: Any) -> ElementValue:
        raise NotImplementedError

    def _add(self, a: ElementValue, b: ElementValue) -> ElementValue:
        raise NotImplementedError

    def _neg(self, a: ElementValue) -> ElementValue:
        raise NotImplementedError

    def format_value(self, value: ElementValue) -> str:
        return str(value)

    def value_to_json(self, value: ElementValue) -> Any:
        return value

    def value_from_json(self, doc: Any) -> ElementValue:
        return self._normalize(doc)

    def sort_key(self, value: ElementValue):
        return value

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Integers(AmbientGroup):
    def identity_value(self) -> int:
        return 0

    def _normalize(self, raw: Any) -> int:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ValueError(f"integer expected, got {raw!r}")
        return raw

    def _add(self, a: int, b: int) -> int:
        return a + b

    def _neg(self, a: int) -> int:
        return -a

    def describe(self) -> dict:
        return {"kind": "integers"}


@dataclass(frozen=True)
class Rationals(AmbientGroup):
    def identity_value(self) -> Fraction:
        return Fraction(0)

    def _normalize(self, raw: Any) -> Fraction:
        if isinstance(raw, float):
            raise ValueError("floats are not exact; pass Fraction, int, or 'p/q'")
        return Fraction(raw)

    def _add(self, a: Fraction, b: Fraction) -> Fraction:
        return a + b

    def _neg(self, a: Fraction) -> Fraction:
        return -a

    def value_to_json(self, value: Fraction) -> str:
        return f"{value.numerator}/{value.denominator}"

    def describe(self) -> dict:
        return {"kind": "rationals"}


@dataclass(frozen=True)
class ProductMod(AmbientGroup):
    """Product of Z/nZ for n = 1..n_coords; coordinate n holds residues mod n.

    Coordinate 1 is Z/1Z and therefore always zero; it is kept so that
    coordinate numbering matches the modulus.
    """

    n_coords: int

    def __post_init__(self):
        if self.n_coords < 1:
            raise ValueError("n_coords must be positive")

    def identity_value(self) -> tuple:
        return (0,) * self.n_coords

    def _normalize(self, raw: Any) -> tuple:
        vec = tuple(int(v) for v in raw)
        if len(vec) != self.n_coords:
            raise ValueError(f"expected {self.n_coords} coordinates, got {len(vec)}")
        return tuple(v % (i + 1) for i, v in enumerate(vec))

    def _add(self, a: tuple, b: tuple) -> tuple:
        return tuple((x + y) % (i + 1) for i, (x, y) in enumerate(zip(a, b)))

    def _neg(self, a: tuple) -> tuple:
        return tuple((-x) % (i + 1) for i, x in enumerate(a))

    def value_to_json(self, value: tuple) -> list:
        return list(value)

    def describe(self) -> dict:
        return {"kind": "product", "coords": self.n_coords}


def reduce_word(letters: Iterable[int]) -> tuple:
    """Free reduction: cancel adjacent letter/inverse pairs."""
    out: list[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True)
class FreeGroup(AmbientGroup):
    """Free group on named generators; values are reduced letter tuples.

    A letter is a nonzero signed integer: +i is the i-th generator
    (1-based), -i its inverse.
    """

    generators: tuple = ("x", "y")
    is_abelian = False

    def identity_value(self) -> tuple:
        return ()

    def rank(self) -> int:
        return len(self.generators)

    def _normalize(self, raw: Any) -> tuple:
        if isinstance(raw, str):
            letters = self._parse(raw)
        else:
            letters = tuple(int(v) for v in raw)
        for letter in letters:
            if letter == 0 or abs(letter) > self.rank():
                raise ValueError(f"letter {letter} outside generator range")
        return reduce_word(letters)

    def _parse(self, text: str) -> tuple:
        # "x y^-1 x" or "x*y^-1"; also single-token powers like "x^3".
        letters = []
        for token in text.replace("*", " ").split():
            if "^" in token:
                name, exp = token.split("^")
                power = int(exp)
            else:
                name, power = token, 1
            if name not in self.generators:
                raise ValueError(f"unknown generator {name!r}")
            idx = self.generators.index(name) + 1
            letters.extend([idx if power > 0 else -idx] * abs(power))
        return tuple(letters)

    def _add(self, a: tuple, b: tuple) -> tuple:
        return reduce_word(a + b)

    def _neg(self, a: tuple) -> tuple:
        return tuple(-letter for letter in reversed(a))

    def generator(self, name: str) -> GroupElement:
        return self.element(name)

    def format_value(self, value: tuple) -> str:
        if not value:
            return "e"
        parts = []
        for letter in value:
            name = self.generators[abs(letter) - 1]
            parts.append(name if letter > 0 else f"{name}^-1")
        return " ".join(parts)

    def value_to_json(self, value: tuple) -> list:
        return list(value)

    def describe(self) -> dict:
        return {"kind": "free", "generators": list(self.generators)}


@dataclass(frozen=True)
class CayleyGroup(AmbientGroup):
    """Finite group given by a multiplication table over indices 0..order-1."""

    table: tuple
    names: tuple
    identity_index: int
    inverse: tuple
    is_abelian = False  # recomputed below; kept conservative

    @property
    def order(self) -> int:
        return len(self.table)

    def identity_value(self) -> int:
        return self.identity_index

    def _normalize(self, raw: Any) -> int:
        if isinstance(raw, str):
            if raw not in self.names:
                raise ValueError(f"unknown element name {raw!r}")
            return self.names.index(raw)
        idx = int(raw)
        if not 0 <= idx < self.order:
            raise ValueError(f"index {idx} outside 0..{self.order - 1}")
        return idx

    def _add(self, a: int, b: int) -> int:
        return self.table[a][b]

    def _neg(self, a: int) -> int:
        return self.inverse[a]

    def elements(self) -> list:
        return [GroupElement(self, i) for i in range(self.order)]

    def format_value(self, value: int) -> str:
        return self.names[value]

    def describe(self) -> dict:
        return {
            "kind": "cayley",
            "order": self.order,
            "table": [list(row) for row in self.table],
            "names": list(self.names),
        }


def load_cayley(doc: Union[dict, str]) -> CayleyGroup:
    """Validate a multiplication-table document and build a CayleyGroup.

    The document is ``{"order": n, "table": [[...]], "names": [...]}``;
    the identity is inferred and inverses are derived.  Tables that violate
    closure, identity, inverse, or associativity are rejected.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    order = int(doc["order"])
    table = doc["table"]
    if order < 1:
        raise NotAGroupError("order must be positive")
    if len(table) != order or any(len(row) != order for row in table):
        raise NotAGroupError(f"table must be {order}x{order}")
    table = tuple(tuple(int(v) for v in row) for row in table)
    for row in table:
        for v in row:
            if not 0 <= v < order:
                raise NotAGroupError(f"entry {v} outside 0..{order - 1}")

    identity = None
    for e in range(order):
        if all(table[e][x] == x and table[x][e] == x for x in range(order)):
            identity = e
            break
    if identity is None:
        raise NotAGroupError("no two-sided identity element")

    inverse = []
    for x in range(order):
        inv = next(
            (y for y in range(order)
             if table[x][y] == identity and table[y][x] == identity),
            None,
        )
        if inv is None:
            raise NotAGroupError(f"no inverse for index {x}")
        inverse.append(inv)

    for a in range(order):
        for b in range(order):
            ab = table[a][b]
            for c in range(order):
                if table[ab][c] != table[a][table[b][c]]:
                    raise NotAGroupError(
                        f"not associative at ({a},{b},{c})"
                    )

    names = tuple(doc.get("names") or [f"g{i}" for i in range(order)])
    if len(names) != order:
        raise NotAGroupError("names length must equal order")
    group = CayleyGroup(table=table, names=names,
                        identity_index=identity, inverse=tuple(inverse))
    abelian = all(table[a][b] == table[b][a]
                  for a in range(order) for b in range(order))
    object.__setattr__(group, "is_abelian", abelian)
    return group


def group_from_json(doc: dict) -> AmbientGroup:
    kind = doc["kind"]
    if kind == "integers":
        return Integers()
    if kind == "rationals":
        return Rationals()
    if kind == "product":
        return ProductMod(int(doc["coords"]))
    if kind == "free":
        return FreeGroup(tuple(doc["generators"]))
    if kind == "cayley":
        return load_cayley(doc)
    raise ValueError(f"unknown group kind {kind!r}")


def _require_same_group(a: GroupElement, b: GroupElement) -> None:
    if a.group != b.group:
        raise GroupMismatchError(
            f"elements of {a.group.describe()['kind']} and "
            f"{b.group.describe()['kind']} cannot be combined"
        )


def op_add(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group law: addition for abelian variants, product (with free
    reduction) for word and table variants."""
    _require_same_group(a, b)
    return GroupElement(a.group, a.group._add(a.value, b.value))


def op_neg(a: GroupElement) -> GroupElement:
    """Group inverse; words are inverted letterwise and reversed."""
    return GroupElement(a.group, a.group._neg(a.value))


def op_sub(a: GroupElement, b: GroupElement) -> GroupElement:
    return op_add(a, op_neg(b))


def op_sum(group: AmbientGroup, elements: Iterable[GroupElement]) -> GroupElement:
    total = group.identity()
    for el in elements:
        total = op_add(total, el)
    return total


def op_conjugate(g: GroupElement, s: GroupElement) -> GroupElement:
    """g s g^-1; the identity map on abelian groups."""
    _require_same_group(g, s)
    if g.group.is_abelian:
        return s
    return op_add(op_add(g, s), op_neg(g))
