"""Exact finite descriptions of subsets of an ambient group.

Five description kinds cover everything the verification harness needs:
explicit finite sets, unions of residue classes, coordinate boxes in a
truncated product, symmetric rational intervals, and tails of registered
integer sequences.  Residue sets are the exactness workhorse: they are
closed under symmetrization and sumset, so the square-root chains compute
exactly rather than within budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .groups import (
    AmbientGroup,
    GroupElement,
    GroupMismatchError,
    Integers,
    ProductMod,
    Rationals,
    group_from_json,
)
from .sequences import get_sequence

_INTEGERS = Integers()
_RATIONALS = Rationals()


class SumsetUnsupported(ValueError):
    """The two descriptions have no exact sumset representation."""


class SubsetUndecidable(ValueError):
    """No exact subset test exists for this pair of descriptions."""


class EnumerationBudgetError(RuntimeError):
    """An explicit enumeration outgrew its element budget."""


class SetSpec:
    kind: str = "?"

    def ambient(self) -> AmbientGroup:
        raise NotImplementedError

    def contains_value(self, value) -> bool:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteSet(SetSpec):
    group: AmbientGroup
    values: frozenset

    kind = "finite"

    @classmethod
    def of(cls, group: AmbientGroup, raws: Iterable) -> "FiniteSet":
        return cls(group, frozenset(group.element(r).value for r in raws))

    def ambient(self) -> AmbientGroup:
        return self.group

    def contains_value(self, value) -> bool:
        return value in self.values

    def elements(self) -> list:
        vals = sorted(self.values, key=self.group.sort_key)
        return [GroupElement(self.group, v) for v in vals]

    def describe(self) -> str:
        shown = ", ".join(str(el) for el in self.elements()[:8])
        more = "" if len(self.values) <= 8 else ", ..."
        return f"{{{shown}{more}}}"

    def to_json(self) -> dict:
        doc = {
            "kind": "finite",
            "elements": [self.group.value_to_json(el.value)
                         for el in self.elements()],
        }
        if self.group != _INTEGERS:
            doc["group"] = self.group.describe()
        return doc


@dataclass(frozen=True)
class ResidueSet(SetSpec):
    """{x in Z : x mod modulus in residues}; a union of residue classes."""

    modulus: int
    residues: frozenset

    kind = "residue"

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if any(not 0 <= r < self.modulus for r in self.residues):
            raise ValueError("residues must lie in 0..modulus-1")

    @classmethod
    def of(cls, modulus: int, residues: Iterable[int]) -> "ResidueSet":
        return cls(modulus, frozenset(r % modulus for r in residues))

    def ambient(self) -> AmbientGroup:
        return _INTEGERS

    def contains_value(self, value: int) -> bool:
        return value % self.modulus in self.residues

    def is_all_integers(self) -> bool:
        return len(self.residues) == self.modulus

    def describe(self) -> str:
        rs = ",".join(str(r) for r in sorted(self.residues))
        return f"{{x : x mod {self.modulus} in {{{rs}}}}}"

    def to_json(self) -> dict:
        return {
            "kind": "residue",
            "modulus": self.modulus,
            "residues": sorted(self.residues),
        }


@dataclass(frozen=True)
class BoxSet(SetSpec):
    """Elements of a truncated product whose first coordinates are confined.

    ``allowed[i]`` constrains coordinate i+1; coordinates past the prefix
    are unconstrained.  Every per-coordinate set must contain 0 and be
    closed under negation, which forces the symmetrization of a box to be
    the box itself; general boxes are rejected at construction.
    """

    n_coords: int
    allowed: tuple  # tuple of frozenset[int], one per constrained coordinate

    kind = "box"

    def __post_init__(self):
        if not 0 <= len(self.allowed) <= self.n_coords:
            raise ValueError("constrained prefix longer than coordinate count")
        for i, opts in enumerate(self.allowed):
            n = i + 1
            if any(not 0 <= v < n for v in opts):
                raise ValueError(f"coordinate {n}: residues outside 0..{n - 1}")
            if 0 not in opts:
                raise ValueError(f"coordinate {n}: 0 required")
            if any((-v) % n not in opts for v in opts):
                raise ValueError(f"coordinate {n}: not negation-closed")

    @classmethod
    def of(cls, n_coords: int, allowed: Iterable[Iterable[int]]) -> "BoxSet":
        return cls(n_coords, tuple(frozenset(a) for a in allowed))

    def ambient(self) -> AmbientGroup:
        return ProductMod(self.n_coords)

    def prefix_len(self) -> int:
        return len(self.allowed)

    def coordinate_options(self, coord: int) -> frozenset:
        """Allowed residues at 1-based coordinate ``coord``."""
        if coord <= len(self.allowed):
            return self.allowed[coord - 1]
        return frozenset(range(coord))

    def contains_value(self, value: tuple) -> bool:
        return all(value[i] in opts for i, opts in enumerate(self.allowed))

    def describe(self) -> str:
        parts = [f"c{i + 1} in {sorted(opts)}"
                 for i, opts in enumerate(self.allowed)]
        return f"box[{'; '.join(parts)}; rest free of {self.n_coords}]"

    def to_json(self) -> dict:
        return {
            "kind": "box",
            "coords": self.n_coords,
            "allowed": [sorted(opts) for opts in self.allowed],
        }


@dataclass(frozen=True)
class SymmetricInterval(SetSpec):
    """The open rational interval (-epsilon, epsilon)."""

    epsilon: Fraction

    kind = "interval"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def of(cls, epsilon) -> "SymmetricInterval":
        return cls(Fraction(epsilon))

    def ambient(self) -> AmbientGroup:
        return _RATIONALS

    def contains_value(self, value: Fraction) -> bool:
        return abs(value) < self.epsilon

    def describe(self) -> str:
        return f"(-{self.epsilon}, {self.epsilon})"

    def to_json(self) -> dict:
        return {"kind": "interval", "epsilon": str(self.epsilon)}


@dataclass(frozen=True)
class TailSet(SetSpec):
    """{x_k : k >= start, k not excluded} over a registered sequence."""

    sequence: str
    start: int
    excluded: frozenset

    kind = "tail"

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("start must be nonnegative")
        get_sequence(self.sequence)  # must resolve

    @classmethod
    def of(cls, sequence: str, start: int = 0,
           excluded: Iterable[int] = ()) -> "TailSet":
        return cls(sequence, start, frozenset(excluded))

    def ambient(self) -> AmbientGroup:
        return _INTEGERS

    def seq(self):
        return get_sequence(self.sequence)

    def admits(self, k: int) -> bool:
        return k >= self.start and k not in self.excluded and self.seq().in_range(k)

    def contains_value(self, value: int) -> bool:
        k = self.seq().index_of_value(value, self.start)
        return k is not None and k not in self.excluded

    def member_values(self, bound: int) -> list:
        """Tail values with absolute value <= bound, in index order."""
        seq = self.seq()
        return [seq.value(k)
                for k in seq.indices_with_abs_at_most(self.start, bound)
                if k not in self.excluded]

    def describe(self) -> str:
        ex = "" if not self.excluded else f" minus indices {sorted(self.excluded)}"
        return f"{{{self.sequence}[k] : k >= {self.start}}}{ex}"

    def to_json(self) -> dict:
        return {
            "kind": "tail",
            "sequence": self.sequence,
            "start": self.start,
            "excluded": sorted(self.excluded),
        }


@dataclass(frozen=True)
class StarSet:
    """S united with the identity and the inverses of S.

    ``materialized`` records that ``base`` already equals its own
    symmetrization, so membership can delegate directly.
    """

    base: SetSpec
    materialized: bool

    def ambient(self) -> AmbientGroup:
        return self.base.ambient()

    def contains_value(self, value) -> bool:
        if self.materialized:
            return self.base.contains_value(value)
        group = self.base.ambient()
        return (value == group.identity_value()
                or self.base.contains_value(value)
                or self.base.contains_value(group._neg(value)))

    def describe(self) -> str:
        return self.base.describe() if self.materialized \
            else f"star({self.base.describe()})"

    def to_json(self) -> dict:
        return {"kind": "star", "materialized": self.materialized,
                "base": self.base.to_json()}


SetLike = Union[SetSpec, StarSet]


def star(spec: SetLike) -> StarSet:
    """Symmetrize: S u {identity} u -S (inverses in the nonabelian case).

    Materializes the closure wherever the representation allows; tails are
    marked instead, and their membership adds the identity and negated
    sequence values.  Idempotent.
    """
    if isinstance(spec, StarSet):
        return spec
    if isinstance(spec, FiniteSet):
        group = spec.group
        closed = set(spec.values)
        closed.add(group.identity_value())
        closed.update(group._neg(v) for v in spec.values)
        return StarSet(FiniteSet(group, frozenset(closed)), True)
    if isinstance(spec, ResidueSet):
        closed = set(spec.residues) | {0}
        closed.update((-r) % spec.modulus for r in spec.residues)
        return StarSet(ResidueSet(spec.modulus, frozenset(closed)), True)
    if isinstance(spec, BoxSet):
        return StarSet(spec, True)  # construction invariant: box == box*
    if isinstance(spec, SymmetricInterval):
        return StarSet(spec, True)  # symmetric and contains 0 already
    if isinstance(spec, TailSet):
        return StarSet(spec, False)
    raise TypeError(f"not a set description: {spec!r}")


def contains(spec: SetLike, g: GroupElement) -> bool:
    """Exact membership for every description kind."""
    if g.group != spec.ambient():
        raise GroupMismatchError(
            f"element of {g.group.describe()['kind']} probed against "
            f"{spec.ambient().describe()['kind']} set"
        )
    return spec.contains_value(g.value)


def _base_of(spec: SetLike) -> SetSpec:
    return spec.base if isinstance(spec, StarSet) else spec


def sumset(a: SetLike, b: SetLike) -> SetSpec:
    """Exact sumset (elementwise group law) of two descriptions.

    Starred arguments must be materialized.  Raises SumsetUnsupported for
    pairs with no exact representation; callers fall back to bounded
    membership search.
    """
    if isinstance(a, StarSet):
        if not a.materialized:
            raise SumsetUnsupported("tail star-sets have no exact sumset")
        a = a.base
    if isinstance(b, StarSet):
        if not b.materialized:
            raise SumsetUnsupported("tail star-sets have no exact sumset")
        b = b.base

    if isinstance(a, FiniteSet) and isinstance(b, FiniteSet):
        if a.group != b.group:
            raise GroupMismatchError("sumset of sets over different groups")
        group = a.group
        out = {group._add(x, y) for x in a.values for y in b.values}
        return FiniteSet(group, frozenset(out))

    if isinstance(a, ResidueSet) and isinstance(b, ResidueSet):
        m = math.gcd(a.modulus, b.modulus)
        residues = {(x + y) % m for x in a.residues for y in b.residues}
        return ResidueSet(m, frozenset(residues))

    # Finite sets of integers shift residue classes.
    if isinstance(a, ResidueSet) and isinstance(b, FiniteSet):
        a, b = b, a
    if isinstance(a, FiniteSet) and isinstance(b, ResidueSet):
        if a.group != _INTEGERS:
            raise SumsetUnsupported("finite+residue needs integer elements")
        m = b.modulus
        residues = {(v + r) % m for v in a.values for r in b.residues}
        return ResidueSet(m, frozenset(residues))

    if isinstance(a, BoxSet) and isinstance(b, BoxSet):
        if a.n_coords != b.n_coords:
            raise GroupMismatchError("boxes over different products")
        prefix = min(a.prefix_len(), b.prefix_len())
        allowed = []
        for i in range(prefix):
            n = i + 1
            opts = {(x + y) % n
                    for x in a.coordinate_options(n)
                    for y in b.coordinate_options(n)}
            allowed.append(frozenset(opts))
        return BoxSet(a.n_coords, tuple(allowed))

    if isinstance(a, SymmetricInterval) and isinstance(b, SymmetricInterval):
        return SymmetricInterval(a.epsilon + b.epsilon)

    raise SumsetUnsupported(
        f"no exact sumset for {type(a).__name__} + {type(b).__name__}"
    )


def n_fold_star(spec: SetLike, n: int,
                enumeration_cap: int = 200_000) -> SetSpec:
    """n-fold sumset of the symmetrization of ``spec``.

    For finite sets over nonabelian groups this is the n-fold product set,
    computed by iterated product.  Raises SumsetUnsupported when no exact
    route exists and EnumerationBudgetError past the element cap.
    """
    if n < 1:
        raise ValueError("n must be positive")
    starred = star(spec)
    if not starred.materialized:
        raise SumsetUnsupported("tail sets have no exact n-fold sumset")
    result = starred.base
    for _ in range(n - 1):
        result = sumset(result, starred.base)
        if isinstance(result, FiniteSet) and len(result.values) > enumeration_cap:
            raise EnumerationBudgetError(
                f"n-fold enumeration exceeded {enumeration_cap} elements"
            )
    return result


def subset_of(inner: SetLike, outer: SetLike) -> bool:
    """Exact subset test; raises SubsetUndecidable for unsupported pairs."""
    inner_b, outer_b = _base_of(inner), _base_of(outer)
    if isinstance(inner, StarSet) and not inner.materialized:
        if isinstance(outer_b, TailSet):
            raise SubsetUndecidable("starred tail within tail")
        raise SubsetUndecidable("starred tail has no exact subset test")

    if isinstance(inner_b, FiniteSet):
        return all(outer.contains_value(v) for v in inner_b.values)

    if isinstance(inner_b, ResidueSet) and isinstance(outer_b, ResidueSet):
        g = math.gcd(inner_b.modulus, outer_b.modulus)
        for r in inner_b.residues:
            # class(r, M_in) meets exactly the residues = r mod g of M_out
            base = r % g
            for s in range(base, outer_b.modulus, g):
                if s not in outer_b.residues:
                    return False
        return True

    if isinstance(inner_b, BoxSet) and isinstance(outer_b, BoxSet):
        if inner_b.n_coords != outer_b.n_coords:
            raise GroupMismatchError("boxes over different products")
        return all(
            inner_b.coordinate_options(i + 1) <= outer_b.coordinate_options(i + 1)
            for i in range(outer_b.prefix_len())
        )

    if isinstance(inner_b, SymmetricInterval) and isinstance(outer_b, SymmetricInterval):
        return inner_b.epsilon <= outer_b.epsilon

    if isinstance(inner_b, TailSet) and isinstance(outer_b, TailSet):
        if inner_b.sequence != outer_b.sequence:
            raise SubsetUndecidable("tails of different sequences")
        if inner_b.start < outer_b.start:
            return False
        return all(k in inner_b.excluded or k < inner_b.start
                   for k in outer_b.excluded)

    raise SubsetUndecidable(
        f"no exact subset test for {type(inner_b).__name__} within "
        f"{type(outer_b).__name__}"
    )


def divisor_certificate(spec: SetLike) -> int:
    """An integer provably dividing every element of an integer-ambient set.

    0 means the set is contained in {0}; 1 is the trivial certificate.
    Symmetrization never changes the answer.  Sums of elements drawn from
    several sets are divisible by the gcd of the sets' certificates, which
    is what turns these into exact exclusion proofs for tail chains.
    """
    base = _base_of(spec)
    if base.ambient() != _INTEGERS:
        return 1
    if isinstance(base, FiniteSet):
        return math.gcd(*base.values) if base.values else 0
    if isinstance(base, ResidueSet):
        if not base.residues:
            return 0
        d = base.modulus
        for r in base.residues:
            d = math.gcd(d, r)
        return d
    if isinstance(base, TailSet):
        return base.seq().tail_divisor(base.start)
    return 1


def divides(d: int, g: int) -> bool:
    return g == 0 if d == 0 else g % d == 0


_ENVELOPE_SIZE_CAP = 4096
_ENVELOPE_SCAN_CAP = 64


def residue_envelope(spec: SetLike, modulus: int) -> Optional[frozenset]:
    """The exact set of residues modulo ``modulus`` attained by elements.

    None when the representation cannot be reduced exactly (a tail whose
    divisor certificates never absorb the modulus) or the envelope would be
    unreasonably large.  Sums of sets reduce to sums of their envelopes,
    which yields exact exclusion proofs beyond the plain divisor route:
    tail elements past the index where the tail divisor is a multiple of
    the modulus all collapse onto residue zero.
    """
    if modulus < 1:
        raise ValueError("modulus must be positive")
    if modulus == 1:
        return frozenset({0})
    if isinstance(spec, StarSet):
        inner = residue_envelope(spec.base, modulus)
        if inner is None:
            return None
        return frozenset(inner | {0} | {(-r) % modulus for r in inner})
    if spec.ambient() != _INTEGERS:
        return None
    if isinstance(spec, FiniteSet):
        return frozenset(v % modulus for v in spec.values)
    if isinstance(spec, ResidueSet):
        g = math.gcd(spec.modulus, modulus)
        out = set()
        for r in spec.residues:
            out.update(range(r % g, modulus, g))
            if len(out) > _ENVELOPE_SIZE_CAP:
                return None
        return frozenset(out)
    if isinstance(spec, TailSet):
        seq = spec.seq()
        cutoff = None
        t = spec.start
        while seq.in_range(t) and t <= spec.start + _ENVELOPE_SCAN_CAP:
            if seq.tail_divisor(t) % modulus == 0:
                cutoff = t
                break
            t += 1
        if cutoff is None:
            if seq.length is not None and t >= seq.length:
                cutoff = seq.length  # finite sequence exhausted
            else:
                return None
        out = {seq.value(k) % modulus
               for k in range(spec.start, cutoff)
               if k not in spec.excluded}
        if any(spec.admits(k) for k in range(cutoff, cutoff + len(spec.excluded) + 1)):
            out.add(0)
        return frozenset(out)
    return None


def is_exactly_summable(spec: SetLike) -> bool:
    """Whether the starred description participates in exact sumsets."""
    base = _base_of(spec)
    return not isinstance(base, TailSet)


def spec_from_json(doc: dict, group: Optional[AmbientGroup] = None) -> SetLike:
    """Inverse of ``to_json``; ``group`` overrides the embedded descriptor."""
    kind = doc["kind"]
    if kind == "star":
        inner = spec_from_json(doc["base"], group)
        return star(inner)
    if kind == "finite":
        if group is None:
            group = group_from_json(doc["group"]) if "group" in doc else _INTEGERS
        return FiniteSet.of(group, doc["elements"])
    if kind == "residue":
        return ResidueSet.of(int(doc["modulus"]), doc["residues"])
    if kind == "box":
        return BoxSet.of(int(doc["coords"]), doc["allowed"])
    if kind == "interval":
        return SymmetricInterval.of(Fraction(doc["epsilon"]))
    if kind == "tail":
        return TailSet.of(doc["sequence"], int(doc["start"]),
                          doc.get("excluded", ()))
    raise ValueError(f"unknown set kind {kind!r}")
