"""Dyadic-indexed neighborhood products for nonabelian groups.

Products indexed along the natural numbers cannot absorb a product of two
of their own kind, so the index set here is the dyadic rationals in the
open unit interval: a dense order that contains two stacked copies of
itself.  Assignments give every index the set attached to its lowest-terms
level; towers T_0 >= T_1 >= ... with T_i T_i T_i inside T_{i-1} generate
such assignments and admit the middle-thirds collapse certificate.

The module also carries the conjugation closure of a family, the
nonabelian n-fold exclusion check, and the Fibonacci endomorphism
x -> y, y -> xy of the free group on two generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence

from .filters import ExplicitFamily
from .groups import (
    CayleyGroup,
    FreeGroup,
    GroupElement,
    op_add,
    op_conjugate,
    op_neg,
    op_sum,
)
from .report import Status, VerificationReport
from .setspec import (
    FiniteSet,
    SetSpec,
    StarSet,
    contains,
    star,
    subset_of,
    sumset,
)


@dataclass(frozen=True, order=False)
class DyadicIndex:
    """m / 2^level in lowest terms, inside the open unit interval."""

    num: int
    level: int

    def __post_init__(self):
        if self.level < 1 or not 0 < self.num < 2 ** self.level:
            raise ValueError("index must be m/2^i with 0 < m < 2^i")
        if self.num % 2 == 0:
            raise ValueError("numerator must be odd (lowest terms)")

    @classmethod
    def of(cls, num: int, power: int) -> "DyadicIndex":
        while num % 2 == 0 and power > 0:
            num //= 2
            power -= 1
        return cls(num, power)

    def fraction(self) -> Fraction:
        return Fraction(self.num, 2 ** self.level)

    def reflected(self) -> "DyadicIndex":
        # q -> 1 - q keeps the lowest-terms level.
        return DyadicIndex(2 ** self.level - self.num, self.level)

    def __lt__(self, other: "DyadicIndex") -> bool:
        return self.fraction() < other.fraction()

    def __le__(self, other: "DyadicIndex") -> bool:
        return self.fraction() <= other.fraction()

    def __str__(self) -> str:
        return f"{self.num}/{2 ** self.level}"


def dyadic_indices(max_level: int) -> list:
    """All indices with level <= max_level, in increasing order."""
    out = [DyadicIndex.of(m, max_level) for m in range(1, 2 ** max_level)]
    return sorted(out, key=DyadicIndex.fraction)


@dataclass(frozen=True)
class DyadicAssignment:
    """Level i -> set, so the index m/2^i (lowest terms) receives the
    level-i set.  Materialized up to max_level."""

    levels: tuple  # tuple[SetSpec, ...]; levels[i-1] is the level-i set

    def __post_init__(self):
        if not self.levels:
            raise ValueError("at least one level required")

    @classmethod
    def of(cls, level_sets: Dict[int, SetSpec]) -> "DyadicAssignment":
        top = max(level_sets)
        if sorted(level_sets) != list(range(1, top + 1)):
            raise ValueError("levels must be contiguous from 1")
        return cls(tuple(level_sets[i] for i in range(1, top + 1)))

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def set_at(self, q: DyadicIndex) -> SetSpec:
        if q.level > self.max_level:
            raise ValueError(f"index {q} beyond materialized level")
        return self.levels[q.level - 1]

    def indices(self) -> list:
        return dyadic_indices(self.max_level)

    def shifted(self, shift: int) -> "DyadicAssignment":
        """Assignment seen through a rescaling that adds ``shift`` levels."""
        if shift >= self.max_level:
            raise ValueError("shift swallows every materialized level")
        return DyadicAssignment(self.levels[shift:])

    def to_json(self) -> dict:
        return {"levels": {str(i + 1): s.to_json()
                           for i, s in enumerate(self.levels)}}


def assignment_from_json(doc: dict, group=None) -> DyadicAssignment:
    """Ingest ``{"levels": {"1": setspec, "2": setspec, ...}}``."""
    from .setspec import spec_from_json
    levels = {int(k): spec_from_json(v, group=group)
              for k, v in doc["levels"].items()}
    return DyadicAssignment.of(levels)


def star_mult(spec: SetSpec) -> StarSet:
    """Symmetrization for finite sets over a multiplicative group."""
    if not isinstance(spec, FiniteSet):
        raise ValueError("nonabelian star needs an explicit finite set")
    if spec.group.is_abelian:
        raise ValueError("use star() for abelian ambient groups")
    return star(spec)


@dataclass(frozen=True)
class UqResult:
    status: str  # "yes" | "no" | "unknown"
    witness: Optional[tuple] = None  # tuple[(DyadicIndex, GroupElement), ...]
    searched: Optional[dict] = None

    def is_yes(self) -> bool:
        return self.status == "yes"

    def to_json(self) -> dict:
        doc = {"status": self.status}
        if self.witness is not None:
            doc["witness"] = [
                {"index": str(q),
                 "factor": el.group.value_to_json(el.value)}
                for q, el in self.witness
            ]
        if self.searched:
            doc["searched"] = self.searched
        return doc


def _reachable(assignment: DyadicAssignment) -> dict:
    """Minimum factor count for every element of some increasing-index
    product, over all indices of the materialized levels."""
    indices = assignment.indices()
    group = assignment.levels[0].ambient()
    reach = {group.identity_value(): 0}
    for q in indices:
        starred = star(assignment.set_at(q))
        snapshot = list(reach.items())
        for value, count in snapshot:
            for el in starred.base.elements():
                nxt = group._add(value, el.value)
                if count + 1 < reach.get(nxt, math.inf):
                    reach[nxt] = count + 1
    return reach


def _witness_search(g: GroupElement, assignment: DyadicAssignment,
                    depth: int) -> Optional[tuple]:
    """Smallest-index-first DFS for an increasing-index factorization."""
    indices = assignment.indices()
    group = g.group
    trail: list = []

    def dfs(pos: int, acc) -> bool:
        if acc == g.value and trail:
            return True
        if len(trail) >= depth:
            return False
        for j in range(pos, len(indices)):
            q = indices[j]
            starred = star(assignment.set_at(q))
            for el in starred.base.elements():
                trail.append((q, el))
                if dfs(j + 1, group._add(acc, el.value)):
                    return True
                trail.pop()
        return False

    if dfs(0, group.identity_value()):
        return tuple(trail)
    return None


def uq_membership(g: GroupElement, assignment: DyadicAssignment,
                  depth: int) -> UqResult:
    """Does g lie in a product of starred sets along some increasing dyadic
    index sequence of length <= depth?

    Exhaustive within the materialized levels and the depth cap.  The empty
    product contributes the identity.  A miss upgrades from unknown to an
    exact "no" only over finite table groups whose reachable products
    stabilize before the cap; free-group misses stay unknown.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if g.is_identity():
        return UqResult("yes", witness=())
    searched = {"depth": depth, "max_level": assignment.max_level}
    if isinstance(g.group, CayleyGroup):
        # The reachability table is complete for table groups, so decide
        # from it and only run the DFS when a witness is known to exist.
        reach = _reachable(assignment)
        if reach.get(g.value, math.inf) <= depth:
            found = _witness_search(g, assignment, reach[g.value])
            assert found is not None, "reachable element must have a witness"
            return UqResult("yes", witness=found)
        stabilized_at = max(reach.values())
        if g.value not in reach and stabilized_at < depth:
            searched["stabilized_at"] = stabilized_at
            return UqResult("no", searched=searched)
        if g.value not in reach:
            searched["note"] = "unreached but closure not inside depth cap"
        return UqResult("unknown", searched=searched)
    found = _witness_search(g, assignment, depth)
    if found is not None:
        product = op_sum(g.group, [el for _, el in found])
        assert product.value == g.value, "witness product mismatch"
        return UqResult("yes", witness=found)
    return UqResult("unknown", searched=searched)


def enumerate_u_witnesses(assignment: DyadicAssignment,
                          depth: int) -> dict:
    """Witnesses with <= depth factors over the assignment's indices.

    Keyed by (element value, position of the top index used); the empty
    product appears as (identity, -1).  States are deduplicated, so the
    table stays bounded by group size times index count.
    """
    indices = assignment.indices()
    group = assignment.levels[0].ambient()
    return _products_over(group, assignment, indices, depth)


def _products_over(group, assignment: DyadicAssignment,
                   indices: Sequence[DyadicIndex], depth: int) -> dict:
    out: dict = {(group.identity_value(), -1): ()}
    frontier = [(group.identity_value(), (), -1)]
    for _ in range(depth):
        nxt = []
        for value, witness, pos in frontier:
            for j in range(pos + 1, len(indices)):
                q = indices[j]
                starred = star(assignment.set_at(q))
                for el in starred.base.elements():
                    v2 = group._add(value, el.value)
                    if (v2, j) in out:
                        continue
                    w2 = witness + ((q, el),)
                    out[(v2, j)] = w2
                    nxt.append((v2, w2, j))
        frontier = nxt
    return out


def _sorted_witness_items(group, table: dict) -> list:
    return sorted(table.items(),
                  key=lambda kv: (group.sort_key(kv[0][0]), kv[0][1]))


@dataclass(frozen=True)
class Rescale:
    """Order embedding q -> (q + offset) / 2^shift of the unit interval
    into one of its dyadic subintervals."""

    offset: int
    shift: int

    def __post_init__(self):
        if self.shift < 1 or not 0 <= self.offset < 2 ** self.shift:
            raise ValueError("need 0 <= offset < 2^shift, shift >= 1")

    def apply(self, q: DyadicIndex) -> DyadicIndex:
        return DyadicIndex.of(q.num + self.offset * 2 ** q.level,
                              q.level + self.shift)

    def image_interval(self) -> tuple:
        lo = Fraction(self.offset, 2 ** self.shift)
        return (lo, lo + Fraction(1, 2 ** self.shift))

    def entirely_below(self, other: "Rescale") -> bool:
        return self.image_interval()[1] <= other.image_interval()[0]


def check_UU(assignment: DyadicAssignment, sigma: Rescale, tau: Rescale,
             depth: int) -> VerificationReport:
    """Product of the two rescaled neighborhood sets lands in the combined
    one: every pair of bounded witnesses concatenates into a witness.

    Requires sigma's image to lie entirely below tau's.  Each product is
    verified twice: by re-multiplying the concatenated witness and by the
    independent membership search at the combined depth.
    """
    if not sigma.entirely_below(tau):
        raise ValueError("sigma's image must lie entirely below tau's")
    shift_cap = assignment.max_level - max(sigma.shift, tau.shift)
    if shift_cap < 1:
        raise ValueError("assignment too shallow for these rescalings")

    left = assignment.shifted(sigma.shift)
    right = assignment.shifted(tau.shift)
    lefts = enumerate_u_witnesses(left, depth)
    rights = enumerate_u_witnesses(right, depth)
    group = assignment.levels[0].ambient()
    # Independent route: the full reachability table of the combined set.
    reach = _reachable(assignment)
    identity = group.identity_value()

    pairs = 0
    failures = []
    for (lv, _), lw in _sorted_witness_items(group, lefts):
        for (rv, _), rw in _sorted_witness_items(group, rights):
            pairs += 1
            product = group._add(lv, rv)
            mapped = tuple((sigma.apply(q), el) for q, el in lw) + \
                tuple((tau.apply(q), el) for q, el in rw)
            ok = _witness_is_valid(group, assignment, mapped, product)
            confirm = product == identity or reach.get(product, math.inf) <= 2 * depth
            if not (ok and confirm):
                failures.append({
                    "left": group.value_to_json(lv),
                    "right": group.value_to_json(rv),
                })
    status = Status.VERIFIED if not failures else Status.REFUTED
    return VerificationReport(
        claim=f"uu-product:shift={sigma.offset}/{2**sigma.shift},"
              f"{tau.offset}/{2**tau.shift}:depth={depth}",
        status=status,
        payload={
            "pairs_checked": pairs,
            "failures": failures,
            "sigma": {"offset": sigma.offset, "shift": sigma.shift},
            "tau": {"offset": tau.offset, "shift": tau.shift},
        },
        budgets={"depth": depth},
    )


def _witness_is_valid(group, assignment: DyadicAssignment,
                      witness: tuple, expected) -> bool:
    """Indices strictly increase, factors belong, product matches."""
    last = None
    for q, el in witness:
        if last is not None and not last < q:
            return False
        last = q
        if q.level > assignment.max_level:
            return False
        if not contains(star(assignment.set_at(q)), el):
            return False
    total = group.identity_value()
    for _, el in witness:
        total = group._add(total, el.value)
    return total == expected


def check_inverse_closure(assignment: DyadicAssignment,
                          depth: int) -> VerificationReport:
    """Reversing an increasing witness and inverting its factors witnesses
    the inverse element; level-keyed assignments are reflection-invariant,
    so the reversed witness lives in the same assignment."""
    witnesses = enumerate_u_witnesses(assignment, depth)
    group = assignment.levels[0].ambient()
    failures = []
    for (value, _), witness in _sorted_witness_items(group, witnesses):
        inv_value = group._neg(value)
        reversed_witness = tuple(
            (q.reflected(), op_neg(el)) for q, el in reversed(witness)
        )
        if not _witness_is_valid(group, assignment, reversed_witness,
                                 inv_value):
            failures.append(group.value_to_json(value))
    status = Status.VERIFIED if not failures else Status.REFUTED
    return VerificationReport(
        claim=f"u-inverse-closure:depth={depth}",
        status=status,
        payload={"elements_checked": len(witnesses), "failures": failures},
        budgets={"depth": depth},
    )


def check_translation(assignment: DyadicAssignment,
                      depth: int) -> VerificationReport:
    """For x in the neighborhood set with top index q, products with the
    set restricted above q stay inside: witnesses concatenate."""
    witnesses = enumerate_u_witnesses(assignment, depth)
    group = assignment.levels[0].ambient()
    indices = assignment.indices()
    checked = 0
    failures = []
    for (value, _), witness in _sorted_witness_items(group, witnesses):
        if not witness:
            continue
        top = witness[-1][0]
        above = [q for q in indices if top < q]
        tail_products = _products_over(group, assignment, above, depth)
        for (uval, _), uwit in _sorted_witness_items(group, tail_products):
            checked += 1
            product = group._add(value, uval)
            joined = witness + uwit
            if not _witness_is_valid(group, assignment, joined, product):
                failures.append({
                    "x": group.value_to_json(value),
                    "u": group.value_to_json(uval),
                })
    status = Status.VERIFIED if not failures else Status.REFUTED
    return VerificationReport(
        claim=f"u-translation:depth={depth}",
        status=status,
        payload={"products_checked": checked, "failures": failures},
        budgets={"depth": depth},
    )


@dataclass(frozen=True)
class TowerChain:
    """T_0 >= T_1 >= ... >= T_K with each triple product T_i T_i T_i
    contained in T_{i-1}, checked exactly at construction."""

    sets: tuple  # tuple[SetSpec, ...]

    def __post_init__(self):
        for i in range(1, len(self.sets)):
            t_i, t_prev = self.sets[i], self.sets[i - 1]
            if not subset_of(t_i, t_prev):
                raise ValueError(f"tower level {i} not inside level {i - 1}")
            triple = sumset(sumset(t_i, t_i), t_i)
            if not subset_of(triple, t_prev):
                raise ValueError(
                    f"triple product at level {i} escapes level {i - 1}"
                )

    @property
    def top_level(self) -> int:
        return len(self.sets) - 1

    def assignment(self) -> DyadicAssignment:
        if self.top_level < 1:
            raise ValueError("tower needs at least levels 0 and 1")
        return DyadicAssignment(self.sets[1:])


@dataclass(frozen=True)
class ReductionStage:
    level: int
    indices: tuple  # tuple[str, ...] current index set
    merges: tuple  # tuple[(left, mid, right), ...] as strings
    inclusion_exact: bool

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "indices": list(self.indices),
            "merges": [list(m) for m in self.merges],
            "inclusion_exact": self.inclusion_exact,
        }


@dataclass(frozen=True)
class ReductionCertificate:
    """Step-by-step collapse of the full level-j index set to the single
    index 1/2 carrying the base set of the tower."""

    j: int
    stages: tuple
    final_set: SetSpec

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "stages": [s.to_json() for s in self.stages],
            "final_set": self.final_set.to_json(),
        }


def s_in_u_reduce(tower: TowerChain, j: int) -> ReductionCertificate:
    """Collapse the product over all indices of denominator 2^j.

    Entries at the deepest level are first promoted one tower step; each
    remaining middle index is flanked by two deepest-level indices, and
    every such triple merges into the next tower set up.  Iterating lands
    on the single index 1/2 assigned the tower's base set.  Each distinct
    merge inclusion is verified exactly on the tower's sets.
    """
    if not 1 <= j <= tower.top_level + 1:
        raise ValueError(f"need 1 <= j <= {tower.top_level + 1}")
    stages = []
    level = j
    while level >= 2:
        indices = dyadic_indices(level)
        merges = []
        for mid_pos in range(1, len(indices) - 1):
            mid = indices[mid_pos]
            if mid.level == level - 1 or level == 2:
                left, right = indices[mid_pos - 1], indices[mid_pos + 1]
                if left.level == level and right.level == level:
                    merges.append((str(left), str(mid), str(right)))
        # Sets in every triple equal T_{level-1}; the merged index takes
        # T_{level-2}.  Verify that inclusion once per stage.
        t = tower.sets[level - 1]
        target = tower.sets[level - 2]
        triple = sumset(sumset(t, t), t)
        exact = subset_of(triple, target)
        if not exact:
            raise ValueError(f"merge inclusion fails at level {level}")
        stages.append(ReductionStage(
            level=level,
            indices=tuple(str(q) for q in indices),
            merges=tuple(merges),
            inclusion_exact=exact,
        ))
        level -= 1
    return ReductionCertificate(j=j, stages=tuple(stages),
                                final_set=tower.sets[0])


def fg_closure(family: ExplicitFamily,
               conjugators: Sequence[GroupElement]) -> ExplicitFamily:
    """Close each member under conjugation by the listed elements.

    The conjugators stand in for the whole group (and are the whole group
    for finite table groups when every element is listed); the identity
    must be among them so each closed member contains its original."""
    conjugators = list(conjugators)
    if not conjugators or not any(c.is_identity() for c in conjugators):
        raise ValueError("conjugator list must include the identity")
    closed = []
    for member in family.members:
        if not isinstance(member, FiniteSet):
            raise ValueError("conjugation closure needs explicit finite sets")
        group = member.group
        if group.is_abelian:
            closed.append(member)
            continue
        values = set()
        for c in conjugators:
            for el in member.elements():
                values.add(op_conjugate(c, el).value)
        out = FiniteSet(group, frozenset(values))
        assert subset_of(member, out), "closure must contain the original"
        closed.append(out)
    return ExplicitFamily(closed, name=f"{family.name}^conj")


@dataclass(frozen=True)
class NonabCupcapResult:
    found: bool
    n: int
    member_index: Optional[int] = None
    member: Optional[SetSpec] = None
    checked: int = 0

    def to_json(self) -> dict:
        doc = {"found": self.found, "n": self.n, "checked": self.checked}
        if self.found:
            doc["member_index"] = self.member_index
            doc["member"] = self.member.to_json()
        return doc


def cupcap_check_nonab(g: GroupElement, n: int, family: ExplicitFamily,
                       depth: int) -> NonabCupcapResult:
    """Exact n-fold product-set exclusion over the first members."""
    if g.is_identity():
        raise ValueError("probe must not be the identity")
    if n < 1:
        raise ValueError("n must be positive")
    top = min(depth, family.size())
    for i in range(top):
        member = family.member(i)
        folded = star(member).base
        for _ in range(n - 1):
            folded = sumset(folded, star(member))
        if not contains(folded, g):
            return NonabCupcapResult(True, n, i, member, checked=i + 1)
    return NonabCupcapResult(False, n, checked=top)


# Fibonacci endomorphism of the free group on x, y.

FREE_XY = FreeGroup(("x", "y"))
_X = FREE_XY.element("x")
_Y = FREE_XY.element("y")
_PHI_IMAGES = {1: (2,), -1: (-2,), 2: (1, 2), -2: (-2, -1)}


@dataclass(frozen=True)
class FibWord:
    word: GroupElement
    index: int

    def length(self) -> int:
        return len(self.word.value)


def phi_apply(w: GroupElement) -> GroupElement:
    """The substitution x -> y, y -> xy, extended to reduced words."""
    if w.group != FREE_XY:
        raise ValueError("word must live in the free group on x, y")
    letters: list = []
    for letter in w.value:
        letters.extend(_PHI_IMAGES[letter])
    return FREE_XY.element(letters)


def phi_iterate(w: GroupElement, n: int) -> GroupElement:
    if n < 0:
        raise ValueError("n must be nonnegative")
    for _ in range(n):
        w = phi_apply(w)
    return w


def fib_word(n: int) -> FibWord:
    """f_0 = x, f_1 = y, f_{k+1} = f_{k-1} f_k, reduced."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a, b = _X, _Y
    if n == 0:
        return FibWord(a, 0)
    for _ in range(n - 1):
        a, b = b, op_add(a, b)
    return FibWord(b, n)


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    return op_add(op_add(a, b), op_add(op_neg(a), op_neg(b)))


def verify_fib_identity(n: int) -> VerificationReport:
    """The n-th substitution image of the basic commutator equals the
    commutator of consecutive Fibonacci words, and alternates between the
    commutator (even n) and its inverse (odd n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    base = commutator(_X, _Y)
    lhs = phi_iterate(base, n)
    f_n = phi_iterate(_X, n)
    f_n1 = phi_iterate(_X, n + 1)
    rhs = commutator(f_n, f_n1)
    expected = base if n % 2 == 0 else op_neg(base)
    ok = lhs.value == rhs.value == expected.value
    return VerificationReport(
        claim=f"fibonacci-commutator:n={n}",
        status=Status.VERIFIED if ok else Status.REFUTED,
        payload={
            "lhs": str(lhs),
            "rhs": str(rhs),
            "expected": str(expected),
        },
        budgets={"n": n},
    )
