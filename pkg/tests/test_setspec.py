"""Set descriptions: the star/sumset/membership algebra."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from grouptop import (
    BoxSet,
    FiniteSet,
    Integers,
    ResidueSet,
    SymmetricInterval,
    TailSet,
    contains,
    n_fold_star,
    spec_from_json,
    star,
    subset_of,
    sumset,
)
from grouptop.sequences import (
    SequenceError,
    get_sequence,
    register_prefix_sequence,
)
from grouptop.setspec import SumsetUnsupported, divides, divisor_certificate

Z = Integers()


# --- star ---

def test_star_residues_mod9():
    # oracle: negate each residue mod 9 by hand: -4 = 5, -5 = 4
    s = star(ResidueSet.of(9, {0, 4, 5}))
    assert s.base == ResidueSet.of(9, {0, 4, 5})


def test_star_finite_adds_negations_and_zero():
    s = star(FiniteSet.of(Z, [2]))
    assert {el.value for el in s.base.elements()} == {-2, 0, 2}


def test_star_interval_is_itself():
    spec = SymmetricInterval.of(1)
    assert star(spec).base == spec


def test_star_empty_set_is_identity():
    s = star(FiniteSet.of(Z, []))
    assert {el.value for el in s.base.elements()} == {0}


def test_star_idempotent_and_symmetric():
    probes = [Z.element(v) for v in range(-30, 31)]
    for spec in [ResidueSet.of(9, {2, 3}), FiniteSet.of(Z, [1, 5, -7]),
                 TailSet.of("powers3", 1)]:
        once = star(spec)
        twice = star(once)
        for p in probes:
            assert contains(once, p) == contains(twice, p)
            assert contains(once, p) == contains(once, Z.element(-p.value))


# --- sumset ---

def test_sumset_residues_oracle():
    # oracle: enumerate the 3x3 residue sums mod 9
    a = ResidueSet.of(9, {0, 4, 5})
    expected = {(x + y) % 9 for x in (0, 4, 5) for y in (0, 4, 5)}
    assert expected == {0, 1, 4, 5, 8}
    out = sumset(a, a)
    assert out == ResidueSet.of(9, expected)


def test_sumset_intervals_add():
    out = sumset(SymmetricInterval.of(1), SymmetricInterval.of("1/4"))
    assert out == SymmetricInterval.of("5/4")


def test_sumset_mixed_moduli_gcd_law():
    # class(4, 9) + class(13, 27) = class(17 mod 9, 9) = class(8, 9)
    out = sumset(ResidueSet.of(9, {4}), ResidueSet.of(27, {13}))
    assert out == ResidueSet.of(9, {8})
    # sampling oracle: 100 representatives a side
    rng = random.Random(0)
    for _ in range(100):
        x = 4 + 9 * rng.randrange(-50, 50)
        y = 13 + 27 * rng.randrange(-50, 50)
        assert out.contains_value(x + y)


def test_sumset_finite_shifts_residue_classes():
    out = sumset(FiniteSet.of(Z, [1, 2]), ResidueSet.of(6, {0, 3}))
    assert out == ResidueSet.of(6, {1, 4, 2, 5})
    out2 = sumset(ResidueSet.of(6, {0, 3}), FiniteSet.of(Z, [1, 2]))
    assert out2 == out


def test_sumset_unsupported_pairs():
    with pytest.raises(SumsetUnsupported):
        sumset(TailSet.of("powers3", 0), TailSet.of("powers3", 0))
    with pytest.raises(SumsetUnsupported):
        sumset(star(TailSet.of("powers3", 0)), ResidueSet.of(3, {0}))


@settings(max_examples=200)
@given(st.sets(st.integers(-40, 40), max_size=20),
       st.sets(st.integers(-40, 40), max_size=20))
def test_sumset_finite_matches_brute_force(xs, ys):
    out = sumset(FiniteSet.of(Z, xs), FiniteSet.of(Z, ys))
    brute = {x + y for x in xs for y in ys}
    assert {el.value for el in out.elements()} == brute


@settings(max_examples=100)
@given(st.integers(1, 60), st.integers(1, 60),
       st.integers(0, 59), st.integers(0, 59), st.data())
def test_residue_sumset_law_by_sampling(m1, m2, a, b, data):
    out = sumset(ResidueSet.of(m1, {a % m1}), ResidueSet.of(m2, {b % m2}))
    g = math.gcd(m1, m2)
    assert out == ResidueSet.of(g, {(a + b) % g})
    s = data.draw(st.integers(-30, 30))
    t = data.draw(st.integers(-30, 30))
    assert out.contains_value((a % m1 + s * m1) + (b % m2 + t * m2))


# --- contains ---

def test_contains_examples():
    assert contains(ResidueSet.of(9, {0, 4, 5}), Z.element(13))
    assert not contains(SymmetricInterval.of(1), Rationals_one())
    starred_tail = star(TailSet.of("powers3", 2))
    assert contains(starred_tail, Z.element(-27))
    assert not contains(starred_tail, Z.element(-3))
    assert contains(starred_tail, Z.element(0))


def Rationals_one():
    from grouptop import Rationals
    return Rationals().element(1)


def test_tail_membership_respects_exclusions():
    t = TailSet.of("powers3", 1, excluded={2})
    assert contains(t, Z.element(3))
    assert not contains(t, Z.element(9))  # index 2 excluded
    assert contains(t, Z.element(27))


# --- n_fold_star ---

def test_n_fold_star_examples():
    s = ResidueSet.of(9, {0, 4, 5})
    assert n_fold_star(s, 1) == star(s).base
    assert n_fold_star(s, 2) == ResidueSet.of(9, {0, 1, 4, 5, 8})
    out = n_fold_star(FiniteSet.of(Z, [1]), 3)
    assert {el.value for el in out.elements()} == set(range(-3, 4))


def test_n_fold_star_rejects_tails():
    with pytest.raises(SumsetUnsupported):
        n_fold_star(TailSet.of("powers3", 0), 2)


# --- boxes ---

def test_box_construction_invariants():
    BoxSet.of(4, [{0}, {0, 1}, {0, 1, 2}])
    with pytest.raises(ValueError):
        BoxSet.of(4, [{0}, {1}])  # missing 0
    with pytest.raises(ValueError):
        BoxSet.of(4, [{0}, {0, 1}, {0, 1}])  # 1 needs -1 = 2 mod 3


def test_box_sumset_and_membership():
    from grouptop import ProductMod
    g = ProductMod(4)
    b = BoxSet.of(4, [{0}, {0, 1}, {0, 1, 2}, {0, 1, 3}])
    assert contains(b, g.element((0, 1, 2, 3)))
    assert not contains(b, g.element((0, 0, 0, 2)))
    double = sumset(b, b)
    assert double.coordinate_options(4) == frozenset({0, 1, 2, 3})


# --- subset tests ---

def test_subset_of_pairs():
    assert subset_of(ResidueSet.of(27, {0, 13, 14}), ResidueSet.of(9, {0, 4, 5}))
    assert not subset_of(ResidueSet.of(9, {0, 4, 5}), ResidueSet.of(27, {0, 13, 14}))
    assert subset_of(FiniteSet.of(Z, [9, 18]), ResidueSet.of(9, {0}))
    assert subset_of(SymmetricInterval.of("1/4"), SymmetricInterval.of(1))
    assert subset_of(TailSet.of("powers3", 3), TailSet.of("powers3", 1))
    assert not subset_of(TailSet.of("powers3", 1), TailSet.of("powers3", 3))


# --- divisor certificates ---

def test_divisor_certificates():
    assert divisor_certificate(ResidueSet.of(9, {0, 3, 6})) == 3
    assert divisor_certificate(ResidueSet.of(9, {0, 4, 5})) == 1
    assert divisor_certificate(FiniteSet.of(Z, [6, 10])) == 2
    assert divisor_certificate(FiniteSet.of(Z, [])) == 0
    assert divisor_certificate(TailSet.of("powers3", 4)) == 81
    assert divisor_certificate(star(TailSet.of("powers3", 4))) == 81
    assert divides(0, 0) and not divides(0, 5)
    assert divides(3, -27) and not divides(3, 5)


def test_divisor_certificate_sound_on_samples():
    for spec in [ResidueSet.of(12, {0, 4, 8}), TailSet.of("factorial", 3),
                 FiniteSet.of(Z, [6, -9, 12])]:
        d = divisor_certificate(spec)
        starred = star(spec)
        for v in range(-200, 201):
            if contains(starred, Z.element(v)):
                assert divides(d, v) or d == 1


# --- sequences ---

def test_sequence_registry():
    p3 = get_sequence("powers3")
    assert [p3.value(k) for k in range(5)] == [1, 3, 9, 27, 81]
    assert p3.tail_divisor(4) == 81
    fib = get_sequence("fibonacci")
    assert [fib.value(k) for k in range(6)] == [1, 2, 3, 5, 8, 13]
    assert fib.doubling_from is None
    fact = get_sequence("factorial")
    assert fact.tail_divisor(3) == 24
    with pytest.raises(SequenceError):
        get_sequence("nope")


def test_prefix_sequence_registration_is_write_once():
    register_prefix_sequence("test-prefix-a", [1, 10, 100], doubling_from=0)
    seq = get_sequence("test-prefix-a")
    assert seq.value(2) == 100 and seq.length == 3
    assert seq.tail_divisor(1) == 10
    with pytest.raises(SequenceError):
        register_prefix_sequence("test-prefix-a", [1, 2])
    with pytest.raises(SequenceError):
        register_prefix_sequence("test-bad", [3, 2, 1])  # not increasing


# --- JSON round-trips ---

def test_setspec_json_round_trips():
    from grouptop.fixtures import dihedral8
    d4 = dihedral8()
    specs = [
        FiniteSet.of(Z, [-2, 0, 5]),
        ResidueSet.of(9, {0, 4, 5}),
        BoxSet.of(4, [{0}, {0, 1}, {0, 1, 2}]),
        SymmetricInterval.of("3/8"),
        TailSet.of("powers3", 2, excluded={4}),
        FiniteSet.of(d4, ["r", "s"]),
        star(TailSet.of("powers3", 1)),
    ]
    for spec in specs:
        doc = spec.to_json()
        back = spec_from_json(doc)
        assert back == spec, doc
