"""Dyadic-index products, towers, closures, and the Fibonacci words."""

import random

import pytest

from grouptop import FiniteSet, Integers, contains, op_add, op_neg, star
from grouptop.filters import ExplicitFamily, check_directed
from grouptop.fixtures import dihedral8
from grouptop.nonabelian import (
    FREE_XY,
    DyadicAssignment,
    DyadicIndex,
    Rescale,
    TowerChain,
    check_UU,
    check_inverse_closure,
    check_translation,
    commutator,
    cupcap_check_nonab,
    dyadic_indices,
    fg_closure,
    fib_word,
    phi_apply,
    phi_iterate,
    s_in_u_reduce,
    star_mult,
    uq_membership,
    verify_fib_identity,
)
from grouptop.report import Status

Z = Integers()
D4_NAMES = ["e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"]


# --- dyadic indices ---

def test_dyadic_lowest_terms_and_order():
    q = DyadicIndex.of(2, 3)  # 2/8 = 1/4
    assert (q.num, q.level) == (1, 2)
    idx = dyadic_indices(3)
    fracs = [str(i) for i in idx]
    assert fracs == ["1/8", "1/4", "3/8", "1/2", "5/8", "3/4", "7/8"]
    with pytest.raises(ValueError):
        DyadicIndex(2, 2)  # not lowest terms
    with pytest.raises(ValueError):
        DyadicIndex(4, 2)  # not inside (0,1)


def test_dyadic_reflection_keeps_level():
    q = DyadicIndex(3, 3)  # 3/8 -> 5/8
    assert str(q.reflected()) == "5/8"
    assert q.reflected().level == q.level


# --- star over multiplicative groups ---

def test_star_mult_free_generator():
    s = star_mult(FiniteSet.of(FREE_XY, ["x"]))
    vals = {el.value for el in s.base.elements()}
    assert vals == {(1,), (), (-1,)}


def test_star_mult_word():
    s = star_mult(FiniteSet.of(FREE_XY, ["x y"]))
    vals = {str(el) for el in s.base.elements()}
    assert vals == {"x y", "e", "y^-1 x^-1"}


def test_star_mult_subgroup_fixed():
    d4 = dihedral8()
    rot = FiniteSet.of(d4, ["e", "r", "r2", "r3"])
    assert star_mult(rot).base == rot


def test_star_mult_rejects_abelian():
    with pytest.raises(ValueError):
        star_mult(FiniteSet.of(Z, [1]))


# --- membership in dyadic products ---

def d4_assignment(levels_spec):
    d4 = dihedral8()
    return d4, DyadicAssignment.of(
        {i + 1: FiniteSet.of(d4, names)
         for i, names in enumerate(levels_spec)}
    )


def test_uq_identity_is_empty_product():
    _, assign = d4_assignment([["r"], ["r"], ["r"]])
    d4 = dihedral8()
    res = uq_membership(d4.identity(), assign, depth=3)
    assert res.is_yes() and res.witness == ()


def test_uq_single_index_member():
    d4, assign = d4_assignment([["r"], ["s"], ["r2"]])
    res = uq_membership(d4.element("s"), assign, depth=1)
    assert res.is_yes() and len(res.witness) == 1


def test_uq_r_squared_two_factors():
    d4, assign = d4_assignment([["r"], ["r"], ["r"]])
    res = uq_membership(d4.element("r2"), assign, depth=3)
    assert res.is_yes()
    assert [str(el) for _, el in res.witness] == ["r", "r"]
    qs = [q for q, _ in res.witness]
    assert qs == sorted(qs, key=DyadicIndex.fraction)


def test_uq_exact_no_on_cayley():
    d4, assign = d4_assignment([["r"], ["r"], ["r"]])
    res = uq_membership(d4.element("s"), assign, depth=4)
    assert res.status == "no"
    assert "stabilized_at" in res.searched


def test_uq_free_group_miss_stays_unknown():
    assign = DyadicAssignment.of({1: FiniteSet.of(FREE_XY, ["x"])})
    res = uq_membership(FREE_XY.element("y"), assign, depth=2)
    assert res.status == "unknown"


def test_uq_depth1_agrees_with_star_membership():
    d4, assign = d4_assignment([["r", "s"], ["r", "s"], ["r", "s"]])
    starred = star_mult(FiniteSet.of(d4, ["r", "s"]))
    for el in d4.elements():
        res = uq_membership(el, assign, depth=1)
        expected = el.is_identity() or contains(starred, el)
        assert res.is_yes() == expected


# --- product absorption, inverses, translation ---

def test_check_uu_verified_on_d4():
    _, assign = d4_assignment([["r"], ["r", "s"], ["r2"], ["r"], ["s"]])
    rep = check_UU(assign, Rescale(0, 2), Rescale(3, 2), depth=3)
    assert rep.status is Status.VERIFIED
    assert rep.payload["pairs_checked"] > 1


def test_check_uu_trivial_identity_factor():
    _, assign = d4_assignment([["e"], ["e"], ["e"], ["e"], ["e"]])
    rep = check_UU(assign, Rescale(0, 2), Rescale(3, 2), depth=3)
    assert rep.status is Status.VERIFIED


def test_check_uu_rejects_overlap():
    _, assign = d4_assignment([["r"], ["r"], ["r"], ["r"], ["r"]])
    with pytest.raises(ValueError):
        check_UU(assign, Rescale(0, 1), Rescale(1, 2), depth=2)


def test_inverse_closure_and_translation_exhaustive():
    _, assign = d4_assignment([["r"], ["r", "s"], ["r2"]])
    assert check_inverse_closure(assign, depth=3).status is Status.VERIFIED
    assert check_translation(assign, depth=3).status is Status.VERIFIED


# --- towers and the collapse certificate ---

def integer_interval_tower(top):
    sets = [FiniteSet.of(Z, range(-3 ** (top - i), 3 ** (top - i) + 1))
            for i in range(top + 1)]
    return TowerChain(tuple(sets))


def test_interval_tower_collapse_exact():
    for top in (1, 2, 3, 4):
        tower = integer_interval_tower(top)
        cert = s_in_u_reduce(tower, top + 1)
        assert [s.level for s in cert.stages] == list(range(top + 1, 1, -1))
        assert [len(s.merges) for s in cert.stages] == \
            [2 ** (lv - 2) for lv in range(top + 1, 1, -1)]
        assert all(s.inclusion_exact for s in cert.stages)
        assert cert.final_set == tower.sets[0]
        # oracle: the triple sums are exact interval identities
        from grouptop.setspec import sumset
        for i in range(1, top + 1):
            t = tower.sets[i]
            triple = sumset(sumset(t, t), t)
            assert triple == tower.sets[i - 1]


def test_d4_normal_subgroup_tower():
    d4 = dihedral8()
    tower = TowerChain((
        FiniteSet.of(d4, D4_NAMES),
        FiniteSet.of(d4, ["e", "r", "r2", "r3"]),
        FiniteSet.of(d4, ["e", "r2"]),
        FiniteSet.of(d4, ["e"]),
    ))
    cert = s_in_u_reduce(tower, 4)
    assert [s.level for s in cert.stages] == [4, 3, 2]


def test_reduce_j1_is_immediate():
    tower = integer_interval_tower(2)
    cert = s_in_u_reduce(tower, 1)
    assert cert.stages == () and cert.final_set == tower.sets[0]


def test_tower_invariant_failure_raises():
    with pytest.raises(ValueError):
        TowerChain((FiniteSet.of(Z, range(-2, 3)),
                    FiniteSet.of(Z, range(-2, 3))))  # triple escapes


def test_tower_assignment_levels():
    tower = integer_interval_tower(3)
    assign = tower.assignment()
    assert assign.max_level == 3
    assert assign.set_at(DyadicIndex(1, 2)) == tower.sets[2]


def test_assignment_json_round_trip():
    from grouptop.nonabelian import assignment_from_json
    d4, assign = d4_assignment([["r"], ["r", "s"], ["r2"]])
    back = assignment_from_json(assign.to_json(), group=d4)
    assert back == assign


# --- conjugation closure ---

def test_fg_closure_d4_rotation():
    d4 = dihedral8()
    fam = ExplicitFamily([FiniteSet.of(d4, ["r"])])
    closed = fg_closure(fam, d4.elements())
    vals = {str(el) for el in closed.members[0].elements()}
    assert vals == {"r", "r3"}
    # oracle: conjugate r by every element directly
    r = d4.element("r")
    brute = {str(op_add(op_add(g, r), op_neg(g))) for g in d4.elements()}
    assert brute == vals


def test_fg_closure_abelian_unchanged():
    fam = ExplicitFamily([FiniteSet.of(Z, [1, 2])])
    closed = fg_closure(fam, [Z.element(0)])
    assert closed.members == fam.members


def test_fg_closure_requires_identity():
    d4 = dihedral8()
    fam = ExplicitFamily([FiniteSet.of(d4, ["r"])])
    with pytest.raises(ValueError):
        fg_closure(fam, [])
    with pytest.raises(ValueError):
        fg_closure(fam, [d4.element("r")])


def test_fg_closure_preserves_directedness():
    d4 = dihedral8()
    fam = ExplicitFamily([
        FiniteSet.of(d4, ["e", "r", "r2", "r3"]),
        FiniteSet.of(d4, ["e", "r2"]),
    ])
    assert bool(check_directed(fam))
    closed = fg_closure(fam, d4.elements())
    assert bool(check_directed(closed))


def test_fg_closure_conjugation_invariant():
    d4 = dihedral8()
    fam = ExplicitFamily([FiniteSet.of(d4, ["r"]), FiniteSet.of(d4, ["s"])])
    closed = fg_closure(fam, d4.elements())
    for member in closed.members:
        vals = {el.value for el in member.elements()}
        for c in d4.elements():
            conj = {op_add(op_add(c, el), op_neg(c)).value
                    for el in member.elements()}
            assert conj == vals


# --- nonabelian exclusion ---

def test_cupcap_nonab_reflection_excluded():
    d4 = dihedral8()
    fam = ExplicitFamily([FiniteSet.of(d4, ["r"])])
    for n in (1, 2, 3, 4):
        res = cupcap_check_nonab(d4.element("s"), n, fam, depth=2)
        assert res.found  # powers of the rotation never reach a reflection


def test_cupcap_nonab_rotation_not_excluded():
    d4 = dihedral8()
    fam = ExplicitFamily([FiniteSet.of(d4, ["r"])])
    assert not cupcap_check_nonab(d4.element("r"), 1, fam, depth=2).found
    assert not cupcap_check_nonab(d4.element("r2"), 2, fam, depth=2).found


# --- Fibonacci endomorphism ---

def test_phi_on_generators():
    assert str(phi_apply(FREE_XY.element("x"))) == "y"
    assert str(phi_apply(FREE_XY.element("y"))) == "x y"


def test_fib_word_matches_iterated_substitution():
    x = FREE_XY.element("x")
    assert str(fib_word(3).word) == "y x y"
    assert str(phi_iterate(x, 3)) == "y x y"
    for n in range(21):
        assert fib_word(n).word.value == phi_iterate(x, n).value


def test_fib_word_lengths_follow_fibonacci():
    lengths = [fib_word(n).length() for n in range(6)]
    assert lengths == [1, 1, 2, 3, 5, 8]


def test_commutator_fixed_by_phi_squared():
    c = commutator(FREE_XY.element("x"), FREE_XY.element("y"))
    assert str(c) == "x y x^-1 y^-1"
    assert phi_iterate(c, 2).value == c.value
    assert phi_apply(c).value == op_neg(c).value


def test_phi_iterate_composes():
    rng = random.Random(5)
    for _ in range(20):
        letters = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 6))]
        w = FREE_XY.element(letters)
        m, n = rng.randint(0, 4), rng.randint(0, 4)
        assert phi_iterate(w, m + n).value == \
            phi_iterate(phi_iterate(w, m), n).value


def test_verify_fib_identity_small():
    for n in range(6):
        assert verify_fib_identity(n).status is Status.VERIFIED


def test_phi_rejects_foreign_generators():
    other = FREE_XY
    from grouptop import FreeGroup
    abc = FreeGroup(("a", "b"))
    with pytest.raises(ValueError):
        phi_apply(abc.element("a"))
