import random

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from conftest import gauss, wseries
from lightcone_nf.maps import model_P
from lightcone_nf.scalar import GaussQ, I
from lightcone_nf.series import EXACT, HolJet, Trunc, WSeries, hol_substitute, taylor_delta, ws_substitute

half = mpq(1, 2)


def mono(e, c=1, trunc=EXACT):
    return WSeries({e: c}, trunc)


def test_trunc_region_and_caps():
    t = Trunc(4, 2)
    assert t.degree_cap == 6
    assert t.admits(4, 6) and not t.admits(5, 5) and not t.admits(4, 7)
    # lower weights keep more zeta-degree
    assert t.admits(1, 6)
    assert Trunc.from_caps(5, 3) == Trunc(3, 0)
    assert Trunc(4, 2).meet(Trunc(6, 0)) == Trunc(4, 2)
    assert Trunc(4, 2).lower(1, 1) == Trunc(3, 2)
    with pytest.raises(ValueError):
        Trunc(4, -1)


def test_arith_examples():
    assert mono((1, 0, 1, 0, 0)) * mono((0, 1, 0, 1, 0)) == mono((1, 1, 1, 1, 0))
    assert (mono((2, 0, 0, 1, 0)) + mono((2, 0, 0, 1, 0), -1)).is_zero()


def test_square_of_model_numerator_against_oracle():
    T = Trunc(4, 2)
    num = WSeries({(1, 0, 1, 0, 0): 1, (2, 0, 0, 1, 0): half, (0, 1, 2, 0, 0): half}, T)
    sq = num.mul(num, T)
    expr = O.to_sympy(num)
    assert sq.same_terms(O.from_sympy(expr * expr, T))
    assert sq.coeff(2, 0, 2, 0, 0) == 1
    assert sq.coeff(4, 0, 0, 2, 0) == mpq(1, 4)
    assert sq.coeff(2, 1, 2, 1, 0) == half
    # 2 * (z zbar) * (z^2 zetabar / 2): the coefficient is 1
    assert sq.coeff(3, 0, 1, 1, 0) == 1 and sq.coeff(1, 1, 3, 0, 0) == 1


def test_conj_examples():
    assert mono((2, 0, 0, 1, 0)).conj() == mono((0, 1, 2, 0, 0))
    assert mono((1, 0, 0, 1, 1), GaussQ(1, 1)).conj() == mono((0, 1, 1, 0, 1), GaussQ(1, -1))
    assert mono((1, 0, 1, 0, 0)).conj() == mono((1, 0, 1, 0, 0))


def test_is_real_examples():
    assert (mono((1, 0, 1, 0, 0)) + mono((0, 1, 0, 1, 0))).is_real()
    assert not mono((2, 0, 0, 1, 0), I).is_real()
    assert (mono((3, 0, 0, 2, 1), half) + mono((0, 2, 3, 0, 1), half)).is_real()


def test_coeff_fn_examples():
    T = Trunc(6, 2)
    assert WSeries({(1, 0, 1, 0, 2): 1}, T).coeff_fn(1, 0, 1, 0) == [0, 0, 1]
    assert WSeries({(2, 0, 0, 1, 0): half}, T).coeff_fn(2, 0, 0, 1)[0] == half
    assert not any(WSeries({(1, 0, 1, 0, 0): 1}, T).coeff_fn(0, 0, 0, 1))


def test_weighted_component_examples():
    a = mono((2, 0, 0, 1, 0)) + mono((1, 1, 0, 0, 1))
    assert a.weighted_component(2) == mono((2, 0, 0, 1, 0))
    P = model_P(Trunc(6, 4))
    assert P.weighted_component(2).same_terms(P)
    assert mono((0, 0, 0, 0, 2)).weighted_component(4) == mono((0, 0, 0, 0, 2))


def test_model_P_against_sympy_series():
    for T in (Trunc(4, 2), Trunc(6, 4), Trunc(3, 0)):
        assert model_P(T).same_terms(O.from_sympy(O.model_P(T), T))


def test_diff_examples():
    assert mono((2, 0, 0, 1, 0)).diff("zetabar").same_terms(mono((2, 0, 0, 0, 0)))
    assert mono((0, 0, 0, 0, 2)).diff("u").same_terms(mono((0, 0, 0, 0, 1), 2))
    T = Trunc(4, 2)
    Pz = model_P(T).diff("z")
    assert Pz.trunc == Trunc(3, 2)
    for e in ((0, 0, 1, 0, 0), (1, 0, 0, 1, 0), (0, 1, 1, 1, 0), (1, 1, 0, 2, 0)):
        assert Pz.coeff(e) == 1
    assert Pz.same_terms(O.from_sympy(sp.diff(O.model_P(T), O.z), Pz.trunc))


def test_hol_substitute_examples():
    z, ze = WSeries.var("z"), WSeries.var("zeta")
    w = WSeries({(0, 0, 0, 0, 1): 1, (1, 0, 1, 0, 0): I})
    got = hol_substitute(HolJet({(0, 0, 2): 1}), z, ze, w)
    want = WSeries({(0, 0, 0, 0, 2): 1, (1, 0, 1, 0, 1): GaussQ(0, 2), (2, 0, 2, 0, 0): -1})
    assert got.same_terms(want)
    assert hol_substitute(HolJet.var("z"), z, ze, w).same_terms(z)
    T = Trunc(6, 3)
    P = model_P(T)
    wP = WSeries.var("u") + P.scale(I)
    assert hol_substitute(HolJet.var("w"), z, ze, wP, T).same_terms(wP)


def test_hol_substitute_against_oracle():
    rng = random.Random(3)
    T = Trunc(6, 3)
    P = model_P(T)
    for _ in range(4):
        d = {(rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2)): GaussQ(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(4)}
        j = HolJet(d, T)
        got = hol_substitute(j, WSeries.var("z"), WSeries.var("zeta"), WSeries.var("u") + P.scale(I), T)
        want = O.from_sympy(O.hol_on_graph(j, O.to_sympy(P), T), T)
        assert got.same_terms(want)


def test_substitution_must_not_lower_grade():
    with pytest.raises(ValueError):
        hol_substitute(HolJet.var("z", Trunc(4, 2)), WSeries.var("zeta"), WSeries.var("zeta"), WSeries.var("u"))


def test_taylor_delta_against_direct_substitution():
    T = Trunc(6, 3)
    a = WSeries({(1, 1, 1, 0, 1): GaussQ(1, 2), (2, 0, 0, 1, 0): half, (0, 0, 1, 2, 1): 3}, T)
    a = (a + a.conj()).truncate(T)
    dz = WSeries({(2, 1, 0, 0, 0): GaussQ(0, 1)}, T)
    du = WSeries({(2, 0, 1, 0, 0): 1}, T)
    zero = WSeries.zero(T)
    deltas = [dz, zero, dz.conj(), zero, du]
    subs = [WSeries.var(n) + d for n, d in zip(("z", "zeta", "zbar", "zetabar", "u"), deltas)]
    direct = ws_substitute(a, subs, T) - a
    assert taylor_delta(a, deltas, T).same_terms(direct.truncate(T))


@given(wseries(), wseries(), wseries())
def test_ring_laws(a, b, c):
    T = a.trunc
    assert (a + b).mul(c, T).same_terms((a.mul(c, T) + b.mul(c, T)).truncate(T))
    assert a.mul(b, T).same_terms(b.mul(a, T))
    assert a.mul(b, T).mul(c, T).truncate(T).same_terms(a.mul(b.mul(c, T), T).truncate(T))


@given(wseries(), wseries())
def test_conj_multiplicative(a, b):
    T = a.trunc
    assert a.mul(b, T).conj().same_terms(a.conj().mul(b.conj(), T))
    assert a.conj().conj() == a


@given(wseries())
def test_weighted_components_partition(a):
    total = WSeries.zero(a.trunc)
    for m in range(0, a.trunc.weight_cap + 1):
        total = total + a.weighted_component(m)
    assert total.same_terms(a)
    assert sum(len(p) for p in a.by_weight().values()) == len(a)


@given(wseries())
def test_derivatives_commute(a):
    assert a.diff("z").diff("zetabar").same_terms(a.diff("zetabar").diff("z"))
    assert a.diff("u").diff("zeta").same_terms(a.diff("zeta").diff("u"))


@given(wseries(), gauss, gauss)
def test_substitution_associativity(a, c1, c2):
    T = a.trunc
    names = ("z", "zeta", "zbar", "zetabar", "u")
    v = {n: WSeries.var(n, T) for n in names}
    s = [v["z"] + WSeries({(1, 1, 0, 0, 0): c1}, T), v["zeta"] + WSeries({(0, 2, 0, 0, 0): c2}, T)]
    s += [s[0].conj(), s[1].conj(), v["u"] + WSeries({(1, 0, 1, 0, 0): c1 * c1.conjugate()}, T)]
    t = [v["z"] + WSeries({(0, 0, 0, 0, 1): c2}, T).shift((1, 0, 0, 0, 0)), v["zeta"]]
    t += [t[0].conj(), v["zetabar"], v["u"]]
    left = ws_substitute(ws_substitute(a, s, T), t, T)
    right = ws_substitute(a, [ws_substitute(x, t, T) for x in s], T)
    assert left.truncate(T).same_terms(right.truncate(T))


@given(wseries(), wseries())
def test_product_matches_sympy(a, b):
    T = a.trunc
    assert a.mul(b, T).same_terms(O.from_sympy(O.to_sympy(a) * O.to_sympy(b), T))


@given(st.integers(0, 4), st.integers(0, 3))
def test_canonical_order_is_deterministic(k, l):
    a = WSeries({(k, l, 1, 0, 0): 1, (0, 0, 1, 0, 1): 2, (1, 0, 0, 0, 0): 3})
    b = WSeries({(1, 0, 0, 0, 0): 3, (0, 0, 1, 0, 1): 2, (k, l, 1, 0, 0): 1})
    assert a.items() == b.items()
    weights = [e[0] + e[2] + 2 * e[4] for e, _ in a.items()]
    assert weights == sorted(weights)
