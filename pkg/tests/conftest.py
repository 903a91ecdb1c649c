import random

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lightcone_nf.scalar import GaussQ
from lightcone_nf.series import HolJet, Trunc, WSeries

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_q = st.builds(lambda p, q: mpq(p, q), st.integers(-5, 5), st.integers(1, 4))
gauss = st.builds(GaussQ, small_q, small_q)


@st.composite
def wseries(draw, trunc=Trunc(6, 3), max_terms=5, real=False):
    d = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = (
            draw(st.integers(0, 3)),
            draw(st.integers(0, 2)),
            draw(st.integers(0, 3)),
            draw(st.integers(0, 2)),
            draw(st.integers(0, 2)),
        )
        d[e] = draw(gauss)
    s = WSeries(d, trunc)
    if real:
        s = (s + s.conj()).truncate(trunc)
    return s


def rand_gauss(rng: random.Random, span: int = 3) -> GaussQ:
    return GaussQ(mpq(rng.randint(-span, span), rng.randint(1, span)), mpq(rng.randint(-span, span), rng.randint(1, span)))


def rand_real_psi(m: int, trunc: Trunc, rng: random.Random, n: int = 6) -> WSeries:
    """A random real weight-m series with small rational coefficients."""
    d = {}
    for _ in range(n):
        mu = rng.randint(0, m // 2)
        rest = m - 2 * mu
        k = rng.randint(0, rest)
        d[(k, rng.randint(0, 2), rest - k, rng.randint(0, 2), mu)] = rand_gauss(rng)
    s = WSeries(d, trunc)
    return (s + s.conj()).truncate(trunc)


def rand_vspace_map(trunc: Trunc, rng: random.Random, n: int = 4):
    """A random vspace-shaped map jet: weights >= 2, 1, 3, [z^2] f = 0, Re [w^2] h = 0."""
    from lightcone_nf.maps import MapJet, map_truncs

    tf, tg, th = map_truncs(trunc)

    def jet(wmin, t):
        d = {}
        for _ in range(n):
            wt = rng.randint(wmin, wmin + 2)
            p = rng.randint(0, wt // 2)
            d[(wt - 2 * p, rng.randint(0, 2), p)] = rand_gauss(rng, 2)
        return d

    f = {e: c for e, c in jet(2, tf).items() if e != (2, 0, 0)}
    g = jet(1, tg)
    h = {e: (GaussQ(0, c.im) if e == (0, 0, 2) else c) for e, c in jet(3, th).items()}
    return MapJet(HolJet(f, tf), HolJet(g, tg), HolJet(h, th), "vspace")


_D_EXCEPTIONAL = {(0, 1, 3), (0, 1, 4), (1, 1, 3), (1, 1, 4), (3, 0, 3)}


def random_chi(rng: random.Random, trunc: Trunc, n: int = 3):
    """A seeded distinguished part with n support monomials (conjugate pairs on the zeta = 0 slice)."""
    from lightcone_nf.reconstruct import DistinguishedPart

    d = {}
    while len(d) < n:
        a = rng.randint(3, 5)
        k = rng.randint(0, 2)
        m = rng.randint(0, 1)
        l = rng.randint(0, 3)
        if k + a + 2 * m > trunc.weight_cap or (k, l, a) in _D_EXCEPTIONAL or not trunc.admits(k + a + 2 * m, k + a + 2 * m + l):
            continue
        if l == 0:
            if k < 3:
                continue
            c = GaussQ(rand_gauss(rng).re)
            d[(a, 0, k, 0, m)] = c
        else:
            c = rand_gauss(rng)
        d[(k, l, a, 0, m)] = c
    return DistinguishedPart(WSeries(d, trunc), trunc)


@pytest.fixture
def rng():
    return random.Random(20261017)
