"""Formal holomorphic maps (z, zeta, w) -> (z + f, zeta + g, w + h) and pushforwards."""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .scalar import GaussQ, I
from .series import HolJet, Trunc, WSeries, hol_substitute, taylor_delta

__all__ = ["MapJet", "GraphPowers", "map_truncs", "pushforward_phi", "model_P", "compose_P"]


def map_truncs(trunc: Trunc) -> tuple:
    """Truncations of (f, g, h) needed to push a graph known on `trunc`."""
    return trunc.lower(1, 1), trunc.lower(2, 2), trunc


@dataclass(frozen=True)
class MapJet:
    """The map z -> z + f, zeta -> zeta + g, w -> w + h.

    shape_tag is "vspace" when f, g, h start at weights 2, 1, 3 and satisfy
    [z^2] f = 0 and Re [w^2] h = 0; otherwise "general".
    """

    f: HolJet
    g: HolJet
    h: HolJet
    shape_tag: str = "general"

    @staticmethod
    def identity(trunc: Trunc, shape_tag: str = "vspace") -> "MapJet":
        tf, tg, th = map_truncs(trunc)
        return MapJet(HolJet.zero(tf), HolJet.zero(tg), HolJet.zero(th), shape_tag)

    @staticmethod
    def scaling(lam: GaussQ, trunc: Trunc) -> "MapJet":
        """z -> lam z, zeta -> (lam / conj lam) zeta, w -> lam conj(lam) w."""
        lam = GaussQ.coerce(lam)
        if not lam:
            raise ZeroDivisionError("scaling parameter must be nonzero")
        mu = lam / lam.conjugate()
        nu = lam * lam.conjugate()
        tf, tg, th = map_truncs(trunc)
        return MapJet(
            HolJet({(1, 0, 0): lam - 1}, tf),
            HolJet({(0, 1, 0): mu - 1}, tg),
            HolJet({(0, 0, 1): nu - 1}, th),
        )

    @property
    def trunc(self) -> Trunc:
        return self.h.trunc

    def is_identity(self) -> bool:
        return not (self.f or self.g or self.h)

    def truncate(self, trunc: Trunc) -> "MapJet":
        tf, tg, th = map_truncs(trunc)
        return MapJet(self.f.truncate(tf), self.g.truncate(tg), self.h.truncate(th), self.shape_tag)

    def __add__(self, other: "MapJet") -> "MapJet":
        return MapJet(self.f + other.f, self.g + other.g, self.h + other.h, self.shape_tag)

    def scale(self, c) -> "MapJet":
        return MapJet(self.f.scale(c), self.g.scale(c), self.h.scale(c), self.shape_tag)

    def components(self) -> tuple:
        return self.f, self.g, self.h

    def full_components(self) -> tuple:
        """(Z, ZETA, W) = (z + f, zeta + g, w + h) as HolJets."""
        return (
            HolJet.var("z") + self.f,
            HolJet.var("zeta") + self.g,
            HolJet.var("w") + self.h,
        )

    def compose(self, inner: "MapJet") -> "MapJet":
        """self o inner."""
        Z, ZE, W = inner.full_components()
        tf, tg, th = self.f.trunc, self.g.trunc, self.h.trunc
        f = inner.f + hol_substitute(self.f, Z, ZE, W, tf) if self.f else inner.f
        g = inner.g + hol_substitute(self.g, Z, ZE, W, tg) if self.g else inner.g
        h = inner.h + hol_substitute(self.h, Z, ZE, W, th) if self.h else inner.h
        tag = "general"
        return MapJet(f.truncate(tf), g.truncate(tg), h.truncate(th), tag)

    def on_graph(self, phi: WSeries, trunc: Trunc, graph: "GraphPowers | None" = None) -> tuple:
        """(f, g, h) restricted to w = u + i phi, as WSeries."""
        if graph is None:
            graph = GraphPowers(phi, trunc)
        tf, tg, th = map_truncs(trunc)
        return tuple(graph.evaluate(comp, t) for comp, t in ((self.f, tf), (self.g, tg), (self.h, th)))


class GraphPowers:
    """Powers of w = u + i phi on a fixed graph, shared by repeated evaluations."""

    def __init__(self, phi: WSeries, trunc: Trunc):
        self.trunc = trunc
        self._w = (WSeries.var("u") + phi.scale(I)).truncate(trunc)
        self._pow = [WSeries.constant(1, trunc)]

    def power(self, p: int) -> WSeries:
        while len(self._pow) <= p:
            self._pow.append(self._pow[-1].mul(self._w, self.trunc))
        return self._pow[p]

    def evaluate(self, j: HolJet, trunc: Trunc) -> WSeries:
        """j(z, zeta, u + i phi) as a WSeries on trunc."""
        by_p: dict = {}
        for (k, l, p), c in j.terms.items():
            by_p.setdefault(p, {})[(k, l, 0, 0, 0)] = c
        out = WSeries.zero(trunc)
        for p, d in sorted(by_p.items()):
            a = WSeries(d, trunc)
            out = out + (a if p == 0 else a.mul(self.power(p), trunc))
        return out.truncate(trunc)


_P_CACHE: dict = {}


def model_P(trunc: Trunc) -> WSeries:
    """(z zbar + 1/2 z^2 zetabar + 1/2 zbar^2 zeta) / (1 - zeta zetabar) expanded to trunc."""
    p = _P_CACHE.get(trunc)
    if p is None:
        half = mpq(1, 2)
        num = WSeries(
            {(1, 0, 1, 0, 0): 1, (2, 0, 0, 1, 0): half, (0, 1, 2, 0, 0): half}, trunc
        )
        p = num.div_one_minus_zz()
        _P_CACHE[trunc] = p
    return p


def compose_P(F: WSeries, G: WSeries, trunc: Trunc, grading: str = "weight") -> WSeries:
    """P(F, G, conj F, conj G) for F = z + ..., G = zeta + ... (both grade-raising perturbations)."""
    Fb, Gb = F.conj(), G.conj()
    half = mpq(1, 2)
    num = F.mul(Fb, trunc) + (F.mul(F, trunc).mul(Gb, trunc) + Fb.mul(Fb, trunc).mul(G, trunc)).scale(half)
    num = num.truncate(trunc)
    zz = WSeries({(0, 1, 0, 1, 0): 1})
    E = (G.mul(Gb, trunc) - zz).truncate(trunc)
    q = num.div_one_minus_zz()
    if not E:
        return q
    eps = E.div_one_minus_zz()
    if grading == "weight":
        if eps.min_weight() < 1:
            raise ValueError("zeta substitution does not raise weight")
    elif eps.min_std() < 3:
        raise ValueError("zeta substitution does not raise standard degree")
    acc = q
    x = q
    while True:
        x = x.mul(eps, trunc)
        if not x:
            break
        acc = acc + x
    return acc.truncate(trunc)


def pushforward_phi(phi: WSeries, H: MapJet, trunc: Trunc, grading: str = "weight",
                    known: WSeries | None = None, upto: int | None = None,
                    graph: GraphPowers | None = None) -> WSeries:
    """Perturbation Phi* of H(M) for M: v = P + phi.

    Solves Phi* = Phi + Im h|_M + P - P(F, G) - [Phi*(Z) - Phi*] grade by
    grade, where Z = (F, G, conj F, conj G, u + Re h|_M).  The map must
    raise the chosen grading ("weight" or "std") relative to the identity.
    If `known` is given it is taken as the already-determined part of Phi*
    below grade `upto`, and only grade `upto` is computed.  `graph` caches
    the powers of w on v = P + phi across calls with the same phi.
    """
    P = model_P(trunc)
    full = (P + phi).truncate(trunc)
    f, g, h = H.on_graph(full, trunc, graph)
    z = WSeries.var("z")
    ze = WSeries.var("zeta")
    F = z + f
    G = ze + g
    im_h = h.imag_part()
    re_h = h.real_part()
    gi = 0 if grading == "weight" else 1
    t0 = phi + im_h + P - compose_P(F, G, trunc, grading)
    t0 = t0.truncate(trunc)
    deltas = [f, g, f.conj(), g.conj(), re_h]
    if not any(d for d in deltas):
        return t0
    grade = (lambda s: s.by_weight()) if gi == 0 else (lambda s: s.by_std())
    if known is not None:
        if upto is None:
            raise ValueError("upto is required with known")
        sz = taylor_delta(known, deltas, trunc, grading)
        comp = t0 - sz
        sel = comp.weighted_component(upto) if gi == 0 else comp.std_component(upto)
        return sel
    result = WSeries.zero(trunc)
    s_acc = WSeries.zero(trunc)
    cap = trunc.weight_cap if gi == 0 else trunc.degree_cap
    t0_parts = grade(t0)
    start = min(t0_parts) if t0_parts else cap + 1
    for t in range(start, cap + 1):
        piece = t0_parts.get(t, WSeries.zero(trunc))
        if s_acc:
            piece = piece - (s_acc.weighted_component(t) if gi == 0 else s_acc.std_component(t))
        if not piece:
            continue
        result = result + piece
        s_acc = s_acc + taylor_delta(piece, deltas, trunc, grading)
    return result.truncate(trunc)
