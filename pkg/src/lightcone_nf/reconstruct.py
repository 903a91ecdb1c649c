"""Recover a 2-nondegenerate normal form from its distinguished part."""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .errors import DistinguishedPartError, TriangularityBreach
from .hypersurface import ComplexDefEq, Hypersurface, _theta_from_graph, levi_determinant, to_complex_defining
from .maps import model_P
from .normalform import distinguished_chi, distinguished_violations, extract_distinguished
from .scalar import I
from .series import Trunc, WSeries, ws_substitute

__all__ = ["DistinguishedPart", "reconstruct", "residual_check"]


@dataclass(frozen=True)
class DistinguishedPart:
    """chi(z, zeta, zbar, u): the zetabar-free half of the distinguished part."""

    chi: WSeries
    trunc: Trunc

    def __post_init__(self):
        chi = WSeries._raw(self.chi.truncate(self.trunc)._t, self.trunc)
        object.__setattr__(self, "chi", chi)
        bad = distinguished_violations(chi)
        if bad:
            raise DistinguishedPartError("; ".join(bad[:5]))

    @staticmethod
    def from_phi(phi: WSeries, trunc: Trunc | None = None) -> "DistinguishedPart":
        t = phi.trunc if trunc is None else trunc
        return DistinguishedPart(distinguished_chi(extract_distinguished(phi)), t)

    def symmetric(self) -> WSeries:
        """chi + conj(chi) - chi|_{zeta=0}: every monomial of Phi not divisible by zeta*zetabar."""
        c = self.chi
        return (c + c.conj() - c.slice_zero("zeta")).truncate(self.trunc)


def _levi_shift(trunc: Trunc, sign: int) -> list:
    u = WSeries({(0, 0, 0, 0, 1): 1, (1, 0, 1, 0, 0): I * sign})
    return [WSeries.var("z"), WSeries.var("zeta"), WSeries.var("zbar"), WSeries.var("zetabar"), u]


def _integrate_zz(R: WSeries, trunc: Trunc) -> WSeries:
    """The zeta*zetabar-divisible y with y_{zeta zetabar} = R."""
    d = {}
    for (k, l, a, b, m), c in R.terms.items():
        d[(k, l + 1, a, b + 1, m)] = c * mpq(1, (l + 1) * (b + 1))
    return WSeries(d, trunc)


def reconstruct(chi: DistinguishedPart) -> Hypersurface:
    """The normal form with distinguished part chi and vanishing Levi determinant.

    At standard degree d the determinant changes, to first order, by
    -4 d^2/dzeta dzetabar of the new degree-d terms taken at u + i z zbar; so
    the zeta*zetabar-divisible part of degree d is read off from the
    degree d - 2 part of the determinant computed with everything below d.
    """
    T = chi.trunc
    P = model_P(T)
    base = chi.symmetric()
    div = WSeries.zero(T)
    back = _levi_shift(T, -1)
    for d in range(5, T.degree_cap + 1):
        Td = T.meet(Trunc.from_caps(T.weight_cap, d))
        phi = (P + base + div).truncate(Td)
        det = levi_determinant(ComplexDefEq(_theta_from_graph(phi, Td), Td))
        R = det.std_component(d - 2)
        if not R:
            continue
        y = _integrate_zz(R.scale(mpq(1, 4)), T)
        x = ws_substitute(y, back, T).std_component(d)
        div = div + x
        phi = (P + base + div).truncate(Td)
        left = levi_determinant(ComplexDefEq(_theta_from_graph(phi, Td), Td)).std_component(d - 2)
        if left:
            raise TriangularityBreach(f"degree {d}: determinant not cancelled by the zeta*zetabar-divisible terms")
    Phi = (base + div).truncate(T)
    if not Phi.is_real():
        raise TriangularityBreach("reconstructed defining function is not real")
    return Hypersurface(Phi, T, "normal_form")


def residual_check(M: Hypersurface) -> WSeries:
    """The Levi determinant of M (zero exactly when M is Levi-degenerate to truncation)."""
    return levi_determinant(to_complex_defining(M))
