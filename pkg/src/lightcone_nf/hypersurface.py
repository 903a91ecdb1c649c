"""Real and complex defining equations, the Levi determinant, prenormalization."""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .errors import NotNormalizable, PerturbationViolation
from .linalg import SparseSystem
from .maps import MapJet, model_P, pushforward_phi
from .scalar import GaussQ, I
from .series import EXACT, HolJet, Trunc, WSeries, hol_substitute

__all__ = [
    "Hypersurface",
    "ComplexDefEq",
    "FORM_TAGS",
    "is_killed_shape",
    "killed_monomials",
    "model_P",
    "to_complex_defining",
    "levi_determinant",
    "validate_2nondegenerate",
    "NondegReport",
    "prenormalize",
    "as_perturbation",
    "scale_phi",
]

FORM_TAGS = ("raw_germ", "prenormalized", "perturbation_of_P", "normal_form")
_GRAPH_TAGS = ("raw_germ", "prenormalized")


def is_killed_shape(k: int, l: int, a: int, b: int) -> bool:
    """Shapes absent from a prenormalized graph (and their conjugates)."""

    def one_side(k, l, a, b):
        if (a, b) == (0, 0):
            return True
        if (a, b) == (1, 0):
            return (k, l) != (1, 0)
        if (a, b) == (2, 0):
            return (k, l) != (0, 1)
        return False

    return one_side(k, l, a, b) or one_side(a, b, k, l)


def killed_monomials(phi: WSeries) -> list:
    return [e for e, _ in phi.items() if is_killed_shape(*e[:4])]


@dataclass(frozen=True)
class Hypersurface:
    """A real hypersurface v = phi_total.

    For the graph tags ("raw_germ", "prenormalized") ``phi`` is the full graph
    function.  For "perturbation_of_P" and "normal_form" it is the
    perturbation Phi in v = P + Phi.
    """

    phi: WSeries
    trunc: Trunc
    form_tag: str = "perturbation_of_P"

    def __post_init__(self):
        if self.form_tag not in FORM_TAGS:
            raise ValueError(f"unknown form tag {self.form_tag!r}")
        t = self.phi.trunc
        if t.weight_cap < self.trunc.weight_cap or t.degree_cap < self.trunc.degree_cap:
            raise ValueError(f"phi is only known on {t}, less than {self.trunc}")
        phi = self.phi.truncate(self.trunc)
        phi = WSeries._raw(phi._t, self.trunc)
        object.__setattr__(self, "phi", phi)
        if not phi.is_real():
            raise ValueError("defining function must be real")
        if self.form_tag in ("perturbation_of_P", "normal_form"):
            low = [e for e, _ in phi.items() if e[0] + e[2] + 2 * e[4] < 3]
            if low:
                raise PerturbationViolation(low)

    @staticmethod
    def model(trunc: Trunc) -> "Hypersurface":
        return Hypersurface(WSeries.zero(trunc), trunc, "perturbation_of_P")

    def graph(self) -> WSeries:
        if self.form_tag in _GRAPH_TAGS:
            return self.phi
        return (model_P(self.trunc) + self.phi).truncate(self.trunc)

    def perturbation(self) -> WSeries:
        if self.form_tag in _GRAPH_TAGS:
            return (self.phi - model_P(self.trunc)).truncate(self.trunc)
        return self.phi

    def truncate(self, trunc: Trunc) -> "Hypersurface":
        t = self.trunc.meet(trunc)
        return Hypersurface(self.phi.truncate(t), t, self.form_tag)

    def with_tag(self, tag: str) -> "Hypersurface":
        return Hypersurface(self.phi, self.trunc, tag)


@dataclass(frozen=True)
class ComplexDefEq:
    """w = theta(z, zeta, zbar, zetabar, wbar); the slot u stands for wbar."""

    theta: WSeries
    trunc: Trunc


def _u_shift(parts: dict, arg: WSeries, trunc: Trunc) -> WSeries:
    """sum_m parts[m] * arg^m."""
    out = WSeries.zero(trunc)
    pw = None
    for m in range(max(parts) + 1 if parts else 0):
        pw = WSeries.constant(1) if m == 0 else (arg.truncate(trunc) if m == 1 else pw.mul(arg, trunc))
        if m in parts:
            out = out + parts[m].mul(pw, trunc)
    return out.truncate(trunc)


def to_complex_defining(M: Hypersurface) -> ComplexDefEq:
    """Solve w = wbar + 2i phi(z, zeta, zbar, zetabar, (w + wbar)/2) for w.

    With theta = wbar + 2i psi the fixed point is psi = phi(..., wbar + i psi);
    every pass fixes at least one more grade, so it stops within the caps.
    """
    phi = M.graph()
    trunc = M.trunc
    return ComplexDefEq(_theta_from_graph(phi, trunc), trunc)


def _theta_from_graph(phi: WSeries, trunc: Trunc) -> WSeries:
    u = WSeries.var("u")
    parts = phi.u_degree_split()
    psi = phi
    if any(m > 0 for m in parts):
        for _ in range(trunc.degree_cap + 3):
            new = _u_shift(parts, u + psi.scale(I), trunc)
            if new.same_terms(psi):
                break
            psi = new
        else:
            raise ArithmeticError("complex defining equation did not stabilize")
    return (u + psi.scale(GaussQ(0, 2))).truncate(trunc)


def levi_determinant(E: ComplexDefEq, trunc: Trunc | None = None) -> WSeries:
    """det of rows (t_zb, t_eb, t_u), (t_z zb, t_z eb, t_z u), (t_e zb, t_e eb, t_e u)."""
    th = E.theta
    t = E.trunc if trunc is None else trunc
    a1, a2, a3 = th.diff("zbar"), th.diff("zetabar"), th.diff("u")
    tz, te = th.diff("z"), th.diff("zeta")
    b1, b2, b3 = tz.diff("zbar"), tz.diff("zetabar"), tz.diff("u")
    c1, c2, c3 = te.diff("zbar"), te.diff("zetabar"), te.diff("u")

    def m(x, y):
        return x.mul(y, t)

    m1 = m(b2, c3) - m(b3, c2)
    m2 = m(b1, c3) - m(b3, c1)
    m3 = m(b1, c2) - m(b2, c1)
    det = m(a1, m1) - m(a2, m2) + m(a3, m3)
    return det


@dataclass(frozen=True)
class NondegReport:
    degenerate_to_order: bool
    kernel_rank_ok: bool
    two_nondeg_witness: bool

    def as_dict(self) -> dict:
        return {
            "degenerate_to_order": self.degenerate_to_order,
            "kernel_rank_ok": self.kernel_rank_ok,
            "two_nondeg_witness": self.two_nondeg_witness,
        }


def validate_2nondegenerate(M: Hypersurface) -> NondegReport:
    phi = M.graph()
    det = levi_determinant(to_complex_defining(M))
    return NondegReport(
        degenerate_to_order=det.is_zero(),
        kernel_rank_ok=phi.coeff(1, 0, 1, 0, 0) == 1 and not phi.coeff(0, 1, 0, 1, 0),
        two_nondeg_witness=bool(phi.coeff(2, 0, 0, 1, 0)),
    )


def scale_phi(phi: WSeries, lam, nu=None, mu=None) -> WSeries:
    """Coefficients of the image under z -> lam z, zeta -> mu zeta, w -> nu w.

    v* = nu * phi(z / lam, zeta / mu, ...): the monomial (k, l, a, b, m) picks
    up nu * lam^-k mu^-l conj(lam)^-a conj(mu)^-b nu^-m.  Defaults are the
    model scalings mu = lam / conj(lam), nu = lam conj(lam).
    """
    lam = GaussQ.coerce(lam)
    if mu is None:
        mu = lam / lam.conjugate()
    if nu is None:
        nu = lam * lam.conjugate()
    mu = GaussQ.coerce(mu)
    nu = GaussQ.coerce(nu)
    if nu.im:
        raise ValueError("w-scaling must be real")
    il, im_, inu = ONE_ / lam, ONE_ / mu, ONE_ / nu
    ilb, imb = il.conjugate(), im_.conjugate()
    cache: dict = {}

    def pw(x, n, key):
        k = (key, n)
        if k not in cache:
            cache[k] = x ** n
        return cache[k]

    d = {}
    for e, c in phi.terms.items():
        k, l, a, b, m = e
        f = nu * pw(il, k, 0) * pw(im_, l, 1) * pw(ilb, a, 2) * pw(imb, b, 3) * pw(inu, m, 4)
        d[e] = c * f
    return WSeries(d, phi.trunc)


ONE_ = GaussQ(1)


_W_LEVI = None


def _on_levi_graph(j: HolJet) -> WSeries:
    """j(z, zeta, u + i z zbar): the standard-degree-preserving part of j on the graph."""
    global _W_LEVI
    if _W_LEVI is None:
        _W_LEVI = (
            WSeries.var("z"),
            WSeries.var("zeta"),
            WSeries({(0, 0, 0, 0, 1): 1, (1, 0, 1, 0, 0): I}),
        )
    return hol_substitute(j, *_W_LEVI)


def _prenorm_delta(H: HolJet, chi: HolJet, rho: HolJet, phi3_zeta: WSeries) -> WSeries:
    """Standard-degree-d effect of w -> w + H, z -> z + chi, zeta -> zeta + rho.

    H, chi, rho have standard degrees d, d-1, d-2.  On the graph w = u + i z zbar
    to this order, so the effect is Im H - 2 Re(zbar chi) - 2 Re(phi3_zeta rho),
    everything evaluated at w = u + i z zbar.  phi3_zeta is the zeta-derivative
    of the current degree-3 part of the graph (1/2 zbar^2 for the model).
    """
    zb = WSeries({(0, 0, 1, 0, 0): 1})
    out = WSeries.zero()
    if H:
        out = out + _on_levi_graph(H).imag_part()
    if chi:
        out = out - zb.mul(_on_levi_graph(chi)).real_part().scale(2)
    if rho:
        out = out - phi3_zeta.mul(_on_levi_graph(rho)).real_part().scale(2)
    return out


def _hol_monomials(std: int) -> list:
    out = []
    for p in range(std // 2 + 1):
        for k in range(std - 2 * p + 1):
            out.append((k, std - 2 * p - k, p))
    return out


def prenormalize(M: Hypersurface) -> tuple:
    """Remove harmonic and killed-shape terms degree by degree in standard degree.

    Returns (prenormalized hypersurface, composite MapJet).  Work happens on
    the standard-degree truncation Trunc(S, 0) with S = M.trunc.weight_cap,
    because the removal maps may lower the weight (e.g. zeta -> zeta + zeta^2).
    """
    S = M.trunc.weight_cap
    trunc = Trunc(S, 0)
    phi = M.graph().truncate(trunc)
    std2 = phi.std_component(2)
    r = phi.coeff(1, 0, 1, 0, 0)
    if not r or r.im:
        raise NotNormalizable("the z zbar coefficient must be a nonzero real number")
    rest2 = std2 - WSeries({(1, 0, 1, 0, 0): r})
    if rest2:
        raise NotNormalizable(f"degree-2 part must be r|z|^2, found extra terms {[e for e, _ in rest2.items()]}")
    phi = scale_phi(phi, 1, nu=ONE_ / r, mu=1)
    c = phi.coeff(2, 0, 0, 1, 0)
    if not c:
        raise NotNormalizable("no z^2 zetabar term: the 2-nondegeneracy witness is absent")
    kappa = (c * 2).conjugate()
    phi = scale_phi(phi, 1, nu=1, mu=kappa)
    total = MapJet(
        HolJet.zero(Trunc(S - 1, 0)),
        HolJet({(0, 1, 0): kappa - 1}, Trunc(S - 2, 0)),
        HolJet({(0, 0, 1): ONE_ / r - 1}, trunc),
    )
    P = model_P(trunc)
    for d in range(3, S + 1):
        cur = phi.std_component(d)
        bad = [e for e, _ in cur.items() if is_killed_shape(*e[:4])]
        if not bad:
            continue
        phi3_zeta = WSeries._raw(phi.std_component(3)._t, EXACT).diff("zeta")
        cols = []
        for part, std in (("H", d), ("chi", d - 1), ("rho", d - 2)):
            if part == "rho" and d < 4:
                continue
            for mono in _hol_monomials(std):
                for unit in (ONE_, I):
                    cols.append((part, mono, unit))
        rows_index: dict = {}
        row_list: list = []

        def row_of(key):
            if key not in rows_index:
                rows_index[key] = len(row_list)
                row_list.append({})
            return rows_index[key]

        for ci, (part, mono, unit) in enumerate(cols):
            j = HolJet({mono: unit})
            z = HolJet.zero()
            eff = _prenorm_delta(
                j if part == "H" else z, j if part == "chi" else z, j if part == "rho" else z, phi3_zeta
            )
            for e, v in eff.terms.items():
                if not is_killed_shape(*e[:4]):
                    continue
                if v.re:
                    row_list[row_of((e, 0))][ci] = v.re
                if v.im:
                    row_list[row_of((e, 1))][ci] = v.im
        for e, v in cur.terms.items():
            if is_killed_shape(*e[:4]):
                row_of((e, 0))
                row_of((e, 1))
        rhs = [mpq(0)] * len(row_list)
        for (e, part), i in rows_index.items():
            v = cur.coeff(e)
            rhs[i] = -(v.re if part == 0 else v.im)
        system = SparseSystem(row_list, len(cols))
        x = system.solve(rhs)
        acc = {"H": {}, "chi": {}, "rho": {}}
        for ci, (part, mono, unit) in enumerate(cols):
            if x[ci]:
                acc[part][mono] = acc[part].get(mono, GaussQ(0)) + unit * x[ci]
        step = MapJet(
            HolJet(acc["chi"], Trunc(S - 1, 0)),
            HolJet(acc["rho"], Trunc(S - 2, 0)),
            HolJet(acc["H"], trunc),
        )
        pert = pushforward_phi((phi - P).truncate(trunc), step, trunc, grading="std")
        phi = (P + pert).truncate(trunc)
        left = [e for e, _ in phi.std_component(d).items() if is_killed_shape(*e[:4])]
        if left:
            raise ArithmeticError(f"prenormalization left killed terms at degree {d}: {left}")
        total = step.compose(total)
    out = Hypersurface(phi, trunc, "prenormalized")
    return out, total


def as_perturbation(M: Hypersurface, trunc: Trunc | None = None) -> Hypersurface:
    """Rewrite v = phi as v = P + Phi and check that Phi has weight >= 3 throughout."""
    t = M.trunc if trunc is None else trunc
    if t.weight_cap > M.trunc.weight_cap or t.degree_cap > M.trunc.degree_cap:
        raise ValueError(f"requested truncation {t} exceeds the known region {M.trunc}")
    Phi = M.perturbation().truncate(t)
    low = [e for e, _ in Phi.items() if e[0] + e[2] + 2 * e[4] < 3]
    if low:
        raise PerturbationViolation(low)
    return Hypersurface(Phi, t, "perturbation_of_P")
