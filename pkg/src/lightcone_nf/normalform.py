"""The homological operator, the per-weight solver and the normalization loop."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from gmpy2 import mpq

from .errors import DecompositionFailure, DistinguishedPartError, NotNormalizable
from .hypersurface import Hypersurface
from .linalg import SparseSystem
from .maps import GraphPowers, MapJet, map_truncs, model_P, pushforward_phi
from .model import GroupElement, apply_group, group_map
from .scalar import GaussQ, I, ONE, ZERO
from .series import HolJet, Trunc, WSeries

__all__ = [
    "homological_L",
    "is_in_normal_form",
    "is_constrained_slot",
    "project_to_N",
    "solve_weight",
    "WeightSolution",
    "normalize",
    "NFReport",
    "extract_distinguished",
    "distinguished_chi",
    "chain_data",
    "distinguished_violations",
    "sphericity_invariants",
    "system_report",
    "kernel_dimension",
]

# (k, l, alpha, beta) slots that must vanish besides the (.., .., 0|1|2, 0) families
_EXCEPTIONAL = frozenset({(3, 0, 0, 1), (4, 0, 0, 1), (3, 0, 1, 1), (4, 0, 1, 1), (3, 0, 3, 0)})
_LOW = frozenset({(0, 0), (1, 0), (2, 0)})


def is_constrained_slot(k: int, l: int, a: int, b: int) -> bool:
    """True when the coefficient function Phi_{k l a b}(u) must vanish in normal form."""
    if (a, b) in _LOW or (k, l) in _LOW:
        return True
    return (k, l, a, b) in _EXCEPTIONAL or (a, b, k, l) in _EXCEPTIONAL


def is_in_normal_form(phi: WSeries) -> tuple:
    bad = [e for e, _ in phi.items() if is_constrained_slot(*e[:4])]
    return (not bad, bad)


def project_to_N(psi: WSeries) -> tuple:
    """(n, r) with n the unconstrained monomials of psi and r = psi - n."""
    n = psi.filter(lambda e: not is_constrained_slot(*e[:4]))
    return n, psi - n


# -- the homological operator ---------------------------------------------


class _LevelData:
    """P, its derivatives and the powers (u + i P)^p on one truncation."""

    def __init__(self, trunc: Trunc):
        self.trunc = trunc
        P = model_P(trunc.raise_by(1, 1))
        self.Pz = P.diff("z").truncate(trunc)
        self.Pzeta = P.diff("zeta").truncate(trunc)
        w = WSeries.var("u") + model_P(trunc).scale(I)
        self.wpow = [WSeries.constant(1, trunc)]
        self._w = w
        self._fz: dict = {}
        self._gz: dict = {}

    def w_power(self, p: int) -> WSeries:
        while len(self.wpow) <= p:
            self.wpow.append(self.wpow[-1].mul(self._w, self.trunc))
        return self.wpow[p]

    def times_Pz(self, p: int) -> WSeries:
        if p not in self._fz:
            self._fz[p] = self.w_power(p).mul(self.Pz, self.trunc)
        return self._fz[p]

    def times_Pzeta(self, p: int) -> WSeries:
        if p not in self._gz:
            self._gz[p] = self.w_power(p).mul(self.Pzeta, self.trunc)
        return self._gz[p]


_LEVELS: dict = {}
_LOCK = threading.Lock()


def _level(trunc: Trunc) -> _LevelData:
    with _LOCK:
        lv = _LEVELS.get(trunc)
        if lv is None:
            lv = _LEVELS[trunc] = _LevelData(trunc)
        return lv


def _column_image(lv: _LevelData, comp: int, mono: tuple, unit: GaussQ) -> WSeries:
    """L of a single monomial placed in component comp (0: f, 1: g, 2: h)."""
    k, l, p = mono
    if comp == 2:
        base = lv.w_power(p)
        c = I * unit
    elif comp == 0:
        base = lv.times_Pz(p)
        c = unit * 2
    else:
        base = lv.times_Pzeta(p)
        c = unit * 2
    s = base.shift((k, l, 0, 0, 0), c).truncate(lv.trunc)
    return s.real_part()


def homological_L(j: MapJet, trunc: Trunc) -> WSeries:
    """Re(i h + 2 f P_z + 2 g P_zeta) at w = u + i P.

    This is L itself; the homological equation reads 2 L(j) = Psi.
    """
    lv = _level(trunc)
    out = WSeries.zero(trunc)
    for comp, series in enumerate(j.components()):
        for e, c in series.items():
            out = out + _column_image(lv, comp, e, c)
    return out.truncate(trunc)


# -- the per-weight solve -------------------------------------------------


def _unknowns(m: int, trunc: Trunc, vspace: bool = True) -> list:
    """(component, monomial) pairs of weights m-1, m-2, m inside the map truncations.

    With vspace=False the shape constraints are dropped and only the
    constant terms are excluded (maps fixing the origin).
    """
    out = []
    for comp, (shift, t) in enumerate(zip((1, 2, 0), map_truncs(trunc))):
        wt = m - shift
        if wt < 0:
            continue
        for p in range(wt // 2 + 1):
            k = wt - 2 * p
            l = 0
            while wt + l <= t.degree_cap and wt <= t.weight_cap:
                mono = (k, l, p)
                # vspace shape: [z^2] f = 0 at weight 2, Re [w^2] h = 0 at weight 4
                units = (ONE, I)
                if not vspace:
                    if mono == (0, 0, 0):
                        units = ()
                elif comp == 0 and mono == (2, 0, 0):
                    units = ()
                elif comp == 2 and mono == (0, 0, 2):
                    units = (I,)
                for unit in units:
                    out.append((comp, mono, unit))
                l += 1
    return out


def _slot_conditions(m: int, trunc: Trunc) -> int:
    """Number of real conditions: constrained monomials of weight m, up to conjugation."""
    n = 0
    S = trunc.degree_cap
    for mu in range(m // 2 + 1):
        rest = m - 2 * mu
        for k in range(rest + 1):
            a = rest - k
            for l in range(S - m + 1):
                for b in range(S - m - l + 1):
                    if not is_constrained_slot(k, l, a, b):
                        continue
                    e, ce = (k, l, a, b), (a, b, k, l)
                    if e < ce:
                        n += 2
                    elif e == ce:
                        n += 1
    return n


class _WeightSystem:
    def __init__(self, m: int, trunc: Trunc):
        self.m = m
        self.trunc = trunc
        lv = _level(trunc)
        self.cols = _unknowns(m, trunc)
        self.row_index: dict = {}
        rows: list = []
        for ci, (comp, mono, unit) in enumerate(self.cols):
            img = _column_image(lv, comp, mono, unit).scale(2)
            for e, v in img.terms.items():
                if not is_constrained_slot(*e[:4]):
                    continue
                ce = (e[2], e[3], e[0], e[1], e[4])
                if ce < e:
                    continue
                for part, x in ((0, v.re), (1, v.im)):
                    if x:
                        key = (e, part)
                        if key not in self.row_index:
                            self.row_index[key] = len(rows)
                            rows.append({})
                        rows[self.row_index[key]][ci] = x
        self.system = SparseSystem(rows, len(self.cols))
        self.n_conditions = _slot_conditions(m, trunc)

    def check(self) -> None:
        s = self.system
        if s.kernel_dim:
            raise DecompositionFailure(f"weight {self.m}: the constrained operator has a {s.kernel_dim}-dimensional kernel")
        if s.rank != self.n_conditions:
            raise DecompositionFailure(
                f"weight {self.m}: image has rank {s.rank} but the constrained slots impose {self.n_conditions} conditions"
            )


def system_report(m: int, trunc: Trunc) -> dict:
    """Size, rank and kernel of the constrained weight-m system (for diagnostics)."""
    ws = _WeightSystem(m, trunc)
    return {
        "unknowns": len(ws.cols),
        "conditions": ws.n_conditions,
        "rank": ws.system.rank,
        "kernel_dim": ws.system.kernel_dim,
    }


def kernel_dimension(m: int, trunc: Trunc, vspace: bool = False) -> int:
    """Real dimension of the kernel of L on jets of weights (m-1, m-2, m)."""
    lv = _level(trunc)
    cols = _unknowns(m, trunc, vspace)
    keys: dict = {}
    rows: list = []
    for ci, (comp, mono, unit) in enumerate(cols):
        for e, v in _column_image(lv, comp, mono, unit).terms.items():
            for part, x in ((0, v.re), (1, v.im)):
                if x:
                    i = keys.setdefault((e, part), len(rows))
                    if i == len(rows):
                        rows.append({})
                    rows[i][ci] = x
    return SparseSystem(rows, len(cols)).kernel_dim


_SYSTEMS: dict = {}


def _weight_system(m: int, trunc: Trunc) -> _WeightSystem:
    key = (m, trunc)
    with _LOCK:
        s = _SYSTEMS.get(key)
    if s is None:
        s = _WeightSystem(m, trunc)
        s.check()
        with _LOCK:
            _SYSTEMS[key] = s
    return s


@dataclass(frozen=True)
class WeightSolution:
    j: MapJet
    n_remainder: WSeries


def solve_weight(m: int, rhs: WSeries, trunc: Trunc) -> WeightSolution:
    """The unique vspace-shaped j of weights (m-1, m-2, m) with 2 L(j) = rhs - n, n in N."""
    if m < 3:
        raise ValueError("weights start at 3")
    if not rhs.is_real():
        raise ValueError("rhs must be real")
    odd = [e for e, _ in rhs.items() if e[0] + e[2] + 2 * e[4] != m]
    if odd:
        raise ValueError(f"rhs is not homogeneous of weight {m}: {odd[:3]}")
    rhs = rhs.truncate(trunc)
    ws = _weight_system(m, trunc)
    b = [mpq(0)] * ws.system.nrows
    for e, v in rhs.terms.items():
        if not is_constrained_slot(*e[:4]):
            continue
        for part, x in ((0, v.re), (1, v.im)):
            if x:
                i = ws.row_index.get((e, part))
                if i is None:
                    ce = (e[2], e[3], e[0], e[1], e[4])
                    if ce < e:
                        continue
                    raise DecompositionFailure(f"weight {m}: slot {e} is outside the image")
                b[i] = x
    try:
        x = ws.system.solve(b)
    except ArithmeticError as exc:
        raise DecompositionFailure(f"weight {m}: {exc}") from None
    acc = ({}, {}, {})
    for (comp, mono, unit), v in zip(ws.cols, x):
        if v:
            d = acc[comp]
            d[mono] = d.get(mono, ZERO) + unit * v
    tf, tg, th = map_truncs(trunc)
    j = MapJet(HolJet(acc[0], tf), HolJet(acc[1], tg), HolJet(acc[2], th), "vspace")
    n = (rhs - homological_L(j, trunc).scale(2)).truncate(trunc)
    ok, bad = is_in_normal_form(n)
    if not ok:
        raise DecompositionFailure(f"weight {m}: remainder has constrained terms {bad[:5]}")
    return WeightSolution(j, n)


# -- the normalization loop -----------------------------------------------


def sphericity_invariants(phi: WSeries) -> tuple:
    """(Phi_3002(0), Phi_5001(0)); both vanish for spherical hypersurfaces."""
    return phi.coeff(3, 0, 0, 2, 0), phi.coeff(5, 0, 0, 1, 0)


@dataclass(frozen=True)
class NFReport:
    normal_phi: WSeries
    map: MapJet
    params_used: tuple
    sphericity: tuple
    distinguished: WSeries
    trunc: Trunc
    violations: tuple = field(default=())

    @property
    def spherical(self) -> bool:
        return not any(self.sphericity)

    def hypersurface(self) -> Hypersurface:
        return Hypersurface(self.normal_phi, self.trunc, "normal_form")


def normalize(M: Hypersurface, params: tuple = (0, 1, 0)) -> NFReport:
    """Bring v = P + Phi to normal form.

    params = (a, lam, s): the group element exp(s g2) exp(Re a g1_b) exp(Im a g1_a)
    after the scaling by lam is applied first; the remaining map is the
    unique vspace-shaped map of weights >= 2, 1, 3 solved weight by weight.
    """
    if M.form_tag not in ("perturbation_of_P", "normal_form"):
        raise NotNormalizable(f"normalize expects a perturbation of the model, got form {M.form_tag!r}")
    a, lam, s = params
    a, lam, s = GaussQ.coerce(a), GaussQ.coerce(lam), GaussQ.coerce(s)
    if s.im:
        raise ValueError("s must be real")
    trunc = M.trunc
    g = GroupElement.from_params(a, lam, s)
    psi = group_map(g, trunc)
    M1 = M if g.is_identity() else apply_group(M, g)
    H = MapJet.identity(trunc)
    normal = WSeries.zero(trunc)
    graph = GraphPowers((model_P(trunc) + M1.phi).truncate(trunc), trunc)
    for m in range(3, trunc.weight_cap + 1):
        if H.is_identity():
            R = M1.phi.weighted_component(m)
        else:
            R = pushforward_phi(M1.phi, H, trunc, known=normal, upto=m, graph=graph).weighted_component(m)
        sol = solve_weight(m, R, trunc)
        if not sol.j.is_identity():
            H = H + sol.j.scale(2)
        normal = normal + sol.n_remainder
    normal = normal.truncate(trunc)
    total = H.compose(psi) if not psi.is_identity() else H
    ok, bad = is_in_normal_form(normal)
    return NFReport(
        normal_phi=normal,
        map=total,
        params_used=(a, lam, s),
        sphericity=sphericity_invariants(normal),
        distinguished=extract_distinguished(normal),
        trunc=trunc,
        violations=tuple(bad),
    )


def chain_data(M: Hypersurface, a=0) -> tuple:
    """(f_ww(0), g_w(0)) of the normalizing map selected by the chain parameter a."""
    rep = normalize(M, (a, 1, 0))
    f, g, _ = rep.map.components()
    return f.coeff(0, 0, 2) * 2, g.coeff(0, 0, 1)


# -- the distinguished part ----------------------------------------------

_D_EXCEPTIONAL = ((0, 1, 3), (0, 1, 4), (1, 1, 3), (1, 1, 4), (3, 0, 3))


def distinguished_violations(chi: WSeries) -> list:
    """Reasons chi (monomials with zetabar-degree 0) fails to be a distinguished part."""
    out = []
    for e, c in chi.items():
        k, l, a, b, _ = e
        if b:
            out.append(f"{e}: zetabar-degree must be 0")
        elif a < 3:
            out.append(f"{e}: zbar-degree must be at least 3")
        elif (k, l, a) in _D_EXCEPTIONAL:
            out.append(f"{e}: coefficient must vanish")
    slice0 = chi.slice_zero("zeta")
    if not slice0.is_real():
        out.append("the zeta = 0 slice is not real")
    return out


def distinguished_chi(phi: WSeries) -> WSeries:
    """The zetabar-free part of phi: chi with D(phi) = chi + conj(chi) - chi|_{zeta=0}."""
    return phi.filter(lambda e: e[3] == 0)


def extract_distinguished(phi: WSeries) -> WSeries:
    """Monomials of phi not divisible by zeta*zetabar."""
    d = phi.filter(lambda e: e[1] == 0 or e[3] == 0)
    bad = distinguished_violations(distinguished_chi(d))
    if bad:
        raise DistinguishedPartError("; ".join(bad[:5]))
    return d
