"""Infinitesimal automorphisms of the light-cone model and the action of its stability group."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from gmpy2 import mpq

from .hypersurface import Hypersurface, scale_phi
from .linalg import SparseSystem
from .maps import MapJet, map_truncs, model_P, pushforward_phi
from .scalar import GaussQ, I, ONE
from .series import EXACT, HolJet, Trunc, WSeries, hol_substitute

__all__ = [
    "VectorField",
    "GroupElement",
    "algebra_basis",
    "BASIS_NAMES",
    "bracket",
    "linearized_defect",
    "tangency_defect",
    "flow_map",
    "group_map",
    "apply_group",
    "canonical_cone_check",
    "span_coordinates",
    "isotropy_dimension",
    "algebra_dimension",
    "check_algebra",
]


@dataclass(frozen=True)
class VectorField:
    """fz d/dz + fzeta d/dzeta + fw d/dw with holomorphic coefficients."""

    fz: HolJet
    fzeta: HolJet
    fw: HolJet
    grade: int | None = None

    def __post_init__(self):
        if self.grade is not None:
            for comp, shift in ((self.fz, 1), (self.fzeta, 0), (self.fw, 2)):
                for e, _ in comp.items():
                    if e[0] + 2 * e[2] != self.grade + shift:
                        raise ValueError(f"component term {e} does not have grade {self.grade}")

    def components(self) -> tuple:
        return self.fz, self.fzeta, self.fw

    def is_zero(self) -> bool:
        return not (self.fz or self.fzeta or self.fw)

    def apply(self, phi: HolJet, trunc: Trunc | None = None) -> HolJet:
        """The derivation X(phi) = fz phi_z + fzeta phi_zeta + fw phi_w."""
        out = None
        for comp, name in ((self.fz, "z"), (self.fzeta, "zeta"), (self.fw, "w")):
            if comp:
                d = phi.diff(name)
                if d:
                    t = comp.mul(d, trunc)
                    out = t if out is None else out + t
        return out if out is not None else HolJet.zero(phi.trunc if trunc is None else trunc)

    def scale(self, c) -> "VectorField":
        return VectorField(self.fz.scale(c), self.fzeta.scale(c), self.fw.scale(c), self.grade)

    def __add__(self, other: "VectorField") -> "VectorField":
        g = self.grade if self.grade == other.grade else None
        return VectorField(self.fz + other.fz, self.fzeta + other.fzeta, self.fw + other.fw, g)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)


def _hj(d: dict) -> HolJet:
    return HolJet(d, EXACT)


_i = I
_2i = GaussQ(0, 2)

# generators: (coefficient of d/dz, of d/dzeta, of d/dw).  The d/dz part of
# g1_b is i z^2 + w - zeta w; with + zeta w the field is not tangent to v = P
# (the grade-1 kernel of the linearized defect is spanned by g1_a and this field).
_BASIS_DATA = [
    ("g-2", -2, {}, {}, {(0, 0, 0): 1}),
    ("g-1_a", -1, {(0, 0, 0): 1, (0, 1, 0): -1}, {}, {(1, 0, 0): _2i}),
    ("g-1_b", -1, {(0, 0, 0): _i, (0, 1, 0): _i}, {}, {(1, 0, 0): 2}),
    ("g0c_a", 0, {(1, 0, 0): 1}, {}, {(0, 0, 1): 2}),
    ("g0c_b", 0, {(1, 0, 0): _i}, {(0, 1, 0): _2i}, {}),
    ("g0s_a", 0, {(1, 1, 0): -1}, {(0, 0, 0): 1, (0, 2, 0): -1}, {(2, 0, 0): _i}),
    ("g0s_b", 0, {(1, 1, 0): _i}, {(0, 0, 0): _i, (0, 2, 0): _i}, {(2, 0, 0): 1}),
    (
        "g1_a",
        1,
        {(2, 0, 0): 1, (0, 0, 1): _i, (0, 1, 1): _i},
        {(1, 0, 0): 2, (1, 1, 0): 2},
        {(1, 0, 1): 2},
    ),
    (
        "g1_b",
        1,
        {(2, 0, 0): _i, (0, 0, 1): 1, (0, 1, 1): -1},
        {(1, 1, 0): _2i, (1, 0, 0): -_2i},
        {(1, 0, 1): _2i},
    ),
    ("g2", 2, {(1, 0, 1): 1}, {(2, 0, 0): -_i}, {(0, 0, 2): 1}),
]

BASIS_NAMES = tuple(d[0] for d in _BASIS_DATA)
ISOTROPY_NAMES = ("g0c_a", "g0c_b", "g1_a", "g1_b", "g2")


def algebra_basis(trunc: Trunc = EXACT) -> list:
    """The ten generators, ordered by grade -2, -1, -1, 0 (c, c, s, s), 1, 1, 2."""
    out = []
    for _, grade, a, b, c in _BASIS_DATA:
        out.append(VectorField(_hj(a).truncate(trunc), _hj(b).truncate(trunc), _hj(c).truncate(trunc), grade))
    return out


def basis_field(name: str, trunc: Trunc = EXACT) -> VectorField:
    return algebra_basis(trunc)[BASIS_NAMES.index(name)]


def bracket(X: VectorField, Y: VectorField, trunc: Trunc | None = None) -> VectorField:
    """[X, Y]^j = X(Y^j) - Y(X^j)."""
    comps = []
    for xj, yj in zip(X.components(), Y.components()):
        comps.append(X.apply(yj, trunc) - Y.apply(xj, trunc))
    grade = None
    if X.grade is not None and Y.grade is not None:
        grade = X.grade + Y.grade
    out = VectorField(*comps, grade=None)
    if grade is not None and not out.is_zero():
        out = VectorField(*comps, grade=grade)
    return out


def span_coordinates(X: VectorField, basis: list) -> list | None:
    """Real coordinates of X in the real span of `basis`, or None if X is not in it."""
    keys: dict = {}
    rows: list = []

    def row(key):
        if key not in keys:
            keys[key] = len(rows)
            rows.append({})
        return keys[key]

    for ci, B in enumerate(basis):
        for comp_i, comp in enumerate(B.components()):
            for e, c in comp.terms.items():
                if c.re:
                    rows[row((comp_i, e, 0))][ci] = c.re
                if c.im:
                    rows[row((comp_i, e, 1))][ci] = c.im
    for comp_i, comp in enumerate(X.components()):
        for e, c in comp.terms.items():
            row((comp_i, e, 0))
            row((comp_i, e, 1))
    rhs = [mpq(0)] * len(rows)
    for comp_i, comp in enumerate(X.components()):
        for e, c in comp.terms.items():
            rhs[keys[(comp_i, e, 0)]] = c.re
            rhs[keys[(comp_i, e, 1)]] = c.im
    system = SparseSystem(rows, len(basis))
    try:
        return system.solve(rhs)
    except ArithmeticError:
        return None


def _real_rank(fields: list) -> int:
    keys: dict = {}
    cols = []
    for X in fields:
        col = {}
        for comp_i, comp in enumerate(X.components()):
            for e, c in comp.terms.items():
                for part, v in ((0, c.re), (1, c.im)):
                    if v:
                        col[keys.setdefault((comp_i, e, part), len(keys))] = v
        cols.append(col)
    # rank of the matrix whose columns are the fields = rank of its transpose
    return SparseSystem(cols, len(keys)).rank


def algebra_dimension(basis: list | None = None) -> int:
    return _real_rank(algebra_basis() if basis is None else basis)


def isotropy_dimension(basis: list | None = None) -> int:
    """Dimension of the fields in the real span vanishing at the origin."""
    basis = algebra_basis() if basis is None else basis
    keys: dict = {}
    rows: list = []
    for ci, X in enumerate(basis):
        for comp_i, comp in enumerate(X.components()):
            c = comp.coeff(0, 0, 0)
            for part, v in ((0, c.re), (1, c.im)):
                key = (comp_i, part)
                if key not in keys:
                    keys[key] = len(rows)
                    rows.append({})
                if v:
                    rows[keys[key]][ci] = v
    return SparseSystem(rows, len(basis)).kernel_dim


def linearized_defect(f: HolJet, g: HolJet, h: HolJet, trunc: Trunc) -> WSeries:
    """Re(i h + 2 f P_z + 2 g P_zeta) evaluated at w = u + i P.

    With this sign the defect of every infinitesimal automorphism of v = P is 0.
    """
    # P one step finer, so that P_z and P_zeta are exact on trunc
    P = model_P(trunc.raise_by(1, 1))
    z = WSeries.var("z")
    ze = WSeries.var("zeta")
    w = WSeries.var("u") + P.scale(I)
    out = WSeries.zero(trunc)
    if h:
        out = out + hol_substitute(h, z, ze, w, trunc).scale(I)
    if f:
        out = out + hol_substitute(f, z, ze, w, trunc).mul(P.diff("z"), trunc).scale(2)
    if g:
        out = out + hol_substitute(g, z, ze, w, trunc).mul(P.diff("zeta"), trunc).scale(2)
    return out.real_part().truncate(trunc)


def tangency_defect(X: VectorField, trunc: Trunc) -> WSeries:
    return linearized_defect(X.fz, X.fzeta, X.fw, trunc)


def flow_map(X: VectorField, t, trunc: Trunc) -> MapJet:
    """exp(tX) as a map, by the Lie series sum_n t^n/n! X^n(coordinate).

    X must raise weight (grade >= 1), so the series stops at the weight cap.
    """
    if X.grade is None or X.grade < 1:
        raise ValueError("flows are only defined here for fields of grade 1 and 2")
    t = GaussQ.coerce(t)
    if t.im:
        raise ValueError("flow parameters are real")
    comps = []
    for name, tt in zip(("z", "zeta", "w"), map_truncs(trunc)):
        cur = HolJet.var(name).truncate(tt)
        acc = HolJet.zero(tt)
        n = 0
        coef = ONE
        while True:
            n += 1
            cur = X.apply(cur, tt).truncate(tt)
            if not cur:
                break
            coef = coef * t / n
            acc = acc + cur.scale(coef)
        comps.append(acc)
    return MapJet(*comps, shape_tag="general")


@dataclass(frozen=True)
class GroupElement:
    """Scaling by lam followed by the listed flows exp(t X_gen), applied in order."""

    lam: GaussQ = field(default_factory=lambda: GaussQ(1))
    flows: tuple = ()

    def __post_init__(self):
        lam = GaussQ.coerce(self.lam)
        if not lam:
            raise ValueError("lambda must be nonzero")
        object.__setattr__(self, "lam", lam)
        flows = []
        for gen, t in self.flows:
            if gen not in ("g1_a", "g1_b", "g2"):
                raise ValueError(f"unknown flow generator {gen!r}")
            t = GaussQ.coerce(t)
            if t.im:
                raise ValueError("flow parameters must be real")
            flows.append((gen, t))
        object.__setattr__(self, "flows", tuple(flows))

    @staticmethod
    def from_params(a=0, lam=1, s=0) -> "GroupElement":
        """a = f_w(0) of the grade-1 generator; s is the grade-2 parameter."""
        a = GaussQ.coerce(a)
        flows = []
        if a.im:
            flows.append(("g1_a", GaussQ(a.im)))
        if a.re:
            flows.append(("g1_b", GaussQ(a.re)))
        s = GaussQ.coerce(s)
        if s:
            flows.append(("g2", s))
        return GroupElement(lam, tuple(flows))

    def is_identity(self) -> bool:
        return self.lam == 1 and not any(t for _, t in self.flows)


def group_map(g: GroupElement, trunc: Trunc) -> MapJet:
    H = MapJet.scaling(g.lam, trunc)
    for gen, t in g.flows:
        if t:
            H = flow_map(basis_field(gen), t, trunc).compose(H)
    return H


def apply_group(M: Hypersurface, g: GroupElement) -> Hypersurface:
    """Push M forward by the scaling, then by the composite of the flows (in order)."""
    if M.form_tag not in ("perturbation_of_P", "normal_form"):
        raise ValueError("apply_group expects a perturbation of the model")
    trunc = M.trunc
    phi = M.phi
    if g.lam != 1:
        phi = scale_phi(phi, g.lam)
    F = None
    for gen, t in g.flows:
        if t:
            X = flow_map(basis_field(gen), t, trunc)
            F = X if F is None else X.compose(F)
    if F is not None:
        phi = pushforward_phi(phi, F, trunc)
    low = [e for e, _ in phi.items() if e[0] + e[2] + 2 * e[4] < 3]
    if low:
        raise ArithmeticError(f"group action left the perturbation form: {low}")
    return Hypersurface(phi, trunc, "perturbation_of_P")


def canonical_cone_check(z, zeta, u) -> bool:
    """True iff zeta*u + i z^2 = 0 and u != 0."""
    z, zeta, u = GaussQ.coerce(z), GaussQ.coerce(zeta), GaussQ.coerce(u)
    if u.im:
        raise ValueError("u must be real")
    return bool(u) and not (zeta * u + I * z * z)


def _grade_pieces(grade: int) -> list:
    return [X for X in algebra_basis() if X.grade == grade]


def check_algebra(trunc: Trunc = Trunc(10, 8)) -> dict:
    """Tangency of every generator, [g_i, g_j] in g_(i+j) for all pairs, Jacobi on all triples."""
    basis = algebra_basis()
    tangency = {name: tangency_defect(X, trunc).is_zero() for name, X in zip(BASIS_NAMES, basis)}
    closure_fail = []
    for (i, X), (j, Y) in combinations(enumerate(basis), 2):
        B = bracket(X, Y)
        if B.is_zero():
            continue
        target = _grade_pieces(X.grade + Y.grade)
        if not target or span_coordinates(B, target) is None:
            closure_fail.append((BASIS_NAMES[i], BASIS_NAMES[j]))
    jacobi_fail = []
    for X, Y, Z in combinations(range(len(basis)), 3):
        a, b, c = basis[X], basis[Y], basis[Z]
        s = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        if not s.is_zero():
            jacobi_fail.append((BASIS_NAMES[X], BASIS_NAMES[Y], BASIS_NAMES[Z]))
    return {
        "tangency": tangency,
        "closure_failures": closure_fail,
        "jacobi_failures": jacobi_fail,
        "dim_g": algebra_dimension(basis),
        "dim_h": isotropy_dimension(basis),
    }
