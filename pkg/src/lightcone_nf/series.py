"""Truncated weighted power series with exact Gaussian-rational coefficients.

Two series types share one sparse kernel:

* ``WSeries`` in the real-form variables z, zeta, zbar, zetabar, u;
* ``HolJet`` in the holomorphic variables z, zeta, w.

Weights are [z] = [zbar] = 1, [zeta] = [zetabar] = 0, [u] = [w] = 2.  The
standard degree counts every variable once except u and w, which count 2, so
``std = weight + zeta_degree``.

A ``Trunc(W, D)`` retains a monomial iff ``weight <= W`` and
``std <= W + D``.  At the top weight this is exactly "zeta-degree <= D"; at
lower weights more zeta-degree is retained.  The sloped region is what makes
substitutions such as ``zeta -> zeta + c z`` exact: that substitution lowers
zeta-degree by one per unit of weight gained but never lowers the standard
degree.

Exponents are packed into one int, 10 bits per variable, so that monomial
multiplication is integer addition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from gmpy2 import mpq, mpz

from .scalar import GaussQ, ONE, ZERO

__all__ = [
    "Trunc",
    "WSeries",
    "HolJet",
    "EXACT",
    "hol_substitute",
    "ws_substitute",
    "taylor_delta",
]

_B = 10
_M = (1 << _B) - 1
_BIG = 1 << 20


@dataclass(frozen=True, order=True)
class Trunc:
    """Truncation caps: weight <= weight_cap and weight + zeta-degree <= weight_cap + zeta_cap."""

    weight_cap: int
    zeta_cap: int

    def __post_init__(self):
        if self.zeta_cap < 0:
            raise ValueError("zeta_cap must be >= 0")
        if self.weight_cap < -1:
            raise ValueError("weight_cap must be >= -1")

    @property
    def degree_cap(self) -> int:
        return self.weight_cap + self.zeta_cap

    @staticmethod
    def from_caps(weight_cap: int, degree_cap: int) -> "Trunc":
        w = min(weight_cap, degree_cap)
        w = max(w, -1)
        return Trunc(w, max(degree_cap - w, 0))

    def meet(self, other: "Trunc") -> "Trunc":
        return Trunc.from_caps(
            min(self.weight_cap, other.weight_cap), min(self.degree_cap, other.degree_cap)
        )

    def admits(self, weight: int, std: int) -> bool:
        return weight <= self.weight_cap and std <= self.degree_cap

    def lower(self, weight: int = 0, degree: int = 0) -> "Trunc":
        """Caps reduced by the given amounts (used for derivatives)."""
        return Trunc.from_caps(self.weight_cap - weight, self.degree_cap - degree)

    def raise_by(self, weight: int = 0, degree: int = 0) -> "Trunc":
        return Trunc.from_caps(self.weight_cap + weight, self.degree_cap + degree)

    def is_exact(self) -> bool:
        return self.weight_cap >= _BIG // 2


EXACT = Trunc(_BIG, 0)


def _lcm_den(values) -> int:
    den = mpz(1)
    for c in values:
        d = c.re.denominator
        if d != 1 and den % d:
            den = den * d // math.gcd(int(den), int(d))
        d = c.im.denominator
        if d != 1 and den % d:
            den = den * d // math.gcd(int(den), int(d))
    return int(den)


class _Series:
    """Sparse map packed-exponent -> GaussQ with a Trunc; immutable by convention."""

    __slots__ = ("_t", "trunc")
    _NVARS = 0
    _NAMES: tuple = ()
    _WEIGHTS: tuple = ()
    _ZETA: tuple = ()

    # -- construction -------------------------------------------------
    def __init__(self, terms: Mapping | None = None, trunc: Trunc = EXACT):
        if not isinstance(trunc, Trunc):
            raise TypeError("trunc must be a Trunc")
        d = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != self._NVARS or any((not isinstance(x, int)) or x < 0 or x > _M for x in exps):
                    raise ValueError(f"bad exponent {exps!r}")
                c = GaussQ.coerce(c)
                if not c:
                    continue
                e = self._pack(exps)
                if not self._admit(e, trunc):
                    continue
                if e in d:
                    c = d[e] + c
                    if not c:
                        del d[e]
                        continue
                d[e] = c
        self._t = d
        self.trunc = trunc

    @classmethod
    def _raw(cls, d: dict, trunc: Trunc):
        obj = cls.__new__(cls)
        obj._t = d
        obj.trunc = trunc
        return obj

    @classmethod
    def _pack(cls, exps) -> int:
        e = 0
        for i, x in enumerate(exps):
            e |= x << (_B * i)
        return e

    @classmethod
    def _unpack(cls, e: int) -> tuple:
        return tuple((e >> (_B * i)) & _M for i in range(cls._NVARS))

    @classmethod
    def _grades(cls, e: int):
        raise NotImplementedError

    @classmethod
    def _admit(cls, e: int, trunc: Trunc) -> bool:
        w, s = cls._grades(e)
        return w <= trunc.weight_cap and s <= trunc.degree_cap

    @classmethod
    def zero(cls, trunc: Trunc = EXACT):
        return cls._raw({}, trunc)

    @classmethod
    def constant(cls, c, trunc: Trunc = EXACT):
        c = GaussQ.coerce(c)
        return cls._raw({0: c} if c else {}, trunc)

    @classmethod
    def monomial(cls, exps, c=1, trunc: Trunc = EXACT):
        return cls({tuple(exps): c}, trunc)

    @classmethod
    def var(cls, name: str, trunc: Trunc = EXACT):
        exps = [0] * cls._NVARS
        exps[cls._NAMES.index(name)] = 1
        return cls.monomial(exps, 1, trunc)

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict:
        return {self._unpack(e): c for e, c in self._t.items()}

    def items(self) -> list:
        """(exponents, coefficient) pairs in canonical order."""
        out = [(self._unpack(e), c) for e, c in self._t.items()]
        out.sort(key=lambda ec: (self._grades(self._pack(ec[0]))[0],) + ec[0])
        return out

    def coeff(self, *exps) -> GaussQ:
        if len(exps) == 1 and isinstance(exps[0], tuple):
            exps = exps[0]
        return self._t.get(self._pack(exps), ZERO)

    def __len__(self):
        return len(self._t)

    def __bool__(self):
        return bool(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._t == other._t and self.trunc == other.trunc

    def same_terms(self, other) -> bool:
        return self._t == other._t

    def __hash__(self):
        return hash((frozenset(self._t.items()), self.trunc))

    def __repr__(self):
        if not self._t:
            return f"{type(self).__name__}(0, {self.trunc})"
        parts = []
        for exps, c in self.items()[:12]:
            mono = "*".join(
                n if x == 1 else f"{n}^{x}" for n, x in zip(self._NAMES, exps) if x
            )
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        more = " + ..." if len(self._t) > 12 else ""
        return f"{type(self).__name__}({' + '.join(parts)}{more}, {self.trunc})"

    def min_weight(self) -> int:
        """Smallest weight that may be nonzero (cap + 1 for the zero series)."""
        if not self._t:
            return self.trunc.weight_cap + 1
        return min(self._grades(e)[0] for e in self._t)

    def min_std(self) -> int:
        if not self._t:
            return self.trunc.degree_cap + 1
        return min(self._grades(e)[1] for e in self._t)

    def max_weight(self) -> int:
        return max((self._grades(e)[0] for e in self._t), default=-1)

    # -- linear structure ---------------------------------------------
    def truncate(self, trunc: Trunc):
        t = self.trunc.meet(trunc)
        if t == self.trunc:
            return self
        W, S = t.weight_cap, t.degree_cap
        g = self._grades
        d = {}
        for e, c in self._t.items():
            w, s = g(e)
            if w <= W and s <= S:
                d[e] = c
        return self._raw(d, t)

    def filter(self, pred: Callable[[tuple], bool]):
        u = self._unpack
        return self._raw({e: c for e, c in self._t.items() if pred(u(e))}, self.trunc)

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, _Series):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        return type(self).constant(other, EXACT)

    def __add__(self, other):
        other = self._coerce(other)
        t = self.trunc.meet(other.trunc)
        a, b = (self, other) if len(self._t) >= len(other._t) else (other, self)
        d = dict(a._t)
        for e, c in b._t.items():
            if e in d:
                s = d[e] + c
                if s:
                    d[e] = s
                else:
                    del d[e]
            else:
                d[e] = c
        out = self._raw(d, t)
        if t != a.trunc or t != b.trunc:
            out = out._restrict()
        return out

    __radd__ = __add__

    def _restrict(self):
        W, S = self.trunc.weight_cap, self.trunc.degree_cap
        g = self._grades
        bad = [e for e in self._t if not (lambda ws: ws[0] <= W and ws[1] <= S)(g(e))]
        if bad:
            d = dict(self._t)
            for e in bad:
                del d[e]
            return self._raw(d, self.trunc)
        return self

    def __neg__(self):
        return self._raw({e: -c for e, c in self._t.items()}, self.trunc)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = GaussQ.coerce(c)
        if not c:
            return self._raw({}, self.trunc)
        if c == ONE:
            return self
        if not c.im:
            r = c.re
            return self._raw({e: GaussQ(v.re * r, v.im * r) for e, v in self._t.items()}, self.trunc)
        return self._raw({e: v * c for e, v in self._t.items()}, self.trunc)

    def __mul__(self, other):
        if isinstance(other, _Series):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, _Series):
            return NotImplemented
        return self.scale(ONE / GaussQ.coerce(other))

    def __pow__(self, n: int):
        return self.power(n)

    # -- products -----------------------------------------------------
    def valid_product_trunc(self, other) -> Trunc:
        """Region in which self*other is exactly known, given both truncations."""
        ta, tb = self.trunc, other.trunc
        # on Trunc(W, 0) the weight cap is implied by the degree cap (weight <= std)
        wa = _BIG if ta.zeta_cap == 0 else ta.weight_cap + other.min_weight()
        wb = _BIG if tb.zeta_cap == 0 else tb.weight_cap + self.min_weight()
        W = min(wa, wb)
        S = min(ta.degree_cap + other.min_std(), tb.degree_cap + self.min_std())
        return Trunc.from_caps(min(W, _BIG), min(S, _BIG))

    def mul(self, other, trunc: Trunc | None = None):
        other = self._coerce(other)
        t = self.valid_product_trunc(other)
        if trunc is not None:
            t = t.meet(trunc)
        return self._raw(_mul_kernel(self._t, other._t, self._grades, t), t)

    def power(self, n: int, trunc: Trunc | None = None):
        if n < 0:
            raise ValueError("negative power")
        out = type(self).constant(1, EXACT)
        if trunc is not None:
            out = out.truncate(trunc)
        base = self
        first = True
        while n:
            if n & 1:
                out = base if first else out.mul(base, trunc)
                first = False
            n >>= 1
            if n:
                base = base.mul(base, trunc)
        return out if trunc is None else out.truncate(trunc)

    def powers(self, n: int, trunc: Trunc | None = None) -> list:
        """[self^0, ..., self^n]."""
        out = [type(self).constant(1, EXACT) if trunc is None else type(self).constant(1, trunc)]
        for _ in range(n):
            out.append(out[-1].mul(self, trunc) if len(out) > 1 else (self if trunc is None else self.truncate(trunc)))
        return out

    # -- calculus -----------------------------------------------------
    def diff(self, name: str):
        i = self._NAMES.index(name)
        sh = _B * i
        unit = 1 << sh
        d = {}
        for e, c in self._t.items():
            x = (e >> sh) & _M
            if x:
                d[e - unit] = c if x == 1 else GaussQ(c.re * x, c.im * x)
        w = self._WEIGHTS[i]
        z = self._ZETA[i]
        return self._raw(d, self.trunc.lower(w, w + z))

    def shift(self, exps, c=ONE):
        """Multiply by the monomial c * x^exps (exact, no pruning needed beyond trunc)."""
        e0 = self._pack(exps)
        w0, s0 = self._grades(e0)
        t = self.trunc.raise_by(w0, s0)
        c = GaussQ.coerce(c)
        if not c:
            return self._raw({}, t)
        if c == ONE:
            d = {e + e0: v for e, v in self._t.items()}
        else:
            d = {e + e0: v * c for e, v in self._t.items()}
        return self._raw(d, t)

    # -- grading ------------------------------------------------------
    def weighted_component(self, m: int):
        g = self._grades
        return self._raw({e: c for e, c in self._t.items() if g(e)[0] == m}, self.trunc)

    def std_component(self, d: int):
        g = self._grades
        return self._raw({e: c for e, c in self._t.items() if g(e)[1] == d}, self.trunc)

    def by_weight(self) -> dict:
        out: dict = {}
        g = self._grades
        for e, c in self._t.items():
            out.setdefault(g(e)[0], {})[e] = c
        return {w: self._raw(d, self.trunc) for w, d in sorted(out.items())}

    def by_std(self) -> dict:
        out: dict = {}
        g = self._grades
        for e, c in self._t.items():
            out.setdefault(g(e)[1], {})[e] = c
        return {s: self._raw(d, self.trunc) for s, d in sorted(out.items())}


def _mul_kernel(A: dict, B: dict, grades, t: Trunc) -> dict:
    """Sparse product of two packed-exponent dicts, pruned to t."""
    if not A or not B:
        return {}
    W, S = t.weight_cap, t.degree_cap
    if len(A) < len(B):
        A, B = B, A
    # single-monomial fast path
    if len(B) == 1:
        (eb, cb), = B.items()
        wb, sb = grades(eb)
        d = {}
        for ea, ca in A.items():
            wa, sa = grades(ea)
            if wa + wb <= W and sa + sb <= S:
                d[ea + eb] = ca * cb
        return d
    la = _lcm_den(A.values())
    lb = _lcm_den(B.values())
    buckets: dict = {}
    for e, c in B.items():
        w, s = grades(e)
        if w <= W and s <= S:
            buckets.setdefault(w, []).append((s, e, int(c.re * lb), int(c.im * lb)))
    bws = sorted(buckets)
    for w in bws:
        buckets[w].sort(key=lambda x: x[0])
    blists = [(w, buckets[w]) for w in bws]
    bsreal = {w: all(x[3] == 0 for x in lst) for w, lst in blists}
    ore: dict = {}
    oim: dict = {}
    for ea, ca in A.items():
        wa, sa = grades(ea)
        if wa > W or sa > S:
            continue
        ra = int(ca.re * la)
        ia = int(ca.im * la)
        wmax = W - wa
        smax = S - sa
        for wb, lst in blists:
            if wb > wmax:
                break
            if ia == 0 and bsreal[wb]:
                for sb, eb, rb, ib in lst:
                    if sb > smax:
                        break
                    e = ea + eb
                    ore[e] = ore.get(e, 0) + ra * rb
            elif ia == 0:
                for sb, eb, rb, ib in lst:
                    if sb > smax:
                        break
                    e = ea + eb
                    ore[e] = ore.get(e, 0) + ra * rb
                    if ib:
                        oim[e] = oim.get(e, 0) + ra * ib
            elif ra == 0:
                for sb, eb, rb, ib in lst:
                    if sb > smax:
                        break
                    e = ea + eb
                    if ib:
                        ore[e] = ore.get(e, 0) - ia * ib
                    oim[e] = oim.get(e, 0) + ia * rb
            else:
                for sb, eb, rb, ib in lst:
                    if sb > smax:
                        break
                    e = ea + eb
                    ore[e] = ore.get(e, 0) + ra * rb - ia * ib
                    oim[e] = oim.get(e, 0) + ra * ib + ia * rb
    den = la * lb
    out = {}
    for e in set(ore) | set(oim):
        r = ore.get(e, 0)
        i = oim.get(e, 0)
        if r or i:
            out[e] = GaussQ(mpq(r, den), mpq(i, den))
    return out


def _ws_grades(e: int):
    k = e & _M
    a = (e >> 20) & _M
    w = k + a + 2 * (e >> 40)
    return w, w + ((e >> 10) & _M) + ((e >> 30) & _M)


def _hj_grades(e: int):
    w = (e & _M) + 2 * (e >> 20)
    return w, w + ((e >> 10) & _M)


class WSeries(_Series):
    """Series in z, zeta, zbar, zetabar, u; exponent tuples (k, l, alpha, beta, m)."""

    __slots__ = ()
    _NVARS = 5
    _NAMES = ("z", "zeta", "zbar", "zetabar", "u")
    _WEIGHTS = (1, 0, 1, 0, 2)
    _ZETA = (0, 1, 0, 1, 0)
    _grades = staticmethod(_ws_grades)

    @classmethod
    def _admit(cls, e, trunc):
        w, s = _ws_grades(e)
        return w <= trunc.weight_cap and s <= trunc.degree_cap

    def conj(self) -> "WSeries":
        """Swap z <-> zbar, zeta <-> zetabar and conjugate coefficients."""
        d = {}
        for e, c in self._t.items():
            lo = e & 0xFFFFF
            hi = (e >> 20) & 0xFFFFF
            d[(e & ~0xFFFFFFFFFF) | (lo << 20) | hi] = GaussQ(c.re, -c.im)
        return WSeries._raw(d, self.trunc)

    def is_real(self) -> bool:
        t = self._t
        for e, c in t.items():
            lo = e & 0xFFFFF
            hi = (e >> 20) & 0xFFFFF
            e2 = (e & ~0xFFFFFFFFFF) | (lo << 20) | hi
            c2 = t.get(e2)
            if c2 is None or c2.re != c.re or c2.im != -c.im:
                return False
        return True

    def real_part(self) -> "WSeries":
        return (self + self.conj()).scale(mpq(1, 2))

    def imag_part(self) -> "WSeries":
        return (self - self.conj()).scale(GaussQ(0, mpq(-1, 2)))

    def coeff_fn(self, k: int, l: int, alpha: int, beta: int) -> list:
        """Coefficient function Phi_{k l alpha beta}(u) as a list indexed by u-degree."""
        top = (self.trunc.weight_cap - k - alpha) // 2
        if top < 0:
            return []
        out = [ZERO] * (top + 1)
        base = WSeries._pack((k, l, alpha, beta, 0))
        for m in range(top + 1):
            c = self._t.get(base + (m << 40))
            if c is not None:
                out[m] = c
        return out

    def div_one_minus_zz(self) -> "WSeries":
        """Divide by (1 - zeta*zetabar): prefix sums along the zeta*zetabar diagonal."""
        S = self.trunc.degree_cap
        step = (1 << 10) | (1 << 30)
        d = {}
        for e, c in self._t.items():
            w, s = _ws_grades(e)
            while s <= S:
                v = d.get(e)
                d[e] = c if v is None else v + c
                e += step
                s += 2
        return WSeries._raw({e: c for e, c in d.items() if c}, self.trunc)

    def slice_zero(self, *names) -> "WSeries":
        """Set the named variables to zero."""
        mask = 0
        for n in names:
            mask |= _M << (_B * self._NAMES.index(n))
        return WSeries._raw({e: c for e, c in self._t.items() if not e & mask}, self.trunc)

    def u_degree_split(self) -> dict:
        """{m: series with u stripped} grouping by u-degree."""
        out: dict = {}
        for e, c in self._t.items():
            out.setdefault(e >> 40, {})[e & 0xFFFFFFFFFF] = c
        return {m: WSeries._raw(d, self.trunc) for m, d in sorted(out.items())}


class HolJet(_Series):
    """Holomorphic series in z, zeta, w; exponent tuples (k, l, p)."""

    __slots__ = ()
    _NVARS = 3
    _NAMES = ("z", "zeta", "w")
    _WEIGHTS = (1, 0, 2)
    _ZETA = (0, 1, 0)
    _grades = staticmethod(_hj_grades)

    @classmethod
    def _admit(cls, e, trunc):
        w, s = _hj_grades(e)
        return w <= trunc.weight_cap and s <= trunc.degree_cap

    def conj_coeffs(self) -> "HolJet":
        """The jet with conjugated coefficients (the function conj(f(conj z, conj zeta, conj w)))."""
        return HolJet._raw({e: GaussQ(c.re, -c.im) for e, c in self._t.items()}, self.trunc)

    def to_wseries(self, conjugate: bool = False) -> WSeries:
        """Embed with w -> u; with conjugate=True, the antiholomorphic bar in zbar, zetabar, u."""
        d = {}
        for e, c in self._t.items():
            k, l, p = e & _M, (e >> 10) & _M, e >> 20
            if conjugate:
                d[(k << 20) | (l << 30) | (p << 40)] = GaussQ(c.re, -c.im)
            else:
                d[k | (l << 10) | (p << 40)] = c
        return WSeries._raw(d, self.trunc)


def _group_by_var(terms: dict, cls, idx: int) -> dict:
    sh = _B * idx
    out: dict = {}
    for e, c in terms.items():
        x = (e >> sh) & _M
        out.setdefault(x, {})[e & ~(_M << sh)] = c
    return out


def _substitute(a: _Series, subs: list, trunc: Trunc | None):
    """a(subs...) by Horner recursion over the variables of a.

    subs[i] replaces variable i of a.  The result has the class of the subs.
    """
    rcls = type(subs[0])
    nv = a._NVARS

    def rec(terms: dict, idx: int):
        if idx == nv:
            c = terms.get(0, ZERO)
            return rcls.constant(c, EXACT if trunc is None else trunc)
        groups = _group_by_var(terms, a, idx)
        top = max(groups)
        s = subs[idx]
        acc = None
        for x in range(top, -1, -1):
            part = rec(groups[x], idx + 1) if x in groups else None
            if acc is None:
                acc = part
            else:
                acc = acc.mul(s, trunc)
                if part is not None:
                    acc = acc + part
        return acc

    if not a._t:
        t = a.trunc if trunc is None else a.trunc.meet(trunc)
        return rcls.zero(t)
    out = rec(a._t, 0)
    # terms of a beyond its truncation stay beyond it after a grade-nondecreasing substitution
    t = out.trunc.meet(a.trunc)
    if trunc is not None:
        t = t.meet(trunc)
    return out.truncate(t)


def _check_subs(a: _Series, subs: list, trunc: Trunc | None) -> None:
    """Substitutions must not lower the standard degree of any variable.

    Lowering the weight is allowed only in the standard-degree regime
    (zeta_cap == 0), where the weight cap is implied by the degree cap.
    """
    std_only = a.trunc.zeta_cap == 0 and (trunc is None or trunc.zeta_cap == 0)
    for i, s in enumerate(subs):
        if not s._t:
            continue
        w0 = a._WEIGHTS[i]
        s0 = w0 + a._ZETA[i]
        if s.min_std() < s0:
            raise ValueError("substitution would lower the standard degree")
        if s.min_weight() < w0 and not std_only:
            raise ValueError("substitution would lower the weight")


def hol_substitute(a: HolJet, sub_z, sub_zeta, sub_w, trunc: Trunc | None = None):
    """Composition a(sub_z, sub_zeta, sub_w).

    The substituted series must not lower weight or standard degree
    (sub_z has weight >= 1, sub_w weight >= 2, sub_zeta standard degree >= 1).
    """
    subs = [sub_z, sub_zeta, sub_w]
    cls = type(sub_z)
    if any(type(s) is not cls for s in subs):
        raise TypeError("substituted series must share a type")
    _check_subs(a, subs, trunc)
    return _substitute(a, subs, trunc)


def ws_substitute(a: WSeries, subs, trunc: Trunc | None = None) -> WSeries:
    """Composition a(Z1, ..., Z5) for five WSeries with grade-nondecreasing substitutions."""
    subs = list(subs)
    if len(subs) != 5:
        raise ValueError("need five substitutions")
    _check_subs(a, subs, trunc)
    return _substitute(a, subs, trunc)


def taylor_delta(a: _Series, deltas: list, trunc: Trunc, grading: str = "weight"):
    """a(x + delta) - a(x) = sum over n != 0 of d^n a / n! * delta^n.

    Every nonzero delta must raise the chosen grading by at least one
    relative to its variable, so only finitely many n contribute.
    """
    nv = a._NVARS
    if len(deltas) != nv:
        raise ValueError("wrong number of deltas")
    cls = type(a)
    active = [i for i in range(nv) if deltas[i] is not None and deltas[i]._t]
    if not a._t or not active:
        return cls.zero(trunc)
    gi = 0 if grading == "weight" else 1
    cap = trunc.weight_cap if gi == 0 else trunc.degree_cap
    gvar = a._WEIGHTS if gi == 0 else tuple(w + z for w, z in zip(a._WEIGHTS, a._ZETA))
    raise_by = {}
    for i in active:
        dmin = deltas[i].min_weight() if gi == 0 else deltas[i].min_std()
        r = dmin - gvar[i]
        if r < 1:
            raise ValueError("delta does not raise the grading")
        raise_by[i] = r
    amin = a.min_weight() if gi == 0 else a.min_std()
    budget = cap - amin
    if budget < 1:
        return cls.zero(trunc)
    pw: dict = {}

    def dpow(i, n):
        key = (i, n)
        if key not in pw:
            if n == 1:
                pw[key] = deltas[i].truncate(trunc)
            else:
                pw[key] = dpow(i, n - 1).mul(deltas[i], trunc)
        return pw[key]

    if any(type(deltas[i]) is not type(a) for i in active):
        raise TypeError("taylor_delta requires a and deltas of the same class")
    return _taylor_sum(a, active, raise_by, budget, trunc, dpow)


def _taylor_sum(a, active, raise_by, budget, trunc, dpow):
    """Nested sum: S(f, pos) = sum_{n>=0} delta_i^n * S(d_i^n f / n!, pos+1), S(f, end) = f."""

    def S(f, pos, used):
        if pos == len(active):
            return f.truncate(trunc)
        i = active[pos]
        name = a._NAMES[i]
        total = S(f, pos + 1, used)
        g = f
        n = 0
        while True:
            n += 1
            if used + n * raise_by[i] > budget:
                break
            g = g.diff(name).scale(mpq(1, n))
            if not g._t:
                break
            inner = S(g, pos + 1, used + n * raise_by[i])
            if inner._t:
                total = total + inner.mul(dpow(i, n), trunc)
        return total

    full = S(a, 0, 0)
    return (full - a.truncate(trunc)).truncate(trunc)
