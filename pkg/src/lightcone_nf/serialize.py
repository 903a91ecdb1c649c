"""JSON interchange: term lists, hypersurfaces, distinguished parts and reports.

Every rational is a reduced "p/q" string; there is no floating point anywhere.
"""

from __future__ import annotations

import json
import re

from .errors import SchemaError
from .hypersurface import Hypersurface
from .maps import MapJet, map_truncs
from .model import GroupElement
from .normalform import NFReport
from .reconstruct import DistinguishedPart
from .scalar import GaussQ, format_rational, parse_rational
from .series import HolJet, Trunc, WSeries

__all__ = [
    "format_gauss",
    "parse_gauss",
    "ws_to_terms",
    "ws_from_terms",
    "hol_to_terms",
    "hol_from_terms",
    "hypersurface_to_json",
    "hypersurface_from_json",
    "chi_to_json",
    "chi_from_json",
    "report_to_json",
    "report_from_json",
    "group_to_json",
    "group_from_json",
    "dumps",
]

_WS_KEYS = ("z", "zeta", "zbar", "zetabar", "u")
_HJ_KEYS = ("z", "zeta", "w")
_GAUSS = re.compile(r"^([+-]?\d+(?:/\d+)?)?(?:([+-])(\d+(?:/\d+)?)?i)?$")


def format_gauss(c: GaussQ) -> str:
    """"p/q", "p/q+r/si" or "p/q-r/si"; the imaginary coefficient is written before i."""
    c = GaussQ.coerce(c)
    if not c.im:
        return format_rational(c.re)
    im = format_rational(abs(c.im))
    sign = "-" if c.im < 0 else "+"
    return f"{format_rational(c.re)}{sign}{im}i"


def parse_gauss(text) -> GaussQ:
    if isinstance(text, dict):
        return GaussQ(parse_rational(text["re"]), parse_rational(text["im"]))
    if not isinstance(text, str):
        raise SchemaError(f"expected a Gaussian rational string, got {text!r}")
    s = text.replace(" ", "")
    if s in ("i", "+i"):
        return GaussQ(0, 1)
    if s == "-i":
        return GaussQ(0, -1)
    mt = _GAUSS.match(s)
    if not s or not mt:
        raise SchemaError(f"not an exact Gaussian rational: {text!r}")
    re_s, sign, im_s = mt.groups()
    re_v = parse_rational(re_s) if re_s else 0
    im_v = 0
    if sign:
        im_v = parse_rational(im_s) if im_s else 1
        if sign == "-":
            im_v = -im_v
    return GaussQ(re_v, im_v)


def _trunc_json(t: Trunc) -> dict:
    return {"weight": t.weight_cap, "zeta_degree": t.zeta_cap}


def _trunc_from(d) -> Trunc:
    try:
        W, D = d["weight"], d["zeta_degree"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("truncation must have integer fields weight and zeta_degree") from exc
    if not (isinstance(W, int) and isinstance(D, int)) or isinstance(W, bool) or isinstance(D, bool):
        raise SchemaError("truncation caps must be integers")
    if W < 0 or D < 0:
        raise SchemaError("truncation caps must be non-negative")
    return Trunc(W, D)


def _terms(series, keys) -> list:
    out = []
    for e, c in series.items():
        t = dict(zip(keys, e))
        t["re"] = format_rational(c.re)
        t["im"] = format_rational(c.im)
        out.append(t)
    return out


def _from_terms(cls, terms, keys, trunc: Trunc, strict: bool = True):
    if not isinstance(terms, list):
        raise SchemaError("term list must be a JSON array")
    d = {}
    for t in terms:
        if not isinstance(t, dict):
            raise SchemaError(f"term must be an object, got {t!r}")
        extra = set(t) - set(keys) - {"re", "im"}
        if extra:
            raise SchemaError(f"unknown term fields {sorted(extra)}")
        exps = []
        for k in keys:
            v = t.get(k, 0)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise SchemaError(f"exponent {k} must be a non-negative integer, got {v!r}")
            exps.append(v)
        try:
            c = GaussQ(parse_rational(t.get("re", "0")), parse_rational(t.get("im", "0")))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(str(exc)) from exc
        e = tuple(exps)
        if e in d:
            raise SchemaError(f"duplicate term {e}")
        d[e] = c
    s = cls(d, trunc)
    if strict and len(s) != len([c for c in d.values() if c]):
        raise SchemaError(f"terms outside the truncation {trunc}")
    return s


def ws_to_terms(s: WSeries) -> list:
    return _terms(s, _WS_KEYS)


def ws_from_terms(terms, trunc: Trunc, strict: bool = True) -> WSeries:
    return _from_terms(WSeries, terms, _WS_KEYS, trunc, strict)


def hol_to_terms(s: HolJet) -> list:
    return _terms(s, _HJ_KEYS)


def hol_from_terms(terms, trunc: Trunc, strict: bool = True) -> HolJet:
    return _from_terms(HolJet, terms, _HJ_KEYS, trunc, strict)


def hypersurface_to_json(M: Hypersurface) -> dict:
    """Graphs are written with their full defining function; perturbations as Phi."""
    return {"truncation": _trunc_json(M.trunc), "phi": ws_to_terms(M.phi)}


def hypersurface_from_json(doc) -> Hypersurface:
    """A term list containing z*zbar is a full graph v = phi known to standard
    degree W + D (tagged raw_germ on Trunc(W + D, 0)); otherwise it is the
    perturbation Phi of v = P + Phi on Trunc(W, D)."""
    if not isinstance(doc, dict) or "phi" not in doc or "truncation" not in doc:
        raise SchemaError("hypersurface needs 'truncation' and 'phi'")
    extra = set(doc) - {"truncation", "phi"}
    if extra:
        raise SchemaError(f"unknown hypersurface fields {sorted(extra)}")
    t = _trunc_from(doc["truncation"])
    graph = any(
        isinstance(x, dict) and all(x.get(k, 0) == v for k, v in zip(_WS_KEYS, (1, 0, 1, 0, 0)))
        for x in doc["phi"]
    )
    if graph:
        t = Trunc(t.degree_cap, 0)
    phi = ws_from_terms(doc["phi"], t)
    if not phi.is_real():
        raise SchemaError("phi is not real")
    return Hypersurface(phi, t, "raw_germ" if graph else "perturbation_of_P")


def chi_to_json(chi: DistinguishedPart) -> dict:
    return {"truncation": _trunc_json(chi.trunc), "chi": ws_to_terms(chi.chi)}


def chi_from_json(doc) -> DistinguishedPart:
    if not isinstance(doc, dict) or "chi" not in doc or "truncation" not in doc:
        raise SchemaError("distinguished part needs 'truncation' and 'chi'")
    t = _trunc_from(doc["truncation"])
    for x in doc["chi"]:
        if isinstance(x, dict) and x.get("zetabar", 0):
            raise SchemaError("chi terms must have zetabar = 0")
    return DistinguishedPart(ws_from_terms(doc["chi"], t), t)


def group_to_json(g: GroupElement) -> dict:
    return {
        "lambda": {"re": format_rational(g.lam.re), "im": format_rational(g.lam.im)},
        "flows": [{"gen": gen, "t": format_rational(t.re)} for gen, t in g.flows],
    }


def group_from_json(doc) -> GroupElement:
    try:
        lam = parse_gauss(doc["lambda"])
        flows = tuple((f["gen"], parse_rational(f["t"])) for f in doc.get("flows", []))
        return GroupElement(lam, flows)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad group element: {exc}") from exc


def _map_json(H: MapJet) -> dict:
    return {"f": hol_to_terms(H.f), "g": hol_to_terms(H.g), "h": hol_to_terms(H.h)}


def report_to_json(r: NFReport) -> dict:
    a, lam, s = r.params_used
    return {
        "truncation": _trunc_json(r.trunc),
        "normal_phi": ws_to_terms(r.normal_phi),
        "map": _map_json(r.map),
        "params": {"a": format_gauss(a), "lambda": format_gauss(lam), "s": format_rational(s.re)},
        "sphericity": {"phi3002": format_gauss(r.sphericity[0]), "phi5001": format_gauss(r.sphericity[1])},
        "spherical": r.spherical,
        "distinguished": ws_to_terms(r.distinguished),
        "violations": [list(e) for e in r.violations],
    }


def report_from_json(doc) -> NFReport:
    try:
        t = _trunc_from(doc["truncation"])
        tf, tg, th = map_truncs(t)
        m = doc["map"]
        H = MapJet(hol_from_terms(m["f"], tf), hol_from_terms(m["g"], tg), hol_from_terms(m["h"], th))
        p = doc["params"]
        sp = doc["sphericity"]
        return NFReport(
            normal_phi=ws_from_terms(doc["normal_phi"], t),
            map=H,
            params_used=(parse_gauss(p["a"]), parse_gauss(p["lambda"]), GaussQ(parse_rational(p["s"]))),
            sphericity=(parse_gauss(sp["phi3002"]), parse_gauss(sp["phi5001"])),
            distinguished=ws_from_terms(doc["distinguished"], t),
            trunc=t,
            violations=tuple(tuple(v) for v in doc.get("violations", [])),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad normal-form report: {exc}") from exc


def dumps(doc) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
