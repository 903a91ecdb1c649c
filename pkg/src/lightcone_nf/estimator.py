"""scikit-learn style wrappers around normalize and reconstruct.

X is a sequence of hypersurfaces (``Hypersurface`` objects or their JSON
documents); nothing is learned from data, so ``fit`` only validates the
parameters and records the group element.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import SchemaError
from .hypersurface import Hypersurface, as_perturbation, prenormalize
from .model import GroupElement
from .normalform import normalize
from .reconstruct import DistinguishedPart, reconstruct
from .scalar import GaussQ
from .series import Trunc

__all__ = ["NormalFormEstimator", "Reconstructor", "check_hypersurface", "check_params"]


def _gauss(x) -> GaussQ:
    if isinstance(x, str):
        from .serialize import parse_gauss

        return parse_gauss(x)
    return GaussQ.coerce(x)


def check_params(a=0, lam=1, s=0) -> tuple:
    a, lam, s = _gauss(a), _gauss(lam), _gauss(s)
    if not lam:
        raise ValueError("lam must be nonzero")
    if s.im:
        raise ValueError("s must be real")
    return a, lam, s


def check_hypersurface(M, trunc: Trunc | None = None) -> Hypersurface:
    """Return M in perturbation form on trunc, prenormalizing full graphs first."""
    if isinstance(M, dict):
        from .serialize import hypersurface_from_json

        M = hypersurface_from_json(M)
    if not isinstance(M, Hypersurface):
        raise TypeError(f"expected a Hypersurface or its JSON document, got {type(M).__name__}")
    if M.form_tag in ("raw_germ", "prenormalized"):
        pre = M if M.form_tag == "prenormalized" else prenormalize(M)[0]
        if trunc is None:
            trunc = Trunc(pre.trunc.weight_cap, 0)
        return as_perturbation(pre, trunc)
    if trunc is None or trunc == M.trunc:
        return M
    if trunc.weight_cap > M.trunc.weight_cap or trunc.degree_cap > M.trunc.degree_cap:
        raise ValueError(f"requested truncation {trunc} exceeds the known region {M.trunc}")
    return M.truncate(trunc)


def _check_sequence(X) -> list:
    if isinstance(X, (Hypersurface, dict, DistinguishedPart)):
        raise TypeError("X must be a sequence of inputs, not a single input")
    return list(X)


class NormalFormEstimator(TransformerMixin, BaseEstimator):
    """transform: hypersurfaces -> normal forms; predict: sphericity verdicts."""

    def __init__(self, weight: int | None = None, zeta_cap: int | None = None, a="0", lam="1", s="0"):
        self.weight = weight
        self.zeta_cap = zeta_cap
        self.a = a
        self.lam = lam
        self.s = s

    def fit(self, X=None, y=None):
        self.params_ = check_params(self.a, self.lam, self.s)
        self.group_ = GroupElement.from_params(*self.params_)
        if (self.weight is None) != (self.zeta_cap is None):
            raise ValueError("set both weight and zeta_cap, or neither")
        if self.weight is not None and (self.weight < 3 or self.zeta_cap < 0):
            raise ValueError("weight must be >= 3 and zeta_cap >= 0")
        self.trunc_ = None if self.weight is None else Trunc(self.weight, self.zeta_cap)
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before transform or predict")

    def reports(self, X) -> list:
        self._check_fitted()
        return [normalize(check_hypersurface(M, self.trunc_), self.params_) for M in _check_sequence(X)]

    def transform(self, X) -> list:
        return [r.hypersurface() for r in self.reports(X)]

    def predict(self, X) -> list:
        """True where the hypersurface is spherical to the working truncation."""
        return [r.spherical for r in self.reports(X)]


class Reconstructor(TransformerMixin, BaseEstimator):
    """transform: distinguished parts -> normal forms; inverse_transform goes back."""

    def __init__(self, weight: int | None = None, zeta_cap: int | None = None):
        self.weight = weight
        self.zeta_cap = zeta_cap

    def fit(self, X=None, y=None):
        if (self.weight is None) != (self.zeta_cap is None):
            raise ValueError("set both weight and zeta_cap, or neither")
        self.trunc_ = None if self.weight is None else Trunc(self.weight, self.zeta_cap)
        return self

    def _chi(self, c) -> DistinguishedPart:
        if isinstance(c, dict):
            from .serialize import chi_from_json

            c = chi_from_json(c)
        if not isinstance(c, DistinguishedPart):
            raise SchemaError(f"expected a DistinguishedPart, got {type(c).__name__}")
        if self.trunc_ is not None and self.trunc_ != c.trunc:
            c = DistinguishedPart(c.chi.truncate(self.trunc_), self.trunc_)
        return c

    def transform(self, X) -> list:
        if not hasattr(self, "trunc_"):
            raise NotFittedError("call fit before transform")
        return [reconstruct(self._chi(c)) for c in _check_sequence(X)]

    def inverse_transform(self, X) -> list:
        return [DistinguishedPart.from_phi(M.phi, M.trunc) for M in _check_sequence(X)]
