import json
from importlib import resources

import pytest
from gmpy2 import mpq
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lightcone_nf.estimator import NormalFormEstimator, Reconstructor, check_hypersurface, check_params
from lightcone_nf.hypersurface import Hypersurface
from lightcone_nf.model import GroupElement, apply_group
from lightcone_nf.reconstruct import DistinguishedPart
from lightcone_nf.scalar import GaussQ
from lightcone_nf.series import Trunc, WSeries

half = mpq(1, 2)
T = Trunc(6, 3)


def model_doc():
    return json.loads((resources.files("lightcone_nf") / "fixtures" / "model.json").read_text())


def test_params_and_clone():
    est = NormalFormEstimator(weight=6, zeta_cap=3, a="1-i", lam="2", s="1/2")
    assert est.get_params()["a"] == "1-i"
    c = clone(est)
    assert c.get_params() == est.get_params()
    assert check_params("1/2+i", 3, 0) == (GaussQ(half, 1), GaussQ(3), GaussQ(0))
    with pytest.raises(ValueError):
        check_params(0, 0, 0)
    with pytest.raises(ValueError):
        check_params(0, 1, "i")
    with pytest.raises(ValueError):
        NormalFormEstimator(weight=6).fit()


def test_not_fitted():
    with pytest.raises(NotFittedError):
        NormalFormEstimator().transform([Hypersurface.model(T)])
    with pytest.raises(NotFittedError):
        Reconstructor().transform([])


def test_transform_and_predict():
    chi = DistinguishedPart(WSeries({(0, 2, 3, 0, 0): half}, T), T)
    M = Reconstructor().fit().transform([chi])[0]
    moved = apply_group(M, GroupElement(GaussQ(1, 1)))
    est = NormalFormEstimator().fit()
    out = est.transform([Hypersurface.model(T), moved])
    assert out[0].phi.is_zero()
    assert out[1].form_tag == "normal_form"
    assert est.predict([Hypersurface.model(T), moved]) == [True, False]
    with pytest.raises(TypeError):
        est.transform(Hypersurface.model(T))


def test_json_documents_and_raw_germs():
    est = NormalFormEstimator(weight=5, zeta_cap=2).fit()
    assert est.predict([model_doc()]) == [True]
    M = check_hypersurface(model_doc(), Trunc(5, 2))
    assert M.trunc == Trunc(5, 2) and M.phi.is_zero()
    with pytest.raises(ValueError):
        check_hypersurface(Hypersurface.model(Trunc(4, 1)), Trunc(6, 3))
    with pytest.raises(TypeError):
        check_hypersurface(3)


def test_reconstructor_inverse():
    chi = DistinguishedPart(WSeries({(0, 2, 3, 0, 0): half, (0, 1, 5, 0, 0): GaussQ(1, -1)}, T), T)
    rec = Reconstructor(weight=5, zeta_cap=3).fit()
    (M,) = rec.transform([chi])
    assert M.trunc == Trunc(5, 3)
    (back,) = rec.inverse_transform([M])
    assert back.chi.same_terms(chi.chi.truncate(Trunc(5, 3)))
