"""Acceptance criteria 1-11, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import random
import subprocess
import sys
import time
from importlib import resources

import pytest
import sympy as sp
from gmpy2 import mpq

from conftest import rand_real_psi, rand_vspace_map, random_chi
from lightcone_nf.hypersurface import Hypersurface, as_perturbation, killed_monomials, prenormalize, scale_phi
from lightcone_nf.maps import MapJet, map_truncs, model_P, pushforward_phi
from lightcone_nf.model import (
    GroupElement,
    algebra_basis,
    algebra_dimension,
    apply_group,
    bracket,
    canonical_cone_check,
    isotropy_dimension,
    span_coordinates,
    tangency_defect,
)
from lightcone_nf.normalform import (
    distinguished_chi,
    extract_distinguished,
    homological_L,
    is_in_normal_form,
    normalize,
    solve_weight,
    system_report,
)
from lightcone_nf.reconstruct import DistinguishedPart, reconstruct, residual_check
from lightcone_nf.scalar import GaussQ, I
from lightcone_nf.series import HolJet, Trunc, WSeries

DESK = Trunc(8, 6)
STRETCH = Trunc(10, 8)
half = mpq(1, 2)


def _criterion(n, title, budget, body, capsys):
    t0 = time.perf_counter()
    err = None
    try:
        body()
    except Exception as exc:  # reported, then re-raised
        err = exc
    dt = time.perf_counter() - t0
    ok = err is None and dt < budget
    why = "" if err is None else f" ({type(err).__name__}: {str(err)[:120]})"
    if err is None and dt >= budget:
        why = f" (over the {budget:g} s budget)"
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} [{dt:.1f} s]{why}")
    if err is not None:
        raise err
    assert dt < budget, f"criterion {n} took {dt:.1f} s, budget {budget} s"


def test_criterion_01_automorphism_kernel(capsys):
    def body():
        for X in algebra_basis():
            assert tangency_defect(X, STRETCH).is_zero()

    _criterion(1, "all ten basis fields are tangent at W = 10, D = 8", 30, body, capsys)


def test_criterion_02_graded_structure(capsys):
    def body():
        basis = algebra_basis()
        pairs = list(itertools.combinations(range(10), 2))
        assert len(pairs) == 45
        for i, j in pairs:
            B = bracket(basis[i], basis[j])
            coords = span_coordinates(B, basis)
            assert coords is not None, (i, j)
            target = basis[i].grade + basis[j].grade
            assert all(not c or basis[k].grade == target for k, c in enumerate(coords)), (i, j)
        for a, b, c in itertools.combinations(basis, 3):
            J = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
            assert J.is_zero()
        assert algebra_dimension() == 10
        assert isotropy_dimension() == 5

    _criterion(2, "graded brackets on 45 pairs, Jacobi, dim g = 10, dim h = 5", 60, body, capsys)


def test_criterion_03_model_fixed_point(capsys):
    def body():
        r = normalize(Hypersurface.model(DESK))
        assert r.normal_phi.is_zero()
        assert r.map.is_identity()

    _criterion(3, "normalize(model) = 0 with the identity map at W = 8, D = 6", 30, body, capsys)


def _low_relations(sol, psi, m):
    f, g, h = sol.j.components()
    for p in range(m // 2 + 1):
        f00, g00, f01 = f.coeff(0, 0, p), g.coeff(0, 0, p), f.coeff(0, 1, p)
        assert f00.conjugate() * 2 + I * h.coeff(1, 0, p) == psi.coeff(1, 0, 0, 0, p)
        assert g00.conjugate() + I * h.coeff(2, 0, p) == psi.coeff(2, 0, 0, 0, p)
        assert f01 * 2 + f00.conjugate() * 2 == psi.coeff(0, 1, 1, 0, p)


def test_criterion_04_direct_sum(capsys):
    def body():
        for m in range(3, 9):
            assert system_report(m, DESK)["kernel_dim"] == 0
        rng = random.Random(4)
        for i in range(50):
            m = 3 + i % 6
            psi = rand_real_psi(m, DESK, rng)
            sol = solve_weight(m, psi, DESK)
            assert (homological_L(sol.j, DESK).scale(2) + sol.n_remainder).same_terms(psi)
            assert is_in_normal_form(sol.n_remainder)[0]
            _low_relations(sol, psi, m)

    _criterion(4, "50 seeded weight-3..8 decompositions 2L(j) + n = Psi with e3, e4, e9", 300, body, capsys)


def test_criterion_05_equivalence_detection(capsys):
    def body():
        rng = random.Random(5)
        for _ in range(10):
            H = rand_vspace_map(DESK, rng)
            M = Hypersurface(pushforward_phi(WSeries.zero(DESK), H, DESK), DESK)
            assert not M.phi.is_zero()
            r = normalize(M)
            assert r.normal_phi.is_zero()
            assert r.map.compose(H).is_identity()

    _criterion(5, "normalize(H . model) = 0 for 10 seeded vspace maps", 300, body, capsys)


def _fixed_test_M():
    chi = DistinguishedPart(
        WSeries({(0, 2, 3, 0, 0): half, (0, 3, 4, 0, 0): GaussQ(1, 2), (0, 1, 5, 0, 0): GaussQ(mpq(1, 3), -1)}, DESK),
        DESK,
    )
    return apply_group(reconstruct(chi), GroupElement.from_params(GaussQ(1, 1), 1, half))


def test_criterion_06_idempotence_and_determinism(capsys, tmp_path):
    def body():
        r = normalize(_fixed_test_M())
        again = normalize(r.hypersurface())
        assert again.normal_phi.same_terms(r.normal_phi)
        assert again.map.is_identity()
        fixture = str(resources.files("lightcone_nf") / "fixtures" / "chi_half_zbar3_zeta2.json")
        m_path = tmp_path / "M.json"
        subprocess.run([sys.executable, "-m", "lightcone_nf.cli", "reconstruct", "--input", fixture, "--out", str(m_path), "--quiet"], check=True)
        outs = []
        for n in range(2):
            p = tmp_path / f"report{n}.json"
            subprocess.run(
                [sys.executable, "-m", "lightcone_nf.cli", "normalize", "--input", str(m_path), "--out", str(p),
                 "--param-a", "1/2-i", "--param-lambda-re", "2", "--param-s", "1/3", "--quiet"],
                check=True,
            )
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]
        assert json.loads(outs[0])["violations"] == []

    _criterion(6, "normalize is idempotent; CLI reports are byte-identical", 60, body, capsys)


def test_criterion_07_scaling_equivariance(capsys):
    def body():
        M = _fixed_test_M()
        base = normalize(M).normal_phi
        assert not base.is_zero()
        for lam in (GaussQ(2), GaussQ(1, 1), GaussQ(0, 1), GaussQ(mpq(1, 2), -3), GaussQ(mpq(3, 5), mpq(4, 5))):
            got = normalize(apply_group(M, GroupElement(lam))).normal_phi
            assert got.same_terms(scale_phi(base, lam)), lam

    _criterion(7, "normal forms rescale monomial-wise under 5 exact scalings", 180, body, capsys)


def test_criterion_08_sphericity(capsys):
    def body():
        chi = DistinguishedPart(WSeries({(0, 2, 3, 0, 0): half}, DESK), DESK)
        r = normalize(reconstruct(chi))
        assert r.sphericity[0] == half
        assert not r.spherical
        r0 = normalize(reconstruct(DistinguishedPart(WSeries.zero(DESK), DESK)))
        assert r0.spherical and r0.normal_phi.is_zero()

    _criterion(8, "chi = 1/2 zbar^3 zeta^2 gives Phi_3002(0) = 1/2, chi = 0 is spherical", 120, body, capsys)


def test_criterion_09_moduli_round_trip(capsys):
    def body():
        rng = random.Random(9)
        for _ in range(10):
            chi = random_chi(rng, DESK, n=3)
            M = reconstruct(chi)
            assert distinguished_chi(extract_distinguished(M.phi)).same_terms(chi.chi)
            assert is_in_normal_form(M.phi)[0]
            assert M.phi.is_real()
            assert residual_check(M).is_zero()

    _criterion(9, "extract(reconstruct(chi)) = chi for 10 seeded chi, real, normal, residual 0", 300, body, capsys)


def _std_map(f, g, h, S):
    tf, tg, th = map_truncs(Trunc(S, 0))
    return MapJet(HolJet(f, tf), HolJet(g, tg), HolJet(h, th))


def test_criterion_10_prenormalization(capsys):
    def body():
        S = 8
        T = Trunc(S, 0)
        rng = random.Random(10)

        def c():
            return GaussQ(mpq(rng.randint(-3, 3), rng.randint(1, 3)), mpq(rng.randint(-3, 3), rng.randint(1, 3)))

        for trial in range(6):
            f = {(rng.randint(0, 3), rng.randint(0, 1), 0): c()} if trial % 3 != 0 else {}
            f = {e: v for e, v in f.items() if e[0] + e[1] >= 2}
            g = {(rng.randint(0, 2), 2 - (trial % 2), 0): c()} if trial % 3 == 2 else {}
            g = {e: v for e, v in g.items() if e[0] + e[1] >= 2}
            h = {(rng.randint(3, 4), 0, 0): c(), (1, 0, 1): c()}
            H = _std_map(f, g, h, S)
            pert = pushforward_phi(WSeries.zero(T), H, T, grading="std")
            M = Hypersurface((model_P(T) + pert).truncate(T), T, "raw_germ")
            assert killed_monomials(M.perturbation())
            out, total = prenormalize(M)
            assert killed_monomials(out.phi) == []
            assert as_perturbation(out, Trunc(S - 2, 2)).phi.is_zero()
            image = pushforward_phi(M.perturbation(), total, T, grading="std")
            assert image.trunc == T
            assert image.same_terms(out.perturbation())

    _criterion(10, "seeded pollutions of the model are prenormalized back, maps reproduce them", 120, body, capsys)


def test_criterion_11_canonical_cone(capsys):
    def body():
        pts = [(0, 0, 1), (1, -I, 1), (1, 0, 1), (0, 0, 0), (2, GaussQ(0, -4), 1), (1, GaussQ(0, -1, ), 2)]
        rng = random.Random(11)
        while len(pts) < 20:
            z = GaussQ(rng.randint(-2, 2), rng.randint(-2, 2))
            u = mpq(rng.randint(-3, 3), rng.randint(1, 2))
            if rng.random() < 0.5 and u:
                zeta = -I * z * z / u
            else:
                zeta = GaussQ(rng.randint(-2, 2), rng.randint(-2, 2))
            pts.append((z, zeta, u))
        members = 0
        for z, zeta, u in pts:
            z, zeta = GaussQ.coerce(z), GaussQ.coerce(zeta)
            Z = sp.Rational(str(z.re)) + sp.I * sp.Rational(str(z.im))
            ZE = sp.Rational(str(zeta.re)) + sp.I * sp.Rational(str(zeta.im))
            U = sp.Rational(str(mpq(u)))
            want = sp.expand(ZE * U + sp.I * Z**2) == 0 and U != 0
            assert canonical_cone_check(z, zeta, u) == want
            members += want
        assert canonical_cone_check(0, 0, 1) and canonical_cone_check(1, -I, 1) and not canonical_cone_check(1, 0, 1)
        assert 0 < members < 20

    _criterion(11, "canonical cone membership on 20 points", 1, body, capsys)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
