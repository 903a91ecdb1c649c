"""Command-line batch interface.

    lightcone-nf normalize --input M.json --out report.json
    lightcone-nf sphericity --input M.json
    lightcone-nf reconstruct --input chi.json --out M.json
    lightcone-nf verify --input M.json
    lightcone-nf algebra-check

Exit status: 0 success, 2 validation failure, 3 parse or schema error,
4 internal decomposition failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from gmpy2 import mpq

from .errors import DecompositionFailure, NormalFormError, SchemaError, TriangularityBreach, ValidationFailure
from .hypersurface import Hypersurface, as_perturbation, prenormalize, validate_2nondegenerate
from .model import algebra_basis, bracket, check_algebra, span_coordinates
from .normalform import is_in_normal_form, normalize
from .reconstruct import reconstruct, residual_check
from .scalar import GaussQ, parse_rational
from .serialize import (
    chi_from_json,
    dumps,
    format_gauss,
    hypersurface_from_json,
    hypersurface_to_json,
    parse_gauss,
    report_to_json,
    ws_from_terms,
)
from .series import Trunc

__all__ = ["main", "run", "JobConfig", "load_hypersurface"]

COMMANDS = ("normalize", "sphericity", "reconstruct", "verify", "algebra-check")
EXIT_OK, EXIT_INVALID, EXIT_SCHEMA, EXIT_INTERNAL = 0, 2, 3, 4


@dataclass(frozen=True)
class JobConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    weight_cap: int | None = None
    zeta_cap: int | None = None
    a: GaussQ = GaussQ(0)
    lam: GaussQ = GaussQ(1)
    s: GaussQ = GaussQ(0)
    seed: int = 0
    quiet: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        if self.weight_cap is not None and self.weight_cap < 3:
            raise SchemaError("--weight must be at least 3")
        if self.zeta_cap is not None and self.zeta_cap < 0:
            raise SchemaError("--zeta-cap must be non-negative")


def _read_json(path: str | None):
    if path is None:
        raise SchemaError("--input is required for this command")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _target(cfg: JobConfig, declared: Trunc, known: Trunc) -> Trunc:
    W = cfg.weight_cap if cfg.weight_cap is not None else declared.weight_cap
    D = cfg.zeta_cap if cfg.zeta_cap is not None else declared.zeta_cap
    t = Trunc(W, D)
    if W > known.weight_cap or t.degree_cap > known.degree_cap:
        raise ValidationFailure(f"requested truncation {t} exceeds the input truncation {known}")
    return t


def _parse_hypersurface(doc) -> Hypersurface:
    try:
        return hypersurface_from_json(doc)
    except ValueError as exc:
        if isinstance(exc, NormalFormError):
            raise
        raise SchemaError(str(exc)) from exc


def load_hypersurface(cfg: JobConfig, doc=None) -> Hypersurface:
    """Parse the input and bring it to perturbation form on the requested truncation."""
    doc = _read_json(cfg.input_path) if doc is None else doc
    M = _parse_hypersurface(doc)
    tr = doc["truncation"]
    target = _target(cfg, Trunc(tr["weight"], tr["zeta_degree"]), M.trunc)
    if M.form_tag == "raw_germ":
        pre, _ = prenormalize(M)
        return as_perturbation(pre, target)
    return M.truncate(target)


def _normalize(cfg: JobConfig):
    M = load_hypersurface(cfg)
    return normalize(M, (cfg.a, cfg.lam, cfg.s))


def _cmd_normalize(cfg: JobConfig):
    r = _normalize(cfg)
    summary = (
        f"normal form on {r.trunc}: {len(r.normal_phi)} terms; "
        f"Phi_3002(0) = {format_gauss(r.sphericity[0])}, Phi_5001(0) = {format_gauss(r.sphericity[1])}; "
        f"spherical: {str(r.spherical).lower()}"
    )
    return report_to_json(r), summary, EXIT_OK


def _cmd_sphericity(cfg: JobConfig):
    r = _normalize(cfg)
    rep = {
        "spherical": r.spherical,
        "phi3002": format_gauss(r.sphericity[0]),
        "phi5001": format_gauss(r.sphericity[1]),
    }
    summary = f"spherical: {str(r.spherical).lower()} (Phi_3002(0) = {rep['phi3002']}, Phi_5001(0) = {rep['phi5001']})"
    return rep, summary, EXIT_OK


def _cmd_reconstruct(cfg: JobConfig):
    chi = chi_from_json(_read_json(cfg.input_path))
    if cfg.weight_cap is not None or cfg.zeta_cap is not None:
        t = Trunc(
            cfg.weight_cap if cfg.weight_cap is not None else chi.trunc.weight_cap,
            cfg.zeta_cap if cfg.zeta_cap is not None else chi.trunc.zeta_cap,
        )
        chi = type(chi)(chi.chi.truncate(t), t)
    M = reconstruct(chi)
    return hypersurface_to_json(M), f"reconstructed normal form on {M.trunc}: {len(M.phi)} terms", EXIT_OK


def _cmd_verify(cfg: JobConfig):
    doc = _read_json(cfg.input_path)
    try:
        raw = ws_from_terms(doc["phi"], Trunc(1 << 10, 0), strict=False)
    except (KeyError, TypeError) as exc:
        raise SchemaError("hypersurface needs 'truncation' and 'phi'") from exc
    if not raw.is_real():
        rep = {"levi_residual_zero": None, "normal_form_ok": None, "reality_ok": False, "nondeg_report": None}
        return rep, "defining function is not real", EXIT_INVALID
    M = _parse_hypersurface(doc)
    residual = residual_check(M)
    nd = validate_2nondegenerate(M)
    nf_ok, _ = is_in_normal_form(M.perturbation())
    rep = {
        "levi_residual_zero": residual.is_zero(),
        "normal_form_ok": nf_ok,
        "reality_ok": True,
        "nondeg_report": nd.as_dict(),
    }
    ok = rep["levi_residual_zero"] and nd.kernel_rank_ok and nd.two_nondeg_witness
    summary = (
        f"Levi residual zero: {str(rep['levi_residual_zero']).lower()}; normal form: {str(nf_ok).lower()}; "
        f"2-nondegenerate witness: {str(nd.two_nondeg_witness).lower()}"
    )
    return rep, summary, EXIT_OK if ok else EXIT_INVALID


def _cmd_algebra(cfg: JobConfig):
    t = Trunc(cfg.weight_cap if cfg.weight_cap is not None else 10, cfg.zeta_cap if cfg.zeta_cap is not None else 8)
    res = check_algebra(t)
    sampled_ok = _sampled_closure(cfg.seed)
    rep = {
        "grading_ok": not res["closure_failures"] and not res["jacobi_failures"] and sampled_ok,
        "tangency_ok": all(res["tangency"].values()),
        "dims": {"g": res["dim_g"], "h": res["dim_h"]},
    }
    summary = f"grading ok: {str(rep['grading_ok']).lower()}; tangency ok: {str(rep['tangency_ok']).lower()}; dims g = {res['dim_g']}, h = {res['dim_h']}"
    ok = rep["grading_ok"] and rep["tangency_ok"] and rep["dims"] == {"g": 10, "h": 5}
    return rep, summary, EXIT_OK if ok else EXIT_INTERNAL


def _sampled_closure(seed: int, samples: int = 5) -> bool:
    """Brackets of seeded random real combinations stay in the span of the basis."""
    rng = random.Random(seed)
    basis = algebra_basis()

    def combo():
        out = None
        for X in basis:
            c = mpq(rng.randint(-3, 3), rng.randint(1, 3))
            if c:
                Y = X.scale(c)
                out = Y if out is None else out + Y
        return out if out is not None else basis[0]

    return all(span_coordinates(bracket(combo(), combo()), basis) is not None for _ in range(samples))


_HANDLERS = {
    "normalize": _cmd_normalize,
    "sphericity": _cmd_sphericity,
    "reconstruct": _cmd_reconstruct,
    "verify": _cmd_verify,
    "algebra-check": _cmd_algebra,
}


def run(cfg: JobConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        report, summary, code = _HANDLERS[cfg.command](cfg)
    except SchemaError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SCHEMA
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=stderr)
        return EXIT_INVALID
    except (DecompositionFailure, TriangularityBreach) as exc:
        print(f"internal failure: {exc}", file=stderr)
        return EXIT_INTERNAL
    text = dumps(report)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif not cfg.quiet:
        stdout.write(text)
    if not cfg.quiet:
        print(summary, file=stdout if cfg.output_path else stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lightcone-nf", description="Exact formal normal forms of 2-nondegenerate hypersurfaces in C^3.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="hypersurface or distinguished-part JSON")
    p.add_argument("--out", help="write the JSON report here (default: standard output)")
    p.add_argument("--weight", type=int, help="weight cap W")
    p.add_argument("--zeta-cap", type=int, help="zeta-degree cap D at the top weight")
    p.add_argument("--param-a", default="0", help="chain-direction parameter, e.g. 1/2-3i")
    p.add_argument("--param-lambda-re", default="1")
    p.add_argument("--param-lambda-im", default="0")
    p.add_argument("--param-s", default="0", help="real grade-2 flow parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = JobConfig(
            command=args.command,
            input_path=args.input,
            output_path=args.out,
            weight_cap=args.weight,
            zeta_cap=args.zeta_cap,
            a=parse_gauss(args.param_a),
            lam=GaussQ(parse_rational(args.param_lambda_re), parse_rational(args.param_lambda_im)),
            s=GaussQ(parse_rational(args.param_s)),
            seed=args.seed,
            quiet=args.quiet,
        )
    except (SchemaError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if not cfg.lam:
        print("error: lambda must be nonzero", file=sys.stderr)
        return EXIT_SCHEMA
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
