"""Command-line interface.

Subcommands: rit, ncrank, embed, depth-reduce, higman, hw-matrix, eval,
gen-corpus, verify.  Reports are JSON on stdout with sorted keys and are
byte-identical across runs with the same inputs, flags and seed (timing is
opt-in via --timing precisely so that determinism holds by default).

Exit codes encode verdicts so shell pipelines can branch without parsing:
  0  zero verdict / singular matrix / plain success
  1  nonzero verdict / full matrix / failed verification
  2  usage or input errors
  3  inconclusive (empty domain)
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import formats
from .corpus import random_correct_formula, random_formula, random_pencil, random_polymatrix
from .depth_reduction import depth_reduce_polynomial, depth_reduce_rational
from .embedding import embed_formula, embed_pencil, monomial_embed_formula, monomial_embed_pencil
from .field import DEFAULT_PRIME, PrimeField
from .formula import contains_inv, depth, format_formula, parse_formula, size, variables
from .higman import linearize_formula, linearize_polymatrix, verify_certificate
from .oracles import DOMAIN_EMPTY, NONZERO, ZERO, TrialPolicy, evaluate, random_tuple, rit_eval
from .pencil import PolyMatrix
from .ncrank import (
    RankPolicy,
    make_rit_oracle,
    ncrank_pencil,
    ncrank_polymatrix,
    rit_bivariate,
    rit_full,
)
from .realization import realize_formula, singularity_pencil
from .seeding import derive_seed

EXIT_ZERO = 0
EXIT_NONZERO = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class UsageError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewrank",
        description="noncommutative rational identity testing and rank toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formula_input=False):
        p.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field modulus (prime)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--timing", action="store_true", help="include wall time in the report")
        if formula_input:
            g = p.add_mutually_exclusive_group()
            g.add_argument("--formula", help="inline formula text")
            g.add_argument("--file", help="path to a .formula file")

    p = sub.add_parser("rit", help="rational identity test")
    common(p, formula_input=True)
    p.add_argument("--route", choices=("eval", "pencil", "bivariate"), default="eval")
    p.add_argument("--dims", type=_int_list, default=None, help="dimension schedule, e.g. 2,4,8")
    p.add_argument("--guarantee", action="store_true", help="lift the dimension cap to 2*size+1")

    p = sub.add_parser("ncrank", help="noncommutative rank of a pencil or polynomial matrix")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pencil", help="path to a .pencil file")
    g.add_argument("--polymatrix", help="path to a .polymatrix file")
    p.add_argument("--k", type=int, default=None, help="blow-up dimension (default max(dims)+1)")
    p.add_argument("--schedule", type=_int_list, default=None, help="ascending blow-up dimensions")
    p.add_argument("--singular", action="store_true", help="exit 0/1 by singular/full (square only)")

    p = sub.add_parser("embed", help="bivariate embedding of a formula or pencil")
    common(p, formula_input=True)
    p.add_argument("--pencil", help="path to a .pencil file")
    p.add_argument("--mode", choices=("cohn", "naive"), default="cohn",
                   help="honest iterated-commutator map, or the rank-dishonest monomial map")
    p.add_argument("--out", help="output path (.formula or .polymatrix)")

    p = sub.add_parser("depth-reduce", help="equivalent formula of logarithmic depth")
    common(p, formula_input=True)
    p.add_argument("--mode", choices=("auto", "polynomial", "rational"), default="auto")
    p.add_argument("--oracle", choices=("eval", "pencil", "bivariate"), default="eval")
    p.add_argument("--out", help="write the reduced formula here")

    p = sub.add_parser("higman", help="linearize to a pencil with certificate")
    common(p, formula_input=True)
    p.add_argument("--polymatrix", help="path to a .polymatrix file")
    p.add_argument("--out", required=True, help="certificate output path (.cert)")

    p = sub.add_parser("hw-matrix", help="linear realization pencil of a rational formula")
    common(p, formula_input=True)
    p.add_argument("--wrap", action="store_true",
                   help="emit the bordered pencil (full iff the formula is nonzero)")
    p.add_argument("--out", required=True, help="pencil output path (.pencil)")

    p = sub.add_parser("eval", help="evaluate a formula at a matrix tuple")
    common(p, formula_input=True)
    p.add_argument("--dim", type=int, default=2, help="matrix dimension")
    p.add_argument("--assign", help="JSON file {var: row-major entries}")

    p = sub.add_parser("gen-corpus", help="write a deterministic random corpus")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--kind", choices=("formulas", "pencils", "polymatrices"), default="formulas")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--size", type=int, default=30, help="formula size budget / matrix dimension")
    p.add_argument("--vars", type=int, default=3)
    p.add_argument("--rational", action="store_true", help="allow inversion gates (correct formulas)")

    p = sub.add_parser("verify", help="re-verify a linearization certificate")
    common(p, formula_input=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--polymatrix", help="the matrix the certificate was produced from")
    p.add_argument("--dim", type=int, default=3, help="evaluation dimension")

    return parser


def _load_formula(args, fld: PrimeField):
    if getattr(args, "formula", None):
        return parse_formula(args.formula, fld)
    if getattr(args, "file", None):
        phi, file_fld = formats.read_formula_file(args.file)
        if file_fld.p != fld.p:
            phi = parse_formula(format_formula(phi, file_fld), fld)
        return phi
    raise UsageError("an input formula is required (--formula or --file)")


def _policy(args, fld: PrimeField, dims=None) -> TrialPolicy:
    return TrialPolicy(
        field=fld,
        dimensions=dims,
        trials=args.trials,
        seed=args.seed,
        guarantee=getattr(args, "guarantee", False),
    )


def _verdict_exit(verdict: str) -> int:
    return {ZERO: EXIT_ZERO, NONZERO: EXIT_NONZERO, DOMAIN_EMPTY: EXIT_INCONCLUSIVE}[verdict]


def _cmd_rit(args, fld):
    phi = _load_formula(args, fld)
    policy = _policy(args, fld, dims=args.dims)
    if args.route == "eval":
        v = rit_eval(phi, policy)
    elif args.route == "pencil":
        v = rit_full(phi, policy)
    else:
        v = rit_bivariate(phi, policy)
    report = {
        "verdict": v.verdict,
        "route": args.route,
        "witnesses_tried": v.witnesses_tried,
        "dimension_used": v.dimension_used,
        "heuristic": v.heuristic,
        "notes": v.note,
        "formula_size": size(phi),
    }
    return report, _verdict_exit(v.verdict)


def _cmd_ncrank(args, fld):
    policy = RankPolicy(k=args.k, schedule=args.schedule, trials=args.trials, seed=args.seed)
    if args.pencil:
        pencil = formats.read_pencil_file(args.pencil)
        rep = ncrank_pencil(pencil, policy)
        square = pencil.is_square()
        dim = pencil.rows
    else:
        pm = formats.read_polymatrix_file(args.polymatrix)
        rep = ncrank_polymatrix(pm, RankPolicy(schedule=args.schedule or (2, 3),
                                               trials=args.trials, seed=args.seed))
        square = pm.rows == pm.cols
        dim = pm.rows
    report = {
        "estimate": rep.estimate,
        "blowup_dimension": rep.blowup_dimension,
        "trials": rep.trials,
        "per_trial_ranks": list(rep.per_trial_ranks),
        "divisible": rep.divisible,
        "notes": rep.note,
    }
    if args.singular:
        if not square:
            raise UsageError("--singular requires a square input")
        singular = rep.estimate < dim
        report["singular"] = singular
        return report, (EXIT_ZERO if singular else EXIT_NONZERO)
    return report, EXIT_ZERO


def _cmd_embed(args, fld):
    if args.pencil:
        pencil = formats.read_pencil_file(args.pencil)
        image = embed_pencil(pencil) if args.mode == "cohn" else monomial_embed_pencil(pencil)
        if not args.out:
            raise UsageError("--out is required when embedding a pencil")
        formats.write_polymatrix_file(args.out, image)
        return {"mode": args.mode, "written": args.out, "dims": list(image.dims)}, EXIT_ZERO
    phi = _load_formula(args, fld)
    image = embed_formula(phi, fld) if args.mode == "cohn" else monomial_embed_formula(phi, fld)
    text = format_formula(image, fld)
    report = {"mode": args.mode, "formula": text, "size": size(image), "depth": depth(image)}
    if args.out:
        formats.write_formula_file(args.out, image, fld)
        report["written"] = args.out
    return report, EXIT_ZERO


def _cmd_depth_reduce(args, fld):
    phi = _load_formula(args, fld)
    mode = args.mode
    if mode == "auto":
        mode = "rational" if contains_inv(phi) else "polynomial"
    if mode == "polynomial":
        reduced = depth_reduce_polynomial(phi, fld)
    else:
        oracle = make_rit_oracle(args.oracle, _policy(args, fld))
        reduced = depth_reduce_rational(phi, fld, oracle)
    report = {
        "mode": mode,
        "input_size": size(phi),
        "input_depth": depth(phi),
        "output_size": size(reduced),
        "output_depth": depth(reduced),
    }
    if args.out:
        formats.write_formula_file(args.out, reduced, fld)
        report["written"] = args.out
    else:
        report["formula"] = format_formula(reduced, fld)
    return report, EXIT_ZERO


def _cmd_higman(args, fld):
    if args.polymatrix:
        pm = formats.read_polymatrix_file(args.polymatrix)
        cert = linearize_polymatrix(pm)
    else:
        phi = _load_formula(args, fld)
        cert = linearize_formula(phi, fld)
    formats.write_certificate_file(args.out, cert)
    return {
        "written": args.out,
        "padding": cert.padding,
        "pencil_dims": list(cert.pencil.dims),
        "original_dims": list(cert.original_dims),
    }, EXIT_ZERO


def _cmd_hw_matrix(args, fld):
    phi = _load_formula(args, fld)
    pencil = singularity_pencil(phi, fld) if args.wrap else realize_formula(phi, fld)
    formats.write_pencil_file(args.out, pencil)
    return {
        "written": args.out,
        "dimension": pencil.rows,
        "wrapped": bool(args.wrap),
        "variables": pencil.variables,
    }, EXIT_ZERO


def _cmd_eval(args, fld):
    phi = _load_formula(args, fld)
    names = variables(phi)
    if args.assign:
        raw = json.loads(Path(args.assign).read_text())
        k = args.dim
        assignment = {name: fld.matrix(_chunk(row, k)) for name, row in raw.items()}
        from .oracles import MatrixTuple

        tau = MatrixTuple(k, assignment)
    else:
        tau = random_tuple(fld, names, args.dim, derive_seed(args.seed, "cli-eval"))
    out = evaluate(phi, tau, fld)
    if out.defined:
        return {
            "defined": True,
            "dimension": args.dim,
            "value": [[int(x) for x in row] for row in out.value.array.tolist()],
        }, EXIT_ZERO
    return {
        "defined": False,
        "dimension": args.dim,
        "undefined_at": format_formula(out.undefined_at, fld),
    }, EXIT_INCONCLUSIVE


def _chunk(flat, k):
    return [flat[i * k:(i + 1) * k] for i in range(k)]


def _cmd_gen_corpus(args, fld):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(args.count):
        seed = derive_seed(args.seed, "corpus", args.kind, i)
        if args.kind == "formulas":
            if args.rational:
                phi = random_correct_formula(fld, args.size, args.vars, seed)
            else:
                phi = random_formula(fld, args.size, args.vars, seed)
            path = out_dir / f"item{i:03d}.formula"
            formats.write_formula_file(path, phi, fld)
        elif args.kind == "pencils":
            pencil = random_pencil(fld, args.size, args.size, args.vars, seed)
            path = out_dir / f"item{i:03d}.pencil"
            formats.write_pencil_file(path, pencil)
        else:
            pm = random_polymatrix(fld, args.size, args.size, 8, args.vars, seed)
            path = out_dir / f"item{i:03d}.polymatrix"
            formats.write_polymatrix_file(path, pm)
        written.append(str(path))
    return {"kind": args.kind, "count": args.count, "written": written}, EXIT_ZERO


def _cmd_verify(args, fld):
    cert = formats.read_certificate_file(args.cert)
    if args.polymatrix:
        original = formats.read_polymatrix_file(args.polymatrix)
    else:
        phi = _load_formula(args, fld)
        original = PolyMatrix(fld, [[phi]])
    policy = TrialPolicy(field=original.field, dimensions=(args.dim,),
                         trials=args.trials, seed=args.seed)
    ok = verify_certificate(cert, original, policy)
    report = {
        "verified": bool(ok),
        "padding": cert.padding,
        "pencil_dims": list(cert.pencil.dims),
        "trials": args.trials,
    }
    return report, (EXIT_ZERO if ok else EXIT_NONZERO)


_HANDLERS = {
    "rit": _cmd_rit,
    "ncrank": _cmd_ncrank,
    "embed": _cmd_embed,
    "depth-reduce": _cmd_depth_reduce,
    "higman": _cmd_higman,
    "hw-matrix": _cmd_hw_matrix,
    "eval": _cmd_eval,
    "gen-corpus": _cmd_gen_corpus,
    "verify": _cmd_verify,
}


def execute(argv) -> tuple[dict, int]:
    """Parse and run; returns (report, exit code).  Raises UsageError (or
    SystemExit from argparse) on invalid invocations."""
    parser = build_parser()
    args = parser.parse_args(argv)
    fld = PrimeField(args.prime)  # validates primality
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    for knob in ("dims", "schedule", "k", "dim"):
        value = getattr(args, knob, None)
        if value is None:
            continue
        values = value if isinstance(value, tuple) else (value,)
        if any(v < 1 for v in values):
            raise UsageError(f"--{knob} values must be >= 1")
    started = time.perf_counter()
    report, code = _HANDLERS[args.command](args, fld)
    report = {
        "command": args.command,
        "modulus": fld.p,
        "seed": args.seed,
        **report,
        "exit_code": code,
    }
    if args.timing:
        report["elapsed_ms"] = round((time.perf_counter() - started) * 1000, 3)
    return report, code


def main(argv=None) -> int:
    try:
        report, code = execute(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(report, sort_keys=True, indent=1))
    return code


if __name__ == "__main__":
    sys.exit(main())
