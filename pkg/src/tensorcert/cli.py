"""Command-line front end.

Exit codes: 0 = certified / clean pass / success, 1 = violated,
2 = inconclusive, 64 = usage error, 65 = data error.  All randomness flows
from --seed through per-task derivation, so reports are byte-identical
across runs and thread counts for fixed flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import certify as cert
from . import completion as comp
from . import phylo as ph
from . import probe as pr
from .polynomials import minor_poly, MinorSpec
from .tensor import (
    FLOAT64,
    RATIONAL,
    load_tensor,
    random_rank,
    save_tensor,
    flatten,
    matrix_rank,
)
from .words import (
    SubsElement,
    canonical_minor_words,
    subs_act,
    subs_element,
    subs_witness,
    word_from_text,
)

USAGE_ERROR = 64
DATA_ERROR = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_threads() -> int:
    env = os.environ.get("TENSORCERT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


_GLOBAL_DEFAULTS = {
    "seed": 0,
    "field": None,
    "format": "text",
    "quiet": False,
    "threads": None,
}


def _add_globals(p, suppress: bool) -> None:
    # suppressed defaults let the flags appear after the subcommand without
    # clobbering values given before it
    def dflt(name):
        return argparse.SUPPRESS if suppress else _GLOBAL_DEFAULTS[name]

    p.add_argument("--seed", type=int, default=dflt("seed"),
                   help="master seed; all randomness derives from it")
    p.add_argument("--field", choices=[RATIONAL, FLOAT64], default=dflt("field"),
                   help="coerce tensors to this field before testing")
    p.add_argument("--format", choices=["json", "text"], default=dflt("format"))
    p.add_argument("--quiet", action="store_true", default=dflt("quiet"),
                   help="suppress the config echo")
    p.add_argument("--threads", type=int, default=dflt("threads"),
                   help="worker threads (results are independent of this)")


def build_parser() -> _Parser:
    p = _Parser(
        prog="tensorcert",
        description=(
            "Certify, bound, and probe the border rank of small dense "
            "tensors with exact rational arithmetic: flattening-minor "
            "certificates, randomised contraction tests, vanishing-ideal "
            "sampling, determinantal completion, substitution-monoid "
            "witnesses, and general-Markov-model membership."
        ),
    )
    _add_globals(p, suppress=False)
    common = _Parser(add_help=False)
    _add_globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random tensor of known rank",
                       parents=[common],
                       description="Sum of --rank random pure tensors with integer "
                                   "entries in [-coeff-bound, coeff-bound].")
    g.add_argument("--dims", required=True, help="comma-separated mode sizes, e.g. 3,3,3")
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--coeff-bound", type=int, default=10)
    g.add_argument("-o", "--output", help="tensor JSON destination (default stdout)")
    g.add_argument("--witness-out", help="write the pure factorization here")

    c = sub.add_parser("certify", help="test border rank <= k", parents=[common],
                       description="Direct flattening-minor tests (complete certificates "
                                   "for k <= 2); with --p0 or --method contraction, the "
                                   "randomised contraction test: contract away all but p0 "
                                   "modes along random pure covectors and test each "
                                   "contraction.  A violation is always a certificate of "
                                   "border rank > k.")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--p0", type=int, default=None, help="contraction target order")
    c.add_argument("--trials", type=int, default=5)
    c.add_argument("--coeff-bound", type=int, default=10)
    c.add_argument("--method", choices=["auto", "direct", "contraction"], default="auto")
    c.add_argument("file")

    f = sub.add_parser("flatten", help="flatten a tensor by a mode bipartition",
                       parents=[common],
                       description="Rows are indexed row-major over the given modes, "
                                   "columns over the complement; prints the matrix and "
                                   "its rank (a border-rank lower bound).")
    f.add_argument("--modes", required=True, help="comma-separated row modes, e.g. 1,3")
    f.add_argument("file")

    q = sub.add_parser("probe", help="estimate dim of the degree-d ideal part",
                       parents=[common],
                       description="Evaluates all degree-d entry monomials at random "
                                   "rank-<=k tensors; the nullity of the evaluation "
                                   "matrix estimates the dimension of the degree-d part "
                                   "of the vanishing ideal.  Default engine: two random "
                                   "31-bit primes with agreement required.")
    q.add_argument("--dims", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--modulus", default="auto",
                   help='"auto" (two primes), a prime, or 0 for exact rationals')
    q.add_argument("--oversample", type=float, default=1.5)
    q.add_argument("--kernel-out", help="write kernel polynomials (requires --modulus 0)")

    m = sub.add_parser("complete", help="complete a tensor from boundary data",
                       parents=[common],
                       description="Fills every coordinate of an order-q tensor from "
                                   "its base block and slabs, given an invertible k x k "
                                   "pivot minor supported in the prefix: each unknown is "
                                   "the unique value making its bordered (k+1)-minor "
                                   "vanish.")
    m.add_argument("--boundary", required=True, help="boundary JSON file")
    m.add_argument("--pivot", required=True, help="pivot JSON file")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("-o", "--output")
    m.add_argument("--verify", action="store_true",
                   help="check the completed tensor lies on the rank-<=k flattening locus")

    o = sub.add_parser("orbit", help="substitution-monoid actions and witnesses",
                       parents=[common])
    osub = o.add_subparsers(dest="orbit_command", required=True, parser_class=_Parser)
    ow = osub.add_parser("witness", help="find sigma with sigma(wa) = wb", parents=[common],
                         description="Constructs an element of the increasing-max "
                                     "substitution monoid carrying wa onto wb, by greedy "
                                     "embedding plus recursion on the symbol with the "
                                     "earliest last occurrence; validated by "
                                     "re-substitution.")
    ow.add_argument("--wa", required=True, help="digit word, e.g. 0010212011")
    ow.add_argument("--wb", required=True)
    ow.add_argument("--n", type=int, default=None, help="alphabet size")
    oa = osub.add_parser("act", help="apply a substitution element to a word", parents=[common])
    oa.add_argument("--sigma", required=True, help="JSON list of integer lists")
    oa.add_argument("--word", required=True)
    oa.add_argument("--n", type=int, default=None)
    om = osub.add_parser("minor", help="canonical minor words of a given size", parents=[common],
                         description="The word tuples whose stacked table contains every "
                                     "admissible nonzero column exactly once; every same-"
                                     "size minor is their image under one substitution "
                                     "element.")
    om.add_argument("--k", type=int, required=True, help="tuple length (minor size)")
    om.add_argument("--n", type=int, default=2)

    y = sub.add_parser("phylo", help="general Markov model tensors on trees",
                       parents=[common])
    ysub = y.add_subparsers(dest="phylo_command", required=True, parser_class=_Parser)
    ys = ysub.add_parser("simulate", help="joint leaf distribution of a random model",
                         parents=[common])
    ys.add_argument("--tree", required=True, help="Newick file")
    ys.add_argument("--k", type=int, required=True, help="hidden states")
    ys.add_argument("--stochastic", action="store_true")
    ys.add_argument("--coeff-bound", type=int, default=10)
    ys.add_argument("-o", "--output")
    yc = ysub.add_parser("check", help="membership test for the k-state model", parents=[common],
                         description="Every internal edge's leaf-split flattening must "
                                     "have rank <= k, and the star tensor at every "
                                     "internal vertex must pass the border-rank-<=k "
                                     "test (complete for k <= 2).")
    yc.add_argument("--tree", required=True)
    yc.add_argument("--k", type=int, required=True)
    yc.add_argument("file")
    return p


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        if not args.quiet and "config" in payload:
            sys.stdout.write(f"config: {json.dumps(payload['config'], sort_keys=True)}\n")
        for line in text_lines:
            sys.stdout.write(line + "\n")


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad dims {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise UsageError(f"bad dims {text!r}")
    return dims


def _load(args, path):
    t = load_tensor(path)
    if args.field == FLOAT64 and t.field == RATIONAL:
        t = t.to_float()
    elif args.field == RATIONAL and t.field == FLOAT64:
        raise UsageError("cannot promote a float tensor to the exact field")
    return t


def _cmd_gen(args) -> int:
    dims = _parse_dims(args.dims)
    t, fact = random_rank(dims, args.rank, seed=args.seed, coeff_bound=args.coeff_bound)
    if args.field == FLOAT64:
        t = t.to_float()
    config = {
        "command": "gen",
        "dims": list(dims),
        "rank": args.rank,
        "seed": args.seed,
        "coeff_bound": args.coeff_bound,
        "field": t.field,
    }
    if args.output:
        save_tensor(t, args.output)
        payload = {"config": config, "written": args.output}
        _emit(args, payload, [f"wrote {t} to {args.output}"])
    else:
        payload = {"config": config, "tensor": t.to_json()}
        _emit(args, payload, [json.dumps(t.to_json(), sort_keys=True)])
    if args.witness_out:
        with open(args.witness_out, "w") as fh:
            json.dump(fact.to_json(), fh, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_certify(args) -> int:
    t = _load(args, args.file)
    threads = args.threads if args.threads is not None else _default_threads()
    config = cert.TestConfig(
        k=args.k,
        p0=args.p0,
        trials=args.trials,
        seed=args.seed,
        coeff_bound=args.coeff_bound,
        threads=threads,
    )
    method = args.method
    if method == "auto":
        method = "contraction" if args.p0 is not None else "direct"
    if method == "contraction":
        report = cert.random_contraction_test(t, config)
    else:
        inner = cert._inner_test(t, args.k, config)
        report = cert.CertReport(
            inner.verdict, args.k, inner.detail, inner.evidence,
            inner.residuals, inner.stats, config.echo(),
        )
    payload = dict(report.to_json())
    payload.setdefault("config", config.echo())
    payload["config"]["command"] = "certify"
    payload["config"]["method"] = method
    payload["config"]["file"] = args.file
    lines = [f"verdict: {report.verdict}" + (f" ({report.detail})" if report.detail else "")]
    if report.evidence:
        lines.append(f"evidence: {json.dumps(report.evidence, sort_keys=True)}")
    _emit(args, payload, lines)
    return report.exit_code()


def _cmd_flatten(args) -> int:
    t = _load(args, args.file)
    modes = _parse_dims(args.modes)
    mat = flatten(t, modes)
    rank = matrix_rank(mat)
    config = {"command": "flatten", "modes": list(modes), "file": args.file}
    payload = {"config": config, "matrix": mat.to_json(), "rank": rank}
    _emit(args, payload, [f"shape {mat.dims[0]}x{mat.dims[1]}, rank {rank}",
                          json.dumps(mat.to_json(), sort_keys=True)])
    return 0


def _cmd_probe(args) -> int:
    dims = _parse_dims(args.dims)
    modulus = args.modulus
    if modulus != "auto":
        try:
            modulus = int(modulus)
        except ValueError:
            raise UsageError(f"bad modulus {args.modulus!r}")
    result = pr.ideal_degree_dim(
        dims,
        args.k,
        args.degree,
        oversample=args.oversample,
        seed=args.seed,
        modulus=modulus,
        kernel=bool(args.kernel_out),
    )
    if args.kernel_out:
        with open(args.kernel_out, "w") as fh:
            json.dump([f.to_json() for f in result.kernel], fh, sort_keys=True)
            fh.write("\n")
    payload = result.to_json()
    if args.kernel_out:
        payload.pop("kernel", None)
    payload["config"] = {
        "command": "probe",
        "dims": list(dims),
        "k": args.k,
        "degree": args.degree,
        "modulus": args.modulus,
        "oversample": args.oversample,
        "seed": args.seed,
    }
    _emit(args, payload, [
        f"monomials: {result.monomial_count}, samples: {result.sample_count}",
        f"nullity (est. ideal dim in degree {args.degree}): {result.nullity}",
    ])
    return 0


def _cmd_complete(args) -> int:
    with open(args.boundary) as fh:
        boundary = comp.boundary_from_json(json.load(fh))
    with open(args.pivot) as fh:
        pivot = comp.pivot_from_json(json.load(fh), boundary.n)
    config = {
        "command": "complete",
        "boundary": args.boundary,
        "pivot": args.pivot,
        "k": args.k,
    }
    try:
        t = comp.complete_tensor(boundary, pivot, args.k)
    except comp.ZeroPivotError as e:
        _emit(args, {"config": config, "error": str(e)}, [f"inconclusive: {e}"])
        return 2
    lines = [f"completed order-{t.order} tensor"]
    payload = {"config": config}
    if args.verify:
        bad = comp.verify_on_variety(t, args.k)
        payload["on_variety"] = not bad
        lines.append(f"on rank-<={args.k} flattening locus: {not bad}")
    if args.output:
        save_tensor(t, args.output)
        payload["written"] = args.output
        lines.append(f"wrote {args.output}")
    else:
        payload["tensor"] = t.to_json()
        lines.append(json.dumps(t.to_json(), sort_keys=True))
    _emit(args, payload, lines)
    return 0


def _cmd_orbit(args) -> int:
    if args.orbit_command == "witness":
        n = args.n or max(
            (max((int(ch) for ch in w), default=0) for w in (args.wa, args.wb)),
            default=0,
        ) + 1
        n = max(n, 2)
        wa = word_from_text(args.wa, n)
        wb = word_from_text(args.wb, n)
        sigma = subs_witness(wa, wb)
        config = {"command": "orbit witness", "wa": args.wa, "wb": args.wb, "n": n}
        if sigma is None:
            _emit(args, {"config": config, "witness": None}, ["no witness"])
            return 2
        ok = subs_act(sigma, wa) == wb
        payload = {"config": config, "witness": sigma.to_json(), "valid": ok}
        _emit(args, payload, [f"sigma = {sigma.to_json()}", f"re-substitution valid: {ok}"])
        return 0
    if args.orbit_command == "act":
        sigma = subs_element(json.loads(args.sigma))
        n = args.n or max((int(ch) for ch in args.word), default=0) + 1
        n = max(n, 2)
        w = word_from_text(args.word, n)
        out = subs_act(sigma, w)
        payload = {
            "config": {"command": "orbit act", "n": n},
            "word": out.to_text(),
        }
        _emit(args, payload, [out.to_text()])
        return 0
    if args.orbit_command == "minor":
        us, vs = canonical_minor_words(args.k, args.n)
        spec = MinorSpec(us, vs)
        payload = {
            "config": {"command": "orbit minor", "k": args.k, "n": args.n},
            "rows": [w.to_text() for w in us],
            "cols": [w.to_text() for w in vs],
            "determinant": str(minor_poly(spec)),
        }
        _emit(args, payload, [
            f"rows: {[w.to_text() for w in us]}",
            f"cols: {[w.to_text() for w in vs]}",
            f"det = {minor_poly(spec)}",
        ])
        return 0
    raise UsageError("unknown orbit subcommand")


def _cmd_phylo(args) -> int:
    with open(args.tree) as fh:
        tree = ph.parse_newick(fh.read())
    if args.phylo_command == "simulate":
        params = ph.random_params(
            tree, args.k, seed=args.seed, stochastic=args.stochastic,
            coeff_bound=args.coeff_bound,
        )
        t = ph.model_tensor(tree, params)
        config = {
            "command": "phylo simulate",
            "tree": args.tree,
            "k": args.k,
            "stochastic": args.stochastic,
            "seed": args.seed,
            "leaves": list(tree.leaf_names),
        }
        if args.output:
            save_tensor(t, args.output)
            _emit(args, {"config": config, "written": args.output},
                  [f"wrote {t} to {args.output}"])
        else:
            _emit(args, {"config": config, "tensor": t.to_json()},
                  [json.dumps(t.to_json(), sort_keys=True)])
        return 0
    if args.phylo_command == "check":
        t = _load(args, args.file)
        report = ph.check_membership(t, tree, args.k)
        payload = report.to_json()
        payload["config"] = {
            "command": "phylo check",
            "tree": args.tree,
            "k": args.k,
            "file": args.file,
            "leaves": list(tree.leaf_names),
        }
        lines = [f"verdict: {report.verdict}"]
        for e in report.edge_checks:
            lines.append(f"edge split {e['split']}: rank {e['rank']} (ok={e['ok']})")
        for v in report.vertex_checks:
            lines.append(f"vertex {v['vertex']} blocks {v['blocks']}: {v['verdict']}")
        _emit(args, payload, lines)
        if report.verdict == "violated":
            return 1
        if report.verdict == "certified_le_k":
            return 0
        return 0 if report.passed else 2
    raise UsageError("unknown phylo subcommand")


_COMMANDS = {
    "gen": _cmd_gen,
    "certify": _cmd_certify,
    "flatten": _cmd_flatten,
    "probe": _cmd_probe,
    "complete": _cmd_complete,
    "orbit": _cmd_orbit,
    "phylo": _cmd_phylo,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return USAGE_ERROR
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as e:
        sys.stderr.write(f"data error: {e}\n")
        return DATA_ERROR


def main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()
