"""Command-line interface.

Subcommands
-----------
run         execute a grid experiment described by a JSON spec file
zoo         list the built-in target distributions or emit one to a file
meantest    run the mean tester directly against a target
subconduni  run the recursive uniformity tester directly against a target
theorylab   brute-force check one of the small-n structural facts

Exit codes: 0 success, 1 usage error, 2 runtime error (including a theory
check that finds a counterexample).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .blowup import explicit_moments, gram_moments
from .harness import (
    ExperimentSpec,
    resolve_target,
    run_experiment,
)
from .meantest import MeanTestConfig, mean_tester
from .model import DensePmf, Decision, ProductDistribution
from .oracle import ScondOracle
from .rng import stream
from .theory import (
    SCALE,
    ZERO,
    build_orientation,
    check_greedy_property,
    evaluate_robust_pisier,
    greedy_ordering_valid,
    probe_restriction_theorem,
    random_dense_pmf,
    verify_chain_rule,
    verify_contributing_bias,
    verify_graph_to_mean,
    verify_khintchine,
    verify_variance_bound,
)
from .uniformity import SubCondConfig, subcond_uni
from .zoo import (
    ZooEntry,
    instantiate,
    parse_spec_string,
    save_entry,
    zoo_kinds,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_or_auto(text: str):
    if text == "auto":
        return None
    return int(text)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Decision):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(doc, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _write_csv(header: str, rows: list, path: str | None) -> None:
    text = "\n".join([header] + rows) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fmt(x) -> str:
    return "%.17g" % float(x)


# ---------------------------------------------------------------------------
# run


def _cmd_run(args) -> int:
    spec = ExperimentSpec.from_json_file(args.spec)
    result = run_experiment(spec, workers=args.workers)
    for cell in result["summary"]["cells"]:
        print(
            f"n={cell['n']} eps={cell['eps']:g}: "
            f"accept {cell['accepts']}/{cell['trials']} "
            f"(reject {cell['rejects']}, error {cell['errors']}), "
            f"mean queries {cell['mean_queries']:.1f}"
        )
    if spec.out_csv:
        print(f"csv written to {spec.out_csv}")
    if spec.out_json:
        print(f"summary written to {spec.out_json}")
    return 0


# ---------------------------------------------------------------------------
# zoo


def _cmd_zoo(args) -> int:
    if args.zoo_cmd == "list":
        for kind, doc in sorted(zoo_kinds().items()):
            print(f"{kind:16s} {doc}")
        return 0
    # emit
    entry = parse_spec_string(args.kind)
    instantiate(entry, args.n)  # validate the entry at this dimension
    save_entry(entry, args.out)
    print(f"zoo entry {entry.kind!r} written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# meantest / subconduni


def _cmd_meantest(args) -> int:
    cfg = MeanTestConfig(args.eps, preset=args.preset, q=args.q, k0=args.k0)
    rows = []
    accepts = 0
    total_queries = 0
    for trial in range(args.trials):
        target = resolve_target(args.dist, args.n)
        oracle = ScondOracle(target, stream(args.seed, 0, trial))
        verdict = mean_tester(oracle, cfg)
        accepts += verdict.decision is Decision.ACCEPT
        total_queries += verdict.queries_used
        rows.append(
            ",".join(
                [
                    str(trial),
                    verdict.decision.value,
                    str(verdict.queries_used),
                    ";".join(_fmt(z) for z in verdict.trace["z_levels"]),
                    ";".join(_fmt(t) for t in verdict.trace["tau_levels"]),
                ]
            )
        )
    _write_csv("trial,decision,queries,z_levels,tau_levels", rows, args.out)
    print(
        f"meantest: accept {accepts}/{args.trials}, total queries {total_queries}",
        file=sys.stderr,
    )
    return 0


def _cmd_subconduni(args) -> int:
    cfg = SubCondConfig.paper() if args.preset == "paper" else SubCondConfig.practical()
    rows = []
    traces = []
    accepts = errors = 0
    total_queries = 0
    for trial in range(args.trials):
        target = resolve_target(args.dist, args.n)
        oracle = ScondOracle(target, stream(args.seed, 0, trial))
        verdict = subcond_uni(oracle, args.eps, cfg)
        accepts += verdict.decision is Decision.ACCEPT
        errors += verdict.decision is Decision.ERROR
        total_queries += verdict.queries_used
        rows.append(f"{trial},{verdict.decision.value},{verdict.queries_used}")
        traces.append(verdict.trace["tree"])
    _write_csv("trial,decision,queries", rows, args.out)
    if args.trace:
        _write_json(traces, args.trace)
    print(
        f"subconduni: accept {accepts}/{args.trials} (errors {errors}), "
        f"total queries {total_queries}",
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------------
# theorylab


def _check_chain(n, cases, rng):
    sigmas = (0.25, 0.5, 0.75)
    worst = 0.0
    failures = 0
    for c in range(cases):
        p = random_dense_pmf(rng, n)
        rep = verify_chain_rule(p, sigmas[c % len(sigmas)])
        worst = max(worst, rep.ratio)
        failures += rep.lhs > rep.rhs + 1e-9
    return failures == 0, failures, cases, {"max_ratio": worst}


def _check_probe(n, cases, rng):
    sigmas = (0.25, 0.5, 0.75)
    ratios = []
    for c in range(cases):
        p = random_dense_pmf(rng, n)
        rep = probe_restriction_theorem(p, sigmas[c % len(sigmas)])
        ratios.append(rep.ratio)
    arr = np.array(ratios)
    extras = {
        "min_ratio": float(arr.min()),
        "max_ratio": float(arr.max()),
        "mean_ratio": float(arr.mean()),
        "note": "ratios reported only; nothing asserted",
    }
    return True, 0, cases, extras


def _check_pisier(n, cases, rng):
    ratios = []
    for _ in range(cases):
        p = random_dense_pmf(rng, n)
        rep = evaluate_robust_pisier(p, s=1.0)
        ratios.append(rep.ratio)
    finite = np.array([r for r in ratios if math.isfinite(r)])
    extras = {
        "min_ratio": float(finite.min()) if finite.size else None,
        "max_ratio": float(finite.max()) if finite.size else None,
        "mean_ratio": float(finite.mean()) if finite.size else None,
        "note": "ratios reported only; nothing asserted",
    }
    return True, 0, cases, extras


def _check_greedy(n, cases, rng):
    failures = 0
    nonvac = 0
    for _ in range(cases):
        p = random_dense_pmf(rng, n)
        graphs = build_orientation(p)
        n_v = 1 << n
        if graphs.u.size != n * (1 << (n - 1)):
            failures += 1
            continue
        for k in graphs.scales():
            sel = (graphs.cls == SCALE) & (graphs.kappa == k)
            if not greedy_ordering_valid(
                n_v, graphs.u[sel], graphs.v[sel], graphs.orderings[k]
            ):
                failures += 1
        scales = graphs.scales()
        if scales:
            kappa = int(scales[rng.integers(len(scales))])
            out_deg = graphs.out_degrees(SCALE, kappa)
            size_u = int(rng.integers(1, n_v))
            big_u = rng.choice(n_v, size=size_u, replace=False)
            rest = np.setdiff1d(np.arange(n_v), big_u)
            v = int(rest[rng.integers(rest.size)])
            g = max(1, int(out_deg[big_u].max()))
            nonvac += 1
            if not check_greedy_property(graphs, kappa, big_u, v, g):
                failures += 1
    return failures == 0, failures, nonvac, {}


def _check_graphmean(n, cases, rng):
    failures = 0
    nonvac = 0
    for _ in range(cases):
        p = random_dense_pmf(rng, n)
        t = int(rng.integers(1, n))
        rep = verify_graph_to_mean(p, t, trials=10, rng=rng)
        failures += len(rep.failures)
        nonvac += rep.nonvacuous
    return failures == 0, failures, nonvac, {}


def _check_contributing(n, cases, rng):
    failures = 0
    nonvac = 0
    for _ in range(cases):
        p = random_dense_pmf(rng, n)
        rep = verify_contributing_bias(p, trials=10, rng=rng)
        failures += len(rep.failures)
        nonvac += rep.nonvacuous
    return failures == 0, failures, nonvac, {}


def _check_variance(n, cases, rng):
    targets = {
        "uniform": DensePmf.uniform(n),
        "planted": ProductDistribution(np.full(n, 0.3)).dense(),
        "random": random_dense_pmf(rng, n),
    }
    batches = max(200, cases)
    failures = 0
    extras = {}
    for name, p in targets.items():
        rep = verify_variance_bound(p, q=10, batches=batches, rng=rng)
        failures += not rep.ok
        extras[name] = {
            "z_mean": rep.extras["z_mean"],
            "mu_sq": rep.extras["mu_sq"],
            "z_var": rep.extras["z_var"],
            "bound": rep.extras["bound"],
        }
    return failures == 0, failures, len(targets), extras


def _check_blowupfact(n, cases, rng):
    failures = 0
    for _ in range(cases):
        p = random_dense_pmf(rng, n)
        for k in (0, 1):
            mu_sq_k, frob_sq_k = gram_moments(p, k)
            mu_sq_next, _ = gram_moments(p, k + 1)
            ok = math.isclose(mu_sq_next, frob_sq_k, rel_tol=1e-9, abs_tol=1e-12)
            if n ** (2 ** (k + 1)) <= 1 << 10:
                em = explicit_moments(p, k)
                ok &= math.isclose(em[0], mu_sq_k, rel_tol=1e-9, abs_tol=1e-12)
                ok &= math.isclose(em[1], frob_sq_k, rel_tol=1e-9, abs_tol=1e-12)
            failures += not ok
    return failures == 0, failures, cases, {}


def _check_khintchine(n, cases, rng):
    failures = 0
    for _ in range(cases):
        m = int(rng.integers(1, 13))
        a = rng.standard_normal(m)
        failures += not verify_khintchine(a)
    return failures == 0, failures, cases, {}


_CHECKS = {
    "chain": _check_chain,
    "pisier": _check_pisier,
    "greedy": _check_greedy,
    "graphmean": _check_graphmean,
    "contributing": _check_contributing,
    "variance": _check_variance,
    "blowupfact": _check_blowupfact,
    "khintchine": _check_khintchine,
    "probe": _check_probe,
}


def _cmd_theorylab(args) -> int:
    rng = stream(args.seed, 0, 0)
    ok, failures, nonvac, extras = _CHECKS[args.check](args.n, args.cases, rng)
    report = {
        "check": args.check,
        "n": args.n,
        "cases": args.cases,
        "seed": args.seed,
        "ok": bool(ok),
        "failures": int(failures),
        "nonvacuous": int(nonvac),
        "extras": extras,
    }
    if args.report:
        _write_json(report, args.report)
    status = "ok" if ok else "FAIL"
    print(
        f"theorylab {args.check}: {status} "
        f"({failures} failures / {nonvac} non-vacuous cases)"
    )
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypercube-tester", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a grid experiment from a JSON spec")
    p_run.add_argument("--spec", required=True, help="path to the experiment JSON")
    p_run.add_argument(
        "--workers",
        type=int,
        default=1,
        help="parallel worker processes (default 1 = sequential; capped by HT_THREADS)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_zoo = sub.add_parser("zoo", help="inspect or emit built-in distributions")
    zoo_sub = p_zoo.add_subparsers(dest="zoo_cmd", parser_class=_Parser)
    zoo_sub.add_parser("list", help="list available kinds")
    p_emit = zoo_sub.add_parser("emit", help="write a zoo entry to a JSON file")
    p_emit.add_argument(
        "--kind", required=True, help="kind shorthand, e.g. planted_product:0.25"
    )
    p_emit.add_argument("--n", type=int, required=True, help="dimension to validate at")
    p_emit.add_argument("--out", required=True, help="output JSON path")
    p_zoo.set_defaults(func=_cmd_zoo)

    p_mean = sub.add_parser("meantest", help="run the mean tester")
    p_mean.add_argument("--dist", required=True, help="zoo shorthand or JSON file")
    p_mean.add_argument("--eps", type=float, required=True)
    p_mean.add_argument("--n", type=int, required=True)
    p_mean.add_argument("--q", type=_int_or_auto, default=None, help="samples per side, or 'auto'")
    p_mean.add_argument("--k0", type=_int_or_auto, default=None, help="top level, or 'auto'")
    p_mean.add_argument("--trials", type=int, default=1)
    p_mean.add_argument("--seed", type=int, default=0)
    p_mean.add_argument("--preset", choices=("practical", "paper"), default="practical")
    p_mean.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p_mean.set_defaults(func=_cmd_meantest)

    p_sc = sub.add_parser("subconduni", help="run the recursive uniformity tester")
    p_sc.add_argument("--dist", required=True, help="zoo shorthand or JSON file")
    p_sc.add_argument("--eps", type=float, required=True)
    p_sc.add_argument("--n", type=int, required=True)
    p_sc.add_argument("--trials", type=int, default=1)
    p_sc.add_argument("--seed", type=int, default=0)
    p_sc.add_argument("--preset", choices=("practical", "paper"), default="practical")
    p_sc.add_argument("--trace", default=None, help="JSON path for recursion traces")
    p_sc.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p_sc.set_defaults(func=_cmd_subconduni)

    p_lab = sub.add_parser("theorylab", help="brute-force a structural fact at small n")
    p_lab.add_argument("--check", required=True, choices=sorted(_CHECKS))
    p_lab.add_argument("--n", type=int, default=4)
    p_lab.add_argument("--cases", type=int, default=100)
    p_lab.add_argument("--seed", type=int, default=0)
    p_lab.add_argument("--report", default=None, help="JSON report path")
    p_lab.set_defaults(func=_cmd_theorylab)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    if getattr(args, "command", None) == "zoo" and getattr(args, "zoo_cmd", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return int(args.func(args) or 0)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures: bad files, bad values, ...
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
