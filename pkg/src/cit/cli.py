"""Command-line front end.

Every invocation prints one JSON (or CSV) report carrying the tool version,
the seed, and the full configuration, so results can be reproduced from the
report alone. Module errors exit nonzero with a machine-readable error
object on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, chains, protocols, rates, simulate, sources, structure, wyner
from .errors import CitError
from .pmf import JointPMF, entropy, load_pmf, mutual_information
from .sources import ConstraintViolation


def _threads_default() -> int:
    env = os.environ.get("CIT_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cit",
        description="Common-information quantities and secret-key communication rates "
                    "for finite joint sources.",
    )
    parser.add_argument("--version", action="version", version=f"cit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pmf_required=True):
        if pmf_required:
            p.add_argument("--pmf", required=True, help="path to a pmf JSON file")
        p.add_argument("--output", help="write the report to this path instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=_threads_default())

    p = sub.add_parser("info", help="entropies and mutual information")
    common(p)

    p = sub.add_parser("suffstat", help="minimal sufficient statistics of both sides")
    common(p)

    p = sub.add_parser("gk", help="maximal common function and its entropy")
    common(p)

    p = sub.add_parser("wyner", help="upper bound on the splitting-variable rate")
    common(p)
    p.add_argument("--w-size", type=int, default=None)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--penalty", type=_float_list, default=(1.0, 10.0, 100.0, 1000.0))

    p = sub.add_parser("ici", help="r-round interactive common-information bounds")
    common(p)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--mode", choices=("exact1", "det", "cont", "all"), default="all")
    p.add_argument("--initiator", choices=("x", "y"), default="x")
    p.add_argument("--caps", type=_int_list, default=None, help="per-round size caps, e.g. 2,3")
    p.add_argument("--sizes", type=_int_list, default=None, help="sizes for the randomized search")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--restarts", type=int, default=8)

    p = sub.add_parser("rates", help="assembled rate report")
    common(p)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--caps", type=_int_list, default=None)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--no-continuous", action="store_true")

    p = sub.add_parser("check", help="exact identity suites over seeded random instances")
    p.add_argument("identity", choices=("lemma1", "decomp", "el5"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=2, help="blocklength for protocol checks")
    p.add_argument("--alphabet", type=int, default=3, help="max alphabet size")
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--output", help="write the report to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=_threads_default())

    p = sub.add_parser("simulate", help="Monte Carlo binning and key-agreement runs")
    p.add_argument("kind", choices=("sw", "crsk"))
    common(p)
    p.add_argument("--n", type=_int_list, default=(16,), help="blocklength(s), e.g. 8,16,24")
    p.add_argument("--rate", type=float, default=None, help="binning rate for sw")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--chain", default="copy", help="chain JSON path, or 'copy'")
    p.add_argument("--key-rate", type=float, default=0.1)
    p.add_argument("--slack", type=float, default=0.25)

    p = sub.add_parser("example", help="built-in sources run through the rate report")
    p.add_argument("which", choices=("bss", "gain"))
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--b", type=float, default=0.15)
    p.add_argument("--c", type=float, default=0.15)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--output", help="write the report to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_threads_default())

    return parser


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}{k}." if prefix else f"{k}."))
    elif isinstance(obj, (list, tuple)):
        rows.append((prefix.rstrip("."), json.dumps(obj)))
    else:
        rows.append((prefix.rstrip("."), json.dumps(obj)))
    return rows


def _emit(report: dict, args) -> None:
    if getattr(args, "format", "json") == "csv":
        result = report.get("result", report)
        if isinstance(result, list):
            keys = sorted({k for row in result for k in row})
            lines = [",".join(keys)]
            for row in result:
                lines.append(",".join(json.dumps(row.get(k)) for k in keys))
            text = "\n".join(lines) + "\n"
        else:
            text = "\n".join(f"{k},{v}" for k, v in _flatten(report)) + "\n"
    else:
        text = json.dumps(report, indent=2) + "\n"
    output = getattr(args, "output", None)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(args, config: dict, result) -> dict:
    return {
        "tool": "cit",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "config": config,
        "result": result,
    }


def _info_result(pmf: JointPMF) -> dict:
    t = pmf.to_tensor()
    return {
        "h_x": entropy(t, "x"),
        "h_y": entropy(t, "y"),
        "h_xy": entropy(t, ("x", "y")),
        "mi": mutual_information(t, "x", "y"),
        "zero_x_symbols": list(pmf.zero_x_symbols),
        "zero_y_symbols": list(pmf.zero_y_symbols),
        "pmf": pmf.to_json(),
    }


def _run_check(args) -> dict:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    hi = max(2, args.alphabet)
    for _ in range(args.count):
        nx = int(rng.integers(2, hi + 1))
        ny = int(rng.integers(2, hi + 1))
        pmf = sources.random_pmf(rng, nx, ny)
        if args.identity == "el5":
            r = int(rng.integers(1, args.rounds + 1))
            kernels = []
            prior: tuple[int, ...] = ()
            for j in range(1, r + 1):
                parent = nx if chains.speaker_of(j, "x") == "x" else ny
                size = int(rng.integers(2, 4))
                flat = rng.dirichlet(np.ones(size), size=parent * int(np.prod(prior, dtype=int) or 1))
                kernels.append(flat.reshape((parent,) + prior + (size,)))
                prior += (size,)
            res = chains.chain_objective(pmf, chains.AuxiliaryChain("x", tuple(kernels)))
            t = pmf.to_tensor()
            mi = mutual_information(t, "x", "y")
            violation = abs(res.objective - mi + res.residual - sum(res.per_round_terms))
        else:
            n = int(rng.integers(1, args.n + 1))
            r = int(rng.integers(1, args.rounds + 1))
            sizes = tuple(int(rng.integers(2, 4)) for _ in range(r))
            proto = protocols.random_protocol(int(rng.integers(1 << 31)), n, r, sizes, nx, ny)
            if args.identity == "lemma1":
                chk = protocols.lemma1_check(pmf, proto)
                violation = max(0.0, -chk["slack"])
            else:
                j_table = protocols.random_cr_table(int(rng.integers(1 << 31)), pmf, n, 3)
                chk = protocols.decomposition_check(pmf, proto, j_table)
                violation = abs(chk["difference"])
        worst = max(worst, violation)
    return {
        "identity": args.identity,
        "count": args.count,
        "max_violation": worst,
        "pass": bool(worst <= 1e-9),
    }


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (CitError, ValueError, OSError, KeyError) as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stdout.write(json.dumps(error, indent=2) + "\n")
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "info":
        pmf = load_pmf(args.pmf)
        _emit(_envelope(args, {"pmf": args.pmf}, _info_result(pmf)), args)
        return 0

    if cmd == "suffstat":
        pmf = load_pmf(args.pmf)
        g1 = structure.minimal_sufficient_statistic(pmf, "x")
        g2 = structure.minimal_sufficient_statistic(pmf, "y")
        result = {
            "x": {**g1.to_json(), "entropy": structure.labeling_entropy(g1, pmf.marginal_x),
                  "zero_mass_symbols": list(g1.zero_mass_symbols)},
            "y": {**g2.to_json(), "entropy": structure.labeling_entropy(g2, pmf.marginal_y),
                  "zero_mass_symbols": list(g2.zero_mass_symbols)},
        }
        _emit(_envelope(args, {"pmf": args.pmf}, result), args)
        return 0

    if cmd == "gk":
        pmf = load_pmf(args.pmf)
        lab_x, lab_y = structure.gk_common_function(pmf)
        result = {
            "x": lab_x.to_json(),
            "y": lab_y.to_json(),
            "h_mcf": structure.gk_ci(pmf),
        }
        _emit(_envelope(args, {"pmf": args.pmf}, result), args)
        return 0

    if cmd == "wyner":
        pmf = load_pmf(args.pmf)
        config = wyner.WynerConfig(
            w_size=args.w_size, restarts=args.restarts, max_iter=args.max_iter,
            penalty_schedule=args.penalty, seed=args.seed, threads=args.threads,
        )
        res = wyner.wyner_minimize(pmf, config)
        _emit(_envelope(args, {"pmf": args.pmf, **config.to_json()}, res.to_json()), args)
        return 0

    if cmd == "ici":
        pmf = load_pmf(args.pmf)
        result = {}
        config = {
            "pmf": args.pmf, "rounds": args.rounds, "mode": args.mode,
            "initiator": args.initiator, "caps": list(args.caps) if args.caps else None,
            "sizes": list(args.sizes) if args.sizes else None, "budget": args.budget,
            "restarts": args.restarts,
        }
        if args.mode in ("exact1", "all"):
            result["exact1"] = {
                "initiator": args.initiator,
                "value": chains.ci1_exact(pmf, args.initiator),
            }
        if args.mode in ("det", "all"):
            det = chains.det_chain_search(
                pmf, args.rounds, args.caps, budget=args.budget,
                initiator=args.initiator, threads=args.threads,
            )
            result["det"] = det.to_json()
        if args.mode in ("cont", "all"):
            nx, ny = pmf.shape
            sizes = args.sizes or chains.effective_caps(nx, ny, args.rounds, args.caps, "x")
            cont = chains.continuous_chain_minimize(
                pmf, args.rounds, sizes,
                chains.ChainOptConfig(restarts=args.restarts, seed=args.seed,
                                      threads=args.threads),
            )
            result["cont"] = cont.to_json()
        _emit(_envelope(args, config, result), args)
        return 0

    if cmd == "rates":
        pmf = load_pmf(args.pmf)
        config = rates.RateConfig(
            rounds=args.rounds, seed=args.seed, threads=args.threads,
            det_caps=args.caps, det_budget=args.budget,
            include_continuous=not args.no_continuous,
        )
        rep = rates.rate_report(pmf, args.rounds, config)
        result = {**rep.to_json(), "pmf": pmf.to_json()}
        _emit(_envelope(args, config.to_json(), result), args)
        return 0

    if cmd == "check":
        result = _run_check(args)
        config = {"identity": args.identity, "count": args.count, "n": args.n,
                  "alphabet": args.alphabet, "rounds": args.rounds}
        _emit(_envelope(args, config, result), args)
        return 0 if result["pass"] else 1

    if cmd == "simulate":
        pmf = load_pmf(args.pmf)
        if args.kind == "sw":
            if args.rate is None:
                raise ValueError("simulate sw needs --rate")
            result = [
                simulate.sw_binning_simulate(pmf, n, args.rate, args.trials, args.seed).to_json()
                for n in args.n
            ]
            config = {"pmf": args.pmf, "rate": args.rate, "trials": args.trials,
                      "n": list(args.n)}
            _emit(_envelope(args, config, result), args)
            return 0
        if args.chain == "copy":
            chain = simulate.default_copy_chain(pmf)
        else:
            with open(args.chain) as fh:
                chain = chains.chain_from_json(json.load(fh))
        reports = [
            simulate.cr_sk_simulate(pmf, chain, n, args.key_rate, args.trials,
                                    args.seed, args.slack).to_json()
            for n in args.n
        ]
        config = {"pmf": args.pmf, "chain": args.chain, "key_rate": args.key_rate,
                  "trials": args.trials, "slack": args.slack, "n": list(args.n)}
        _emit(_envelope(args, config, reports if len(reports) > 1 else reports[0]), args)
        return 0

    if cmd == "example":
        if args.which == "bss":
            pmf = sources.bss_pmf(args.delta)
            closed = chains.bss_closed_form(args.delta).to_json()
            config = {"which": "bss", "delta": args.delta, "rounds": args.rounds}
        else:
            try:
                pmf = sources.gain_pmf(args.a, args.b, args.c)
            except ConstraintViolation:
                raise
            closed = None
            config = {"which": "gain", "a": args.a, "b": args.b, "c": args.c,
                      "rounds": args.rounds}
        rep = rates.rate_report(
            pmf, args.rounds,
            rates.RateConfig(rounds=args.rounds, seed=args.seed, threads=args.threads),
        )
        result = {**rep.to_json(), "pmf": pmf.to_json()}
        if closed is not None:
            result["closed_form"] = closed
        _emit(_envelope(args, config, result), args)
        return 0

    raise ValueError(f"unknown command {cmd!r}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
