"""Command-line front end: run learner/stream experiments, sweep over horizons,
and verify the numeric property suite.

Exit codes: 0 success, 1 invalid configuration, 2 learner failure,
3 failed verification.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

from . import bench, streams, verify

ALGOS = ("aioli", "ogd", "ons", "ftrl", "zero")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv_atomic(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=ALGOS, default="aioli")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--B", type=float, default=None,
                   help="comparator radius; defaults to log(n) on the adversarial stream")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="regularization; defaults to 1/B^2")
    p.add_argument("--stream", choices=("adversarial", "gaussian", "file"),
                   default="adversarial")
    p.add_argument("--stream-file", default=None, help="path for --stream file")
    p.add_argument("--chi", type=int, choices=(-1, 1), default=1)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=_parse_int_list, default=None,
                   help="comma-separated replicate seeds")
    p.add_argument("--inner-steps", type=int, default=None)
    p.add_argument("--inner-tol", type=float, default=None)
    p.add_argument("--out", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aioli")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one learner on one stream, write CSV traces")
    _add_common(run)
    sweep = sub.add_parser("sweep", help="worst-of-two-averages regret over an n grid")
    _add_common(sweep)
    sweep.add_argument("--ns", type=_parse_int_list, required=True,
                       help="comma-separated horizon grid (>= 3 values)")
    sweep.add_argument("--algos", default=None,
                       help="comma-separated algorithms (default: the --algo value)")
    ver = sub.add_parser("verify", help="run the lemma/oracle property suite")
    ver.add_argument("--verbose", action="store_true")
    return parser


def _resolve_B(args) -> float:
    if args.B is not None:
        return args.B
    if args.stream == "adversarial":
        return math.log(args.n)
    return 3.0


def _make_spec(args, seed: int) -> streams.StreamSpec:
    if args.stream == "adversarial":
        return streams.StreamSpec(kind="adversarial", n=args.n, seed=seed,
                                  chi=args.chi, eps=args.eps, B=_resolve_B(args))
    if args.stream == "gaussian":
        return streams.StreamSpec(kind="gaussian", n=args.n, seed=seed, d=args.d,
                                  B=_resolve_B(args), R=args.R)
    if args.stream_file is None:
        raise ValueError("--stream file requires --stream-file")
    return streams.StreamSpec(kind="file", n=args.n, path=args.stream_file)


def cmd_run(args) -> int:
    B = _resolve_B(args)
    lam = args.lam if args.lam is not None else 1.0 / B ** 2
    seeds = args.seeds if args.seeds else [args.seed]
    out = Path(args.out)
    d = 1 if args.stream == "adversarial" else args.d
    summary_rows = []
    for seed in seeds:
        spec = _make_spec(args, seed)
        examples = streams.make_stream(spec)
        learner = bench.make_learner(args.algo, d, B, args.R, lam, args.n,
                                     args.inner_steps, args.inner_tol)
        trace = bench.run_experiment(learner, examples, B)
        cum_loss = 0.0
        rows = []
        for i, loss_t in enumerate(trace.losses):
            cum_loss += loss_t
            rows.append([i + 1, loss_t, cum_loss, trace.cum_regret[i],
                         trace.predict_ns[i], trace.update_ns[i]])
        _write_csv_atomic(out / f"trace_{args.algo}_{seed}.csv",
                          ["t", "loss", "cum_loss", "cum_regret", "predict_ns", "update_ns"],
                          rows)
        chi = args.chi if args.stream == "adversarial" else ""
        if args.algo == "aioli":
            theta_norm = float((trace.comparator ** 2).sum() ** 0.5)
            bound = bench.theorem1_bound(lam, B, args.R, d, args.n, theta_norm)
            ok = trace.final_regret <= bound + 1e-3
            summary_rows.append([args.algo, args.n, seed, chi, trace.final_regret,
                                 bound, ok])
        else:
            summary_rows.append([args.algo, args.n, seed, chi, trace.final_regret,
                                 "", ""])
    _write_csv_atomic(out / "summary.csv",
                      ["algo", "n", "seed", "chi", "final_regret", "bound_thm1", "bound_ok"],
                      summary_rows)
    return 0


def cmd_sweep(args) -> int:
    if len(args.ns) < 3:
        raise ValueError("sweep needs at least 3 horizon values for a slope fit")
    algos = ([a.strip() for a in args.algos.split(",")] if args.algos else [args.algo])
    for a in algos:
        if a not in ALGOS:
            raise ValueError(f"unknown algorithm {a!r}")
    seeds = args.seeds if args.seeds else [args.seed + i for i in range(10)]
    out = Path(args.out)
    rows = []
    for algo in algos:
        ns_done: list[int] = []
        regrets: list[float] = []
        for n in sorted(args.ns):
            worst = bench.worst_average_regret(algo, n, seeds, eps=args.eps,
                                               lam=args.lam, R=args.R)
            ns_done.append(n)
            regrets.append(worst)
            slope = (bench.loglog_slope(ns_done, regrets)
                     if len([r for r in regrets if r > 0]) >= 3 else "")
            rows.append([algo, n, worst, slope])
        if len([r for r in regrets if r > 0]) >= 3:
            slope = bench.loglog_slope(ns_done, regrets)
            print(f"{algo}: log-log slope = {slope:.4f}")
        else:
            # improper learners can beat the ball comparator outright, leaving
            # no positive regret to fit; that is a sub-polynomial outcome
            print(f"{algo}: log-log slope undefined (regret non-positive)")
    _write_csv_atomic(out / "sweep.csv",
                      ["algo", "n", "worst_avg_regret", "slope_so_far"], rows)
    return 0


def cmd_verify(args) -> int:
    results = verify.run_all()
    width = max(len(r.name) for r in results)
    for r in results:
        line = f"{r.name:<{width}}  {'PASS' if r.ok else 'FAIL'}"
        if args.verbose:
            line += f"  min_slack={r.min_slack:.3e}"
        print(line)
    for r in results:
        if not r.ok:
            print(f"verification failed: {r.name}", file=sys.stderr)
            return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except bench.LearnerFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
