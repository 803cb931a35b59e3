"""Command-line harness: generate | run | compare | reproduce.

Exit codes: 0 when every requested run reached a terminal status (converged,
stagnated, iteration budget, or a per-method solver error recorded in its
summary); nonzero only for infrastructure failures such as unreadable
configs or missing data files.
"""

from __future__ import annotations

import argparse
import sys

from .errors import QjdError
from .experiments import (
    SCENARIO_NAMES,
    apply_overrides,
    config_from_file,
    generate_files,
    run_experiment,
    scenario_config,
)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override matrix/sampling seed")
    p.add_argument("--sigma", type=float, help="override Gaussian reference width")
    p.add_argument("--delta", type=float, help="override inverse regularization floor")
    p.add_argument("--max-iter", type=int, help="override iteration budget")
    p.add_argument("--shots", type=int, help="sample-based refinement shot count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjd", description="subspace eigensolver experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write Hamiltonian files and a manifest")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int)

    run = sub.add_parser("run", help="run one method from a config")
    run.add_argument("--config", required=True)
    run.add_argument("--method", required=True, help="method label, e.g. QJD")
    _add_common_flags(run)

    cmp_ = sub.add_parser("compare", help="run every configured method")
    cmp_.add_argument("--config", required=True)
    _add_common_flags(cmp_)

    rep = sub.add_parser("reproduce", help="run a pinned desk-scale scenario")
    rep.add_argument("scenario", choices=SCENARIO_NAMES)
    rep.add_argument("--methods", help="comma-separated subset of the scenario's labels")
    rep.add_argument("--pauli-file", help="Pauli-sum data file (water scenario)")
    _add_common_flags(rep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cfg = config_from_file(args.config)
            cfg = apply_overrides(cfg, seed=args.seed)
            for path in generate_files(cfg, args.out):
                print(path)
            return 0

        if args.command in ("run", "compare"):
            cfg = config_from_file(args.config)
        else:
            cfg = scenario_config(args.scenario, pauli_file=args.pauli_file)
        cfg = apply_overrides(
            cfg,
            seed=args.seed,
            sigma=args.sigma,
            delta=args.delta,
            max_iter=args.max_iter,
            shots=args.shots,
        )
        if args.command == "run":
            methods = (args.method,)
        elif args.command == "reproduce" and args.methods:
            methods = tuple(m.strip() for m in args.methods.split(","))
        else:
            methods = None
        results = run_experiment(cfg, args.out, methods=methods)
        for res in results:
            iters = res.iterations_to_convergence
            print(f"{res.label}: {res.status}"
                  + (f" in {iters} iterations" if iters is not None else ""))
        return 0
    except QjdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
