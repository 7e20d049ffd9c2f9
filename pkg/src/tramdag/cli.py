"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error.  TRAMDAG_SEED
serves as the default --seed wherever one is accepted.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dgp
from .causal import (
    counterfactual,
    predicted_odds_ratio,
    sample_interventional,
    sample_observational,
)
from .errors import TramDagError
from .evalmetrics import marginal_report
from .experiments import EXPERIMENT_NAMES, run_all, run_experiment
from .graph import parse_dag_spec, topological_order
from .model import (
    Dataset,
    TrainConfig,
    extract_coefficients,
    extract_shift_curve,
    fit,
    load_model,
    save_model,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); route to exit code 1
        raise _UsageError(message)


def _resolve_seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("TRAMDAG_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"TRAMDAG_SEED must be an integer, got {env!r}") from None


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise _UsageError(f"grid values must be numbers, got {text!r}") from None
    if step <= 0:
        raise _UsageError("grid step must be positive")
    if stop < start:
        raise _UsageError("grid stop must not be below start")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    return start + step * np.arange(count)


def _parse_assignments(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name or not value:
            raise _UsageError(f"--set expects NAME=VALUE, got {pair!r}")
        if name in out:
            raise _UsageError(f"--set names {name} twice")
        out[name] = value
    return out


def _numeric_assignments(raw: dict[str, str]) -> dict[str, float]:
    out = {}
    for name, value in raw.items():
        try:
            out[name] = float(value)
        except ValueError:
            raise _UsageError(f"--set {name}={value}: value must be numeric") from None
    return out


def _build_parser() -> _Parser:
    parser = _Parser(prog="tramdag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dgp", help="generate preset data")
    p.add_argument("--preset", required=True, choices=dgp.PRESETS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--dag-out", default=None,
                   help="also write the preset's model structure file")

    p = sub.add_parser("fit", help="train a model on a dataset")
    p.add_argument("--dag", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="observational (L1) samples")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("do", help="interventional (L2) samples")
    p.add_argument("--model", required=True)
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("cf", help="counterfactual (L3) for one observation")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True,
                   help="comma-separated values, topological order")
    p.add_argument("--obs-header", default=None,
                   help="comma-separated node names matching --obs")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE|NAME=alpha")
    p.add_argument("--alpha-grid", default=None, metavar="START:STOP:STEP")
    p.add_argument("--out", default=None)

    p = sub.add_parser("coef", help="print linear-shift coefficients")
    p.add_argument("--model", required=True)

    p = sub.add_parser("curve", help="export a complex-shift curve")
    p.add_argument("--model", required=True)
    p.add_argument("--edge", required=True, metavar="PARENT-CHILD")
    p.add_argument("--grid", required=True, metavar="START:STOP:STEP")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="compare two datasets column-wise")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--report", required=True)

    p = sub.add_parser("reproduce", help="run a benchmark experiment")
    p.add_argument("--experiment", required=True,
                   choices=EXPERIMENT_NAMES + ("all",))
    p.add_argument("--out-dir", default="reproduce_out")
    p.add_argument("--quick", action="store_true",
                   help="reduced n/epochs smoke run, same thresholds")

    return parser


def _cmd_dgp(args) -> int:
    seed = _resolve_seed(args.seed)
    data = dgp.generate(args.preset, args.n, seed)
    data.write_csv(
        args.out,
        discrete=dgp.preset_discrete(args.preset),
        comments=[f"preset = {args.preset}", f"n = {args.n}", f"seed = {seed}"],
    )
    if args.dag_out:
        with open(args.dag_out, "w", encoding="utf-8") as fh:
            fh.write(dgp.default_spec_text(args.preset))
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def _cmd_fit(args) -> int:
    with open(args.dag, "r", encoding="utf-8") as fh:
        spec = parse_dag_spec(fh.read())
    data = Dataset.read_csv(args.data)
    config = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        seed=_resolve_seed(args.seed),
        log_every=max(args.epochs // 10, 1),
    )
    model, history = fit(spec, data, config)
    save_model(model, args.out)
    history_path = os.path.join(os.path.dirname(os.path.abspath(args.out)), "history.csv")
    edges = list(history.coefficients)
    with open(history_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["epoch", "nll"] + edges) + "\n")
        for epoch, nll in enumerate(history.nll, start=1):
            cells = [str(epoch), repr(nll)]
            cells += [repr(history.coefficients[e][epoch - 1]) for e in edges]
            fh.write(",".join(cells) + "\n")
    print(f"final nll {history.nll[-1]:.6f}, model saved to {args.out}")
    return 0


def _model_discrete(model) -> list[bool]:
    return [node.is_discrete for node in model.nodes]


def _cmd_sample(args) -> int:
    model = load_model(args.model)
    samples = sample_observational(model, args.n, _resolve_seed(args.seed))
    samples.write_csv(args.out, discrete=_model_discrete(model))
    print(f"wrote {args.n} observational rows to {args.out}")
    return 0


def _cmd_do(args) -> int:
    model = load_model(args.model)
    do = _numeric_assignments(_parse_assignments(args.set))
    if not do:
        raise _UsageError("do requires at least one --set NAME=VALUE")
    samples = sample_interventional(model, do, args.n, _resolve_seed(args.seed))
    samples.write_csv(args.out, discrete=_model_discrete(model))
    print(f"wrote {args.n} rows under {samples.query} to {args.out}")
    return 0


def _observation_row(model, args) -> np.ndarray:
    try:
        values = [float(v) for v in args.obs.split(",")]
    except ValueError:
        raise _UsageError(f"--obs must be comma-separated numbers: {args.obs!r}") from None
    names = list(model.spec.names)
    row = np.zeros(len(names))
    if args.obs_header:
        header = [h.strip() for h in args.obs_header.split(",")]
        if sorted(header) != sorted(names) or len(values) != len(header):
            raise _UsageError(f"--obs-header must name each of {names} exactly once")
        for name, value in zip(header, values):
            row[names.index(name)] = value
    else:
        order = topological_order(model.spec)
        if len(values) != len(order):
            raise _UsageError(f"--obs needs {len(order)} values, got {len(values)}")
        for position, j in enumerate(order):
            row[j] = values[position]
    return row


def _cmd_cf(args) -> int:
    model = load_model(args.model)
    raw = _parse_assignments(args.set)
    if not raw:
        raise _UsageError("cf requires at least one --set")
    sweep = [name for name, value in raw.items() if value == "alpha"]
    if len(sweep) > 1:
        raise _UsageError("only one --set value may be 'alpha'")
    row = _observation_row(model, args)
    names = list(model.spec.names)

    if sweep:
        if args.alpha_grid is None:
            raise _UsageError("--set NAME=alpha requires --alpha-grid")
        alphas = _parse_grid(args.alpha_grid)
        fixed = _numeric_assignments({k: v for k, v in raw.items() if k != sweep[0]})
        lines = [",".join(["alpha"] + names)]
        for a in alphas:
            cf = counterfactual(model, row, {**fixed, sweep[0]: float(a)})
            lines.append(",".join([repr(float(a))] + [repr(float(v)) for v in cf]))
        text = "\n".join(lines) + "\n"
    else:
        cf = counterfactual(model, row, _numeric_assignments(raw))
        lines = [",".join(names), ",".join(repr(float(v)) for v in cf)]
        text = "\n".join(lines) + "\n"

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote counterfactuals to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_coef(args) -> int:
    model = load_model(args.model)
    coefs = extract_coefficients(model)
    if not coefs:
        print("model has no linear-shift coefficients")
        return 0
    print(f"{'parent':<10} {'child':<10} {'beta':>12} {'odds_ratio':>12}")
    for (parent, child), beta in coefs.items():
        print(f"{parent:<10} {child:<10} {beta:>12.6f} "
              f"{predicted_odds_ratio(beta):>12.6f}")
    return 0


def _cmd_curve(args) -> int:
    model = load_model(args.model)
    parent, sep, child = args.edge.partition("-")
    if not sep or not parent or not child:
        raise _UsageError(f"--edge expects PARENT-CHILD, got {args.edge!r}")
    grid = _parse_grid(args.grid)
    values = extract_shift_curve(model, parent, child, grid)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("x,shift\n")
        for x, v in zip(grid, values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")
    print(f"wrote {len(grid)} curve points to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    a = Dataset.read_csv(args.a)
    b = Dataset.read_csv(args.b)
    if set(a.names) != set(b.names):
        raise _UsageError(f"column names differ: {a.names} vs {b.names}")
    b_matrix = b.values[:, [b.names.index(n) for n in a.names]]
    discrete = [
        bool(np.all(a.column(n) == np.rint(a.column(n)))
             and np.all(b.column(n) == np.rint(b.column(n))))
        for n in a.names
    ]
    report = marginal_report(a.names, a.values, b_matrix, discrete)
    with open(args.report, "w", encoding="utf-8") as fh:
        fh.write("column,metric,value,mean_diff,var_ratio\n")
        for row in report.rows:
            fh.write(f"{row.name},{row.metric},{row.value!r},"
                     f"{row.mean_diff!r},{row.var_ratio!r}\n")
    worst = max(report.rows, key=lambda r: r.value)
    print(f"worst column {worst.name}: {worst.metric} = {worst.value:.4f}")
    return 0


def _cmd_reproduce(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    if args.experiment == "all":
        results = run_all(args.out_dir, quick=args.quick)
    else:
        results = [run_experiment(args.experiment, args.out_dir, quick=args.quick)]
    for result in results:
        print("\n".join(result.summary_lines()))
        print()
    return 0


_COMMANDS = {
    "dgp": _cmd_dgp,
    "fit": _cmd_fit,
    "sample": _cmd_sample,
    "do": _cmd_do,
    "cf": _cmd_cf,
    "coef": _cmd_coef,
    "curve": _cmd_curve,
    "eval": _cmd_eval,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TramDagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
