"""``lnop`` command-line entry point.

Verbs: gen, train, eval, superres, bench, verify, report. Training configs are
JSON files; ``--set key=value`` overrides them (dot paths address nested keys,
values parse as JSON when possible). Precedence is CLI > file > defaults, and
the resolved config is echoed into every report.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
3 I/O or format error.
"""
from __future__ import annotations

import argparse
import dataclasses
import inspect
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import FAMILIES, GENERATORS, PdeDataset, default_threads
from .errors import (
    ConfigError,
    ContractError,
    DimensionError,
    FormatError,
    MetricError,
    ModeError,
    NonFiniteError,
    ResolutionError,
    SolverError,
)
from .model import GridSpec, OperatorModel
from .train import RunReport, TrainConfig, bench, evaluate, machine_info, param_summary, train, version_stamp
from .train import write_table_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3



def exit_code(exc: BaseException) -> int | None:
    """Map an exception to its exit code; None for unexpected errors (bugs)."""
    # order matters: MetricError is also a ValueError
    if isinstance(exc, (NonFiniteError, SolverError, MetricError, ArithmeticError)):
        return EXIT_NUMERIC
    if isinstance(exc, (UsageError, ConfigError, DimensionError, ModeError, ResolutionError, ContractError,
                        ValueError)):
        return EXIT_USAGE
    if isinstance(exc, (FormatError, OSError)):
        return EXIT_IO
    return None


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ configs


def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply one ``dotted.key=value`` assignment in place."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    parts = key.split(".")
    node = cfg
    for depth, part in enumerate(parts[:-1]):
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {key!r}: {'.'.join(parts[:depth + 1])} is not a section")
        node = child
    node[parts[-1]] = parse_value(raw)


def _unknown_keys(d: dict, known: set[str]) -> list[str]:
    return sorted(k for k in d if k not in known)


def load_config(path: str | None, overrides: list[str], flags: dict) -> TrainConfig:
    cfg = dataclasses.asdict(TrainConfig())
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be an object")
        unknown = _unknown_keys(loaded, set(cfg))
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for assignment in overrides:
        apply_override(cfg, assignment)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    unknown = _unknown_keys(cfg, {f.name for f in dataclasses.fields(TrainConfig)})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    config = TrainConfig.from_dict(cfg)
    config.validate()
    return config


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -------------------------------------------------------------------- verbs


def cmd_gen(args) -> int:
    gen = GENERATORS[args.family]
    accepted = set(inspect.signature(gen).parameters)
    kwargs = {"count": args.count, "res": args.res, "seed": args.seed, "threads": args.threads}
    named = {"nu": args.nu, "t": args.t, "t_end": args.t_end, "fine_factor": args.fine_factor}
    for assignment in args.param:
        key, sep, raw = assignment.partition("=")
        if not sep:
            raise ConfigError(f"--param {assignment!r} is not of the form key=value")
        named[key] = parse_value(raw)
    for key, value in named.items():
        if value is None:
            continue
        if key not in accepted or key in kwargs:
            raise ConfigError(f"family {args.family!r} does not take parameter {key!r}")
        kwargs[key] = value
    dataset = gen(**kwargs)
    out = args.out or f"{args.family}_r{args.res}_n{args.count}_s{args.seed}.lnop"
    digest = dataset.write(out)
    print(f"{out} sha256={digest}")
    return EXIT_OK


def cmd_train(args) -> int:
    flags = {"arch": args.arch, "dataset": args.dataset, "seed": args.seed, "epochs": args.epochs,
             "out_dir": args.out_dir}
    config = load_config(args.config, args.set, flags)
    try:
        model, report = train(config)
    except NonFiniteError as exc:
        partial = getattr(exc, "report", None)
        if partial is not None and args.report:
            partial.write(args.report)
        raise
    if args.report:
        report.write(args.report)
    elif not config.out_dir:
        _dump(report.to_dict(), None)
    if args.model:
        model.save(args.model, {"config": config.to_dict()})
    summary = ", ".join(f"{k}: {v:.4g}%" for k, v in report.test_rel_l2.items())
    print(f"trained {config.arch}: final loss {report.train_loss[-1]:.5g}" + (f"; test rel-L2 {summary}" if summary else ""),
          file=sys.stderr)
    return EXIT_OK


def _eval_report(args, model: OperatorModel, rows: list[dict], verb: str) -> RunReport:
    config = {"verb": verb, "model": args.model, "dataset": args.dataset, "resolutions": args.resolutions,
              "range": args.range, "pipeline": getattr(args, "pipeline", None)}
    return RunReport(config=config, seed=model.seed, eval_table=rows,
                     test_rel_l2={str(r["resolution"]): r["rel_l2"] for r in rows},
                     param_counts=param_summary(model), version=version_stamp(), machine=machine_info())


def _eval_inputs(args):
    model = OperatorModel.load(args.model)
    dataset = PdeDataset.read(args.dataset)
    if args.range:
        start, _, stop = args.range.partition(":")
        dataset = dataset.subset(int(start or 0), int(stop) if stop else len(dataset))
    return model, dataset


def cmd_eval(args) -> int:
    model, dataset = _eval_inputs(args)
    resolutions = _int_list(args.resolutions) if args.resolutions else [model.dims[0]]
    rows = evaluate(model, dataset, resolutions)
    report = _eval_report(args, model, rows, "eval")
    if args.report:
        report.write(args.report)
    for row in rows:
        print(f"{row['resolution']}\t{row['rel_l2']:.6g}\t{row['pipeline']}")
    return EXIT_OK


def cmd_superres(args) -> int:
    model, dataset = _eval_inputs(args)
    rows = evaluate(model, dataset, _int_list(args.resolutions), pipeline=args.pipeline)
    report = _eval_report(args, model, rows, "superres")
    if args.report:
        report.write(args.report)
    if args.table:
        write_table_csv(rows, args.table)
    print("resolution\trel_l2\tpipeline")
    for row in rows:
        print(f"{row['resolution']}\t{row['rel_l2']:.6g}\t{row['pipeline']}")
    return EXIT_OK


def _synthetic(dims: list[int], count: int, seed: int) -> PdeDataset:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 1, *dims))
    y = rng.standard_normal((count, 1, *dims))
    return PdeDataset("synthetic", x, y, GridSpec.unit(dims), {"family": "synthetic", "seed": seed})


def cmd_bench(args) -> int:
    base = load_config(args.config, args.set, {"seed": args.seed})
    if args.dataset or base.dataset:
        dataset = PdeDataset.read(args.dataset or base.dataset)
    else:
        dataset = _synthetic(_int_list(args.dims), args.count, base.seed)
    configs = [dataclasses.replace(base, arch=a) for a in args.archs.split(",")]
    for cfg in configs:
        cfg.validate()
    result = bench(configs, dataset, epochs=args.epochs, warmup=args.warmup)
    result["config"] = base.to_dict()
    _dump(result, args.report)
    if args.report:
        for row in result["rows"]:
            print(f"{row['arch']}\t{row['median_epoch_seconds']:.4f}s/epoch\tblock params {row['params_block']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suites

    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; expected some of {list(SUITES)}")
    results = run_suites(names)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("verify: all suites pass" if ok else "verify: FAILED")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_report(args) -> int:
    for path in args.reports:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not a JSON report ({exc})") from exc
        if not isinstance(data, dict) or "config" not in data:
            raise FormatError(f"{path}: missing 'config'; not a run report")
        report = RunReport.read(path)
        cfg = report.config
        print(f"== {path}")
        print(f"arch {cfg.get('arch', '-')}  seed {report.seed}  version {report.version}")
        if report.train_loss:
            print(f"epochs {len(report.train_loss)}  loss first {report.train_loss[0]:.5g}  last {report.train_loss[-1]:.5g}")
        if report.per_epoch_seconds:
            print(f"median epoch {float(np.median(report.per_epoch_seconds)):.4f}s")
        for row in report.eval_table:
            print(f"  res {row['resolution']}: rel-L2 {row['rel_l2']:.5g}% ({row['pipeline']})")
        if report.aborted:
            print(f"ABORTED: {report.aborted}")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lnop", description="Learnable-transform neural operators: data, training, evaluation.")
    p.add_argument("--version", action="version", version=f"lnop {__version__}")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $LNOP_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a PDE dataset")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--res", type=int, default=64)
    g.add_argument("--count", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nu", type=float)
    g.add_argument("--t", type=float, help="advection time")
    g.add_argument("--t-end", type=float, dest="t_end")
    g.add_argument("--fine-factor", type=int, dest="fine_factor")
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="other generator keyword")
    g.add_argument("--out", help="output path (sidecar goes to <out>.json)")
    g.set_defaults(func=cmd_gen)

    def config_args(sp):
        sp.add_argument("--config", help="JSON training config")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="config override")
        sp.add_argument("--seed", type=int)

    t = sub.add_parser("train", help="train a model and emit a run report")
    config_args(t)
    t.add_argument("--dataset")
    t.add_argument("--arch", choices=("learnable", "fourier"))
    t.add_argument("--epochs", type=int)
    t.add_argument("--out-dir", dest="out_dir")
    t.add_argument("--report", help="run-report path (default: stdout unless out_dir is set)")
    t.add_argument("--model", help="also save the final checkpoint here")
    t.set_defaults(func=cmd_train)

    for verb, func, help_ in (("eval", cmd_eval, "evaluate a checkpoint"),
                              ("superres", cmd_superres, "per-resolution error table")):
        e = sub.add_parser(verb, help=help_)
        e.add_argument("--model", required=True)
        e.add_argument("--dataset", required=True)
        e.add_argument("--resolutions", required=verb == "superres", help="comma-separated, e.g. 32,64")
        e.add_argument("--range", help="sample slice start:stop")
        e.add_argument("--report")
        if verb == "superres":
            e.add_argument("--pipeline", choices=("pool-interp", "native"))
            e.add_argument("--table", help="CSV output")
        e.set_defaults(func=func)

    b = sub.add_parser("bench", help="median per-epoch time per architecture")
    config_args(b)
    b.add_argument("--dataset")
    b.add_argument("--dims", default="64,64", help="synthetic grid when no dataset is given")
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--archs", default="learnable,fourier")
    b.add_argument("--epochs", type=int, default=5)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("--report")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run the oracle suites")
    v.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="summarize run reports")
    r.add_argument("reports", nargs="+")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is None:
        args.threads = default_threads()
    os.environ["LNOP_THREADS"] = str(args.threads)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        code = exit_code(exc)
        if code is None:
            raise
        label = {EXIT_USAGE: "error", EXIT_NUMERIC: "numerical failure", EXIT_IO: "i/o error"}[code]
        print(f"{label}: {exc}", file=sys.stderr)
        return code

if __name__ == "__main__":
    sys.exit(main())
