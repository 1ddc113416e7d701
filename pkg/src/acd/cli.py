"""Command line: ``acd detect | simulate | trim-select | stability``."""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import io
from .core import resolve_threads, run_acd
from .errors import ACDError, ACDWarning
from .penalized import PenaltySpec
from .sim import (DETECTORS, model_one, model_two, motivating, run_study, scad_select,
                  stability_selection, summarize, trim)


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one CLI invocation. ``extra`` holds the
    command-specific options (scenario fields, method lists, replicate counts)."""

    command: str
    input: str | None = None
    response: str | None = None
    penalty: PenaltySpec = PenaltySpec()
    cutoff: float | None = None
    seed: int = 0
    threads: int | None = None
    output: str = "acd"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ACDError(f"unknown command {self.command!r}", stage="config")
        if self.command != "simulate" and not (self.input and self.response):
            raise ACDError(f"{self.command} needs --input and --response", stage="config")
        if self.command == "simulate" and "model" not in self.extra:
            raise ACDError("simulate needs a model", stage="config")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        ns = dict(vars(args))
        common = {k: ns.pop(k, None) for k in ("command", "input", "response", "seed",
                                                  "threads", "output", "cutoff")}
        pen_kw = {k: ns.pop(k) for k in ("penalty", "lam", "gamma", "folds") if k in ns}
        pen = PenaltySpec()
        if pen_kw:
            pen = PenaltySpec(pen_kw["penalty"], lam=pen_kw["lam"], gamma=pen_kw["gamma"],
                              cv_folds=pen_kw["folds"])
        return cls(penalty=pen, extra=ns, **common)


def parse_cutoff(text: str) -> float | None:
    """``auto`` (mean + 2 SD) or ``fixed:<c>``."""
    if text == "auto":
        return None
    kind, _, val = text.partition(":")
    if kind != "fixed" or not val:
        raise argparse.ArgumentTypeError(f"cutoff must be 'auto' or 'fixed:<c>', got {text!r}")
    try:
        return float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fixed cutoff {val!r}") from None


def _add_penalty(p: argparse.ArgumentParser):
    p.add_argument("--penalty", choices=["lasso", "scad"], default="lasso")
    p.add_argument("--gamma", type=float, default=3.7, help="SCAD concavity (> 2)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="fixed penalty level; cross-validated when omitted")
    p.add_argument("--folds", type=int, default=5)


def _add_common(p: argparse.ArgumentParser, output: str):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default: logical cores; ACD_THREADS overrides)")
    p.add_argument("--output", default=output, help="output file prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acd", description="Adaptive Cook's distance diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="flag influential rows of a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--response", required=True)
    _add_penalty(p)
    p.add_argument("--cutoff", type=parse_cutoff, default=None, help="auto | fixed:<c>")
    p.add_argument("--design", choices=["standardized", "raw"], default="standardized")
    _add_common(p, "acd_report")

    p = sub.add_parser("simulate", help="Monte Carlo detection / selection study")
    p.add_argument("--model", choices=["1", "2", "motivating"], default="1")
    p.add_argument("--structure", choices=["identity", "ar1", "exchangeable"], default="ar1")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--link", choices=["linear", "squared"], default="linear")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--methods", default=None, help="comma list of ALL,CKD,ACD-LASSO,ACD-SCAD")
    p.add_argument("--metric", choices=["tpr", "fpr", "both"], default="tpr")
    _add_common(p, "acd_sim")

    p = sub.add_parser("trim-select", help="SCAD selection before and after trimming")
    p.add_argument("--input", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--method", default="ACD-LASSO", choices=[m for m in DETECTORS if m != "ALL"])
    _add_common(p, "acd_trim")

    p = sub.add_parser("stability", help="selection proportions over 95%% subsamples")
    p.add_argument("--input", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--methods", default="ALL,ACD-SCAD,ACD-LASSO")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--frac", type=float, default=0.95)
    _add_common(p, "acd_stability")
    return parser


def _methods(text: str | None, default: list[str]) -> list[str]:
    if not text:
        return default
    methods = [m.strip().upper() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in DETECTORS]
    if bad:
        raise ACDError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(DETECTORS)}",
                       stage="config")
    return methods


def cmd_detect(cfg: RunConfig) -> int:
    d = io.read_csv(cfg.input, cfg.response)
    rep = run_acd(d, cfg.penalty, cutoff=cfg.cutoff, seed=cfg.seed,
                  threads=resolve_threads(cfg.threads), design=cfg.extra.get("design", "standardized"))
    csv_path, svg_path = io.write_report(rep, cfg.output)
    flagged = ",".join(str(i + 1) for i in rep.flagged) or "-"
    print(f"flagged={flagged} threshold={rep.threshold:.6g} rule={rep.rule}")
    print(f"wrote {csv_path} {svg_path}")
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    args = argparse.Namespace(**cfg.extra, seed=cfg.seed, threads=cfg.threads, output=cfg.output)
    if args.model == "1":
        scen = model_one(args.structure, 0.5 if args.rho is None else args.rho, link=args.link)
        default = ["CKD", "ACD-LASSO", "ACD-SCAD"]
    elif args.model == "2":
        scen = model_two(args.structure, 0.7 if args.rho is None else args.rho, link=args.link)
        default = ["ACD-LASSO", "ACD-SCAD"]
    else:
        scen = motivating(args.structure, 0.5 if args.rho is None else args.rho, link=args.link)
        default = ["CKD", "ACD-LASSO", "ACD-SCAD"]
    metrics = ("tpr", "fpr") if args.metric == "both" else (args.metric,)
    if "fpr" in metrics:
        default = ["ALL", *default]
    methods = _methods(args.methods, default)
    rows = run_study(scen, methods, args.reps, seed=args.seed, metrics=metrics,
                     workers=resolve_threads(args.threads))
    csv_path = io.write_csv(args.output + ".csv", ["replicate", "method", "metric", "value"],
                            [(r.replicate, r.method, r.metric, float(r.value)) for r in rows])
    written = [str(csv_path)]
    for metric in metrics:
        groups = {m: [r.value for r in rows if r.method == m and r.metric == metric]
                  for m in methods}
        groups = {k: v for k, v in groups.items() if v}
        path = f"{args.output}_{metric}.svg"
        with open(path, "w") as fh:
            fh.write(io.box_plot_svg(groups, ylabel=metric.upper()))
        written.append(path)
    for (method, metric), s in sorted(summarize(rows).items()):
        print(f"{method:10s} {metric}: median={s['median']:.3f} mean={s['mean']:.3f} n={s['n']}")
    print("wrote " + " ".join(written))
    return 0


def cmd_trim_select(cfg: RunConfig) -> int:
    args = argparse.Namespace(**cfg.extra, seed=cfg.seed, output=cfg.output)
    d = io.read_csv(cfg.input, cfg.response)
    det_seq, sel_seq = np.random.SeedSequence(args.seed).spawn(2)
    before = scad_select(d, np.random.default_rng(sel_seq))
    flagged = DETECTORS[args.method]()(d, np.random.default_rng(det_seq))
    after = scad_select(trim(d, flagged), np.random.default_rng(sel_seq))
    rows = [(name, int(k in before), int(k in after)) for k, name in enumerate(d.names)]
    path = io.write_csv(args.output + ".csv", ["variable", "selected_all", "selected_trimmed"], rows,
                        comment=f"method={args.method} trimmed={','.join(str(i + 1) for i in flagged)}")
    print("trimmed rows: " + (",".join(str(i + 1) for i in flagged) or "-"))
    print("before: " + (",".join(d.names[k] for k in before) or "-"))
    print("after:  " + (",".join(d.names[k] for k in after) or "-"))
    print(f"wrote {path}")
    return 0


def stability_table(names, results: dict[str, np.ndarray]) -> str:
    """Fixed-width table; ``*`` marks proportions >= 0.50."""
    methods = list(results)
    width = max([9, *(len(n) for n in names)])
    lines = ["Predictor".ljust(width) + "".join(f"{m:>11s}" for m in methods)]
    for k, name in enumerate(names):
        cells = []
        for m in methods:
            v = results[m][k]
            cells.append(f"{v:.2f}{'*' if v >= 0.5 else ' '}".rjust(11))
        lines.append(name.ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"


def cmd_stability(cfg: RunConfig) -> int:
    args = argparse.Namespace(**cfg.extra, seed=cfg.seed, output=cfg.output)
    d = io.read_csv(cfg.input, cfg.response)
    methods = _methods(args.methods, ["ALL", "ACD-SCAD", "ACD-LASSO"])
    results = {}
    for m, seq in zip(methods, np.random.SeedSequence(args.seed).spawn(len(methods))):
        det = None if m == "ALL" else DETECTORS[m]()
        results[m] = stability_selection(d, det, reps=args.reps, frac=args.frac,
                                         rng=np.random.default_rng(seq)).proportions
    rows = [(name, *(float(results[m][k]) for m in methods)) for k, name in enumerate(d.names)]
    path = io.write_csv(args.output + ".csv", ["variable", *methods], rows,
                        comment=f"reps={args.reps} frac={args.frac} stable_at=0.5")
    table = stability_table(d.names, results)
    with open(args.output + ".txt", "w") as fh:
        fh.write(table)
    sys.stdout.write(table)
    print(f"wrote {path} {args.output}.txt")
    return 0


COMMANDS = {"detect": cmd_detect, "simulate": cmd_simulate, "trim-select": cmd_trim_select,
            "stability": cmd_stability}


def _fail(command: str, stage: str | None, exc: Exception) -> int:
    msg = str(getattr(exc, "message", exc)).replace("\n", " ")
    print(f"acd: error: command={command} stage={stage or '-'} message={msg}", file=sys.stderr)
    return 1


def run_command(cfg: RunConfig) -> int:
    """Execute one configured command; errors become a single stderr line and exit 1."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ACDWarning)
            return COMMANDS[cfg.command](cfg)
    except ACDError as exc:
        return _fail(cfg.command, exc.stage, exc)
    except (OSError, ValueError) as exc:
        return _fail(cfg.command, None, exc)
    except Exception as exc:  # keep the one-line contract even for bugs
        return _fail(cfg.command, "internal", exc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
    except ACDError as exc:
        return _fail(args.command, exc.stage, exc)
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
