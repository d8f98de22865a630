"""Command-line interface: ``torusflow {describe,decompose,flow,verify}``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 genericity error.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decomposition import ORIENTATION, basin_classify, decompose, verify_convergence_condition, verify_hyperbolic
from .errors import DomainError, GenericityError, ModelError, TorusFlowError
from .flow import GradientLikeFlow, TrajectoryOptions, flow_equivariance_check
from .metric import DECAY_THRESHOLD, verify_closed_form, verify_norm_decay
from .models import (
    ChartPoint,
    ProjectiveModel,
    load_model,
    model_to_descriptor,
    verify_chart_equivariance,
    verify_covering,
)
from .report import csv_text, poset_dot, write_csv, write_json
from .torus import GeneratorVector, default_generator
from .verdict import Verdict

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GENERICITY = 0, 1, 2, 3
SUITES = ("covering", "equivariance", "hyperbolic", "convergence", "decay")

DEFAULT_TOLERANCES = {
    "limit_detection": 1e-9,
    "switch_margin": 0.1,
    "h": 1e-3,
    "chart_equivariance": 1e-10,
    "flow_equivariance": 1e-9,
    "closed_form": 1e-10,
    "decay_threshold": DECAY_THRESHOLD,
}


class InputError(TorusFlowError):
    """Malformed command-line or configuration input."""


@dataclass
class RunConfig:
    model: str = "cp2"
    a0: str = None
    seed: int = 0
    samples: int = None
    out: str = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def trajectory_options(self) -> TrajectoryOptions:
        t = self.tolerances
        return TrajectoryOptions(h=t["h"], switch_margin=t["switch_margin"],
                                 tolerance=t["limit_detection"])

    def generator(self, model) -> GeneratorVector:
        if self.a0 is None:
            return default_generator(model.rank)
        try:
            a0 = GeneratorVector.parse(self.a0)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse --a0 {self.a0!r}: {exc}") from None
        if len(a0) != model.rank:
            raise InputError(f"--a0 has {len(a0)} entries but the torus has rank {model.rank}")
        return a0


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InputError(f"unknown tolerance keys: {sorted(unknown)}")
        cfg.tolerances.update(data.get("tolerances", {}))
        for key in ("model", "a0", "seed", "samples", "out"):
            if key in data:
                setattr(cfg, key, data[key])
    for key in ("model", "a0", "seed", "samples", "out"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.seed = int(cfg.seed)
    return cfg


def _load(cfg: RunConfig):
    return load_model(cfg.model)


def _out_dir(cfg: RunConfig):
    if cfg.out is None:
        return None
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _print_verdicts(verdicts, stream):
    for name, v in verdicts.items():
        status = "PASS" if v.passed else "FAIL"
        print(f"{status} {name} (max_violation={v.max_violation:.3g})", file=stream)
        for w in v.witnesses[:3]:
            print(f"    witness: {json.dumps(w, default=str)}", file=stream)


# -- describe -------------------------------------------------------------------

def cmd_describe(cfg: RunConfig, stream=sys.stdout) -> int:
    model = _load(cfg)
    summary = model.describe()
    print(f"model: {model!r}", file=stream)
    print(f"charts: {len(model.charts)}", file=stream)
    print(f"fixed points: {len(summary['fixed_points'])}", file=stream)
    for rec in model.fixed_points():
        weights = "  ".join(str(list(w.components)) for w in rec.tangential_weights)
        print(f"  {rec.id:<14} chart {model.chart_label(rec.home_chart):<12} weights {weights}",
              file=stream)
    out = _out_dir(cfg)
    if out is not None:
        write_json(out / "describe.json", summary)
    return EXIT_OK


# -- decompose ------------------------------------------------------------------

def cmd_decompose(cfg: RunConfig, stream=sys.stdout) -> int:
    model = _load(cfg)
    _require_flow(model)
    a0 = cfg.generator(model)
    samples = 2000 if cfg.samples is None else int(cfg.samples)
    report = decompose(model, a0, samples=samples, seed=cfg.seed,
                       options=cfg.trajectory_options())
    data = report.to_json()
    data["tolerances"] = {**cfg.tolerances, **data["tolerances"]}
    index = {r.id: r.unstable_dim for r in report.fixed_points}
    print(f"poincare: {report.poincare}", file=stream)
    print(f"basins: {report.basin_counts}", file=stream)
    for e in report.poset_edges:
        print(f"edge: {e.source} -> {e.target}", file=stream)
    _print_verdicts(report.verdicts, stream)
    out = _out_dir(cfg)
    if out is not None:
        write_json(out / "report.json", data)
        (out / "poset.dot").write_text(poset_dot(report.fixed_points, report.poset_edges, index))
        write_csv(out / "basins.csv", *_basin_table(model, report))
    return EXIT_OK if report.passed else EXIT_FAIL


def _basin_table(model, report):
    header = ["sample", "chart"]
    header += [f"{c}{k}" for k in range(1, model.dim + 1) for c in ("x", "y")]
    header += ["forward_limit", "backward_limit"]
    rows = []
    for i, (p, f, b) in enumerate(zip(report.sample_points, report.forward_limits,
                                      report.backward_limits)):
        rows.append([i, model.chart_label(p.chart), *map(float, p.real()), f or "", b or ""])
    return header, rows


# -- flow -----------------------------------------------------------------------

def parse_start(model, text: str, chart=None):
    """Parse a starting point.

    Accepted forms: a fixed-point id, homogeneous ``[z0:z1:...]`` on CP^n, or
    comma-separated complex chart coordinates together with ``chart``.
    """
    text = text.strip()
    try:
        if chart is not None:
            coords = [complex(c.replace(" ", "")) for c in text.split(",")]
            if len(coords) != model.dim:
                raise InputError(f"expected {model.dim} chart coordinates, got {len(coords)}")
            if not 0 <= chart < len(model.charts):
                raise InputError(f"chart {chart} does not exist")
            return model.best_chart(ChartPoint(chart, coords))
        for rec in model.fixed_points():
            if rec.id == text:
                return ChartPoint(rec.home_chart, np.zeros(model.dim))
        if isinstance(model, ProjectiveModel):
            parts = text.strip("[]").split(":")
            z = np.array([complex(c.replace(" ", "")) for c in parts])
            if z.size != model.dim + 1:
                raise InputError(f"expected {model.dim + 1} homogeneous coordinates")
            return model.as_chart_point(z)
    except (ValueError, DomainError) as exc:
        raise InputError(f"cannot parse start {text!r}: {exc}") from None
    raise InputError(f"cannot parse start {text!r}; give a fixed point id or use --chart")


def _parse_range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--s-range must be 'a,b', got {text!r}") from None
    if not hi > lo:
        raise InputError("--s-range needs a < b")
    return lo, hi


def trajectory_table(engine, start, s_range, rows=31, h=None):
    """Exact and RK4 trajectories sampled at ``rows`` equally spaced times.

    The RK4 step is shrunk so that every row time is a whole number of steps.
    """
    model = engine.model
    lo, hi = s_range
    h = engine.options.h if h is None else h
    per_row = max(1, int(np.ceil((hi - lo) / (rows - 1) / h)))
    h_eff = (hi - lo) / ((rows - 1) * per_row)
    times = [lo + k * per_row * h_eff for k in range(rows)]
    origin = engine.flow_exact(start, lo)
    rk = engine.rk4_batch([origin], hi - lo, h=h_eff,
                          checkpoints=[t - lo for t in times])
    header = ["s", "chart"]
    header += [f"{c}{k}" for k in range(1, model.dim + 1) for c in ("x", "y")]
    header += ["abs_w", "rk4_chart"]
    header += [f"rk4_{c}{k}" for k in range(1, model.dim + 1) for c in ("x", "y")]
    header += ["deviation"]
    table = []
    for t, snap in zip(times, rk):
        exact = engine.flow_exact(start, t)
        approx = snap[0]
        table.append([t, model.chart_label(exact.chart), *map(float, exact.real()), exact.norm(),
                      model.chart_label(approx.chart), *map(float, approx.real()),
                      engine.distance(exact, approx)])
    return header, table


def cmd_flow(cfg: RunConfig, start: str, s_range: str, h=None, chart=None, rows=31,
             stream=sys.stdout) -> int:
    model = _load(cfg)
    _require_flow(model)
    a0 = cfg.generator(model)
    engine = GradientLikeFlow(model, a0, cfg.trajectory_options())
    point = parse_start(model, start, chart)
    if rows < 2:
        raise InputError("--rows must be at least 2")
    header, table = trajectory_table(engine, point, _parse_range(s_range), rows, h)
    text = csv_text(header, table)
    out = _out_dir(cfg)
    if out is not None:
        (out / "trajectory.csv").write_text(text)
        worst = max(r[-1] for r in table)
        print(f"wrote {len(table)} rows, max deviation {worst:.3g}", file=stream)
    else:
        stream.write(text)
    return EXIT_OK


# -- verify ---------------------------------------------------------------------

def _require_flow(model):
    if not model.supports_flow:
        raise InputError(f"{type(model).__name__} carries no gradient-like flow; "
                         "only covering and equivariance apply")


def run_suite(name, model, cfg: RunConfig) -> dict:
    tol = cfg.tolerances
    seed = cfg.seed
    n = cfg.samples
    if name == "covering":
        return {"covering": verify_covering(model, samples=n or 10000, seed=seed)}
    if name == "equivariance":
        out = {}
        for rec in model.fixed_points():
            out[f"chart_equivariance[{rec.id}]"] = verify_chart_equivariance(
                model, rec.id, trials=n or 1000, tol=tol["chart_equivariance"], seed=seed)
        if model.supports_flow:
            engine = GradientLikeFlow(model, cfg.generator(model), cfg.trajectory_options())
            out["flow_equivariance"] = flow_equivariance_check(
                model, engine, trials=n or 1000, tol=tol["flow_equivariance"], seed=seed)
        return out
    if name == "hyperbolic":
        return {"hyperbolic": verify_hyperbolic(model, cfg.generator(model))}
    _require_flow(model)
    a0 = cfg.generator(model)
    if name == "convergence":
        engine = GradientLikeFlow(model, a0, cfg.trajectory_options())
        out = {"convergence": verify_convergence_condition(
            model, a0, samples=n or 10000, seed=seed, engine=engine)}
        if isinstance(model, ProjectiveModel):
            part = basin_classify(model, a0, n or 10000, seed, strict=False, engine=engine)
            out["basin_agreement"] = Verdict(
                "basin_agreement", part.analytic_agreement == 1.0,
                1.0 - part.analytic_agreement, [], {"agreement": part.analytic_agreement})
        return out
    if name == "decay":
        return {
            "closed_form": verify_closed_form(model, a0, samples=n or 100, seed=seed,
                                              tol=tol["closed_form"]),
            "decay": verify_norm_decay(model, a0, samples=n or 100, seed=seed,
                                       threshold=tol["decay_threshold"]),
            "decay_chart_local": verify_norm_decay(model, a0, samples=n or 100, seed=seed,
                                                   threshold=tol["decay_threshold"],
                                                   chart_local=True),
        }
    raise InputError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")


def cmd_verify(cfg: RunConfig, which: str, stream=sys.stdout) -> int:
    if which != "all" and which not in SUITES:
        raise InputError(f"unknown suite {which!r}; choose from {', '.join(SUITES)} or all")
    model = _load(cfg)
    if which == "all":
        names = SUITES if model.supports_flow else ("covering", "equivariance")
    else:
        names = (which,)
    verdicts = {}
    for name in names:
        try:
            verdicts.update(run_suite(name, model, cfg))
        except GenericityError as exc:
            verdicts[name] = Verdict(name, False, float(len(exc.witnesses)), exc.witnesses,
                                     {"error": str(exc)})
    _print_verdicts(verdicts, stream)
    passed = all(v.passed for v in verdicts.values())
    out = _out_dir(cfg)
    if out is not None:
        a0 = cfg.generator(model) if model.supports_flow or which == "hyperbolic" else None
        write_json(out / "verdicts.json", {
            "orientation": ORIENTATION,
            "model": model_to_descriptor(model),
            "a0": None if a0 is None else a0.to_json(),
            "seed": cfg.seed,
            "tolerances": cfg.tolerances,
            "verdicts": {k: v.to_json() for k, v in verdicts.items()},
            "pass": passed,
        })
    return EXIT_OK if passed else EXIT_FAIL


# -- entry point ------------------------------------------------------------------

def _common(p):
    p.add_argument("--model", help="preset name or JSON descriptor file (default cp2)")
    p.add_argument("--a0", help="generator as p/q,p/q,... (default 1/3,1/7,1/11,...)")
    p.add_argument("--seed", type=int, help="seed for all sampling (default 0)")
    p.add_argument("--samples", type=int, help="sample count (per-suite default if omitted)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file with run settings and tolerance overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusflow",
        description="Gradient-like torus flows on CP^n, toric manifolds and even spheres.")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("describe", help="list fixed points and tangential weights"))
    _common(sub.add_parser("decompose", help="indices, basins and the connection poset"))
    p = sub.add_parser("flow", help="trajectory CSV with exact and RK4 columns")
    _common(p)
    p.add_argument("--start", required=True,
                   help="fixed point id, [z0:...:zn] on CP^n, or chart coordinates with --chart")
    p.add_argument("--chart", type=int, help="chart index for --start coordinates")
    p.add_argument("--s-range", default="0,10", help="time interval a,b (default 0,10)")
    p.add_argument("--h", type=float, help="RK4 step (default 1e-3)")
    p.add_argument("--rows", type=int, default=31, help="rows in the CSV (default 31)")
    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}, all")
    return parser


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "describe":
            return cmd_describe(cfg, stream)
        if args.command == "decompose":
            return cmd_decompose(cfg, stream)
        if args.command == "flow":
            return cmd_flow(cfg, args.start, args.s_range, args.h, args.chart, args.rows, stream)
        return cmd_verify(cfg, args.suite, stream)
    except GenericityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for w in exc.witnesses:
            print(f"    witness: {json.dumps(w, default=str)}", file=sys.stderr)
        return EXIT_GENERICITY
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in getattr(exc, "violations", None) or []:
            print(f"    violation: {json.dumps(v, default=str)}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
