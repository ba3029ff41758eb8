"""Command line entry point: ``ccrrt plan | validate | ellipses``.

Exit codes: 0 success, 1 usage/IO/scenario error, 2 no path found,
3 Monte-Carlo risk exceeded the budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .planner import GoalBlockedError, InfeasibleStartError, plan, plan_multiagent, verify_path
from .probability import risk_ellipse
from .scenario import ScenarioError, dumps, load_scenario
from .svg import render_svg
from .validation import coverage_check, path_risk_check

EXIT_OK, EXIT_USAGE, EXIT_NO_PATH, EXIT_RISK = 0, 1, 2, 3

log = logging.getLogger("ccrrt")


class UsageError(Exception):
    pass


def _seed_list(args) -> list[int]:
    if args.seeds:
        try:
            lo, hi = (int(v) for v in args.seeds.split(".."))
        except ValueError:
            raise UsageError(f"--seeds expects a..b, got {args.seeds!r}") from None
        if lo > hi or lo < 0:
            raise UsageError(f"--seeds range {args.seeds!r} is empty or negative")
        return list(range(lo, hi + 1))
    return [args.seed]


def _params(scenario, args, seed):
    kw = {"seed": seed if seed is not None else scenario.planner.seed}
    if args.variant:
        kw["variant"] = args.variant
    if args.iterations is not None:
        kw["max_iterations"] = args.iterations
    return dataclasses.replace(scenario.planner, **kw)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _result_doc(scenario_name, result) -> dict:
    return {"scenario": scenario_name, "result": result.to_dict()}


def cmd_plan(args) -> int:
    out = Path(args.out)
    code = EXIT_OK
    if args.agents:
        scenarios = [load_scenario(p) for p in args.agents]
        cov = np.reshape(args.agent_covariance, (2, 2))
        for seed in _seed_list(args):
            params = None
            if args.variant or args.iterations is not None or seed is not None:
                params = _params(scenarios[0], args, seed)
            results = plan_multiagent(scenarios, params, cov)
            for j, (path, res) in enumerate(zip(args.agents, results)):
                tag = f"agent{j}_seed{res.seed}"
                _write(out / f"plan_{tag}.json", dumps(_result_doc(path, res)))
                if args.svg:
                    _write(out / f"plan_{tag}.svg", render_svg(scenarios[j], res))
                if not res.found:
                    code = EXIT_NO_PATH
        return code

    scenario = load_scenario(args.scenario)
    for seed in _seed_list(args):
        params = _params(scenario, args, seed)
        try:
            res = plan(scenario, params)
        except (InfeasibleStartError, GoalBlockedError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        _write(out / f"plan_seed{params.seed}.json", dumps(_result_doc(args.scenario, res)))
        if args.svg:
            _write(out / f"plan_seed{params.seed}.svg", render_svg(scenario, res))
        if not res.found:
            print(f"seed {params.seed}: no path after {res.iterations_used} iterations", file=sys.stderr)
            code = EXIT_NO_PATH
    return code


def _read_path(file) -> np.ndarray:
    try:
        doc = json.loads(Path(file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read path file {file}: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("result", doc).get("best_path")
    path = np.asarray(doc, dtype=float) if doc is not None else None
    if path is None or path.ndim != 2 or path.shape[1] != 2 or len(path) == 0:
        raise UsageError(f"{file} does not contain a non-empty list of 2-D points")
    return path


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    field = scenario.field
    seed = args.seed if args.seed is not None else scenario.planner.seed
    if args.path:
        path = _read_path(args.path)
        source = str(args.path)
    else:
        try:
            res = plan(scenario, _params(scenario, args, seed))
        except (InfeasibleStartError, GoalBlockedError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if not res.found:
            print(f"seed {seed}: no path to validate", file=sys.stderr)
            return EXIT_NO_PATH
        path = res.best_path
        source = f"plan seed {seed}"

    risk = path_risk_check(path, field, args.samples, seed, event=args.event)
    coverage = [coverage_check(g, field.risk.alpha, args.samples, seed + 1000 * (i + 1)).to_dict()
                for i, g in enumerate(field.gaussians_at(0))]
    exceeded = risk.estimate > field.risk.delta + 3.0 * risk.std_error
    doc = {
        "scenario": args.scenario,
        "path_source": source,
        "event": args.event,
        "delta": field.risk.delta,
        "alpha": field.risk.alpha,
        "path_feasible": verify_path(path, field),
        "path_risk": risk.to_dict(),
        "coverage": coverage,
        "exceeded": exceeded,
    }
    _write(Path(args.out) / f"report_seed{seed}.json", dumps(doc))
    if exceeded:
        print(f"per-step risk {risk.estimate:.4g} at step {risk.worst_step} exceeds budget "
              f"{field.risk.delta:.4g}", file=sys.stderr)
        return EXIT_RISK
    return EXIT_OK


def cmd_ellipses(args) -> int:
    scenario = load_scenario(args.scenario)
    alpha = scenario.field.risk.alpha
    items = []
    for i, g in enumerate(scenario.field.gaussians_at(0)):
        ell = risk_ellipse(g, alpha)
        items.append({
            "index": i,
            "center": ell.center.tolist(),
            "semi_axes": list(ell.semi_axes),
            "rotation": ell.rotation,
            "points": ell.boundary(64).tolist(),
        })
    doc = {"scenario": args.scenario, "alpha": alpha, "threshold": scenario.field.threshold, "ellipses": items}
    _write(Path(args.out) / "ellipses.json", dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON (bundled names such as paper_sec5.json work too)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--variant", choices=("rrt", "rrt_star"))
    common.add_argument("--iterations", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ccrrt", description="Chance-constrained RRT and RRT* planning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="grow a tree and write the result JSON")
    p.add_argument("--seeds", help="inclusive seed range a..b")
    p.add_argument("--svg", action="store_true", help="also write an SVG drawing")
    p.add_argument("--agents", nargs="+", metavar="SCENARIO", help="prioritised multi-agent mode")
    p.add_argument("--agent-covariance", type=float, nargs=4, default=[0.05, 0.0, 0.0, 0.05],
                   metavar=("S11", "S12", "S21", "S22"))
    p.set_defaults(func=cmd_plan)

    v = sub.add_parser("validate", parents=[common], help="Monte-Carlo risk of a path")
    v.add_argument("--samples", type=int, default=10_000, help="samples per time step")
    v.add_argument("--path", help="JSON list of points, or a plan result file")
    v.add_argument("--event", choices=("contour", "proximity"), default="contour")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("ellipses", parents=[common], help="write risk ellipses as 64-point polylines")
    e.set_defaults(func=cmd_ellipses)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command != "plan" or not getattr(args, "agents", None):
        if not args.scenario:
            print("error: --scenario is required", file=sys.stderr)
            return EXIT_USAGE
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ScenarioError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
