"""Command line: ``mbr run`` evaluates instances and suites, ``mbr gen`` writes random instances."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bounds import SCHEMA_VERSION, reports_to_csv
from .errors import BudgetExceeded, ParseError, ValidationError
from .generate import SizeCaps, generate_random_instance
from .inference import enumerate_history_tree, node_budget
from .instance_io import dump_instance, load_instance
from .suites import SUITES, bounds_suite, dpi_suite, soundness_suite, sweep_t_suite

log = logging.getLogger("mbr")


@dataclass
class RunConfig:
    instance_paths: list
    seed: int = 42
    node_budget: Optional[int] = None
    output_dir: Path = Path("mbr-out")
    suites: tuple = ("bounds",)
    emit: tuple = ("json", "csv")
    dump_trees: bool = False
    soundness_count: int = 500
    dpi_count: int = 200
    caps: SizeCaps = field(default_factory=SizeCaps)


def _csv_list(text: str, allowed) -> tuple:
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in items if x not in allowed]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown choice(s) {bad}; pick from {sorted(allowed)}")
    return items


def run(config: RunConfig) -> int:
    """Run the requested suites, write artifacts, return the exit status."""
    budget = node_budget(config.node_budget)
    instances = []
    for path in config.instance_paths:
        spec, bcfg = load_instance(path)
        instances.append((Path(path).stem, spec, bcfg))

    results = []
    for suite in SUITES:  # fixed order keeps artifacts stable
        if suite not in config.suites:
            continue
        log.info("running suite %s", suite)
        if suite == "bounds":
            results.append(bounds_suite(instances, budget))
        elif suite == "soundness":
            results.append(soundness_suite(config.seed, config.soundness_count, config.caps, budget))
        elif suite == "dpi":
            results.append(dpi_suite(config.seed, config.dpi_count, budget=budget))
        elif suite == "sweep-T":
            results.append(sweep_t_suite(config.seed, budget=budget))

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "json" in config.emit:
        doc = {"schema_version": SCHEMA_VERSION, "seed": config.seed, "node_budget": budget,
               "instances": [iid for iid, _, _ in instances],
               "suites": {r.name: r.to_json_dict() for r in results}}
        (out / "report.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if "csv" in config.emit:
        reports = [rep for r in results for rep in r.reports]
        (out / "bounds.csv").write_text(reports_to_csv(reports))
    if config.dump_trees:
        for iid, spec, _ in instances:
            tree = enumerate_history_tree(spec, "thompson", budget)
            (out / f"{iid}.tree.json").write_text(json.dumps(tree.to_json(), indent=1) + "\n")

    for r in results:
        status = "ok" if r.ok else "FAILED"
        print(f"{r.name}: {r.passed} passed, {r.failed} failed [{status}]")
        for rep in r.reports if r.name == "bounds" else ():
            print(f"  {rep.instance_id}: mbr={rep.mbr_exact:.6g} thompson_regret={rep.thompson_regret_exact:.6g}"
                  f" {'ok' if rep.ok else 'FAILED ' + ','.join(rep.failures)}")
    return 0 if all(r.ok for r in results) else 1


def gen(seed: int, count: int, caps: SizeCaps, out: Path, kind: Optional[str] = None) -> list:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        spec = generate_random_instance(seed, caps, stream_id=i, kind=kind)
        path = out / f"{spec.name}.json"
        path.write_text(dump_instance(spec))
        paths.append(path)
    return paths


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbr", description="Exact minimum Bayesian regret and its bounds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate instances and run suites")
    r.add_argument("--instances", default=None, help="glob of instance JSON files")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--budget", type=int, default=None, help="node budget (default: MBR_NODE_BUDGET or 1e6)")
    r.add_argument("--out", type=Path, default=Path("mbr-out"))
    r.add_argument("--suites", type=lambda s: _csv_list(s, SUITES), default=("bounds",))
    r.add_argument("--emit", type=lambda s: _csv_list(s, ("json", "csv")), default=("json", "csv"))
    r.add_argument("--count", type=int, default=500, help="instances in the soundness suite")
    r.add_argument("--dpi-count", type=int, default=200)
    r.add_argument("--caps", type=SizeCaps.parse, default=SizeCaps(), help="soundness caps, e.g. s=3,a=3,y=3,theta=3,T=3")
    r.add_argument("--dump-trees", action="store_true", help="write Thompson history trees as JSON (debugging)")

    g = sub.add_parser("gen", help="write random instance files")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--caps", type=SizeCaps.parse, default=SizeCaps())
    g.add_argument("--kind", choices=("general", "static", "partial_feedback"), default=None)
    g.add_argument("--out", type=Path, default=Path("instances"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "gen":
            for path in gen(args.seed, args.count, args.caps, args.out, args.kind):
                print(path)
            return 0
        paths = sorted(glob.glob(args.instances)) if args.instances else []
        if args.instances and not paths:
            print(f"error: no files match {args.instances!r}", file=sys.stderr)
            return 2
        cfg = RunConfig(paths, args.seed, args.budget, args.out, args.suites, args.emit, args.dump_trees,
                        args.count, args.dpi_count, args.caps)
        return run(cfg)
    except (ParseError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print("error: invalid instance:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
