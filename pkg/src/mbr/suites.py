"""Experiment suites: bounds on given instances, randomized soundness, DPI, and a horizon sweep."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BOUND_NAMES, BOUND_TOL, BoundConfig, BoundReport, evaluate_all, remark7_entropy_dominance_check, ThompsonAnalysis
from .environment import EnvironmentSpec, bernoulli_bandit
from .generate import DPI_CAPS, SizeCaps, generate_random_instance, random_knowledge_kernel, random_processing_kernel
from .planning import bcr_with_knowledge, bcr_with_processing
from .probability import RandomSource

log = logging.getLogger(__name__)

SUITES = ("bounds", "dpi", "soundness", "sweep-T")
SOUNDNESS_COUNT = 500
DPI_COUNT = 200
# kernels for the DPI suite come from streams disjoint from the instance streams
DPI_KERNEL_STREAM = 1 << 20
SWEEP_HORIZONS = (1, 2, 3, 4)


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    reports: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, what=None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if what is not None:
                self.failures.append(what)

    def to_json_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "failed": self.failed,
            "failures": self.failures,
            "details": self.details,
            "reports": [r.to_json_dict() for r in self.reports],
        }


def bounds_suite(instances, budget: Optional[int] = None) -> SuiteResult:
    """``instances`` is a list of ``(instance_id, spec, BoundConfig)``."""
    res = SuiteResult("bounds")
    for iid, spec, config in instances:
        rep = evaluate_all(spec, config, budget, instance_id=iid)
        res.reports.append(rep)
        res.record(rep.ok, {"instance_id": iid, "failed": rep.failures})
    return res


def _applicability_counts(reports) -> dict:
    counts = {name: {"applicable": 0, "vacuous": 0} for name in BOUND_NAMES}
    for rep in reports:
        for e in rep.entries:
            if e.applicable:
                counts[e.name]["applicable"] += 1
                counts[e.name]["vacuous"] += int(e.vacuous)
    return counts


def soundness_suite(seed: int, count: int = SOUNDNESS_COUNT, caps: SizeCaps = SizeCaps(),
                    budget: Optional[int] = None) -> SuiteResult:
    res = SuiteResult("soundness")
    min_mbr = math.inf
    for i in range(count):
        spec = generate_random_instance(seed, caps, stream_id=i)
        rep = evaluate_all(spec, BoundConfig(), budget)
        min_mbr = min(min_mbr, rep.mbr_exact)
        res.reports.append(rep)
        res.record(rep.ok, {"instance_id": rep.instance_id, "failed": rep.failures})
    res.details = {"seed": seed, "count": count, "caps": caps.__dict__, "min_mbr": min_mbr,
                   "bounds": _applicability_counts(res.reports)}
    return res


def dpi_suite(seed: int, count: int = DPI_COUNT, caps: SizeCaps = DPI_CAPS,
              budget: Optional[int] = None) -> SuiteResult:
    res = SuiteResult("dpi")
    rows = []
    for i in range(count):
        spec = generate_random_instance(seed, caps, stream_id=i)
        gen = RandomSource(seed, DPI_KERNEL_STREAM + i).generator
        know = random_knowledge_kernel(spec, gen)
        proc = random_processing_kernel(know, spec.horizon, gen)
        with_know = bcr_with_knowledge(spec, know, budget).value
        with_proc = bcr_with_processing(spec, know, proc, budget).value
        ok = with_know >= with_proc - BOUND_TOL
        rows.append({"instance_id": spec.name, "knowledge_size": know.knowledge_space_size,
                     "processed_size": proc.processed_space_size, "bcr_knowledge": with_know,
                     "bcr_processed": with_proc})
        res.record(ok, rows[-1])
    res.details = {"seed": seed, "count": count, "caps": caps.__dict__, "triples": rows}
    return res


def sweep_family(seed: int) -> list:
    """Fixed family for the horizon sweep: the canonical bandit plus seeded partial-feedback draws."""
    base = [bernoulli_bandit(np.array([[0.9, 0.1], [0.1, 0.9]]), [0.5, 0.5], 1, name="bernoulli2x2")]
    caps = SizeCaps(s=1, a=2, y=2, theta=3, T=1)
    for i in range(3):
        base.append(generate_random_instance(seed, caps, stream_id=i, kind="partial_feedback"))
    return base


def sweep_t_suite(seed: int, horizons=SWEEP_HORIZONS, budget: Optional[int] = None) -> SuiteResult:
    """Thompson information sums over growing horizons: monotone and capped by H(A*)."""
    res = SuiteResult("sweep-T")
    curves = []
    for base in sweep_family(seed):
        lhs_prev = -math.inf
        curve = {"instance_id": base.name, "T": [], "lhs": [], "rhs": None}
        for T in horizons:
            spec = base.with_horizon(T)
            an = ThompsonAnalysis(spec, budget)
            rep = evaluate_all(spec, BoundConfig(), budget, instance_id=f"{base.name}-T{T}", analysis=an)
            res.reports.append(rep)
            res.record(rep.ok, {"instance_id": rep.instance_id, "failed": rep.failures})
            lhs, rhs, holds = remark7_entropy_dominance_check(spec, an)
            res.record(holds and lhs >= lhs_prev - BOUND_TOL,
                       {"instance_id": rep.instance_id, "lhs": lhs, "rhs": rhs, "previous": lhs_prev})
            lhs_prev = lhs
            curve["T"].append(T)
            curve["lhs"].append(lhs)
            curve["rhs"] = rhs
        curves.append(curve)
    res.details = {"seed": seed, "curves": curves}
    return res
