"""Experiment drivers behind the CLI."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from ..adversary import AdversarySpec
from ..consensus import Policy
from ..netsim import LivenessViolation, RunTrace, Schedule, canonical, parse_trace, run, run_from_header
from ..protocol import ProtocolConfig, compress
from .checks import check_trace
from .config import ExperimentConfig
from .stats import StatReport, leading_byte_test


def execute(cfg: ExperimentConfig, seed: int) -> tuple[RunTrace, list[str]]:
    """One run plus its invariant violations. Liveness failures are reported, not raised."""
    params = cfg.code_params()
    try:
        trace = run(cfg.protocol_config(), cfg.schedule(seed), cfg.adversary(), cfg.policy, cfg.view_changes)
    except LivenessViolation as exc:
        trace = exc.trace
    return trace, check_trace(trace, params)


def iter_runs(cfg: ExperimentConfig) -> Iterator[tuple[int, RunTrace, list[str]]]:
    for seed in cfg.seeds():
        trace, violations = execute(cfg, seed)
        yield seed, trace, violations


def run_experiment(cfg: ExperimentConfig, sink=None) -> StatReport:
    """Run every seed of ``cfg``; traces go to ``sink`` (a text stream) in seed order."""
    report = StatReport()
    for seed, trace, violations in iter_runs(cfg):
        if sink is not None:
            sink.write(trace.dumps())
        report.add(trace, violations, label=f"seed {seed}")
    return report


# -- golden stage -------------------------------------------------------------------

PAPER_PRE = (bytes([0xDD]), bytes([0x81]), bytes([0x8B]))
PAPER_RAND = bytes([0xD7])


def golden_stage() -> bytes:
    """The pairwise/triple XOR stage on the worked example's PRE blocks."""
    return b"".join(compress(PAPER_PRE))


# -- uniformity ---------------------------------------------------------------------


def uniformity(cfg: ExperimentConfig) -> StatReport:
    """Chi-square on the leading byte of each run's output (first correct process)."""
    report = StatReport()
    values = []
    for seed, trace, violations in iter_runs(cfg):
        report.add(trace, violations, label=f"seed {seed}")
        first = min(trace.correct)
        if first in trace.decisions:
            values.append(trace.decisions[first])
    report.uniformity = leading_byte_test(values)
    return report


# -- divergence attack --------------------------------------------------------------


def reveal_orders(n: int, receivers: Sequence[int]) -> Iterator[tuple[tuple[int, tuple[int, ...]], ...]]:
    """Every assignment of a reveal arrival order to each receiver."""
    per = [[(r, order) for order in itertools.permutations([p for p in range(n) if p != r])] for r in receivers]
    for combo in itertools.product(*per):
        yield tuple(combo)


@dataclass
class AttackReport:
    n: int
    f: int
    schedules: int = 0
    in_play: int = 0
    divergent: dict[bool, int] = field(default_factory=lambda: {False: 0, True: 0})
    example: dict[bool, Optional[dict]] = field(default_factory=lambda: {False: None, True: None})
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Divergence appears without retrace (when there is an adversary) and never with it."""
        expect_off = self.f > 0 and self.in_play > 0
        return self.divergent[True] == 0 and (self.divergent[False] > 0) == expect_off and not self.violations

    def text(self) -> str:
        lines = [
            f"divergence attack, N={self.n}, f={self.f}",
            f"schedules explored   {self.schedules}",
            f"attack in the RNL    {self.in_play}",
            f"divergent, retrace off  {self.divergent[False]}",
            f"divergent, retrace on   {self.divergent[True]}",
        ]
        ex = self.example[False]
        if ex is not None:
            lines.append(f"example (retrace off): reveal order {ex['reveal_order']}, outputs {ex['outputs']}")
        lines.extend(f"violation: {v}" for v in self.violations[:20])
        lines += [
            "",
            "[report]",
            f"schedules = {self.schedules}",
            f"in_play = {self.in_play}",
            f"divergent_retrace_off = {self.divergent[False]}",
            f"divergent_retrace_on = {self.divergent[True]}",
            f"status = {'ok' if self.ok else 'fail'}",
        ]
        return "\n".join(lines) + "\n"


def attack_demo(n: int = 4, f: int = 1, victims: Sequence[int] = (0,), max_schedules: Optional[int] = None) -> AttackReport:
    """Search reveal schedules for a divergence, with and without retrace.

    The last f processes run the divergence strategy: corrupt the victims'
    codeword blocks and withhold reveals from them. The network is synchronous
    (every delay one tick), consensus is adversarial, and reveals are released
    in every per-receiver order.
    """
    report = AttackReport(n, f)
    byz = list(range(n - f, n))
    adversary = AdversarySpec.uniform(byz, "divergence", victims=tuple(victims)) if f else AdversarySpec.none()
    correct = [p for p in range(n) if p not in byz]
    orders = reveal_orders(n, correct)
    if max_schedules is not None:
        orders = itertools.islice(orders, max_schedules)
    for order in orders:
        report.schedules += 1
        schedule = Schedule(seed=0, gst=0, tau=1, pre_gst_cap=1, reveal_order=order, reveal_release=50)
        for retrace in (False, True):
            cfg = ProtocolConfig(n, f, relax=False, retrace=retrace)
            try:
                trace = run(cfg, schedule, adversary, Policy.ADVERSARY)
            except LivenessViolation as exc:
                report.violations.append(f"order {order}: {exc}")
                continue
            if retrace and set(trace.rnl_origins) & set(byz):
                report.in_play += 1
            if not trace.agreed:
                report.divergent[retrace] += 1
                if report.example[retrace] is None:
                    report.example[retrace] = {
                        "reveal_order": {r: list(o) for r, o in order},
                        "outputs": {p: trace.decisions[p].hex()[:8] for p in correct},
                    }
    return report


# -- replay -------------------------------------------------------------------------


@dataclass
class ReplayResult:
    index: int
    seed: int
    matches: bool
    first_diff: Optional[int] = None  # 0-based record index inside the run


def replay(text: str) -> list[ReplayResult]:
    """Re-run each recorded run from its header and compare byte-for-byte."""
    out = []
    for i, (header, records) in enumerate(parse_trace(text)):
        fresh = run_from_header_safe(header)
        recorded = [canonical(header)] + [canonical(r) for r in records]
        now = fresh.lines()
        diff = next((k for k, (a, b) in enumerate(zip(recorded, now)) if a != b), None)
        if diff is None and len(recorded) != len(now):
            diff = min(len(recorded), len(now))
        out.append(ReplayResult(i, header["schedule"]["seed"], diff is None, diff))
    return out


def run_from_header_safe(header: dict) -> RunTrace:
    try:
        return run_from_header(header)
    except LivenessViolation as exc:
        return exc.trace
