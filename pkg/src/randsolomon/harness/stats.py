"""Aggregate statistics over completed runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..netsim import RunTrace, count_messages

BUCKETS = 256
# below this a chi-square over 256 buckets says nothing useful
MIN_UNIFORMITY_RUNS = 1000
P_THRESHOLD = 0.01


@dataclass
class Uniformity:
    samples: int
    statistic: Optional[float] = None
    p_value: Optional[float] = None
    degenerate: bool = False

    @property
    def passed(self) -> Optional[bool]:
        return None if self.p_value is None else self.p_value > P_THRESHOLD


def leading_byte_test(values: Sequence[bytes]) -> Uniformity:
    """Chi-square of the leading output byte against the uniform law on 256 buckets."""
    if len(values) < MIN_UNIFORMITY_RUNS:
        return Uniformity(len(values), degenerate=True)
    hist = np.bincount([v[0] for v in values], minlength=BUCKETS)
    res = stats.chisquare(hist)
    return Uniformity(len(values), float(res.statistic), float(res.pvalue))


@dataclass
class StatReport:
    runs: int = 0
    terminated: int = 0
    agreed: int = 0
    nullified: list[int] = field(default_factory=list)
    messages: dict[str, int] = field(default_factory=lambda: {"GENERATED": 0, "REVEAL": 0})
    bits: dict[str, int] = field(default_factory=lambda: {"GENERATED": 0, "REVEAL": 0})
    uniformity: Optional[Uniformity] = None
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def agreement_rate(self) -> float:
        return self.agreed / self.runs if self.runs else 0.0

    @property
    def termination_rate(self) -> float:
        return self.terminated / self.runs if self.runs else 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, trace: RunTrace, violations: Sequence[str] = (), label: str = "") -> None:
        self.runs += 1
        self.terminated += trace.terminated
        self.agreed += trace.terminated and trace.agreed
        per_proc = [sum(c.nullified for c in cs) for p, cs in trace.contributions.items() if p in trace.correct]
        self.nullified.append(max(per_proc, default=0))
        counts = count_messages(trace)
        for phase in ("GENERATED", "REVEAL"):
            self.messages[phase] += counts[phase]["messages"]
            self.bits[phase] += counts[phase]["bits"]
        prefix = f"{label}: " if label else ""
        self.violations.extend(prefix + v for v in violations)

    def key_values(self) -> dict[str, object]:
        kv: dict[str, object] = {
            "runs": self.runs,
            "agreement_rate": f"{self.agreement_rate:.4f}",
            "termination_rate": f"{self.termination_rate:.4f}",
            "nullified_total": sum(self.nullified),
            "nullified_max_per_run": max(self.nullified, default=0),
        }
        for phase in ("GENERATED", "REVEAL"):
            kv[f"messages_{phase.lower()}"] = self.messages[phase]
            kv[f"bits_{phase.lower()}"] = self.bits[phase]
        kv["messages_total"] = sum(self.messages.values())
        kv["bits_total"] = sum(self.bits.values())
        u = self.uniformity
        if u is not None:
            kv["uniformity_samples"] = u.samples
            kv["uniformity_degenerate"] = str(u.degenerate).lower()
            kv["chi2_statistic"] = "na" if u.statistic is None else f"{u.statistic:.4f}"
            kv["chi2_p_value"] = "na" if u.p_value is None else f"{u.p_value:.6f}"
        kv["violations"] = len(self.violations)
        kv["status"] = "ok" if self.ok else "fail"
        return kv

    def text(self) -> str:
        lines = [
            f"runs completed       {self.runs}",
            f"agreement rate       {self.agreement_rate:.4f}",
            f"termination rate     {self.termination_rate:.4f}",
            f"nullified (max/run)  {max(self.nullified, default=0)}",
        ]
        if self.runs:
            for phase in ("GENERATED", "REVEAL"):
                lines.append(
                    f"{phase:<9} per run    {self.messages[phase] / self.runs:.1f} messages, "
                    f"{self.bits[phase] / self.runs:.0f} bits"
                )
        u = self.uniformity
        if u is not None:
            if u.degenerate:
                lines.append(f"uniformity           degenerate: {u.samples} samples, need {MIN_UNIFORMITY_RUNS}; no test performed")
            else:
                verdict = "pass" if u.passed else "FAIL"
                lines.append(f"uniformity           chi2={u.statistic:.2f} p={u.p_value:.4f} ({verdict} at {P_THRESHOLD})")
        lines.extend(f"note: {n}" for n in self.notes)
        if self.violations:
            lines.append(f"{len(self.violations)} invariant violation(s):")
            lines.extend(f"  {v}" for v in self.violations[:50])
            if len(self.violations) > 50:
                lines.append(f"  ... {len(self.violations) - 50} more")
        lines.append("")
        lines.append("[report]")
        lines.extend(f"{k} = {v}" for k, v in self.key_values().items())
        return "\n".join(lines) + "\n"
