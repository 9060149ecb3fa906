"""Protocol invariants checked on completed runs.

Each check returns a list of human-readable violations; empty means it holds.
"""

from __future__ import annotations

from typing import Sequence

from ..codec import CodeParams
from ..netsim import RunTrace
from ..protocol import operand_positions


def check_termination(trace: RunTrace) -> list[str]:
    missing = [p for p in trace.correct if p not in trace.decisions]
    return [f"termination: correct processes {missing} did not decide"] if missing else []


def check_agreement(trace: RunTrace) -> list[str]:
    values = {trace.decisions[p] for p in trace.correct if p in trace.decisions}
    if len(values) > 1:
        by_value = {}
        for p in trace.correct:
            if p in trace.decisions:
                by_value.setdefault(trace.decisions[p].hex()[:16], []).append(p)
        return [f"agreement: correct processes decided {len(values)} values {by_value}"]
    return []


def check_nullification(trace: RunTrace, params: CodeParams) -> list[str]:
    """At most f contributions nullified, at least f+1 survive, none from a correct origin."""
    out = []
    byz = set(trace.byzantine)
    for pid, contribs in sorted(trace.contributions.items()):
        if pid not in trace.correct:
            continue
        nullified = [c.origin for c in contribs if c.nullified]
        surviving = len(contribs) - len(nullified)
        if len(nullified) > params.f:
            out.append(f"nullification: p{pid} nullified {len(nullified)} > f={params.f} contributions")
        if surviving < params.f + 1:
            out.append(f"nullification: p{pid} kept {surviving} < f+1={params.f + 1} contributions")
        wrong = [o for o in nullified if o not in byz]
        if wrong:
            out.append(f"nullification: p{pid} nullified correct origins {wrong}")
    return out


def unknown_operands(trace: RunTrace, params: CodeParams, pid: int) -> list[int]:
    """Per output block, operands of ``pid``'s result the adversary could not know.

    An operand is one data block of one surviving contribution at one PRE
    position. It counts as known when its origin is Byzantine, or when the
    blackboard held that (origin, block) pair before the reveal phase began.
    """
    board = trace.blackboard
    known_origins = set(trace.byzantine) | (board.known_origins if board else set())
    known_blocks = board.known_blocks if board else set()
    m = params.data_blocks
    counts = []
    for positions in operand_positions(m):
        unknown = 0
        for c in trace.contributions.get(pid, []):
            if c.nullified or c.origin in known_origins:
                continue
            for pos in positions:
                if (c.origin, (pos - c.step) % m) not in known_blocks:
                    unknown += 1
        counts.append(unknown)
    return counts


def check_witness(trace: RunTrace, params: CodeParams, minimum: int = 2) -> list[str]:
    out = []
    for pid in trace.correct:
        if pid not in trace.contributions:
            continue
        counts = unknown_operands(trace, params, pid)
        low = [k for k, c in enumerate(counts) if c < minimum]
        if low:
            out.append(f"unpredictability: p{pid} output blocks {low} have fewer than {minimum} unknown operands ({counts})")
    return out


def check_phase_gates(records: Sequence[dict], correct: Sequence[int], quorum: int) -> list[str]:
    """Reveal only after the RNL decision; decide only after N-f reveals."""
    correct = set(correct)
    decided_rnl: set[int] = set()
    reveals_in: dict[int, int] = {}
    out = []
    for r in records:
        ev = r["ev"]
        if ev == "decision":
            decided_rnl.add(r["pid"])
        elif ev == "send" and r["type"] == "REVEAL" and r["src"] in correct and r["src"] not in decided_rnl:
            out.append(f"phase: p{r['src']} sent a reveal at t={r['t']} before the RNL decision")
        elif ev == "deliver" and r["type"] == "REVEAL":
            reveals_in[r["dst"]] = reveals_in.get(r["dst"], 0) + 1
        elif ev == "decide" and r["pid"] in correct:
            pid = r["pid"]
            if pid not in decided_rnl:
                out.append(f"phase: p{pid} decided at t={r['t']} before the RNL decision")
            # own column counts towards the quorum
            if reveals_in.get(pid, 0) + 1 < quorum:
                out.append(f"phase: p{pid} decided after {reveals_in.get(pid, 0)} reveals, quorum {quorum}")
    return out


def check_trace(trace: RunTrace, params: CodeParams) -> list[str]:
    """Every invariant a single run must satisfy."""
    return (
        check_termination(trace)
        + check_agreement(trace)
        + check_nullification(trace, params)
        + check_witness(trace, params)
        + check_phase_gates(trace.records, trace.correct, params.n - params.f)
    )
