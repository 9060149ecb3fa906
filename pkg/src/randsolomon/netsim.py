"""Deterministic partially synchronous network simulator.

Time is an integer tick. Messages sent before GST take a seeded delay in
``[1, pre_gst_cap]``; after GST the delay is in ``[1, tau]``. Nothing sent
between correct processes is ever dropped. Events at the same tick run in
the order (kind, sender, sequence number) with kinds ordered
START < DECISION < DELIVER, so a run is a pure function of its
configuration, schedule and adversary.

Reveal delivery can be scripted per receiver through
``Schedule.reveal_order``: the adversary holds reveals until
``reveal_release`` and releases them in the given sender order, which is how
the attack search enumerates schedules.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .adversary import AdversarySpec, Blackboard, ByzantineContext, ByzantineProcess, max_byzantine_chooser
from .consensus import ConsensusOracle, Decision, Policy, Proposal
from .crypto import SimCrypto
from .protocol import Contribution, Decide, Note, Process, ProtocolConfig, Propose, Send
from .wire import Generated, Reveal, encode_message

TRACE_SCHEMA = 1

START, DECISION, DELIVER = 0, 1, 2

# seed-sequence stream ids
_KEYS, _ENTROPY, _NET, _ADV, _CONS, _START = range(6)


class LivenessViolation(RuntimeError):
    def __init__(self, msg: str, trace: "RunTrace"):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class Schedule:
    seed: int = 0
    gst: int = 20
    tau: int = 5
    pre_gst_cap: int = 30
    start_spread: int = 0
    reveal_order: tuple[tuple[int, tuple[int, ...]], ...] = ()
    reveal_release: int = 10_000
    horizon: int = 1_000_000

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reveal_order"] = {str(k): list(v) for k, v in self.reveal_order}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        d = dict(d)
        d["reveal_order"] = tuple(sorted((int(k), tuple(v)) for k, v in d.get("reveal_order", {}).items()))
        return cls(**d)


@dataclass
class RunTrace:
    header: dict
    records: list[dict] = field(default_factory=list)
    decisions: dict[int, bytes] = field(default_factory=dict)
    correct: tuple[int, ...] = ()
    byzantine: tuple[int, ...] = ()
    contributions: dict[int, list[Contribution]] = field(default_factory=dict)
    blackboard: Optional[Blackboard] = None
    rnl_origins: tuple[int, ...] = ()
    consensus_rounds: int = 0

    def lines(self) -> list[str]:
        return [canonical(self.header)] + [canonical(r) for r in self.records]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    @property
    def terminated(self) -> bool:
        return all(p in self.decisions for p in self.correct)

    @property
    def agreed(self) -> bool:
        return len({self.decisions[p] for p in self.correct if p in self.decisions}) <= 1


def canonical(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def run_header(
    cfg: ProtocolConfig,
    schedule: Schedule,
    adversary: AdversarySpec,
    policy: Policy,
    view_changes: bool,
) -> dict:
    return {
        "ev": "header",
        "schema": TRACE_SCHEMA,
        "config": asdict(cfg),
        "schedule": schedule.to_dict(),
        "adversary": adversary.to_dict(),
        "policy": Policy(policy).value,
        "view_changes": view_changes,
    }


def _msg_type(msg) -> str:
    return "GENERATED" if isinstance(msg, Generated) else "REVEAL"


class Simulator:
    def __init__(
        self,
        cfg: ProtocolConfig,
        schedule: Schedule,
        adversary: Optional[AdversarySpec] = None,
        policy: Union[Policy, str] = Policy.FIRST,
        view_changes: bool = False,
    ):
        self.cfg = cfg
        self.schedule = schedule
        self.adversary = adversary or AdversarySpec()
        self.policy = Policy(policy)
        self.view_changes = view_changes
        self.params = cfg.params
        self.adversary.validate(self.params)
        n = self.params.n
        seed = schedule.seed

        self.crypto = SimCrypto(self.params.block_bytes)
        key_rng = np.random.default_rng([seed, _KEYS])
        self.keys = [self.crypto.keygen(pid, key_rng) for pid in range(n)]
        public = [k.public for k in self.keys]
        self.net_rng = np.random.default_rng([seed, _NET])
        self.cons_rng = np.random.default_rng([seed, _CONS])
        self.entropy = [np.random.default_rng([seed, _ENTROPY, pid]) for pid in range(n)]

        byz = self.adversary.byzantine
        shared = Blackboard()
        self.boards: list[Blackboard] = [shared] if byz and self.adversary.collusion else []
        self.procs: list[Any] = []
        for pid in range(n):
            inner = Process(pid, self.params, self.crypto, self.keys[pid], public, retrace=cfg.retrace)
            if pid in byz:
                board = shared
                if not self.adversary.collusion:
                    board = Blackboard()
                    self.boards.append(board)
                ctx = ByzantineContext(
                    pid, self.params, self.crypto, self.keys[pid], public, byz, board,
                    np.random.default_rng([seed, _ADV, pid]),
                )
                self.procs.append(ByzantineProcess(ctx, self.adversary.strategy_for(pid).build(), inner))
            else:
                self.procs.append(inner)

        chooser = max_byzantine_chooser(byz, self.params) if self.policy is Policy.ADVERSARY else None
        self.oracle = ConsensusOracle(self.params, self.crypto, public, self.policy, chooser, view_changes)
        self.correct = tuple(p for p in range(n) if p not in byz)
        self.trace = RunTrace(
            run_header(cfg, schedule, self.adversary, self.policy, view_changes),
            correct=self.correct,
            byzantine=tuple(sorted(byz)),
        )
        self._queue: list = []
        self._seq = 0
        self._wire: dict[int, tuple[Any, int, str]] = {}
        self._reveal_order = dict(schedule.reveal_order)
        self._first_reveal_phase: Optional[int] = None

    # -- queue ----------------------------------------------------------------

    def _push(self, time: int, kind: int, src: int, payload: Any) -> None:
        heapq.heappush(self._queue, (time, kind, src, self._seq, payload))
        self._seq += 1

    def _delay(self, t: int) -> int:
        s = self.schedule
        cap = s.pre_gst_cap if t < s.gst else s.tau
        return int(self.net_rng.integers(1, cap + 1))

    def _wire_info(self, msg) -> tuple[int, str]:
        key = id(msg)
        hit = self._wire.get(key)
        if hit is None or hit[0] is not msg:
            raw = encode_message(msg)
            hit = (msg, len(raw), hashlib.sha256(raw).hexdigest()[:16])
            self._wire[key] = hit
        return hit[1], hit[2]

    # -- effects ----------------------------------------------------------------

    def _apply(self, t: int, pid: int, effects: Iterable) -> None:
        rec = self.trace.records
        for e in effects:
            if isinstance(e, Send):
                size, digest = self._wire_info(e.msg)
                mtype = _msg_type(e.msg)
                rec.append({"ev": "send", "t": t, "src": pid, "dst": e.dst, "type": mtype, "bytes": size, "digest": digest})
                order = self._reveal_order.get(e.dst)
                if mtype == "REVEAL" and order is not None and pid in order:
                    at = max(self.schedule.reveal_release, t + 1) + order.index(pid)
                else:
                    at = t + self._delay(t)
                self._push(at, DELIVER, pid, (e.dst, e.msg))
            elif isinstance(e, Propose):
                ok = self.oracle.submit(Proposal(pid, e.snapshot))
                rec.append({"ev": "propose", "t": t, "pid": pid, "origins": [c.origin for c in e.snapshot], "valid": ok})
                if self.oracle.ready():
                    self._decide(t)
            elif isinstance(e, Decide):
                self.trace.decisions[pid] = e.value
                rec.append({"ev": "decide", "t": t, "pid": pid, "value": e.value.hex()})
                proc = self.procs[pid]
                if isinstance(proc, Process):
                    self.trace.contributions[pid] = list(proc.contributions)
                    rec.append({
                        "ev": "contributions", "pid": pid,
                        "items": [[c.origin, c.step, c.nullified] for c in proc.contributions],
                        "pre": [blk.hex() for blk in proc.pre],
                    })
            elif isinstance(e, Note):
                rec.append({"ev": "note", "t": t, "pid": pid, "kind": e.kind, "detail": e.detail})

    def _decide(self, t: int) -> None:
        decision = self.oracle.decide()
        self.trace.rnl_origins = decision.origins
        self.trace.consensus_rounds = decision.round
        base = t + decision.round * self.schedule.tau
        self.trace.records.append({
            "ev": "consensus", "t": t, "origins": list(decision.origins),
            "proposer": decision.proposer, "rounds": decision.round,
        })
        for pid in range(self.params.n):
            cap = self.schedule.pre_gst_cap if base < self.schedule.gst else self.schedule.tau
            self._push(base + int(self.cons_rng.integers(0, cap + 1)), DECISION, decision.proposer, (pid, decision))

    def _snapshot_blackboard(self) -> Blackboard:
        out = Blackboard()
        for b in self.boards:
            out = out.merge(b)
        return out

    # -- main loop --------------------------------------------------------------

    def run(self) -> RunTrace:
        s = self.schedule
        start_rng = np.random.default_rng([s.seed, _START])
        for pid in range(self.params.n):
            at = int(start_rng.integers(0, s.start_spread + 1)) if s.start_spread else 0
            self._push(at, START, pid, (pid, None))
        rec = self.trace.records
        while self._queue:
            t, kind, src, _, payload = heapq.heappop(self._queue)
            if t > s.horizon:
                break
            dst, body = payload
            proc = self.procs[dst]
            if kind == START:
                rec.append({"ev": "start", "t": t, "pid": dst})
                effects = proc.start_generation(self.entropy[dst].bytes)
            elif kind == DECISION:
                rec.append({"ev": "decision", "t": t, "pid": dst, "origins": list(body.origins), "round": body.round})
                if dst in self.correct and self._first_reveal_phase is None:
                    self._first_reveal_phase = t
                    board = self._snapshot_blackboard()
                    self.trace.blackboard = board
                    rec.append({
                        "ev": "blackboard", "t": t,
                        "origins": sorted(board.known_origins),
                        "blocks": sorted([list(x) for x in board.known_blocks]),
                    })
                effects = proc.on_rnl_decided(body.rnl)
            else:
                size, digest = self._wire_info(body)
                rec.append({"ev": "deliver", "t": t, "src": src, "dst": dst, "type": _msg_type(body), "digest": digest})
                if isinstance(body, Generated):
                    effects = proc.on_generated(body)
                else:
                    effects = proc.on_reveal(body)
            self._apply(t, dst, effects)
        if not self.trace.terminated:
            missing = [p for p in self.correct if p not in self.trace.decisions]
            raise LivenessViolation(f"correct processes {missing} never decided", self.trace)
        return self.trace


def run(
    cfg: ProtocolConfig,
    schedule: Schedule,
    adversary: Optional[AdversarySpec] = None,
    policy: Union[Policy, str] = Policy.FIRST,
    view_changes: bool = False,
) -> RunTrace:
    """Simulate one protocol instance and return its trace."""
    return Simulator(cfg, schedule, adversary, policy, view_changes).run()


def count_messages(trace: Union[RunTrace, Sequence[dict]]) -> dict[str, dict[str, int]]:
    """Point-to-point protocol messages and wire bits per phase."""
    records = trace.records if isinstance(trace, RunTrace) else trace
    counts = {k: {"messages": 0, "bits": 0} for k in ("GENERATED", "REVEAL", "total")}
    for r in records:
        if r.get("ev") != "send":
            continue
        for k in (r["type"], "total"):
            counts[k]["messages"] += 1
            counts[k]["bits"] += 8 * r["bytes"]
    return counts


def parse_trace(text: str) -> list[tuple[dict, list[dict]]]:
    """Split a trace file into (header, records) per run."""
    runs: list[tuple[dict, list[dict]]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace line {lineno}: {exc}") from None
        if rec.get("ev") == "header":
            runs.append((rec, []))
        elif not runs:
            raise ValueError(f"trace line {lineno}: record before any header")
        else:
            runs[-1][1].append(rec)
    return runs


def run_from_header(header: dict) -> RunTrace:
    """Re-execute the run a trace header describes."""
    from .adversary import StrategySpec

    if header.get("schema") != TRACE_SCHEMA:
        raise ValueError(f"unsupported trace schema {header.get('schema')!r}")
    cfg = ProtocolConfig(**header["config"])
    schedule = Schedule.from_dict(header["schedule"])
    adv = header["adversary"]
    strategies = tuple(
        sorted(
            (int(pid), StrategySpec(s["name"], tuple(sorted((k, _freeze(v)) for k, v in s["params"].items()))))
            for pid, s in adv["strategies"].items()
        )
    )
    adversary = AdversarySpec(strategies, adv["collusion"])
    return run(cfg, schedule, adversary, header["policy"], header["view_changes"])


def _freeze(v):
    return tuple(v) if isinstance(v, list) else v
