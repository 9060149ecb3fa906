"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (the verdict lines are printed
in the terminal summary) or as a script: ``python tests/test_acceptance.py``.
Criterion 2 drives the full adversarial sweep and takes several minutes.
"""

import itertools
import math
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE  # noqa: E402

from randsolomon.adversary import STRATEGIES  # noqa: E402
from randsolomon.codec import decode, derive_params, encode  # noqa: E402
from randsolomon.harness.checks import (  # noqa: E402
    check_agreement,
    check_nullification,
    check_termination,
    check_witness,
)
from randsolomon.harness.config import MASTER_SEED, ExperimentConfig  # noqa: E402
from randsolomon.harness.experiments import attack_demo, execute, uniformity  # noqa: E402
from randsolomon.netsim import Schedule, count_messages, parse_trace, run, run_from_header  # noqa: E402
from randsolomon.protocol import ProtocolConfig, compress  # noqa: E402

SWEEP_SEEDS = 500
SIZES = (4, 7, 10)
POLICIES = ("first", "adversary")


def verdict(number, title, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def sweep_configs():
    """Every (N, strategy, policy) of the adversarial suite, plus all-correct baselines."""
    for n in SIZES:
        yield ExperimentConfig(n=n, runs=SWEEP_SEEDS, start_spread=5).validate()
        for name in sorted(STRATEGIES):
            for policy in POLICIES:
                yield ExperimentConfig(
                    n=n, runs=SWEEP_SEEDS, start_spread=5, byzantine="auto", strategy=name,
                    policy=policy, view_changes=policy == "adversary",
                ).validate()


def label(cfg):
    adv = f"{cfg.strategy}/{cfg.policy}" if cfg.byzantine_ids else "all-correct"
    return f"N={cfg.n} {adv}"


@lru_cache(maxsize=None)
def sweep():
    """Run the suite once; collect violations per property."""
    out = {"runs": 0, "agreement": [], "nullification": [], "witness": [], "max_nullified": 0, "replay": []}
    for cfg in sweep_configs():
        params = cfg.code_params()
        for seed in cfg.seeds():
            trace, _ = execute(cfg, seed)
            out["runs"] += 1
            tag = f"{label(cfg)} seed {seed}"
            out["agreement"] += [f"{tag}: {v}" for v in check_termination(trace) + check_agreement(trace)]
            if cfg.byzantine_ids:
                out["nullification"] += [f"{tag}: {v}" for v in check_nullification(trace, params)]
                out["witness"] += [f"{tag}: {v}" for v in check_witness(trace, params)]
                per = [sum(c.nullified for c in cs) for p, cs in trace.contributions.items() if p in trace.correct]
                out["max_nullified"] = max(out["max_nullified"], max(per, default=0))
            if seed < cfg.seed + 3:
                out["replay"].append(trace.dumps())
    return out


def test_criterion_1_golden_final_stage():
    pre = [bytes([0xDD]), bytes([0x81]), bytes([0x8B])]
    got = b"".join(compress(pre))
    cross = bytes([0xDD ^ 0x81 ^ 0x8B])
    trace, violations = execute(
        ExperimentConfig(n=4, f=1, z=8, b=1, relax=True, byzantine=(3,), strategy="equivocate", policy="adversary").validate(), 0
    )
    ok = got == bytes([0xD7]) == cross and not violations and len(trace.decisions[0]) == 1
    assert verdict(1, "paper-example final XOR stage", ok, f"DD,81,8B -> {got.hex().upper()}")


@pytest.mark.slow
def test_criterion_2_agreement_and_termination():
    s = sweep()
    ok = s["runs"] >= SWEEP_SEEDS * len(SIZES) * (1 + 2 * len(STRATEGIES)) and not s["agreement"]
    detail = f"{s['runs']} runs, {len(s['agreement'])} violations"
    assert verdict(2, "agreement and termination over the adversarial suite", ok, detail), s["agreement"][:5]


def test_criterion_3_erasure_code_properties():
    failures = 0
    checked = 0
    rng = np.random.default_rng(MASTER_SEED)
    for n in (4, 7):
        f = (n - 1) // 3
        p = derive_params(n, f)
        patterns = [g for r in range(f + 1) for g in itertools.combinations(range(n), r)]
        full = [g for g in patterns if len(g) == f]
        for _ in range(100):
            data = rng.bytes(p.data_bytes)
            cw = encode(p, data)
            for gone in patterns:
                blocks = [None if k in gone else cw[k] for k in range(n)]
                failures += decode(p, blocks) != data
                checked += 1
            outs = {decode(p, [None if k in g else cw[k] for k in range(n)]) for g in full}
            failures += len(outs) != 1
    assert verdict(3, "erasure-code round trip and subset agreement", failures == 0, f"{checked} decodes, {failures} failures")


def test_criterion_4_retrace_differential():
    rep = attack_demo(4, 1)
    ok = rep.schedules == 216 and rep.divergent[False] >= 1 and rep.divergent[True] == 0
    detail = f"{rep.schedules} schedules: {rep.divergent[False]} divergent with retrace off, {rep.divergent[True]} with it on"
    assert verdict(4, "retraceability differential", ok, detail)


@pytest.mark.slow
def test_criterion_5_nullification_bound():
    s = sweep()
    ok = not s["nullification"]
    detail = f"max nullified per run {s['max_nullified']}, {len(s['nullification'])} violations"
    assert verdict(5, "nullification bound", ok, detail), s["nullification"][:5]


@pytest.mark.slow
def test_criterion_6_unpredictability_witness():
    s = sweep()
    ok = not s["witness"]
    assert verdict(6, "unpredictability witness", ok, f"{len(s['witness'])} violations"), s["witness"][:5]


def test_criterion_7_message_counts():
    exact = True
    bits = []
    for n in SIZES:
        cfg = ProtocolConfig(n, (n - 1) // 3)
        for seed in range(20):
            c = count_messages(run(cfg, Schedule(seed=seed, start_spread=5)))
            exact &= c["total"]["messages"] == 2 * n * (n - 1)
        bits.append(c["GENERATED"]["bits"])
    slope = float(np.polyfit(np.log(SIZES), np.log(bits), 1)[0])
    ok = exact and abs(slope - 3.0) <= 0.3
    assert verdict(7, "message count and generation bit volume", ok, f"2N(N-1) exact={exact}, log-log slope {slope:.3f}")


def test_criterion_8_uniformity():
    report = uniformity(ExperimentConfig(n=4, seed=MASTER_SEED, runs=2000).validate())
    u = report.uniformity
    ok = report.ok and not u.degenerate and u.p_value > 0.01
    assert verdict(8, "leading-byte uniformity", ok, f"2000 runs, chi2={u.statistic:.1f}, p={u.p_value:.4f}")


@pytest.mark.slow
def test_criterion_9_replay_determinism():
    s = sweep()
    mismatches = 0
    for text in s["replay"]:
        [(header, _)] = parse_trace(text)
        mismatches += run_from_header(header).dumps() != text
    ok = mismatches == 0 and len(s["replay"]) > 0
    assert verdict(9, "replay determinism", ok, f"{len(s['replay'])} traces re-executed, {mismatches} mismatches")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
