import numpy as np
import pytest

from randsolomon.adversary import (
    STRATEGIES,
    AdversarySpec,
    Blackboard,
    ByzantineContext,
    make_strategy,
)
from randsolomon.consensus import Policy
from randsolomon.crypto import PrivateKey, SimCrypto
from randsolomon.netsim import Schedule, run
from randsolomon.protocol import ProtocolConfig


def notes(trace, kind):
    return [r for r in trace.records if r["ev"] == "note" and r["kind"] == kind]


def nullified(trace, pid=0):
    return {c.origin for c in trace.contributions[pid] if c.nullified}


def test_paper_scenario_equivocation_nullified():
    cfg = ProtocolConfig(4, 1, z=8, b=1, relax=True)
    t = run(cfg, Schedule(seed=0), AdversarySpec.uniform([3], "equivocate"), Policy.ADVERSARY)
    assert t.agreed and t.terminated
    assert 3 in t.rnl_origins
    assert nullified(t) == {3}
    sent = {r["digest"] for r in t.records if r["ev"] == "send" and r["src"] == 3 and r["type"] == "GENERATED"}
    assert len(sent) == 2


def test_valid_equivocation_survives():
    t = run(ProtocolConfig(4, 1), Schedule(seed=1), AdversarySpec.uniform([3], "equivocate", valid=True), Policy.ADVERSARY)
    assert 3 in t.rnl_origins and nullified(t) == set() and t.agreed


@pytest.mark.parametrize("bad,expect", [(0, set()), (1, {3}), (3, {3})])
def test_corrupt_codeword(bad, expect):
    t = run(ProtocolConfig(4, 1), Schedule(seed=2), AdversarySpec.uniform([3], "corrupt", num_bad_blocks=bad), Policy.ADVERSARY)
    assert 3 in t.rnl_origins and t.agreed
    for p in t.correct:
        assert nullified(t, p) == expect


def test_withhold_everything_in_reveal():
    t = run(ProtocolConfig(7, 2), Schedule(seed=3), AdversarySpec.uniform([5, 6], "withhold"), Policy.ADVERSARY)
    assert t.terminated and t.agreed
    assert not [r for r in t.records if r["ev"] == "send" and r["type"] == "REVEAL" and r["src"] in (5, 6)]


@pytest.mark.parametrize("cells,rejections", [("one", 1), ("all", 3)])
def test_lying_reveals_rejected(cells, rejections):
    # the liar's reveal reaches every correct process first
    order = tuple((r, (3,) + tuple(p for p in range(3) if p != r)) for r in range(3))
    s = Schedule(seed=4, reveal_order=order, reveal_release=80)
    t = run(ProtocolConfig(4, 1), s, AdversarySpec.uniform([3], "lie", cells=cells))
    assert t.terminated and t.agreed
    for p in t.correct:
        assert len([n for n in notes(t, "reveal_cell_rejected") if n["pid"] == p]) == rejections


def test_forgeries_rejected():
    t = run(ProtocolConfig(4, 1), Schedule(seed=5), AdversarySpec.uniform([3], "forge"))
    assert t.agreed and len(notes(t, "bad_commitment")) >= 3
    assert nullified(t) == set()


def test_garbage_proposals_discarded():
    t = run(ProtocolConfig(4, 1), Schedule(seed=6), AdversarySpec.uniform([3], "garbage_proposal"), Policy.ADVERSARY)
    invalid = [r for r in t.records if r["ev"] == "propose" and not r["valid"]]
    assert len(invalid) == 3 and t.agreed


def test_constant_contribution_survives():
    t = run(ProtocolConfig(4, 1), Schedule(seed=7), AdversarySpec.uniform([3], "constant", value=0xAB), Policy.ADVERSARY)
    assert 3 in t.rnl_origins
    contrib = next(c for c in t.contributions[0] if c.origin == 3)
    assert not contrib.nullified and set(contrib.data) == {0xAB}


def test_blackboard_holds_only_delivered_information():
    t = run(ProtocolConfig(7, 2), Schedule(seed=8), AdversarySpec.uniform([5, 6], "honest"))
    board = t.blackboard
    assert board.known_origins == {5, 6}
    assert all(pos in (5, 6) for _, pos in board.known_blocks)


def test_no_collusion_keeps_boards_apart():
    spec = AdversarySpec.uniform([5, 6], "honest", collusion=False)
    t = run(ProtocolConfig(7, 2), Schedule(seed=8), spec)
    assert t.blackboard.known_origins == {5, 6}


def test_context_exposes_no_foreign_private_key():
    crypto = SimCrypto(4)
    rng = np.random.default_rng(0)
    keys = [crypto.keygen(p, rng) for p in range(4)]
    from randsolomon.codec import derive_params

    params = derive_params(4, 1, z=8, b=4, relax=True)
    ctx = ByzantineContext(3, params, crypto, keys[3], [k.public for k in keys], frozenset({3}), Blackboard(), rng)
    public_attrs = {k: v for k, v in vars(ctx).items() if not k.startswith("_")}
    assert not any(isinstance(v, PrivateKey) for v in public_attrs.values())
    # the only signer reachable is the adversary itself
    assert ctx.sign(b"m").signer == 3
    assert not crypto.verify(keys[0].public, b"m", ctx.sign(b"m"))


def test_registry_and_parameters():
    assert set(STRATEGIES) == {
        "honest", "silent", "equivocate", "corrupt", "withhold", "lie",
        "divergence", "constant", "garbage_proposal", "forge",
    }
    with pytest.raises(ValueError):
        make_strategy("nope")
    with pytest.raises(TypeError):
        make_strategy("silent", {"x": 1})
    with pytest.raises(ValueError):
        make_strategy("lie", {"cells": "some"})


def test_spec_validation():
    from randsolomon.codec import derive_params

    p = derive_params(4, 1)
    with pytest.raises(ValueError):
        AdversarySpec.uniform([2, 3], "honest").validate(p)
    with pytest.raises(ValueError):
        AdversarySpec.uniform([4], "honest").validate(p)
