"""Property-based tests over schedules, adversaries and delivery orders."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from randsolomon.adversary import STRATEGIES
from randsolomon.harness.config import ExperimentConfig
from randsolomon.harness.experiments import execute
from randsolomon.protocol import Decide, Send

from conftest import World

configs = st.builds(
    ExperimentConfig,
    n=st.sampled_from([4, 5, 7]),
    seed=st.integers(0, 2**32 - 1),
    gst=st.integers(0, 60),
    tau=st.integers(1, 8),
    pre_gst_cap=st.integers(1, 60),
    start_spread=st.integers(0, 20),
    byzantine=st.just("auto"),
    strategy=st.sampled_from(sorted(STRATEGIES)),
    policy=st.sampled_from(["first", "adversary"]),
    view_changes=st.booleans(),
)


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(configs)
def test_every_invariant_holds_for_random_schedules(cfg):
    cfg = cfg.validate()
    trace, violations = execute(cfg, cfg.seed)
    assert violations == []
    assert trace.terminated and trace.agreed


@settings(max_examples=40, deadline=None)
@given(st.permutations(range(16)), st.integers(0, 1000))
def test_result_independent_of_delivery_order(perm, seed):
    """Deliver the same reveals (and the decision) in any interleaving."""
    w = World(4, 1, seed=seed)
    comm = {p.pid: p.start_generation(w.entropy(seed + p.pid))[0].msg.commitment for p in w.procs}
    rnl = (comm[0], comm[1], comm[2])
    shadow = World(4, 1, seed=seed)
    for p in shadow.procs:
        p.start_generation(w.entropy(seed + p.pid))
    reveals = {p.pid: next(e.msg for e in p.on_rnl_decided(rnl) if isinstance(e, Send)) for p in shadow.procs}
    # events: each process gets the decision plus reveals from the other three
    events = [(dst, src) for dst in range(4) for src in [None] + [s for s in range(4) if s != dst]]
    values = {}
    for i in perm:
        dst, src = events[i]
        proc = w.procs[dst]
        eff = proc.on_rnl_decided(rnl) if src is None else proc.on_reveal(reveals[src])
        for e in eff:
            if isinstance(e, Decide):
                values[dst] = e.value
    assert len(values) == 4 and len(set(values.values())) == 1
