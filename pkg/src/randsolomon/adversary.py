"""Byzantine strategies that plug into the simulator per process.

A :class:`ByzantineProcess` runs an honest :class:`~randsolomon.protocol.Process`
internally and lets a :class:`Strategy` interfere at four points: what it
generates and commits (emission), who receives it (recipient selection), what
it proposes to consensus, and what it reveals. Strategies only see a
:class:`ByzantineContext`: their own key pair, everyone's public keys, and the
blackboard of information delivered to Byzantine processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .codec import CodeParams, encode
from .crypto import CryptoBackend, DecryptFailure, EncryptedBlock, KeyPair, PublicKey, Signature
from .consensus import Proposal
from .protocol import (
    Decide,
    Effect,
    Note,
    Process,
    Propose,
    Send,
    build_commitment,
    normalize_rnl,
)
from .wire import Cell, Commitment, Generated, Reveal, commitment_body, reveal_body


@dataclass
class Blackboard:
    """What Byzantine processes have learnt so far.

    ``known_origins`` are numbers the adversary generated itself;
    ``known_blocks`` are (origin, codeword position) plaintexts it has seen.
    """

    known_origins: set[int] = field(default_factory=set)
    known_blocks: set[tuple[int, int]] = field(default_factory=set)

    def merge(self, other: "Blackboard") -> "Blackboard":
        return Blackboard(self.known_origins | other.known_origins, self.known_blocks | other.known_blocks)

    def copy(self) -> "Blackboard":
        return Blackboard(set(self.known_origins), set(self.known_blocks))


class ByzantineContext:
    """The only handle a strategy gets on the world."""

    def __init__(
        self,
        pid: int,
        params: CodeParams,
        crypto: CryptoBackend,
        keys: KeyPair,
        public_keys: Sequence[PublicKey],
        byzantine: frozenset[int],
        blackboard: Blackboard,
        rng: np.random.Generator,
    ):
        self.pid = pid
        self.params = params
        self.public_keys = tuple(public_keys)
        self.byzantine = byzantine
        self.blackboard = blackboard
        self.rng = rng
        self._crypto = crypto
        self._keys = keys

    @property
    def correct(self) -> list[int]:
        return [k for k in range(self.params.n) if k not in self.byzantine]

    def encrypt(self, recipient: int, block: bytes) -> EncryptedBlock:
        return self._crypto.det_encrypt(self.public_keys[recipient], block)

    def sign(self, msg: bytes) -> Signature:
        return self._crypto.sign(self._keys.private, msg)

    def commit(self, codeword: Sequence[bytes]) -> Commitment:
        return build_commitment(self.params, self._crypto, self._keys, self.public_keys, codeword)

    def signed_reveal(self, cells: tuple[Cell, ...]) -> Reveal:
        return Reveal(self.pid, cells, self.sign(reveal_body(self.pid, cells)))


def corrupt_block(block: bytes) -> bytes:
    return bytes([block[0] ^ 0x5A]) + block[1:]


def corrupt_codeword(codeword: Sequence[bytes], positions: Sequence[int]) -> list[bytes]:
    out = list(codeword)
    for k in positions:
        out[k] = corrupt_block(out[k])
    return out


# -- strategies ----------------------------------------------------------------


class Strategy:
    """Honest behaviour; subclasses override the hooks they interfere with."""

    name = "honest"

    def __init__(self, **params: Any):
        if params:
            raise TypeError(f"{self.name} takes no parameters, got {sorted(params)}")

    def local_random(self, ctx: ByzantineContext, honest: bytes) -> bytes:
        return honest

    def commitments(
        self, ctx: ByzantineContext, data: bytes, codeword: Sequence[bytes]
    ) -> dict[int, Optional[Commitment]]:
        c = ctx.commit(codeword)
        return {dst: c for dst in range(ctx.params.n) if dst != ctx.pid}

    def proposals(self, ctx: ByzantineContext, snapshot: tuple[Commitment, ...]) -> list[tuple[Commitment, ...]]:
        return [snapshot]

    def reveal(self, ctx: ByzantineContext, cells: tuple[Cell, ...], dst: int) -> Optional[tuple[Cell, ...]]:
        return cells


class Honest(Strategy):
    name = "honest"


class Silent(Strategy):
    """Full omission: sends nothing, ever."""

    name = "silent"

    def commitments(self, ctx, data, codeword):
        return {}

    def proposals(self, ctx, snapshot):
        return []

    def reveal(self, ctx, cells, dst):
        return None


def _split_recipients(ctx: ByzantineContext) -> tuple[list[int], list[int]]:
    others = [k for k in range(ctx.params.n) if k != ctx.pid]
    half = (len(others) + 1) // 2
    return others[:half], others[half:]


class Equivocate(Strategy):
    """Send one commitment to the lower half of recipients and another to the rest.

    By default both variants carry a corrupted block (the third and the
    second respectively); with ``valid=True`` they are two honest commitments
    to different numbers.
    """

    name = "equivocate"

    def __init__(self, valid: bool = False, errors: Sequence[int] = (2, 1)):
        self.valid = bool(valid)
        self.errors = tuple(int(e) for e in errors)

    def variants(self, ctx, data, codeword) -> tuple[Commitment, Commitment]:
        n = ctx.params.n
        if self.valid:
            other = ctx.rng.bytes(ctx.params.data_bytes)
            return ctx.commit(codeword), ctx.commit(encode(ctx.params, other))
        first = corrupt_codeword(codeword, [self.errors[0] % n])
        second = corrupt_codeword(codeword, [self.errors[1] % n])
        return ctx.commit(first), ctx.commit(second)

    def commitments(self, ctx, data, codeword):
        a, b = self.variants(ctx, data, codeword)
        low, high = _split_recipients(ctx)
        return {**{d: a for d in low}, **{d: b for d in high}}


def _default_victims(ctx: ByzantineContext, count: int) -> list[int]:
    return ctx.correct[:count]


class CorruptCodeword(Strategy):
    """Commit to a codeword with ``num_bad_blocks`` corrupted blocks."""

    name = "corrupt"

    def __init__(self, num_bad_blocks: Optional[int] = None, positions: Optional[Sequence[int]] = None):
        self.num_bad_blocks = num_bad_blocks
        self.positions = None if positions is None else [int(p) for p in positions]

    def bad_positions(self, ctx: ByzantineContext) -> list[int]:
        if self.positions is not None:
            return self.positions
        count = ctx.params.f if self.num_bad_blocks is None else int(self.num_bad_blocks)
        victims = _default_victims(ctx, count)
        if len(victims) < count:
            victims += [k for k in range(ctx.params.n) if k not in victims][: count - len(victims)]
        return victims

    def commitments(self, ctx, data, codeword):
        c = ctx.commit(corrupt_codeword(codeword, self.bad_positions(ctx)))
        return {dst: c for dst in range(ctx.params.n) if dst != ctx.pid}


class WithholdReveal(Strategy):
    """Skip the reveal towards ``recipients`` (default: everybody)."""

    name = "withhold"

    def __init__(self, recipients: Optional[Sequence[int]] = None):
        self.recipients = None if recipients is None else {int(r) for r in recipients}

    def reveal(self, ctx, cells, dst):
        if self.recipients is None or dst in self.recipients:
            return None
        return cells


class LieReveal(Strategy):
    """Reveal wrong plaintext in one cell (``cells="one"``) or all of them."""

    name = "lie"

    def __init__(self, cells: str = "one", recipients: Optional[Sequence[int]] = None):
        if cells not in ("one", "all"):
            raise ValueError("cells must be 'one' or 'all'")
        self.cells = cells
        self.recipients = None if recipients is None else {int(r) for r in recipients}

    def reveal(self, ctx, cells, dst):
        if self.recipients is not None and dst not in self.recipients:
            return cells
        out = []
        for i, (origin, block) in enumerate(cells):
            if block is not None and (self.cells == "all" or i == 0):
                block = corrupt_block(block)
            out.append((origin, block))
        return tuple(out)


class Divergence(CorruptCodeword):
    """Corrupt the victims' blocks and withhold the reveal from them.

    A victim then decodes from a subset that contains all corrupted blocks
    while other correct processes may decode the honest number; only the
    re-encoding check at result time keeps them in agreement.
    """

    name = "divergence"

    def __init__(self, victims: Optional[Sequence[int]] = None):
        super().__init__(positions=None)
        self.victims = None if victims is None else [int(v) for v in victims]

    def bad_positions(self, ctx):
        if self.victims is not None:
            return self.victims
        return _default_victims(ctx, max(ctx.params.f, 1))

    def reveal(self, ctx, cells, dst):
        return None if dst in self.bad_positions(ctx) else cells


class Constant(Strategy):
    """Contribute a fixed number instead of fresh randomness."""

    name = "constant"

    def __init__(self, value: int = 0):
        self.value = int(value) & 0xFF

    def local_random(self, ctx, honest):
        return bytes([self.value]) * len(honest)


class GarbageProposer(Strategy):
    """Flood consensus with invalid proposals alongside its honest one."""

    name = "garbage_proposal"

    def proposals(self, ctx, snapshot):
        unsigned = tuple(Commitment(c.origin, c.blocks, Signature(c.sig.signer, b"")) for c in snapshot)
        duplicated = snapshot[:-1] + (snapshot[0],)
        return [unsigned, duplicated, snapshot[:-1], snapshot]


class Forge(Strategy):
    """Try to pass off commitments in the name of correct processes.

    The forgeries are signed with the adversary's own key (no other key is
    reachable), so receivers must reject them.
    """

    name = "forge"

    def forgeries(self, ctx: ByzantineContext, codeword: Sequence[bytes]) -> list[Commitment]:
        forged = []
        for victim in ctx.correct:
            blocks = tuple(ctx.encrypt(k, codeword[k]) for k in range(ctx.params.n))
            sig = ctx.sign(commitment_body(victim, blocks))
            forged.append(Commitment(victim, blocks, Signature(victim, sig.tag)))
        return forged


STRATEGIES: dict[str, type[Strategy]] = {
    cls.name: cls
    for cls in (Honest, Silent, Equivocate, CorruptCodeword, WithholdReveal, LieReveal, Divergence, Constant, GarbageProposer, Forge)
}


def make_strategy(name: str, params: Optional[dict] = None) -> Strategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; known: {sorted(STRATEGIES)}") from None
    return cls(**(params or {}))


# -- spec ------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategySpec:
    name: str = "honest"
    params: tuple[tuple[str, Any], ...] = ()

    def build(self) -> Strategy:
        return make_strategy(self.name, dict(self.params))

    def to_dict(self) -> dict:
        return {"name": self.name, "params": {k: v for k, v in self.params}}


def max_byzantine_chooser(byzantine: frozenset[int], params: CodeParams) -> Callable[[Sequence[Proposal]], int]:
    """Pick the valid proposal whose decided set holds the most Byzantine numbers."""

    def choose(candidates: Sequence[Proposal]) -> int:
        def score(i: int) -> tuple[int, int]:
            rnl = normalize_rnl(candidates[i].snapshot, params)
            return (sum(c.origin in byzantine for c in rnl), -i)

        return max(range(len(candidates)), key=score)

    return choose


@dataclass(frozen=True)
class AdversarySpec:
    strategies: tuple[tuple[int, StrategySpec], ...] = ()
    collusion: bool = True

    @classmethod
    def none(cls) -> "AdversarySpec":
        return cls()

    @classmethod
    def uniform(cls, byzantine: Sequence[int], name: str, collusion: bool = True, **params: Any) -> "AdversarySpec":
        spec = StrategySpec(name, tuple(sorted(params.items())))
        return cls(tuple((int(p), spec) for p in sorted(byzantine)), collusion)

    @property
    def byzantine(self) -> frozenset[int]:
        return frozenset(p for p, _ in self.strategies)

    def strategy_for(self, pid: int) -> StrategySpec:
        return dict(self.strategies)[pid]

    def validate(self, params: CodeParams) -> None:
        if len(self.byzantine) != len(self.strategies):
            raise ValueError("duplicate Byzantine process id")
        if len(self.byzantine) > params.f:
            raise ValueError(f"{len(self.byzantine)} Byzantine processes exceed f={params.f}")
        for pid, spec in self.strategies:
            if not 0 <= pid < params.n:
                raise ValueError(f"Byzantine id {pid} out of range")
            spec.build()

    def to_dict(self) -> dict:
        return {
            "collusion": self.collusion,
            "strategies": {str(p): s.to_dict() for p, s in self.strategies},
        }


# -- the Byzantine process ---------------------------------------------------------


class ByzantineProcess:
    def __init__(self, ctx: ByzantineContext, strategy: Strategy, inner: Process):
        self.ctx = ctx
        self.strategy = strategy
        self.inner = inner
        self.pid = ctx.pid

    @property
    def result(self) -> Optional[bytes]:
        return self.inner.result

    def _learn(self, c: Commitment) -> None:
        blk = c.blocks[self.pid] if len(c.blocks) > self.pid else None
        if blk is None:
            return
        try:
            self.inner.crypto.det_decrypt(self.inner.keys.private, blk)
        except DecryptFailure:
            return
        self.ctx.blackboard.known_blocks.add((c.origin, self.pid))

    def _filter(self, effects: list[Effect]) -> list[Effect]:
        out: list[Effect] = []
        for e in effects:
            if isinstance(e, Propose):
                out += [Propose(tuple(s)) for s in self.strategy.proposals(self.ctx, e.snapshot)]
            elif isinstance(e, Send) and isinstance(e.msg, Reveal):
                cells = self.strategy.reveal(self.ctx, e.msg.cells, e.dst)
                if cells is None:
                    continue
                msg = e.msg if cells == e.msg.cells else self.ctx.signed_reveal(tuple(cells))
                out.append(Send(e.dst, msg))
            elif isinstance(e, Decide):
                out.append(Note("byzantine_decide", e.value.hex()))
            else:
                out.append(e)
        return out

    def start_generation(self, entropy: Callable[[int], bytes]) -> list[Effect]:
        p = self.inner.params
        data = self.strategy.local_random(self.ctx, bytes(entropy(p.data_bytes)))
        self.inner.local_random = data
        codeword = encode(p, data)
        self.ctx.blackboard.known_origins.add(self.pid)
        plan = self.strategy.commitments(self.ctx, data, codeword)
        effects: list[Effect] = [Send(dst, Generated(c)) for dst, c in sorted(plan.items()) if c is not None]
        if isinstance(self.strategy, Forge):
            for forged in self.strategy.forgeries(self.ctx, codeword):
                effects += [Send(dst, Generated(forged)) for dst in range(p.n) if dst != self.pid]
        sent = [c for _, c in sorted(plan.items()) if c is not None]
        own = sent[0] if sent else self.ctx.commit(codeword)
        return effects + self._filter(self.inner._record_seen(own))

    def on_generated(self, msg: Generated) -> list[Effect]:
        self._learn(msg.commitment)
        return self._filter(self.inner.on_generated(msg))

    def on_rnl_decided(self, rnl: Sequence[Commitment]) -> list[Effect]:
        for c in rnl:
            self._learn(c)
        return self._filter(self.inner.on_rnl_decided(rnl))

    def on_reveal(self, msg: Reveal) -> list[Effect]:
        return self._filter(self.inner.on_reveal(msg))
