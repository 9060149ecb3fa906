"""Consensus with external validity, as an in-simulator oracle.

The oracle stands in for any partially synchronous BFT consensus: it keeps
every proposal that passes the validity predicate and, once valid proposals
from ``N - f`` distinct proposers are in, picks one of them. Agreement and
external validity hold by construction; the caller delivers the single
:class:`Decision` to every process.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .codec import CodeParams
from .crypto import CryptoBackend, PublicKey
from .protocol import external_validity, normalize_rnl
from .wire import Commitment


class Policy(str, enum.Enum):
    FIRST = "first"
    ADVERSARY = "adversary"


@dataclass(frozen=True)
class Proposal:
    proposer: int
    snapshot: tuple[Commitment, ...]


@dataclass(frozen=True)
class Decision:
    rnl: tuple[Commitment, ...]
    round: int
    proposer: int

    @property
    def origins(self) -> tuple[int, ...]:
        return tuple(c.origin for c in self.rnl)


Chooser = Callable[[Sequence[Proposal]], int]


class ConsensusOracle:
    def __init__(
        self,
        params: CodeParams,
        crypto: CryptoBackend,
        public_keys: Sequence[PublicKey],
        policy: Policy = Policy.FIRST,
        chooser: Optional[Chooser] = None,
        view_changes: bool = False,
    ):
        self.params = params
        self.crypto = crypto
        self.public_keys = tuple(public_keys)
        self.policy = Policy(policy)
        self.chooser = chooser
        self.view_changes = view_changes
        self.candidates: list[Proposal] = []
        self.discarded: list[Proposal] = []
        self.decision: Optional[Decision] = None

    def submit(self, proposal: Proposal) -> bool:
        """Keep ``proposal`` if it is valid; return whether it was kept."""
        if external_validity(proposal.snapshot, self.params, self.crypto, self.public_keys):
            self.candidates.append(proposal)
            return True
        self.discarded.append(proposal)
        return False

    @property
    def rounds(self) -> int:
        # one view change per faulty leader in the worst case
        if self.policy is Policy.ADVERSARY and self.view_changes:
            return 1 + self.params.f
        return 1

    def ready(self) -> bool:
        proposers = {p.proposer for p in self.candidates}
        return self.decision is None and len(proposers) >= self.params.data_blocks

    def decide(self) -> Decision:
        if self.decision is not None:
            return self.decision
        if not self.candidates:
            raise RuntimeError("no valid proposal to decide on")
        idx = 0
        if self.policy is Policy.ADVERSARY and self.chooser is not None:
            idx = self.chooser(tuple(self.candidates))
            if not 0 <= idx < len(self.candidates):
                raise ValueError(f"chooser returned out-of-range index {idx}")
        chosen = self.candidates[idx]
        self.decision = Decision(normalize_rnl(chosen.snapshot, self.params), self.rounds, chosen.proposer)
        return self.decision
