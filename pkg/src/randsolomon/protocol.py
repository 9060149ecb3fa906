"""The per-process RandSolomon state machine.

A :class:`Process` is event driven: each handler consumes one event and
returns a list of effects (:class:`Send`, :class:`Propose`, :class:`Decide`,
:class:`Note`) for the caller to carry out. Processes are numbered from 0 and
process ``k`` owns codeword block ``k`` of every commitment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .codec import CodeParams, derive_params, decode, encode
from .crypto import CryptoBackend, DecryptFailure, KeyPair, PublicKey
from .wire import Cell, Commitment, Generated, ProtocolMessage, Reveal, commitment_body, reveal_body


class PhaseError(RuntimeError):
    """An operation was invoked before its phase gate opened."""


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    f: int
    z: Optional[int] = None
    b: Optional[int] = None
    relax: bool = False
    # test-only switch; disabling it reopens the divergence attack
    retrace: bool = True

    @property
    def params(self) -> CodeParams:
        return derive_params(self.n, self.f, self.z, self.b, self.relax)


class _Marker:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNDECRYPTABLE"


UNDECRYPTABLE = _Marker()


# -- effects -----------------------------------------------------------------


@dataclass(frozen=True)
class Send:
    dst: int
    msg: ProtocolMessage


@dataclass(frozen=True)
class Propose:
    snapshot: tuple[Commitment, ...]


@dataclass(frozen=True)
class Decide:
    value: bytes


@dataclass(frozen=True)
class Note:
    kind: str
    detail: str = ""


Effect = Union[Send, Propose, Decide, Note]


@dataclass
class Contribution:
    origin: int
    step: int
    nullified: bool
    data: bytes


# -- pure helpers ------------------------------------------------------------


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def split_blocks(data: bytes, block_bytes: int) -> list[bytes]:
    return [data[i : i + block_bytes] for i in range(0, len(data), block_bytes)]


def rotate_right(blocks: Sequence[bytes], step: int) -> list[bytes]:
    step %= len(blocks)
    return list(blocks[len(blocks) - step :]) + list(blocks[: len(blocks) - step])


def compress(pre: Sequence[bytes]) -> list[bytes]:
    """XOR blocks pairwise, folding an odd last block into the final pair.

    Output block k is ``pre[2k] ^ pre[2k+1]``; with an odd count the last
    output block also takes ``pre[-1]``.
    """
    if len(pre) < 2:
        raise ValueError("need at least two blocks to compress")
    out = [xor_bytes(pre[2 * k], pre[2 * k + 1]) for k in range(len(pre) // 2)]
    if len(pre) % 2:
        out[-1] = xor_bytes(out[-1], pre[-1])
    return out


def operand_positions(m: int) -> list[list[int]]:
    """PRE positions feeding each output block of :func:`compress`."""
    groups = [[2 * k, 2 * k + 1] for k in range(m // 2)]
    if m % 2:
        groups[-1].append(m - 1)
    return groups


def build_commitment(
    params: CodeParams,
    crypto: CryptoBackend,
    keys: KeyPair,
    public_keys: Sequence[PublicKey],
    codeword: Sequence[bytes],
) -> Commitment:
    blocks = tuple(crypto.det_encrypt(public_keys[k], codeword[k]) for k in range(params.n))
    return Commitment(keys.owner, blocks, crypto.sign(keys.private, commitment_body(keys.owner, blocks)))


def commitment_ok(
    c: Commitment, params: CodeParams, crypto: CryptoBackend, public_keys: Sequence[PublicKey]
) -> bool:
    """Signature verifies and the block vector is structurally sound."""
    if not 0 <= c.origin < params.n or len(c.blocks) != params.n:
        return False
    if any(blk.recipient != k or not crypto.well_formed(blk) for k, blk in enumerate(c.blocks)):
        return False
    return crypto.verify(public_keys[c.origin], c.body(), c.sig)


def external_validity(
    snapshot: Sequence[Commitment],
    params: CodeParams,
    crypto: CryptoBackend,
    public_keys: Sequence[PublicKey],
) -> bool:
    origins = [c.origin for c in snapshot]
    if len(origins) < params.data_blocks or len(set(origins)) != len(origins):
        return False
    return all(commitment_ok(c, params, crypto, public_keys) for c in snapshot)


def normalize_rnl(snapshot: Sequence[Commitment], params: CodeParams) -> tuple[Commitment, ...]:
    """Lowest ``N - f`` origins, sorted by origin."""
    return tuple(sorted(snapshot, key=lambda c: c.origin)[: params.data_blocks])


def retrace(
    data: bytes,
    commitment: Commitment,
    params: CodeParams,
    crypto: CryptoBackend,
    public_keys: Sequence[PublicKey],
) -> bool:
    """Does re-encoding and re-encrypting ``data`` reproduce ``commitment``?"""
    codeword = encode(params, data)
    return all(
        crypto.det_encrypt(public_keys[k], codeword[k]) == commitment.blocks[k]
        for k in range(params.n)
    )


# -- the state machine -------------------------------------------------------


class Process:
    def __init__(
        self,
        pid: int,
        params: CodeParams,
        crypto: CryptoBackend,
        keys: KeyPair,
        public_keys: Sequence[PublicKey],
        retrace: bool = True,
    ):
        if keys.owner != pid:
            raise ValueError("key pair does not belong to this process")
        self.pid = pid
        self.params = params
        self.crypto = crypto
        self.keys = keys
        self.public_keys = tuple(public_keys)
        self.retrace_enabled = retrace

        self.seen: dict[int, Commitment] = {}
        self.proposed = False
        self.rnl: Optional[tuple[Commitment, ...]] = None
        self.sigma: dict[int, list] = {}
        self.buffered: list[Reveal] = []
        self.local_random: Optional[bytes] = None
        self.contributions: list[Contribution] = []
        self.pre: Optional[list[bytes]] = None
        self.result: Optional[bytes] = None

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def quorum(self) -> int:
        return self.params.data_blocks

    def broadcast(self, msg: ProtocolMessage) -> list[Effect]:
        return [Send(dst, msg) for dst in range(self.n) if dst != self.pid]

    # generation and commitment

    def make_commitment(self, entropy: Callable[[int], bytes]) -> Commitment:
        self.local_random = bytes(entropy(self.params.data_bytes))
        codeword = encode(self.params, self.local_random)
        return build_commitment(self.params, self.crypto, self.keys, self.public_keys, codeword)

    def start_generation(self, entropy: Callable[[int], bytes]) -> list[Effect]:
        if self.local_random is not None:
            raise PhaseError("generation already started")
        commitment = self.make_commitment(entropy)
        effects = self.broadcast(Generated(commitment))
        return effects + self._record_seen(commitment)

    def on_generated(self, msg: Generated) -> list[Effect]:
        c = msg.commitment
        if c.origin in self.seen:
            return []
        if not commitment_ok(c, self.params, self.crypto, self.public_keys):
            return [Note("bad_commitment", f"origin={c.origin}")]
        return self._record_seen(c)

    def _record_seen(self, c: Commitment) -> list[Effect]:
        self.seen[c.origin] = c
        if not self.proposed and len(self.seen) == self.quorum:
            self.proposed = True
            return [Propose(tuple(self.seen[o] for o in sorted(self.seen)))]
        return []

    def valid(self, snapshot: Sequence[Commitment]) -> bool:
        return external_validity(snapshot, self.params, self.crypto, self.public_keys)

    # reveal

    def on_rnl_decided(self, rnl: Sequence[Commitment]) -> list[Effect]:
        if self.rnl is not None:
            return []
        if not self.valid(rnl):
            raise PhaseError("decided set fails external validity")
        self.rnl = normalize_rnl(rnl, self.params)
        effects: list[Effect] = []
        cells: list[Cell] = []
        for c in self.rnl:
            row = [None] * self.n
            try:
                row[self.pid] = self.crypto.det_decrypt(self.keys.private, c.blocks[self.pid])
            except DecryptFailure:
                row[self.pid] = UNDECRYPTABLE
                effects.append(Note("undecryptable", f"origin={c.origin}"))
            self.sigma[c.origin] = row
            cell = row[self.pid]
            cells.append((c.origin, None if cell is UNDECRYPTABLE else cell))
        cells_t = tuple(cells)
        reveal = Reveal(self.pid, cells_t, self.crypto.sign(self.keys.private, reveal_body(self.pid, cells_t)))
        effects += self.broadcast(reveal)
        pending, self.buffered = self.buffered, []
        for msg in pending:
            effects += self._apply_reveal(msg)
        return effects + self._maybe_decide()

    def on_reveal(self, msg: Reveal) -> list[Effect]:
        if msg.origin == self.pid or self.result is not None:
            return []
        if self.rnl is None:
            self.buffered.append(msg)
            return []
        return self._apply_reveal(msg) + self._maybe_decide()

    def _apply_reveal(self, msg: Reveal) -> list[Effect]:
        j = msg.origin
        if not 0 <= j < self.n or not self.crypto.verify(self.public_keys[j], msg.body(), msg.sig):
            return [Note("bad_reveal_signature", f"origin={j}")]
        if tuple(o for o, _ in msg.cells) != tuple(c.origin for c in self.rnl):
            return [Note("partial_reveal", f"origin={j}")]
        notes: list[Effect] = []
        pk = self.public_keys[j]
        for c, (k, block) in zip(self.rnl, msg.cells):
            row = self.sigma[k]
            if row[j] is not None:
                continue
            if (
                block is not None
                and len(block) == self.params.block_bytes
                and self.crypto.det_encrypt(pk, block) == c.blocks[j]
            ):
                row[j] = block
            else:
                notes.append(Note("reveal_cell_rejected", f"from={j} origin={k}"))
        return notes

    # result computation

    def gate_holds(self) -> bool:
        if self.rnl is None:
            return False
        return all(
            sum(isinstance(cell, bytes) for cell in self.sigma[c.origin]) >= self.quorum
            for c in self.rnl
        )

    def _maybe_decide(self) -> list[Effect]:
        if self.result is None and self.gate_holds():
            return [Decide(self.compute_result())]
        return []

    def compute_result(self) -> bytes:
        if not self.gate_holds():
            raise PhaseError("share matrix gate not satisfied")
        p = self.params
        m = self.quorum
        pre = [bytes(p.block_bytes)] * m
        self.contributions = []
        for step, c in enumerate(self.rnl):
            row = self.sigma[c.origin]
            present = [k for k in range(self.n) if isinstance(row[k], bytes)][:m]
            blocks = [row[k] if k in present else None for k in range(self.n)]
            data = decode(p, blocks)
            nullified = False
            if self.retrace_enabled and not retrace(data, c, p, self.crypto, self.public_keys):
                data = bytes(p.data_bytes)
                nullified = True
            self.contributions.append(Contribution(c.origin, step, nullified, data))
            shifted = rotate_right(split_blocks(data, p.block_bytes), step)
            pre = [xor_bytes(a, s) for a, s in zip(pre, shifted)]
        self.pre = pre
        self.result = b"".join(compress(pre))
        return self.result
