"""GENERATED / REVEAL messages and their canonical byte encoding.

All integers are big-endian u32, every variable-length field is length
prefixed, and fields appear in a fixed order, so equal messages always
serialise to equal bytes. Signatures cover the encoding of the message body
(everything except the trailing signature).

GENERATED: tag=1 | origin | count | count x (recipient | len | bytes) | sig
REVEAL:    tag=2 | origin | count | count x (rnl_origin | kind | len | bytes) | sig
signature: signer | len | tag bytes
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

from .crypto import EncryptedBlock, Signature

GENERATED_TAG = 1
REVEAL_TAG = 2

CELL_BLOCK = 0
CELL_MARKER = 1

_U32 = struct.Struct(">I")
_U8 = struct.Struct(">B")


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class Commitment:
    """A signed vector of N per-recipient encrypted codeword blocks."""

    origin: int
    blocks: tuple[EncryptedBlock, ...]
    sig: Signature

    @cached_property
    def _body(self) -> bytes:
        return commitment_body(self.origin, self.blocks)

    def body(self) -> bytes:
        return self._body


@dataclass(frozen=True)
class Generated:
    commitment: Commitment

    @property
    def origin(self) -> int:
        return self.commitment.origin


# a cell is (rnl origin, plaintext block) with None standing for the
# undecryptable marker
Cell = tuple[int, Optional[bytes]]


@dataclass(frozen=True)
class Reveal:
    origin: int
    cells: tuple[Cell, ...]
    sig: Signature

    def body(self) -> bytes:
        return reveal_body(self.origin, self.cells)


ProtocolMessage = Union[Generated, Reveal]


def _bytes(b: bytes) -> bytes:
    return _U32.pack(len(b)) + b


def _sig(sig: Signature) -> bytes:
    return _U32.pack(sig.signer) + _bytes(sig.tag)


def commitment_body(origin: int, blocks: tuple[EncryptedBlock, ...]) -> bytes:
    parts = [_U8.pack(GENERATED_TAG), _U32.pack(origin), _U32.pack(len(blocks))]
    for blk in blocks:
        parts.append(_U32.pack(blk.recipient))
        parts.append(_bytes(blk.data))
    return b"".join(parts)


def reveal_body(origin: int, cells: tuple[Cell, ...]) -> bytes:
    parts = [_U8.pack(REVEAL_TAG), _U32.pack(origin), _U32.pack(len(cells))]
    for rnl_origin, block in cells:
        parts.append(_U32.pack(rnl_origin))
        if block is None:
            parts.append(_U8.pack(CELL_MARKER) + _bytes(b""))
        else:
            parts.append(_U8.pack(CELL_BLOCK) + _bytes(block))
    return b"".join(parts)


def encode_message(msg: ProtocolMessage) -> bytes:
    if isinstance(msg, Generated):
        return msg.commitment.body() + _sig(msg.commitment.sig)
    if isinstance(msg, Reveal):
        return msg.body() + _sig(msg.sig)
    raise WireError(f"not a protocol message: {type(msg).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WireError("truncated message")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def sig(self) -> Signature:
        signer = self.u32()
        return Signature(signer, self.blob())


def decode_message(data: bytes) -> ProtocolMessage:
    r = _Reader(bytes(data))
    tag = r.u8()
    origin = r.u32()
    count = r.u32()
    if tag == GENERATED_TAG:
        blocks = []
        for _ in range(count):
            recipient = r.u32()
            blocks.append(EncryptedBlock(recipient, r.blob()))
        msg: ProtocolMessage = Generated(Commitment(origin, tuple(blocks), r.sig()))
    elif tag == REVEAL_TAG:
        cells = []
        for _ in range(count):
            rnl_origin = r.u32()
            kind = r.u8()
            blob = r.blob()
            if kind == CELL_MARKER:
                cells.append((rnl_origin, None))
            elif kind == CELL_BLOCK:
                cells.append((rnl_origin, blob))
            else:
                raise WireError(f"unknown cell kind {kind}")
        msg = Reveal(origin, tuple(cells), r.sig())
    else:
        raise WireError(f"unknown message tag {tag}")
    if r.pos != len(r.data):
        raise WireError("trailing bytes after message")
    return msg
