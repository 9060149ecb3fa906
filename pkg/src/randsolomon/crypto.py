"""Deterministic per-recipient encryption and signatures.

:class:`SimCrypto` models deterministic public-key encryption as a keyed
Feistel permutation over the block's bits, and signatures as keyed BLAKE2b
tags. It is a functional model for the simulator, not a secure scheme: the
only route from ciphertext to plaintext is :meth:`SimCrypto.det_decrypt` with
the recipient's private key handle, and the simulator never hands a process
any private key but its own.

Another backend can be dropped in by implementing :class:`CryptoBackend`.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol

import numpy as np


class DecryptFailure(Exception):
    pass


@dataclass(frozen=True)
class PublicKey:
    owner: int
    key_id: bytes


@dataclass(frozen=True)
class PrivateKey:
    owner: int
    handle: bytes = field(repr=False)


@dataclass(frozen=True)
class KeyPair:
    owner: int
    public: PublicKey
    private: PrivateKey


@dataclass(frozen=True)
class EncryptedBlock:
    recipient: int
    data: bytes


@dataclass(frozen=True)
class Signature:
    signer: int
    tag: bytes


class CryptoBackend(Protocol):
    block_bytes: int

    def keygen(self, owner: int, rng: np.random.Generator) -> KeyPair: ...

    def det_encrypt(self, pk: PublicKey, block: bytes) -> EncryptedBlock: ...

    def det_decrypt(self, sk: PrivateKey, ct: EncryptedBlock) -> bytes: ...

    def well_formed(self, ct: EncryptedBlock) -> bool: ...

    def sign(self, sk: PrivateKey, msg: bytes) -> Signature: ...

    def verify(self, pk: PublicKey, msg: bytes, sig: Signature) -> bool: ...


_ROUNDS = 6


def _round_fn(secret: bytes, rnd: int, value: int, nbits: int, width: int) -> int:
    h = hashlib.shake_256(secret + bytes([rnd]) + value.to_bytes(width, "big"))
    return int.from_bytes(h.digest((nbits + 7) // 8), "big") & ((1 << nbits) - 1)


@lru_cache(maxsize=1 << 18)
def _permute(secret: bytes, block: bytes, inverse: bool) -> bytes:
    nbits = 8 * len(block)
    lo_bits = nbits // 2
    hi_bits = nbits - lo_bits
    width = (hi_bits + 7) // 8
    x = int.from_bytes(block, "big")
    hi, lo = x >> lo_bits, x & ((1 << lo_bits) - 1)
    # even rounds update lo from hi, odd rounds update hi from lo
    order = range(_ROUNDS - 1, -1, -1) if inverse else range(_ROUNDS)
    for r in order:
        if r % 2 == 0:
            lo ^= _round_fn(secret, r, hi, lo_bits, width)
        else:
            hi ^= _round_fn(secret, r, lo, hi_bits, width)
    return ((hi << lo_bits) | lo).to_bytes(len(block), "big")


class SimCrypto:
    """Simulation backend; ciphertexts are as long as plaintext blocks."""

    def __init__(self, block_bytes: int):
        if block_bytes < 1:
            raise ValueError("block_bytes must be positive")
        self.block_bytes = block_bytes
        self._enc_secret: dict[bytes, bytes] = {}
        self._dec_secret: dict[bytes, tuple[int, bytes]] = {}
        self._sign_secret: dict[int, bytes] = {}
        self._signer_of: dict[bytes, int] = {}

    def keygen(self, owner: int, rng: np.random.Generator) -> KeyPair:
        if owner in self._sign_secret:
            raise ValueError(f"process {owner} already has keys")
        enc = rng.bytes(32)
        pk = PublicKey(owner, rng.bytes(16))
        sk = PrivateKey(owner, rng.bytes(16))
        self._enc_secret[pk.key_id] = enc
        self._dec_secret[sk.handle] = (owner, enc)
        self._sign_secret[owner] = rng.bytes(32)
        self._signer_of[sk.handle] = owner
        return KeyPair(owner, pk, sk)

    def det_encrypt(self, pk: PublicKey, block: bytes) -> EncryptedBlock:
        if len(block) != self.block_bytes:
            raise ValueError(f"block must be {self.block_bytes} bytes, got {len(block)}")
        return EncryptedBlock(pk.owner, _permute(self._enc_secret[pk.key_id], bytes(block), False))

    def det_decrypt(self, sk: PrivateKey, ct: EncryptedBlock) -> bytes:
        owner, enc = self._dec_secret[sk.handle]
        if ct.recipient != owner or not self.well_formed(ct):
            raise DecryptFailure(f"ciphertext not decryptable by process {owner}")
        return _permute(enc, ct.data, True)

    def well_formed(self, ct: EncryptedBlock) -> bool:
        return len(ct.data) == self.block_bytes

    def sign(self, sk: PrivateKey, msg: bytes) -> Signature:
        signer = self._signer_of[sk.handle]
        return Signature(signer, self._tag(signer, msg))

    def verify(self, pk: PublicKey, msg: bytes, sig: Signature) -> bool:
        if sig.signer != pk.owner or pk.owner not in self._sign_secret:
            return False
        return hmac.compare_digest(sig.tag, self._tag(pk.owner, msg))

    def _tag(self, signer: int, msg: bytes) -> bytes:
        return hashlib.blake2b(msg, key=self._sign_secret[signer], digest_size=32).digest()
