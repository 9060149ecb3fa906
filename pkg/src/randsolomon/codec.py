"""Block-aligned systematic Reed-Solomon erasure code.

A codeword is ``N`` blocks of ``b`` symbols; the first ``N - f`` blocks carry
the data verbatim and the remaining ``f`` blocks are parity. Symbol ``i`` of
the codeword is the value at ``alpha^i`` of the unique polynomial of degree
``< d`` through the data symbols, so any ``d`` known symbols determine the
rest (MDS). Erasures are whole blocks at known positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .gf import SUPPORTED_WIDTHS, field


class CodecError(ValueError):
    pass


class ParameterError(CodecError):
    pass


class TooManyErasures(CodecError):
    pass


class DecodeInconsistent(CodecError):
    """Present blocks do not all lie on one codeword."""


@dataclass(frozen=True)
class CodeParams:
    n: int
    f: int
    z: int
    b: int
    relax: bool = False

    @property
    def d(self) -> int:
        return self.b * (self.n - self.f)

    @property
    def l(self) -> int:  # noqa: E743
        return self.b * self.n

    @property
    def t(self) -> int:
        return self.l - self.d

    @property
    def symbol_bytes(self) -> int:
        return self.z // 8

    @property
    def block_bytes(self) -> int:
        return self.b * self.symbol_bytes

    @property
    def data_bytes(self) -> int:
        return self.d * self.symbol_bytes

    @property
    def data_blocks(self) -> int:
        return self.n - self.f

    def validate(self) -> None:
        if self.f < 0 or self.n < 3 * self.f + 1:
            raise ParameterError(f"need N >= 3f+1, got N={self.n}, f={self.f}")
        if self.n < 4:
            raise ParameterError(f"need N >= 4, got N={self.n}")
        if self.z not in SUPPORTED_WIDTHS:
            raise ParameterError(f"symbol width z={self.z} not in {SUPPORTED_WIDTHS}")
        if self.b < 1:
            raise ParameterError(f"block size b must be positive, got {self.b}")
        if self.l > (1 << self.z) - 1:
            raise ParameterError(
                f"codeword length l=b*N={self.l} exceeds 2^z-1={(1 << self.z) - 1}"
            )
        if self.b * self.z < 256 and not self.relax:
            raise ParameterError(
                f"b*z={self.b * self.z} < 256 bits; set relax to allow small blocks"
            )


def derive_params(
    n: int,
    f: int,
    z: Optional[int] = None,
    b: Optional[int] = None,
    relax: bool = False,
) -> CodeParams:
    """Pick code parameters for ``n`` processes tolerating ``f`` faults.

    With ``z=None`` the smallest width in (8, 16, 32) is chosen for which the
    block size ``b`` (caller's, or ``ceil(256/z)``) gives ``b*n <= 2^z - 1``.
    """
    if f < 0 or n < 3 * f + 1:
        raise ParameterError(f"need N >= 3f+1, got N={n}, f={f}")
    if n < 4:
        raise ParameterError(f"need N >= 4, got N={n}")
    if z is None:
        for cand in SUPPORTED_WIDTHS:
            cb = b if b is not None else math.ceil(256 / cand)
            if cb * n <= (1 << cand) - 1:
                z = cand
                break
        else:
            raise ParameterError(f"no symbol width supports N={n}")
    if b is None:
        b = math.ceil(256 / z)
    params = CodeParams(n=n, f=f, z=z, b=b, relax=relax)
    params.validate()
    return params


# -- symbol packing ----------------------------------------------------------

_DTYPES = {8: ">u1", 16: ">u2", 32: ">u4"}


def to_symbols(params: CodeParams, raw: bytes) -> np.ndarray:
    return field(params.z).asarray(np.frombuffer(raw, dtype=_DTYPES[params.z]))


def from_symbols(params: CodeParams, symbols: np.ndarray) -> bytes:
    return np.asarray(symbols).astype(_DTYPES[params.z]).tobytes()


# -- matrices ----------------------------------------------------------------


@lru_cache(maxsize=None)
def _points(params: CodeParams) -> np.ndarray:
    return field(params.z).alpha_powers(params.l)


@lru_cache(maxsize=None)
def _parity_matrix(params: CodeParams) -> np.ndarray:
    pts = _points(params)
    return field(params.z).lagrange_matrix(pts[: params.d], pts[params.d :])


@lru_cache(maxsize=4096)
def _recovery_matrix(params: CodeParams, blocks: tuple[int, ...]) -> np.ndarray:
    """Map the symbols of ``blocks`` to the symbols of the missing data blocks."""
    pts = _points(params)
    b = params.b
    missing = [k for k in range(params.data_blocks) if k not in blocks]
    src = np.concatenate([pts[k * b : (k + 1) * b] for k in blocks])
    dst = np.concatenate([pts[k * b : (k + 1) * b] for k in missing])
    return field(params.z).lagrange_matrix(src, dst)


# -- encode / decode ---------------------------------------------------------


def split(raw: bytes, size: int) -> list[bytes]:
    return [raw[i : i + size] for i in range(0, len(raw), size)]


@dataclass(frozen=True)
class ErasurePattern:
    present: tuple[bool, ...]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Optional[bytes]]) -> "ErasurePattern":
        return cls(tuple(blk is not None for blk in blocks))

    @property
    def absent(self) -> int:
        return self.present.count(False)

    def positions(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.present) if p)


@lru_cache(maxsize=65536)
def _encode_cached(params: CodeParams, data: bytes) -> tuple[bytes, ...]:
    sym = to_symbols(params, data)
    parity = field(params.z).apply(sym, _parity_matrix(params))
    return tuple(split(data + from_symbols(params, parity), params.block_bytes))


def encode(params: CodeParams, data: bytes) -> tuple[bytes, ...]:
    """Encode ``d`` data symbols into ``N`` blocks of ``b`` symbols."""
    data = bytes(data)
    if len(data) != params.data_bytes:
        raise CodecError(f"expected {params.data_bytes} data bytes, got {len(data)}")
    return _encode_cached(params, data)


def decode(
    params: CodeParams,
    blocks: Sequence[Optional[bytes]],
    pattern: Optional[ErasurePattern] = None,
) -> bytes:
    """Recover the data from a codeword with erased blocks.

    ``blocks`` has one entry per position; erased entries are ``None`` (or
    marked absent by ``pattern``). Needs at least ``N - f`` present blocks.
    With more than that, the extras are checked against the recovered
    codeword and :class:`DecodeInconsistent` is raised on mismatch.
    """
    if len(blocks) != params.n:
        raise CodecError(f"expected {params.n} block slots, got {len(blocks)}")
    if pattern is None:
        pattern = ErasurePattern.from_blocks(blocks)
    present = pattern.positions()
    need = params.data_blocks
    if len(present) < need:
        raise TooManyErasures(f"{len(present)} blocks present, need {need}")
    for k in present:
        if blocks[k] is None or len(blocks[k]) != params.block_bytes:
            raise CodecError(f"block {k} is missing or has the wrong length")
    chosen = present[:need]
    if chosen == tuple(range(need)):
        data = b"".join(blocks[k] for k in chosen)
    else:
        sym = to_symbols(params, b"".join(blocks[k] for k in chosen))
        lost = field(params.z).apply(sym, _recovery_matrix(params, chosen))
        found = iter(split(from_symbols(params, lost), params.block_bytes))
        data = b"".join(blocks[k] if k in chosen else next(found) for k in range(need))
    extra = present[need:]
    if extra:
        ref = _encode_cached(params, data)
        bad = [k for k in extra if ref[k] != blocks[k]]
        if bad:
            raise DecodeInconsistent(f"blocks {bad} inconsistent with the other present blocks")
    return data
