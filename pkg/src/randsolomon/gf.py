"""Arithmetic over GF(2^z) for z in {8, 16, 32}, vectorised with numpy.

Elements are plain non-negative integers held in ``int64`` (z <= 16) or
``uint64`` (z = 32) arrays. Addition is XOR. The primitive polynomial per
width is fixed; every process must use the same one or re-encoding stops
being bit-exact.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# x^8+x^4+x^3+x^2+1, x^16+x^12+x^3+x+1, x^32+x^22+x^2+x+1
PRIMITIVE_POLYS = {8: 0x11D, 16: 0x1100B, 32: 0x1_0040_0007}

SUPPORTED_WIDTHS = tuple(PRIMITIVE_POLYS)


class GF:
    """The field GF(2^z) with generator alpha = x."""

    def __init__(self, z: int):
        if z not in PRIMITIVE_POLYS:
            raise ValueError(f"unsupported symbol width z={z}; expected one of {SUPPORTED_WIDTHS}")
        self.z = z
        self.poly = PRIMITIVE_POLYS[z]
        self.size = 1 << z
        self.dtype = np.uint64 if z == 32 else np.int64
        self._tables = z <= 16
        if self._tables:
            self._build_tables()

    def __repr__(self) -> str:
        return f"GF(2^{self.z})"

    def _build_tables(self) -> None:
        q1 = self.size - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.zeros(self.size, dtype=np.int64)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.size:
                x ^= self.poly
        exp[q1:] = exp[:q1]
        self._exp = exp
        self._log = log

    def asarray(self, a) -> np.ndarray:
        return np.asarray(a).astype(self.dtype, copy=False)

    # -- scalar helpers (used by tests and setup code) -------------------

    def mul_scalar(self, a: int, b: int) -> int:
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a & self.size:
                a ^= self.poly
        return r

    def pow_scalar(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self.mul_scalar(r, a)
            a = self.mul_scalar(a, a)
            e >>= 1
        return r

    # -- vectorised ------------------------------------------------------

    def mul(self, a, b) -> np.ndarray:
        a = self.asarray(a)
        b = self.asarray(b)
        if self._tables:
            out = self._exp[self._log[a] + self._log[b]]
            return np.where((a == 0) | (b == 0), 0, out)
        return self._clmul_reduce(a, b)

    def _clmul_reduce(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        one = np.uint64(1)
        zero = np.uint64(0)
        a, b = np.broadcast_arrays(a, b)
        r = np.zeros(a.shape, dtype=np.uint64)
        for i in range(self.z):
            sh = np.uint64(i)
            r ^= np.where((b >> sh) & one, a << sh, zero)
        poly = np.uint64(self.poly)
        for i in range(2 * self.z - 2, self.z - 1, -1):
            sh = np.uint64(i)
            r ^= np.where((r >> sh) & one, poly << np.uint64(i - self.z), zero)
        return r

    def inv(self, a) -> np.ndarray:
        a = self.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in GF(2^z)")
        if self._tables:
            return self._exp[(self.size - 1 - self._log[a]) % (self.size - 1)]
        # a^(2^z - 2) by square-and-multiply
        result = np.ones_like(a)
        base = a
        e = self.size - 2
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def alpha_powers(self, count: int) -> np.ndarray:
        """alpha^0 .. alpha^(count-1)."""
        if self._tables:
            return self._exp[:count].copy()
        out = np.empty(count, dtype=np.uint64)
        x = 1
        for i in range(count):
            out[i] = x
            x <<= 1
            if x & self.size:
                x ^= self.poly
        return out

    def prod(self, a: np.ndarray, axis: int = -1) -> np.ndarray:
        a = np.moveaxis(self.asarray(a), axis, 0)
        if self._tables:
            logs = self._log[a].sum(axis=0) % (self.size - 1)
            return np.where((a == 0).any(axis=0), 0, self._exp[logs])
        acc = a[0].copy()
        for row in a[1:]:
            acc = self.mul(acc, row)
        return acc

    def lagrange_matrix(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        """Matrix M with ``values_at(dst) = apply(values_at(src), M)``.

        ``M[s, y]`` is the Lagrange basis polynomial of src point ``s``
        evaluated at dst point ``y``. Points must be distinct within src.
        """
        src = self.asarray(src)
        dst = self.asarray(dst)
        n, m = len(src), len(dst)
        out = np.zeros((n, m), dtype=self.dtype)
        hit = dst[:, None] == src[None, :]
        direct = hit.any(axis=1)
        for y in np.flatnonzero(direct):
            out[np.argmax(hit[y]), y] = 1
        far = np.flatnonzero(~direct)
        if len(far) == 0:
            return out
        diffs = src[:, None] ^ src[None, :]
        diffs[np.diag_indices(n)] = 1
        weights = self.inv(self.prod(diffs, axis=1))
        y = dst[far]
        gaps = y[None, :] ^ src[:, None]
        numer = self.prod(gaps, axis=0)
        out[:, far] = self.mul(self.mul(numer[None, :], self.inv(gaps)), weights[:, None])
        return out

    def apply(self, values: np.ndarray, matrix: np.ndarray) -> np.ndarray:
        terms = self.mul(self.asarray(values)[:, None], matrix)
        return np.bitwise_xor.reduce(terms, axis=0)


@lru_cache(maxsize=None)
def field(z: int) -> GF:
    return GF(z)
