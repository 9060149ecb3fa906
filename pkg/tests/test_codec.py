import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randsolomon.adversary import corrupt_block
from randsolomon.codec import (
    CodecError,
    DecodeInconsistent,
    ParameterError,
    TooManyErasures,
    decode,
    derive_params,
    encode,
)


def scan_width(n):
    """Independent oracle: smallest z in (8, 16, 32) with ceil(256/z)*n <= 2^z - 1."""
    return next(z for z in (8, 16, 32) if math.ceil(256 / z) * n <= 2**z - 1)


def erase(blocks, positions):
    return [None if k in positions else blk for k, blk in enumerate(blocks)]


def test_paper_example_params():
    p = derive_params(4, 1, z=8, b=1, relax=True)
    assert (p.d, p.l, p.t) == (3, 4, 1)


@pytest.mark.parametrize("n", [4, 7, 10, 31, 100])
def test_auto_width_matches_scan(n):
    f = (n - 1) // 3
    p = derive_params(n, f)
    z = scan_width(n)
    b = math.ceil(256 / z)
    assert (p.z, p.b) == (z, b)
    assert (p.d, p.l, p.t) == (b * (n - f), b * n, b * f)


def test_auto_width_n4():
    # the scan picks 8-bit symbols: 32 * 4 = 128 <= 255
    p = derive_params(4, 1)
    assert (p.z, p.b, p.d, p.l, p.t) == (8, 32, 96, 128, 32)


def test_large_n_moves_to_wider_symbols():
    # 32 * 7 = 224 fits in GF(2^8); 32 * 8 = 256 does not
    assert derive_params(7, 2).z == 8
    assert derive_params(8, 2).z == 16


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=3, f=1),
        dict(n=4, f=2),
        dict(n=3, f=0),
        dict(n=4, f=1, z=8, b=1),  # b*z < 256 without relax
        dict(n=4, f=1, z=12),
        dict(n=9, f=2, z=8, b=32),  # l = 288 > 255
    ],
)
def test_rejected_params(kwargs):
    with pytest.raises(ParameterError):
        derive_params(**kwargs)


def test_tiny_example_shape():
    p = derive_params(4, 1, z=8, b=1, relax=True)
    cw = encode(p, b"\x12\x34\x56")
    assert len(cw) == 4 and all(len(x) == 1 for x in cw)
    assert b"".join(cw[:3]) == b"\x12\x34\x56"


def test_zero_data_round_trip():
    p = derive_params(7, 2)
    assert decode(p, list(encode(p, bytes(p.data_bytes)))) == bytes(p.data_bytes)


def test_wrong_length_rejected():
    p = derive_params(4, 1)
    with pytest.raises(CodecError):
        encode(p, b"short")
    with pytest.raises(CodecError):
        decode(p, [b"x"] * 3)


def test_encode_deterministic():
    p = derive_params(7, 2)
    data = np.random.default_rng(0).bytes(p.data_bytes)
    assert encode(p, data) == encode(p, bytes(bytearray(data)))


@pytest.mark.parametrize("n,f,z,b", [(4, 1, 8, 32), (4, 1, 16, 16), (7, 2, 8, 32), (4, 1, 32, 8), (10, 3, 8, 2)])
def test_every_erasure_pattern_round_trips(n, f, z, b):
    p = derive_params(n, f, z, b, relax=True)
    rng = np.random.default_rng(n * 100 + z)
    for _ in range(10):
        data = rng.bytes(p.data_bytes)
        cw = encode(p, data)
        for r in range(f + 1):
            for gone in itertools.combinations(range(n), r):
                assert decode(p, erase(cw, gone)) == data


def test_mds_any_subset_of_symbols_determines_codeword():
    # t = l - d exactly: erasing f blocks (t symbols) is recoverable, f+1 is not
    p = derive_params(7, 2)
    cw = encode(p, bytes(range(p.data_bytes)))
    assert p.t == p.l - p.d == p.b * p.f
    with pytest.raises(TooManyErasures):
        decode(p, erase(cw, (0, 1, 2)))


def test_extra_blocks_checked():
    p = derive_params(4, 1)
    cw = list(encode(p, bytes(p.data_bytes)))
    cw[3] = corrupt_block(cw[3])
    with pytest.raises(DecodeInconsistent):
        decode(p, cw)


def test_substituted_block_decodes_to_other_number():
    # with exactly N-f blocks one substituted block goes unnoticed here
    p = derive_params(4, 1)
    data = np.random.default_rng(5).bytes(p.data_bytes)
    cw = list(encode(p, data))
    cw[0] = corrupt_block(cw[0])
    tampered = decode(p, erase(cw, (3,)))
    assert tampered != data
    assert decode(p, erase(cw, (0,))) == data


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_subset_agreement_property(data):
    n = data.draw(st.sampled_from([4, 5, 7, 10]))
    f = data.draw(st.integers(0, (n - 1) // 3))
    z = data.draw(st.sampled_from([8, 16]))
    p = derive_params(n, f, z=z, b=2, relax=True)
    raw = data.draw(st.binary(min_size=p.data_bytes, max_size=p.data_bytes))
    cw = encode(p, raw)
    s1 = data.draw(st.sets(st.integers(0, n - 1), min_size=f, max_size=f))
    s2 = data.draw(st.sets(st.integers(0, n - 1), min_size=f, max_size=f))
    assert decode(p, erase(cw, s1)) == decode(p, erase(cw, s2)) == raw
