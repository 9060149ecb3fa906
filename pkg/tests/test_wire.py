import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randsolomon.crypto import EncryptedBlock, Signature
from randsolomon.wire import Commitment, Generated, Reveal, WireError, decode_message, encode_message

blobs = st.binary(min_size=0, max_size=12)
ids = st.integers(0, 2**32 - 1)
sigs = st.builds(Signature, ids, blobs)


@settings(max_examples=100, deadline=None)
@given(ids, st.lists(st.builds(EncryptedBlock, ids, blobs), max_size=6), sigs)
def test_generated_round_trip(origin, blocks, sig):
    msg = Generated(Commitment(origin, tuple(blocks), sig))
    raw = encode_message(msg)
    assert decode_message(raw) == msg
    assert encode_message(decode_message(raw)) == raw


@settings(max_examples=100, deadline=None)
@given(ids, st.lists(st.tuples(ids, st.one_of(st.none(), blobs)), max_size=6), sigs)
def test_reveal_round_trip(origin, cells, sig):
    msg = Reveal(origin, tuple(cells), sig)
    assert decode_message(encode_message(msg)) == msg


def test_marker_distinct_from_empty_block():
    a = Reveal(1, ((0, None),), Signature(1, b"t"))
    b = Reveal(1, ((0, b""),), Signature(1, b"t"))
    assert encode_message(a) != encode_message(b)


def test_malformed():
    raw = encode_message(Reveal(1, ((0, b"ab"),), Signature(1, b"t")))
    with pytest.raises(WireError):
        decode_message(raw[:-1])
    with pytest.raises(WireError):
        decode_message(raw + b"\0")
    with pytest.raises(WireError):
        decode_message(b"\x09" + raw[1:])
