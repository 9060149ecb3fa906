import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randsolomon.crypto import DecryptFailure, EncryptedBlock, Signature, SimCrypto


@pytest.fixture
def setup():
    c = SimCrypto(4)
    rng = np.random.default_rng(0)
    return c, [c.keygen(p, rng) for p in range(3)]


@settings(max_examples=100, deadline=None)
@given(st.binary(min_size=4, max_size=4))
def test_deterministic_and_invertible(block):
    c = SimCrypto(4)
    k = c.keygen(0, np.random.default_rng(1))
    ct = c.det_encrypt(k.public, block)
    assert ct == c.det_encrypt(k.public, block)
    assert c.det_decrypt(k.private, ct) == block
    assert len(ct.data) == 4


def test_distinct_keys_give_distinct_ciphertexts(setup):
    c, keys = setup
    rng = np.random.default_rng(2)
    collisions = 0
    for _ in range(500):
        x = rng.bytes(4)
        collisions += c.det_encrypt(keys[0].public, x) == c.det_encrypt(keys[1].public, x)
    assert collisions == 0


def test_bijection_on_single_byte_blocks():
    c = SimCrypto(1)
    k = c.keygen(0, np.random.default_rng(3))
    images = {c.det_encrypt(k.public, bytes([v])).data for v in range(256)}
    assert len(images) == 256


def test_wrong_key_or_shape_fails(setup):
    c, keys = setup
    ct = c.det_encrypt(keys[0].public, b"abcd")
    with pytest.raises(DecryptFailure):
        c.det_decrypt(keys[1].private, ct)
    with pytest.raises(DecryptFailure):
        c.det_decrypt(keys[0].private, EncryptedBlock(0, b"abc"))
    with pytest.raises(ValueError):
        c.det_encrypt(keys[0].public, b"abc")


def test_signatures(setup):
    c, keys = setup
    sig = c.sign(keys[0].private, b"message")
    assert c.verify(keys[0].public, b"message", sig)
    assert not c.verify(keys[0].public, b"messagf", sig)
    assert not c.verify(keys[1].public, b"message", sig)
    # relabelling the signer does not transfer the tag
    assert not c.verify(keys[1].public, b"message", Signature(1, sig.tag))


def test_keys_are_per_owner(setup):
    c, _ = setup
    with pytest.raises(ValueError):
        c.keygen(0, np.random.default_rng(9))
