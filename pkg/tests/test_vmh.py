"""Memory-hex image format round-trip and parsing rules."""

import random

import pytest

from rvsim.vmh import MalformedToken, MemoryImage, emit_vmh, parse_vmh


def test_single_word_at_zero():
    img = MemoryImage({0: 0x00500093})
    assert emit_vmh(img) == "@0\n00500093\n"


def test_sparse_image_two_sections():
    img = MemoryImage({0: 0xA, 16: 0xB})
    text = emit_vmh(img)
    assert text.count("@") == 2
    assert parse_vmh(text).words == img.words


def test_empty_image():
    assert emit_vmh(MemoryImage()) == ""
    assert parse_vmh("").words == {}


def test_parse_at_record():
    assert parse_vmh("@0 00500093").words == {0: 0x00500093}


def test_comment_and_default_address():
    assert parse_vmh("// comment\n1A").words == {0: 0x1A}


def test_malformed_token():
    with pytest.raises(MalformedToken):
        parse_vmh("XYZ")
    with pytest.raises(MalformedToken):
        parse_vmh("123456789")  # more than 8 digits
    with pytest.raises(MalformedToken):
        parse_vmh("@")


def test_short_tokens_zero_extend():
    assert parse_vmh("5\nff").words == {0: 5, 1: 0xFF}


def test_contiguous_run_single_at_record():
    img = MemoryImage({4: 1, 5: 2, 6: 3})
    text = emit_vmh(img)
    assert text.count("@") == 1


def test_round_trip_random_sparse_images():
    rng = random.Random(2024)
    for _ in range(300):
        words = {}
        for _ in range(rng.randrange(0, 60)):
            words[rng.randrange(0, 1 << 20)] = rng.randrange(1 << 32)
        img = MemoryImage(words)
        assert parse_vmh(emit_vmh(img)).words == img.words
