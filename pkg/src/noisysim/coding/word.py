"""Word codec: payload serialization, the composed encoder/decoder and the
silence predicate.

Serialized payload layout for round r (kappa = key length of the round,
ell = bit length of kappa), most significant bit first::

    kind:2 | parity:1 | length:ell | content:kappa | key:kappa

``kind`` is 00 raw, 01 key request, 10 key reply, 11 message chunk.
``content`` holds ``length`` bits followed by zeros.  A key request carries
no content (length 0): the kind tag *is* the key-request keyword.  A key
reply carries the replier's fresh key as content (length kappa) and the
requester's key in the key field.  Every kind has the same width, so the
error-correcting region and the padding boundary depend on the round only.

A word is ``ecc(amd(payload)) || uniform random bits`` filling up to the
round's word length.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..bits import alternations, from_int, random_bits, to_int, to_str
from ..errors import DecodeError, EncodingError
from . import amd, ecc
from .params import KIND_BITS, RoundParams


class Kind(IntEnum):
    RAW = 0
    KEY_REQUEST = 1
    KEY_REPLY = 2
    CHUNK = 3


@dataclass(eq=False)
class Payload:
    kind: Kind
    content: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    key: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    parity: int = 0

    @classmethod
    def key_request(cls, key: np.ndarray) -> "Payload":
        return cls(Kind.KEY_REQUEST, np.zeros(0, np.uint8), key, 0)

    @classmethod
    def key_reply(cls, new_key: np.ndarray, requester_key: np.ndarray) -> "Payload":
        return cls(Kind.KEY_REPLY, new_key, requester_key, 0)

    @classmethod
    def chunk(cls, piece: np.ndarray, parity: int, key: np.ndarray) -> "Payload":
        return cls(Kind.CHUNK, piece, key, int(parity))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Payload):
            return NotImplemented
        return (self.kind == other.kind and self.parity == other.parity
                and np.array_equal(self.content, other.content)
                and np.array_equal(self.key, other.key))

    def __repr__(self) -> str:
        return (f"Payload({self.kind.name}, content={to_str(self.content)!r}, "
                f"key={to_str(self.key)!r}, parity={self.parity})")

    def describe(self) -> str:
        """Compact canonical text form, used in diagnostic logs."""
        return f"{int(self.kind)}:{self.parity}:{to_str(self.content)}:{to_str(self.key)}"


def serialize(p: Payload, params: RoundParams) -> np.ndarray:
    kappa = params.key_len
    if len(p.key) != kappa:
        raise EncodingError(f"key must be {kappa} bits, got {len(p.key)}")
    if len(p.content) > kappa:
        raise EncodingError(f"content of {len(p.content)} bits exceeds the round limit {kappa}")
    if p.kind == Kind.KEY_REPLY and len(p.content) != kappa:
        raise EncodingError("key reply must carry a full-length key")
    if p.kind == Kind.KEY_REQUEST and len(p.content):
        raise EncodingError("key request carries no content")
    out = np.zeros(params.payload_len, dtype=np.uint8)
    out[:KIND_BITS] = from_int(int(p.kind), KIND_BITS)
    out[KIND_BITS] = p.parity & 1
    pos = KIND_BITS + 1
    out[pos:pos + params.length_bits] = from_int(len(p.content), params.length_bits)
    pos += params.length_bits
    out[pos:pos + len(p.content)] = p.content
    pos += kappa
    out[pos:] = p.key
    return out


def deserialize(s: np.ndarray, params: RoundParams) -> Payload | None:
    kappa = params.key_len
    kind = Kind(to_int(s[:KIND_BITS]))
    parity = int(s[KIND_BITS])
    pos = KIND_BITS + 1
    length = to_int(s[pos:pos + params.length_bits])
    pos += params.length_bits
    if length > kappa:
        return None
    content = s[pos:pos + length].copy()
    if s[pos + length:pos + kappa].any():
        return None
    key = s[pos + kappa:].copy()
    if kind != Kind.CHUNK and parity:
        return None
    if kind == Kind.KEY_REQUEST and length:
        return None
    if kind == Kind.KEY_REPLY and length != kappa:
        return None
    return Payload(kind, content, key, parity)


def encode_word(p: Payload, params: RoundParams, rng: np.random.Generator) -> np.ndarray:
    body = ecc.ec_encode(amd.amd_encode(serialize(p, params), params.eta, rng))
    return np.concatenate([body, random_bits(rng, params.word_len - len(body))])


def decode_word(w: np.ndarray, params: RoundParams, expected_kind: Kind | None = None) -> Payload | None:
    """Payload carried by ``w`` or None (noise, tampering, wrong kind)."""
    if len(w) != params.word_len:
        raise ValueError(f"word must be {params.word_len} bits, got {len(w)}")
    try:
        inner = ecc.ec_decode(w[:params.ecc_len], params.amd_len)
    except DecodeError:
        return None
    msg = amd.amd_decode(inner, params.eta)
    if msg is None:
        return None
    p = deserialize(msg, params)
    if p is None or (expected_kind is not None and p.kind != expected_kind):
        return None
    return p


def is_silence(s: np.ndarray) -> bool:
    """Fewer than |s|/3 bit alternations."""
    if len(s) < 1:
        raise ValueError("silence is undefined on the empty string")
    return 3 * alternations(s) < len(s)


def noise_word(length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform bits; shorter than 95 the silence bound no longer holds."""
    if length < 95:
        raise ValueError(f"noise words need at least 95 bits, got {length}")
    return random_bits(rng, length)


__all__ = [
    "Kind", "Payload", "serialize", "deserialize", "encode_word", "decode_word",
    "is_silence", "noise_word",
]
