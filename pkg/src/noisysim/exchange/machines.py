"""Sender and receiver state machines for one channel.

A round is four word slots (0..3):

    0  sender -> receiver   key request carrying the sender's key k_A
    1  receiver -> sender   key reply (k_B, k_A), or noise
    2  sender -> receiver   message chunk keyed with k_B
    3  receiver -> sender   silence = acknowledged, noise = rejected

Both machines are driven by the node runtime at slot boundaries:
``begin_slot`` returns the word to drive for the slot (None = silent) and
``end_slot`` consumes the w_r bits read during the slot.  Messages of any
length are sent in chunks of at most kappa_r bits; a one-bit message is the
special case of a single chunk.
"""
from __future__ import annotations

import logging
from enum import Enum
from typing import Callable

import numpy as np

from ..bits import random_bits, to_str
from ..coding.params import RoundParams
from ..coding.word import Kind, Payload, decode_word, encode_word, is_silence, noise_word
from .languages import Completion, PrefixFreeLanguage

log = logging.getLogger(__name__)

Probe = Callable[[int, str, str, str], None]   # slot, event, outcome, detail


def _no_probe(slot: int, event: str, outcome: str, detail: str) -> None:
    pass


class SendPhase(Enum):
    IDLE = "idle"
    SENT_KEYREQ = "sent_keyreq"
    HAVE_KEY = "have_key"
    SENT_CHUNK = "sent_chunk"
    RETURNING = "returning"     # receiver looked terminated; return at round end
    FAILED = "failed"           # round lost, retry next round


class SendOutcome(Enum):
    DELIVERED = "delivered"
    RECEIVER_SILENT = "receiver_silent"


class Sender:
    """Initiator side of a channel; one sendMessage call at a time."""

    def __init__(self, rng: np.random.Generator, probe: Probe = _no_probe):
        self.rng = rng
        self.probe = probe
        self.parity = 0
        self.message: np.ndarray | None = None
        self.cursor = 0
        self.phase = SendPhase.IDLE
        self.key: np.ndarray | None = None
        self.peer_key: np.ndarray | None = None
        self.piece: np.ndarray | None = None

    @property
    def busy(self) -> bool:
        return self.message is not None

    def start(self, message: np.ndarray) -> None:
        if self.busy:
            raise RuntimeError("sendMessage already active on this channel")
        if len(message) == 0:
            raise ValueError("cannot send an empty message")
        self.message = np.asarray(message, dtype=np.uint8)
        self.cursor = 0
        self.phase = SendPhase.IDLE

    def listens(self, slot: int) -> bool:
        return self.busy and ((slot == 1 and self.phase is SendPhase.SENT_KEYREQ)
                              or (slot == 3 and self.phase is SendPhase.SENT_CHUNK))

    def begin_slot(self, slot: int, params: RoundParams) -> np.ndarray | None:
        if not self.busy:
            return None
        if slot == 0:
            self.key = random_bits(self.rng, params.key_len)
            self.peer_key = None
            self.phase = SendPhase.SENT_KEYREQ
            p = Payload.key_request(self.key)
            self.probe(slot, "send", "key_request", p.describe())
            return encode_word(p, params, self.rng)
        if slot == 2 and self.phase is SendPhase.HAVE_KEY:
            self.piece = self.message[self.cursor:self.cursor + params.key_len]
            self.phase = SendPhase.SENT_CHUNK
            p = Payload.chunk(self.piece, self.parity, self.peer_key)
            self.probe(slot, "send", "chunk", p.describe())
            return encode_word(p, params, self.rng)
        return None

    def end_slot(self, slot: int, params: RoundParams, read: np.ndarray | None) -> SendOutcome | None:
        """Returns an outcome when the current sendMessage call finishes."""
        if not self.busy:
            return None
        if slot == 1 and self.phase is SendPhase.SENT_KEYREQ:
            if is_silence(read):
                self.probe(slot, "read", "silence", "")
                self.phase = SendPhase.RETURNING
                return None
            p = decode_word(read, params, Kind.KEY_REPLY)
            if p is None:
                self.probe(slot, "read", "invalid", "")
                self.phase = SendPhase.FAILED
            elif not np.array_equal(p.key, self.key):
                self.probe(slot, "read", "rejected_key", p.describe())
                self.phase = SendPhase.FAILED
            else:
                self.probe(slot, "read", "accepted", p.describe())
                self.peer_key = p.content
                self.phase = SendPhase.HAVE_KEY
            return None
        if slot != 3:
            return None

        outcome = None
        if self.phase is SendPhase.SENT_CHUNK:
            if is_silence(read):
                self.probe(slot, "read", "silence", "")
                self.cursor += len(self.piece)
                self.parity ^= 1
                if self.cursor >= len(self.message):
                    outcome = SendOutcome.DELIVERED
            else:
                self.probe(slot, "read", "noise", "")
        elif self.phase is SendPhase.RETURNING:
            self.parity ^= 1
            outcome = SendOutcome.RECEIVER_SILENT
        if outcome is not None:
            self.message = None
            self.probe(slot, "return", outcome.value, "")
        self.phase = SendPhase.IDLE
        self.key = self.peer_key = self.piece = None
        return outcome


class RecvPhase(Enum):
    IDLE = "idle"
    REPLYING = "replying"
    NOISE = "noise"             # answer slot 1 with noise, then idle
    AWAIT_CHUNK = "await_chunk"
    NACK = "nack"               # answer slot 3 with noise


class Receiver:
    """Responder side of a channel; active every round until termination."""

    def __init__(self, language: PrefixFreeLanguage, rng: np.random.Generator,
                 probe: Probe = _no_probe):
        self.language = language
        self.rng = rng
        self.probe = probe
        # b_hat starts opposite to the sender's b so the first chunk is new
        self.parity = 1
        self.partial = ""
        self.last_len = 0
        self.key: np.ndarray | None = None
        self.phase = RecvPhase.IDLE
        self._reply: tuple[np.ndarray, str, str] | None = None
        self.invalid_resets = 0

    def listens(self, slot: int) -> bool:
        return slot == 0 or (slot == 2 and self.phase is RecvPhase.AWAIT_CHUNK)

    def begin_slot(self, slot: int, params: RoundParams) -> np.ndarray | None:
        if slot == 0:
            self.phase = RecvPhase.IDLE
            self.key = None
            return None
        if slot == 1 and self.phase in (RecvPhase.REPLYING, RecvPhase.NOISE):
            (word, what, detail), self._reply = self._reply, None
            self.probe(slot, "send", what, detail)
            if self.phase is RecvPhase.REPLYING:
                self.phase = RecvPhase.AWAIT_CHUNK
            else:
                self.phase = RecvPhase.IDLE
            return word
        if slot == 3 and self.phase is RecvPhase.NACK:
            self.phase = RecvPhase.IDLE
            self.probe(slot, "send", "noise", "")
            return noise_word(params.word_len, self.rng)
        return None

    def end_slot(self, slot: int, params: RoundParams, read: np.ndarray | None) -> str | None:
        """Returns a message when one is recorded."""
        if slot == 0:
            if is_silence(read):
                self.probe(slot, "read", "silence", "")
                return None
            p = decode_word(read, params, Kind.KEY_REQUEST)
            if p is None:
                self.probe(slot, "read", "invalid", "")
                self.phase = RecvPhase.NOISE
                self._reply = (noise_word(params.word_len, self.rng), "noise", "")
                return None
            self.probe(slot, "read", "accepted", p.describe())
            self.key = random_bits(self.rng, params.key_len)
            reply = Payload.key_reply(self.key, p.key)
            self.phase = RecvPhase.REPLYING
            self._reply = (encode_word(reply, params, self.rng), "key_reply", reply.describe())
            return None
        if slot == 2 and self.phase is RecvPhase.AWAIT_CHUNK:
            p = decode_word(read, params, Kind.CHUNK)
            if p is None:
                self.probe(slot, "read", "invalid", "")
                self.phase = RecvPhase.NACK
                return None
            if not np.array_equal(p.key, self.key):
                self.probe(slot, "read", "rejected_key", p.describe())
                self.phase = RecvPhase.NACK
                return None
            self.probe(slot, "read", "accepted", p.describe())
            self.phase = RecvPhase.IDLE
            return self._accept(to_str(p.content), p.parity)
        return None

    def _accept(self, piece: str, parity: int) -> str | None:
        if not self.partial:
            if parity == self.parity:
                return None             # repetition of an acknowledged chunk
            self.partial = piece
        elif parity != self.parity:
            self.partial += piece
        else:
            self.partial = self.partial[:len(self.partial) - self.last_len] + piece
        self.last_len = len(piece)
        self.parity = parity
        state = self.language.is_complete(self.partial)
        if state is Completion.COMPLETE:
            msg, self.partial, self.last_len = self.partial, "", 0
            self.probe(2, "record", "complete", msg)
            return msg
        if state is Completion.INVALID:
            log.warning("partial message %r left the language; resetting", self.partial)
            self.invalid_resets += 1
            self.probe(2, "record", "invalid", self.partial)
            self.partial, self.last_len = "", 0
        return None


__all__ = [
    "Sender", "Receiver", "SendOutcome", "SendPhase", "RecvPhase", "noise_word",
]
