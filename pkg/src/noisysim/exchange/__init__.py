"""Round schedule, prefix-free languages and the per-channel exchange machines."""
from .languages import Completion, FiniteSet, FixedLength, LengthPrefixed, PrefixFreeLanguage, parse_language
from .machines import Receiver, RecvPhase, Sender, SendOutcome, SendPhase, noise_word
from .schedule import SLOTS_PER_ROUND, Schedule, Slot

__all__ = [
    "Completion", "FiniteSet", "FixedLength", "LengthPrefixed", "PrefixFreeLanguage",
    "parse_language", "Receiver", "RecvPhase", "Sender", "SendOutcome", "SendPhase",
    "noise_word", "SLOTS_PER_ROUND", "Schedule", "Slot",
]
