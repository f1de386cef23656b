"""AMD codes, Reed-Solomon error correction, silence detection, round
parameters and the composed word codec."""
from .amd import amd_decode, amd_encode, amd_is_codeword
from .ecc import C_1, C_2, C_E, ec_decode, ec_encode
from .params import RoundParams, round_params
from .word import Kind, Payload, decode_word, encode_word, is_silence, noise_word

__all__ = [
    "amd_encode", "amd_decode", "amd_is_codeword",
    "ec_encode", "ec_decode", "C_E", "C_1", "C_2",
    "RoundParams", "round_params",
    "Kind", "Payload", "encode_word", "decode_word", "is_silence", "noise_word",
]
