"""
Bits to message vectors to codewords.

Each section's bit group is ``log2(M)`` location bits (unsigned index, most
significant bit first) followed by ``log2(K)`` value bits. The value bits are
a binary-reflected Gray label; label ``g`` selects the PSK symbol
``p_k = exp(i 2 pi k / K)`` with ``k = gray_to_binary(g)``, where ``k = 0`` is
written ``k = K`` so that the all-zero label maps to ``p_K = 1``.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from sparcmod.errors import DimensionMismatchError, InvalidParameterError, MalformedMessageError
from sparcmod.sparc.params import SparcParams
from sparcmod.utils.numeric import is_power_of_two, log2_int
from sparcmod.utils.seeding import SeedLike, as_seed_sequence

logger = logging.getLogger(__name__)

SYMBOL_ATOL = 1e-9


def _check_K(K: int) -> int:
    if not is_power_of_two(K):
        raise InvalidParameterError(f"K must be a power of two, got {K!r}")
    return int(K)


def psk_constellation(K: int) -> np.ndarray:
    """Symbols p_1..p_K in index order (entry ``k-1`` holds p_k)."""
    K = _check_K(K)
    theta = 2 * np.pi * np.arange(1, K + 1) / K
    re, im = np.cos(theta), np.sin(theta)
    # exact zeros on the axes
    re[np.abs(re) < 1e-15] = 0.0
    im[np.abs(im) < 1e-15] = 0.0
    return re + 1j * im


def psk_symbol(k: int, K: int) -> complex:
    K = _check_K(K)
    if int(k) != k or not 1 <= k <= K:
        raise InvalidParameterError(f"symbol index k must be in 1..{K}, got {k!r}")
    return complex(psk_constellation(K)[int(k) - 1])


def binary_to_gray(num):
    return num ^ (num >> 1)


def gray_to_binary(num):
    num = np.array(num, dtype=np.int64, copy=True)
    mask = num >> 1
    while np.any(mask):
        num ^= mask
        mask >>= 1
    return num


def _bits_to_uint(bits: np.ndarray) -> np.ndarray:
    """MSB-first rows of bits to unsigned integers."""
    width = bits.shape[-1]
    if width == 0:
        return np.zeros(bits.shape[:-1], dtype=np.int64)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _uint_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(values, dtype=np.int64)[..., None] >> shifts) & 1).astype(bool)


def gray_map(bits, K: int) -> int:
    """Symbol index k in 1..K for ``log2(K)`` Gray-coded value bits."""
    K = _check_K(K)
    bits = np.asarray(bits, dtype=bool).ravel()
    if bits.size != log2_int(K):
        raise InvalidParameterError(f"K={K} needs {log2_int(K)} value bits, got {bits.size}")
    return int(_gray_labels_to_k(_bits_to_uint(bits), K))


def gray_unmap(k: int, K: int) -> np.ndarray:
    """Inverse of :func:`gray_map`."""
    K = _check_K(K)
    if int(k) != k or not 1 <= k <= K:
        raise InvalidParameterError(f"symbol index k must be in 1..{K}, got {k!r}")
    return _k_to_gray_bits(np.array([k]), K)[0]


def _gray_labels_to_k(labels, K: int):
    m = gray_to_binary(labels)
    return np.where(m == 0, K, m)


def _k_to_gray_bits(k: np.ndarray, K: int) -> np.ndarray:
    m = np.asarray(k, dtype=np.int64) % K
    return _uint_to_bits(binary_to_gray(m), log2_int(K))


@dataclass(frozen=True, eq=False)
class MessageVector:
    """A valid message: exactly one PSK nonzero per section of M entries.

    ``locations`` are 0-based positions within each section; ``symbols`` are
    PSK indices in 1..K.
    """

    locations: np.ndarray
    symbols: np.ndarray
    M: int
    K: int

    def __post_init__(self):
        _check_K(self.K)
        if not is_power_of_two(self.M):
            raise InvalidParameterError(f"M must be a power of two, got {self.M!r}")
        locations = np.asarray(self.locations, dtype=np.int64).ravel()
        symbols = np.asarray(self.symbols, dtype=np.int64).ravel()
        if locations.shape != symbols.shape or locations.size == 0:
            raise MalformedMessageError("locations and symbols must be equal-length and nonempty")
        if np.any((locations < 0) | (locations >= self.M)):
            raise MalformedMessageError(f"locations must lie in 0..{self.M - 1}")
        if np.any((symbols < 1) | (symbols > self.K)):
            raise MalformedMessageError(f"symbol indices must lie in 1..{self.K}")
        for arr in (locations, symbols):
            arr.setflags(write=False)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "symbols", symbols)

    @property
    def L(self) -> int:
        return self.locations.size

    @property
    def values(self) -> np.ndarray:
        beta = np.zeros((self.L, self.M), dtype=complex)
        beta[np.arange(self.L), self.locations] = psk_constellation(self.K)[self.symbols - 1]
        return beta.ravel()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MessageVector):
            return NotImplemented
        return (self.M == other.M and self.K == other.K
                and np.array_equal(self.locations, other.locations)
                and np.array_equal(self.symbols, other.symbols))

    def __hash__(self):
        return hash((self.M, self.K, self.locations.tobytes(), self.symbols.tobytes()))

    @classmethod
    def from_values(cls, values, M: int, K: int) -> "MessageVector":
        """Validate a dense vector and recover its locations and symbols."""
        values = np.asarray(values, dtype=complex).ravel()
        if values.size == 0 or values.size % M:
            raise MalformedMessageError(f"length {values.size} is not a positive multiple of M={M}")
        sections = values.reshape(-1, M)
        nonzero = np.abs(sections) > SYMBOL_ATOL
        counts = nonzero.sum(axis=1)
        bad = np.flatnonzero(counts != 1)
        if bad.size:
            raise MalformedMessageError(
                f"section {bad[0]} has {counts[bad[0]]} nonzero entries, expected exactly one")
        locations = nonzero.argmax(axis=1)
        picked = sections[np.arange(sections.shape[0]), locations]
        constellation = psk_constellation(K)
        distance = np.abs(picked[:, None] - constellation[None, :])
        k_idx = distance.argmin(axis=1)
        off = np.flatnonzero(distance[np.arange(picked.size), k_idx] > SYMBOL_ATOL)
        if off.size:
            raise MalformedMessageError(
                f"section {off[0]} holds {picked[off[0]]!r}, which is not a {K}-PSK symbol")
        return cls(locations, k_idx + 1, M, K)

    @classmethod
    def random(cls, L: int, M: int, K: int, seed: SeedLike) -> "MessageVector":
        rng = np.random.default_rng(as_seed_sequence(seed))
        return cls(rng.integers(0, M, size=L), rng.integers(1, K + 1, size=L), M, K)


@dataclass(frozen=True, eq=False)
class BitPayload:
    """Information bits of one frame; ``padding`` trailing zeros were added."""

    bits: np.ndarray
    padding: int = 0

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).ravel().copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitPayload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(np.packbits(self.bits).tobytes() + bytes([self.bits.size % 8]))

    @classmethod
    def from_hex(cls, text: str, total_bits: int) -> "BitPayload":
        """Payload from a hex string, zero-padded up to ``total_bits``."""
        return cls.from_bytes(bytes.fromhex(text.strip().removeprefix("0x")), total_bits)

    @classmethod
    def from_bytes(cls, data: bytes, total_bits: int) -> "BitPayload":
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if bits.size > total_bits:
            if np.any(bits[total_bits:]):
                raise DimensionMismatchError(
                    f"payload carries {bits.size} bits, the code holds only {total_bits}")
            bits = bits[:total_bits]
        padding = total_bits - bits.size
        if padding:
            logger.info("zero-padding payload with %d bits", padding)
        return cls(np.concatenate([bits, np.zeros(padding, dtype=np.uint8)]), padding)

    @classmethod
    def random(cls, total_bits: int, seed: SeedLike) -> "BitPayload":
        rng = np.random.default_rng(as_seed_sequence(seed))
        return cls(rng.integers(0, 2, size=total_bits).astype(bool))

    def to_hex(self) -> str:
        return np.packbits(self.bits).tobytes().hex()


def _check_payload_length(payload: BitPayload, params: SparcParams) -> None:
    if len(payload) != params.total_bits:
        raise DimensionMismatchError(
            f"payload has {len(payload)} bits, code needs L*{params.section_bits}={params.total_bits}")


def bits_to_message(payload: BitPayload, params: SparcParams) -> MessageVector:
    _check_payload_length(payload, params)
    groups = payload.bits.reshape(params.L, params.section_bits)
    log_m = log2_int(params.M)
    locations = _bits_to_uint(groups[:, :log_m])
    symbols = _gray_labels_to_k(_bits_to_uint(groups[:, log_m:]), params.K)
    return MessageVector(locations, symbols, params.M, params.K)


def message_to_bits(message: Union[MessageVector, np.ndarray], params: SparcParams) -> BitPayload:
    if not isinstance(message, MessageVector):
        message = MessageVector.from_values(message, params.M, params.K)
    if (message.L, message.M, message.K) != (params.L, params.M, params.K):
        raise DimensionMismatchError(
            f"message is (L={message.L}, M={message.M}, K={message.K}), "
            f"code is (L={params.L}, M={params.M}, K={params.K})")
    loc_bits = _uint_to_bits(message.locations, log2_int(params.M))
    val_bits = _k_to_gray_bits(message.symbols, params.K)
    return BitPayload(np.concatenate([loc_bits, val_bits], axis=1))


def encode(A, message: Union[MessageVector, np.ndarray],
           params: Optional[SparcParams] = None) -> np.ndarray:
    """Codeword ``A beta`` for a valid message."""
    if not isinstance(message, MessageVector):
        if params is None:
            raise InvalidParameterError("a raw message vector needs params to be validated")
        message = MessageVector.from_values(message, params.M, params.K)
    return A.apply(message.values)
