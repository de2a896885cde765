"""Hadamard block codes: parameters, encoding, nearest-codeword decoding.

The (2^k, k) family with minimum distance 2^(k-1). Codeword bit j of
message m is the GF(2) inner product of the k-bit representations of j
and m, with bit 0 of a coordinate index pairing with message bit 0.
Decoding picks the codeword at minimum Hamming distance, breaking ties
toward the lowest message index, and therefore corrects any pattern of
up to 2^(k-2) - 1 flipped bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

MIN_ORDER = 3
MAX_ORDER = 6


@dataclass(frozen=True)
class CodeScheme:
    """Parameters of one Hadamard code: k message bits per 2^k-bit block."""

    dimension: int
    block_len: int
    rate: float
    min_distance: int
    correctable: int


def hadamard_params(order: int) -> CodeScheme:
    """Parameter set of the order-k Hadamard code, k in [3, 6]."""
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"Hadamard order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    block = 2 ** order
    return CodeScheme(
        dimension=order,
        block_len=block,
        rate=order / block,
        min_distance=block // 2,
        correctable=block // 4 - 1,
    )


def default_codes() -> list[CodeScheme]:
    """The four-code menu the optimizer searches by default."""
    return [hadamard_params(order) for order in range(MIN_ORDER, MAX_ORDER + 1)]


@lru_cache(maxsize=None)
def codeword_table(order: int) -> np.ndarray:
    """All 2^k codewords as a read-only (2^k, 2^k) 0/1 uint8 matrix.

    Row m is encode(m); the matrix is symmetric because the generating
    inner product <m, j> is.
    """
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"Hadamard order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    block = 2 ** order
    coords = np.arange(block)
    products = coords[:, None] & coords[None, :]
    bits = np.zeros((block, block), dtype=np.uint8)
    for shift in range(order):
        bits ^= ((products >> shift) & 1).astype(np.uint8)
    bits.flags.writeable = False
    return bits


def _as_bits(values: Sequence[int] | np.ndarray, length: int, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (length,):
        raise ValueError(f"{what} must have shape ({length},), got {arr.shape}")
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{what} must contain only 0/1 values")
    return arr.astype(np.uint8)


def message_to_index(message: Sequence[int] | np.ndarray, order: int) -> int:
    """Pack k message bits (bit 0 first) into the codeword-table row index."""
    bits = _as_bits(message, order, "message")
    return int(bits @ (1 << np.arange(order)))


def index_to_message(index: int, order: int) -> np.ndarray:
    """Unpack a table row index back into k message bits, bit 0 first."""
    if not 0 <= index < 2 ** order:
        raise ValueError(f"message index must be in [0, 2^{order}), got {index}")
    return ((index >> np.arange(order)) & 1).astype(np.uint8)


def encode(code: CodeScheme, message: Sequence[int] | np.ndarray) -> np.ndarray:
    """Encode k message bits into one 2^k-bit codeword."""
    row = message_to_index(message, code.dimension)
    return codeword_table(code.dimension)[row].copy()


def decode(code: CodeScheme, received: Sequence[int] | np.ndarray) -> tuple[np.ndarray, int]:
    """Nearest-codeword decode of one received block.

    Returns (message bits, Hamming distance to the chosen codeword).
    Among equidistant codewords the lowest message index wins, so the
    result is a pure function of the input.
    """
    block = _as_bits(received, code.block_len, "received block")
    table = codeword_table(code.dimension)
    distances = np.count_nonzero(table != block[None, :], axis=1)
    best = int(np.argmin(distances))
    return index_to_message(best, code.dimension), int(distances[best])
