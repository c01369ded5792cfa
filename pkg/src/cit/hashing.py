"""Seeded two-universal hashing over GF(2) bit vectors.

Random affine maps x -> Ax xor b with a full-row-rank A form the binning and
key-extraction primitives: full row rank makes the map exactly uniform over
the 2^k bins and keeps every bin the same size, which is what the
simulators assume. Messages are packed into single 64-bit words, so all
inputs are capped at 63 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_BITS = 63


def pack_digits(digits: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    """Pack an (N, n) digit array into uint64 words, symbol 0 least significant."""
    digits = np.asarray(digits)
    n = digits.shape[-1]
    if n * bits_per_symbol > MAX_BITS:
        raise ValueError(f"{n * bits_per_symbol} bits exceed the {MAX_BITS}-bit word")
    out = np.zeros(digits.shape[:-1], dtype=np.uint64)
    for t in range(n):
        out |= digits[..., t].astype(np.uint64) << np.uint64(t * bits_per_symbol)
    return out


def unpack_digits(words: np.ndarray, n: int, bits_per_symbol: int) -> np.ndarray:
    """Inverse of pack_digits; returns an (N, n) int array."""
    words = np.asarray(words, dtype=np.uint64)
    mask = np.uint64((1 << bits_per_symbol) - 1)
    out = np.empty(words.shape + (n,), dtype=np.int64)
    for t in range(n):
        out[..., t] = ((words >> np.uint64(t * bits_per_symbol)) & mask).astype(np.int64)
    return out


def gf2_rank(rows: list[int]) -> int:
    rank = 0
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
            rank += 1
    return rank


def sample_full_rank_rows(rng: np.random.Generator, k: int, m: int) -> list[int]:
    """k random m-bit rows, resampled until they are linearly independent."""
    if k > m:
        raise ValueError(f"cannot have rank {k} in {m} dimensions")
    if k == 0:
        return []
    while True:
        rows = [int(rng.integers(0, 1 << m, dtype=np.uint64)) for _ in range(k)]
        if gf2_rank(rows) == k:
            return rows


def _solve_structures(rows: list[int], m: int) -> tuple[list[int], list[int]]:
    """Right-inverse columns and a null-space basis for full-row-rank rows.

    z(s) = XOR of cols[j] over set bits j of s satisfies rows . z = s; the
    null basis spans all solutions.
    """
    k = len(rows)
    aug = [(rows[i], 1 << i) for i in range(k)]  # (row over m bits, ops over k bits)
    pivots: list[int] = []
    r = 0
    for col in range(m):
        sel = None
        for i in range(r, k):
            if (aug[i][0] >> col) & 1:
                sel = i
                break
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        for i in range(k):
            if i != r and ((aug[i][0] >> col) & 1):
                aug[i] = (aug[i][0] ^ aug[r][0], aug[i][1] ^ aug[r][1])
        pivots.append(col)
        r += 1
        if r == k:
            break
    if r < k:
        raise ValueError("rows are not of full row rank")
    cols = []
    for j in range(k):
        z = 0
        for i in range(k):
            if (aug[i][1] >> j) & 1:
                z ^= 1 << pivots[i]
        cols.append(z)
    pivot_set = set(pivots)
    null_basis = []
    for c in range(m):
        if c in pivot_set:
            continue
        v = 1 << c
        for i in range(k):
            if (aug[i][0] >> c) & 1:
                v ^= 1 << pivots[i]
        null_basis.append(v)
    return cols, null_basis


@dataclass(frozen=True)
class AffineGf2Hash:
    """x -> Ax xor b with full-row-rank A, over m-bit words into k bits."""

    m: int
    k: int
    rows: tuple[int, ...]
    offset: int

    @staticmethod
    def sample(rng: np.random.Generator, m: int, k: int) -> "AffineGf2Hash":
        if not 0 <= k <= m <= MAX_BITS:
            raise ValueError(f"need 0 <= k <= m <= {MAX_BITS}, got k={k}, m={m}")
        rows = sample_full_rank_rows(rng, k, m)
        offset = int(rng.integers(0, 1 << k, dtype=np.uint64)) if k else 0
        return AffineGf2Hash(m, k, tuple(rows), offset)

    def apply(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.uint64)
        out = np.zeros(words.shape, dtype=np.uint64)
        for i, row in enumerate(self.rows):
            bit = np.bitwise_count(words & np.uint64(row)) & np.uint64(1)
            out |= bit << np.uint64(i)
        return out ^ np.uint64(self.offset)

    def apply_int(self, value: int) -> int:
        return int(self.apply(np.array([value], dtype=np.uint64))[0])

    def coset(self, syndrome: int, cap: int | None = None) -> np.ndarray:
        """All m-bit words hashing to `syndrome`, as a sorted uint64 array."""
        cols, basis = _solve_structures(list(self.rows), self.m)
        size = 1 << len(basis)
        if cap is not None and size > cap:
            raise ValueError(f"coset of size {size} exceeds the cap {cap}")
        s = syndrome ^ self.offset
        particular = 0
        for j in range(self.k):
            if (s >> j) & 1:
                particular ^= cols[j]
        out = np.array([particular], dtype=np.uint64)
        for b in basis:
            out = np.concatenate([out, out ^ np.uint64(b)])
        out.sort()
        return out
