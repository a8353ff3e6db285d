"""Counter-based random streams.

Every draw is a pure function of ``(seed, counter)`` through the SplitMix64
output function, so a block of iterations can be generated in one vectorized
call, split across workers in any way, and still reproduce bit for bit.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied elementwise to a uint64 array."""
    z = np.asarray(x, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, *labels: int | str) -> int:
    """Stable 64-bit child seed for a named sub-stream."""
    text = ":".join(str(part) for part in (master_seed, *labels))
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def sub_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Per-index seeds ``start..stop-1`` of the stream rooted at ``master_seed``.

    Seed ``i`` is the i-th SplitMix64 output for the master seed, so it
    depends only on ``(master_seed, i)``.
    """
    if not 0 <= master_seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {master_seed}")
    base = mix64(np.array([master_seed], dtype=np.uint64))
    counters = np.arange(start + 1, stop + 1, dtype=np.uint64) * GOLDEN
    return mix64(base + counters)


def raw_draws(seeds: np.ndarray, width: int, offset: int = 0) -> np.ndarray:
    """``len(seeds) x width`` matrix of 64-bit outputs, row ``r`` from ``seeds[r]``."""
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1, 1)
    counters = np.arange(offset + 1, offset + width + 1, dtype=np.uint64) * GOLDEN
    return mix64(seeds + counters[None, :])


def bounded(h: np.ndarray, upper: int) -> np.ndarray:
    """Map 64-bit outputs to integers uniform on ``[0, upper)`` (multiply-shift)."""
    if not 1 <= upper < (1 << 32):
        raise ValueError(f"upper bound out of range: {upper}")
    hi = h >> np.uint64(32)
    return ((hi * np.uint64(upper)) >> np.uint64(32)).astype(np.int64)


def destinations(
    seeds: np.ndarray, n: int, l: int, *, shuffle_order: bool = False, offset: int = 0
) -> np.ndarray:
    """Uniform schedule index in ``[0, l)`` for each of ``n`` jobs, one row per seed.

    This is the single destination sampler used by the allocation engine and
    by the Monte Carlo checks. With ``shuffle_order`` the jobs are first put in
    a random order and the destination draws are handed out along that order;
    the resulting assignment has the same distribution, it only costs more.
    ``offset`` continues a row's stream past draws already consumed.
    """
    dest = bounded(raw_draws(seeds, n, offset), l)
    if not shuffle_order:
        return dest
    keys = raw_draws(seeds, n, offset=offset + n)
    order = np.argsort(keys, axis=1, kind="stable")
    out = np.empty_like(dest)
    np.put_along_axis(out, order, dest, axis=1)
    return out


def uniforms(seeds: np.ndarray, width: int, offset: int = 0) -> np.ndarray:
    """Doubles uniform on ``[0, 1)`` with 53 random bits."""
    h = raw_draws(seeds, width, offset)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
