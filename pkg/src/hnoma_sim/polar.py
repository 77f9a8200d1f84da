"""CRC-aided polar coding: CRC, Monte-Carlo construction, encoding, SCL decoding.

Bit vectors are ``uint8`` numpy arrays. The polar transform is
``x = u F^{(x)m}`` over GF(2) with ``F = [[1, 0], [1, 1]]`` in natural index
order (no bit reversal); frozen and information sets use the same order.
Positive LLRs favour bit 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import ConfigurationError, InvariantError, UsageError

MIN_CONSTRUCTION_TRIALS = 1000


@dataclass(frozen=True)
class CrcSpec:
    """Generator polynomial (MSB first, length ``n_c + 1``) and register init."""

    poly: tuple[int, ...]
    init: int = 0
    name: str = ""

    def __post_init__(self):
        if len(self.poly) < 2 or self.poly[0] != 1 or self.poly[-1] != 1:
            raise ConfigurationError("CRC polynomial needs leading and trailing coefficients of 1")
        if any(b not in (0, 1) for b in self.poly):
            raise ConfigurationError("CRC polynomial coefficients must be bits")
        if not 0 <= self.init < (1 << self.length):
            raise ConfigurationError(f"CRC init {self.init:#x} does not fit {self.length} bits")

    @property
    def length(self) -> int:
        return len(self.poly) - 1

    @property
    def taps(self) -> int:
        """Polynomial without its leading term, as an integer."""
        value = 0
        for b in self.poly[1:]:
            value = (value << 1) | b
        return value


def _poly_from_exponents(*exponents):
    deg = max(exponents)
    return tuple(1 if deg - i in exponents else 0 for i in range(deg + 1))


# x^16 + x^12 + x^5 + 1, zero init, no reflection, no final XOR (XMODEM)
CRC16_CCITT = CrcSpec(_poly_from_exponents(16, 12, 5, 0), init=0x0000, name="CRC-16-CCITT")


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise UsageError("expected a one-dimensional bit sequence")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise UsageError("bit sequence may only contain 0 and 1")
    return arr.astype(np.uint8)


def crc_register(bits, crc: CrcSpec = CRC16_CCITT) -> int:
    """Shift ``bits`` MSB-first through the CRC register and return its state."""
    n_c = crc.length
    mask = (1 << n_c) - 1
    taps = crc.taps
    reg = crc.init
    for bit in _as_bits(bits):
        top = ((reg >> (n_c - 1)) & 1) ^ int(bit)
        reg = (reg << 1) & mask
        if top:
            reg ^= taps
    return reg


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def crc_encode(message, crc: CrcSpec = CRC16_CCITT) -> np.ndarray:
    """Append the ``n_c`` check bits to ``message`` (systematic)."""
    message = _as_bits(message)
    if message.size == 0:
        raise UsageError("cannot CRC-encode an empty message")
    check = _int_to_bits(crc_register(message, crc), crc.length)
    return np.concatenate([message, check])


def crc_check(frame, crc: CrcSpec = CRC16_CCITT) -> bool:
    """True iff ``frame`` (message followed by check bits) leaves a zero remainder."""
    frame = _as_bits(frame)
    if frame.size <= crc.length:
        raise UsageError(f"frame of {frame.size} bits is too short for a {crc.length}-bit CRC")
    return crc_register(frame, crc) == 0


@lru_cache(maxsize=32)
def crc_parity_matrix(k: int, crc: CrcSpec = CRC16_CCITT) -> tuple[np.ndarray, np.ndarray]:
    """Affine GF(2) form of the CRC: ``check = (msg @ G + c0) % 2`` for ``k``-bit messages.

    Built by pushing unit vectors through the bitwise register, so it is
    exact by linearity; used to check many decoder paths at once.
    """
    c0 = crc_register(np.zeros(k, dtype=np.uint8), crc)
    G = np.zeros((k, crc.length), dtype=np.uint8)
    unit = np.zeros(k, dtype=np.uint8)
    for i in range(k):
        unit[i] = 1
        G[i] = _int_to_bits(crc_register(unit, crc) ^ c0, crc.length)
        unit[i] = 0
    G.setflags(write=False)
    c0_bits = _int_to_bits(c0, crc.length)
    c0_bits.setflags(write=False)
    return G, c0_bits


def crc_check_many(frames: np.ndarray, crc: CrcSpec = CRC16_CCITT) -> np.ndarray:
    """Vectorised :func:`crc_check` over the last axis of ``frames``."""
    frames = np.asarray(frames, dtype=np.uint8)
    k = frames.shape[-1] - crc.length
    if k < 1:
        raise UsageError("frames are too short for the CRC")
    G, c0 = crc_parity_matrix(k, crc)
    parity = (frames[..., :k].astype(np.int64) @ G.astype(np.int64) + c0) & 1
    return np.all(parity == frames[..., k:], axis=-1)


def _check_block_length(n):
    if not isinstance(n, (int, np.integer)) or n < 2 or (n & (n - 1)):
        raise ConfigurationError(f"polar block length must be a power of 2 (>= 2), got {n!r}")


@dataclass(frozen=True)
class PolarConstruction:
    """Outcome of a reliability estimate: chosen info set plus the raw statistics."""

    n: int
    info_set: tuple[int, ...]
    reliability_order: tuple[int, ...]  # most reliable first
    error_counts: np.ndarray = field(repr=False)
    method: str = "monte-carlo"
    design_snr_db: float = 2.0
    trials: int = 100_000
    seed: int = 0

    @property
    def frozen_set(self) -> tuple[int, ...]:
        info = set(self.info_set)
        return tuple(i for i in range(self.n) if i not in info)


def _rank_by_errors(error_counts) -> list[int]:
    # fewest errors first; on ties the higher index wins
    return sorted(range(len(error_counts)), key=lambda i: (int(error_counts[i]), -i))


def polar_construct_montecarlo(
    n: int,
    k_plus_crc: int,
    design_snr_db: float = 2.0,
    trials: int = 100_000,
    rng_seed: int = 0,
    chunk: int = 20_000,
) -> PolarConstruction:
    """Pick the ``k_plus_crc`` most reliable synthetic channels by genie-aided SC.

    The all-zero codeword is sent as BPSK over a binary-input AWGN channel at
    ``design_snr_db`` (Es/N0); a genie-aided SC decoder records, per index,
    how often its decision would have been wrong before correcting it.
    """
    snr = 10.0 ** (design_snr_db / 10.0)
    sigma = np.sqrt(1.0 / (2.0 * snr))

    def draw(rng, q):
        received = 1.0 + sigma * rng.standard_normal((q, n))
        return 2.0 * received / sigma**2

    return construct_from_llrs(n, k_plus_crc, draw, trials, rng_seed, chunk, design_snr_db=design_snr_db)


def construct_from_llrs(
    n: int,
    k_plus_crc: int,
    draw,
    trials: int,
    rng_seed: int = 0,
    chunk: int = 20_000,
    method: str = "monte-carlo",
    design_snr_db: float = math.nan,
) -> PolarConstruction:
    """Genie-aided SC reliability ranking over any surrogate channel.

    ``draw(rng, q)`` returns ``(q, n)`` channel LLRs as seen by the all-zero
    codeword (for a random codeword ``x`` pass ``llr * (1 - 2x)``).
    """
    _check_block_length(n)
    if not 1 <= k_plus_crc <= n:
        raise ConfigurationError(f"info-set size must satisfy 1 <= k+n_c <= n={n}, got {k_plus_crc}")
    if trials < MIN_CONSTRUCTION_TRIALS:
        raise ConfigurationError(
            f"Monte-Carlo construction needs >= {MIN_CONSTRUCTION_TRIALS} trials, got {trials}"
        )
    rng = np.random.default_rng(rng_seed)
    errors = np.zeros(n, dtype=np.int64)
    done = 0
    while done < trials:
        q = min(chunk, trials - done)
        llrs = np.ascontiguousarray(draw(rng, q), dtype=np.float64)
        if llrs.shape != (q, n):
            raise InvariantError(f"LLR source returned shape {llrs.shape}, expected {(q, n)}")
        errors += _backend.impl.genie_sc_errors(llrs)
        done += q
    order = _rank_by_errors(errors)
    errors.setflags(write=False)
    return PolarConstruction(
        n=n,
        info_set=tuple(sorted(order[:k_plus_crc])),
        reliability_order=tuple(order),
        error_counts=errors,
        method=method,
        design_snr_db=float(design_snr_db),
        trials=int(trials),
        seed=int(rng_seed),
    )


@dataclass(frozen=True)
class PolarCodeSpec:
    """Everything needed to encode and decode one user's frame."""

    n: int
    k: int
    info_set: tuple[int, ...]
    crc: CrcSpec = CRC16_CCITT
    list_size: int = 4
    construction: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_block_length(self.n)
        info = self.info_set
        if list(info) != sorted(set(info)) or (info and not 0 <= info[0] <= info[-1] < self.n):
            raise ConfigurationError("info set must be sorted, unique and inside 0..n-1")
        if self.k < 1:
            raise ConfigurationError(f"message length k must be >= 1, got {self.k}")
        if len(info) != self.k + self.crc.length:
            raise ConfigurationError(
                f"info set has {len(info)} indices, expected k + n_c = {self.k + self.crc.length}"
            )
        if self.list_size < 1:
            raise ConfigurationError(f"list size must be >= 1, got {self.list_size}")

    @property
    def n_c(self) -> int:
        return self.crc.length

    @property
    def frozen_set(self) -> tuple[int, ...]:
        info = set(self.info_set)
        return tuple(i for i in range(self.n) if i not in info)

    @property
    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=np.uint8)
        mask[list(self.info_set)] = 1
        return mask

    @property
    def rate(self) -> float:
        return len(self.info_set) / self.n


def message_length(n: int, rate: float, crc: CrcSpec = CRC16_CCITT) -> int:
    """``k = n*r - n_c``; raises when the result is not a positive integer."""
    _check_block_length(n)
    if not 0 < rate <= 1:
        raise ConfigurationError(f"code rate must be in (0, 1], got {rate}")
    info = n * rate
    if abs(info - round(info)) > 1e-9:
        raise ConfigurationError(f"n*r = {info} is not an integer")
    k = int(round(info)) - crc.length
    if k < 1:
        raise ConfigurationError(f"k = n*r - n_c = {k} must be >= 1 (n={n}, r={rate})")
    return k


def make_polar_spec(
    n: int,
    rate: float = 0.5,
    list_size: int = 4,
    design_snr_db: float = 2.0,
    trials: int = 100_000,
    seed: int = 0,
    crc: CrcSpec = CRC16_CCITT,
) -> PolarCodeSpec:
    """Monte-Carlo constructed CRC-aided polar code at rate ``rate``."""
    k = message_length(n, rate, crc)
    cons = polar_construct_montecarlo(n, k + crc.length, design_snr_db, trials, seed)
    meta = {"method": cons.method, "design_snr_db": design_snr_db, "trials": trials, "seed": seed}
    return PolarCodeSpec(n, k, cons.info_set, crc, list_size, meta)


def spec_from_frozen_set(n, frozen, rate=None, list_size=4, crc: CrcSpec = CRC16_CCITT):
    frozen_set = set(frozen)
    info = tuple(i for i in range(n) if i not in frozen_set)
    k = len(info) - crc.length
    if rate is not None and k != message_length(n, rate, crc):
        raise ConfigurationError("frozen-set size does not match the requested rate")
    return PolarCodeSpec(n, k, info, crc, list_size, {"method": "file"})


def polar_transform(u: np.ndarray) -> np.ndarray:
    """``u F^{(x)m}`` over GF(2) along the last axis (works on batches)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    lead = x.shape[:-1]
    h = 1
    while h < n:
        v = x.reshape(*lead, n // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def polar_encode(info_bits, spec: PolarCodeSpec) -> np.ndarray:
    """Place ``k + n_c`` bits on the info set and apply the polar transform.

    Accepts a single frame or a ``(B, k + n_c)`` batch.
    """
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    K = len(spec.info_set)
    if info_bits.shape[-1] != K:
        raise UsageError(f"expected {K} info bits (k + n_c), got {info_bits.shape[-1]}")
    u = np.zeros(info_bits.shape[:-1] + (spec.n,), dtype=np.uint8)
    u[..., list(spec.info_set)] = info_bits
    return polar_transform(u)


class DecodeResult(NamedTuple):
    message: np.ndarray  # (..., k)
    crc_pass: np.ndarray | bool
    metric: np.ndarray | float
    info_bits: np.ndarray  # (..., k + n_c), message followed by CRC


def scl_decode_batch(llrs, spec: PolarCodeSpec, list_size: int | None = None) -> DecodeResult:
    """CRC-aided SC-list decoding of a ``(B, n)`` batch of channel LLRs."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != spec.n:
        raise UsageError(f"expected LLR frames of length n={spec.n}, got shape {llrs.shape}")
    L = spec.list_size if list_size is None else int(list_size)
    if L < 1:
        raise ConfigurationError(f"list size must be >= 1, got {L}")
    paths, metrics, n_paths = _backend.impl.scl_batch(llrs, spec.info_mask, L)
    info = paths[:, :, list(spec.info_set)]
    valid = np.arange(L)[None, :] < n_paths[:, None]
    passing = crc_check_many(info, spec.crc) & valid
    any_pass = passing.any(axis=1)
    masked = np.where(passing, metrics, np.inf)
    fallback = np.where(valid, metrics, np.inf)
    choice = np.where(any_pass, np.argmin(masked, axis=1), np.argmin(fallback, axis=1))
    rows = np.arange(len(llrs))
    chosen = info[rows, choice]
    return DecodeResult(chosen[:, : spec.k], any_pass, metrics[rows, choice], chosen)


def scl_decode(llrs, spec: PolarCodeSpec, list_size: int | None = None) -> DecodeResult:
    """Decode one frame; returns ``(message, crc_pass, metric, info_bits)``."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 1:
        raise UsageError("scl_decode takes one frame; use scl_decode_batch")
    res = scl_decode_batch(llrs[None], spec, list_size)
    return DecodeResult(res.message[0], bool(res.crc_pass[0]), float(res.metric[0]), res.info_bits[0])


def frame_to_symbols(bits, m: int) -> np.ndarray:
    """Group bits into ``m``-bit symbols, first bit most significant."""
    bits = np.asarray(bits, dtype=np.int64)
    n = bits.shape[-1]
    if m < 1 or n % m:
        raise UsageError(f"{m} bits per symbol does not divide the frame length {n}")
    groups = bits.reshape(bits.shape[:-1] + (n // m, m))
    return groups @ (1 << np.arange(m - 1, -1, -1))


def symbols_to_frame(symbols, m: int) -> np.ndarray:
    """Inverse of :func:`frame_to_symbols`."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if m < 1:
        raise UsageError("bits per symbol must be >= 1")
    bits = (symbols[..., None] >> np.arange(m - 1, -1, -1)) & 1
    return bits.reshape(symbols.shape[:-1] + (-1,)).astype(np.uint8)


def write_frozen_set(path, n: int, frozen) -> None:
    """Plain-text export: ``n=<n>`` header, then one frozen index per line."""
    _check_block_length(n)
    lines = [f"n={n}"] + [str(int(i)) for i in sorted(frozen)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_frozen_set(path) -> tuple[int, tuple[int, ...]]:
    """Parse a frozen-set file; returns ``(n, frozen indices)``."""
    text = Path(path).read_text(encoding="ascii")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ConfigurationError(f"{path}: first line must be 'n=<block length>'")
    try:
        n = int(lines[0][2:])
        frozen = [int(ln) for ln in lines[1:]]
    except ValueError as exc:
        raise ConfigurationError(f"{path}: malformed line ({exc})") from None
    _check_block_length(n)
    if frozen != sorted(set(frozen)):
        raise ConfigurationError(f"{path}: frozen indices must be strictly increasing")
    if frozen and not (0 <= frozen[0] and frozen[-1] < n):
        raise ConfigurationError(f"{path}: frozen index out of range 0..{n - 1}")
    return n, tuple(frozen)
