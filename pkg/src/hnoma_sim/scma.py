"""Sparse code multiple access: factor graphs, codebooks and MPA detection.

A group of ``J`` users shares ``Z`` orthogonal resources. User ``j`` spreads
each symbol over ``d_v`` of them, so every resource carries ``d_f = J*d_v/Z``
superimposed users. Posteriors are plain ``(..., J, M)`` float arrays whose
last axis sums to one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from . import _backend
from .errors import ConfigurationError, InputError, InvariantError, UsageError

MESSAGE_FLOOR = 1e-300
LLR_CLAMP = 30.0
DEFAULT_MPA_ITERATIONS = 10


@dataclass(frozen=True)
class FactorGraph:
    """Resource/user incidence structure of one SCMA group."""

    Z: int
    J: int
    d_v: int
    F: np.ndarray = field(repr=False)
    resource_users: np.ndarray = field(repr=False)  # (Z, d_f) user ids, ascending
    user_resources: np.ndarray = field(repr=False)  # (J, d_v) resource ids, ascending
    user_slots: np.ndarray = field(repr=False)  # (J, d_v) position of j in resource_users row

    @property
    def d_f(self) -> int:
        return self.J * self.d_v // self.Z

    @property
    def overloading(self) -> float:
        return self.J / self.Z

    def patterns(self) -> list[tuple[int, ...]]:
        return [tuple(int(z) for z in row) for row in self.user_resources]


def _regular_remainder(patterns, r, Z, d_v):
    """First (lexicographic) r-subset of ``patterns`` that loads every row equally."""
    if r == 0:
        return []
    per_row = r * d_v // Z
    for chosen in combinations(patterns, r):
        load = np.zeros(Z, dtype=int)
        for p in chosen:
            load[list(p)] += 1
        if np.all(load == per_row):
            return list(chosen)
    return None


def build_factor_graph(J: int, Z: int, d_v: int) -> FactorGraph:
    """Build a regular ``Z x J`` factor graph with column weight ``d_v``.

    Columns cycle through the ``C(Z, d_v)`` supports in lexicographic order.
    When ``J`` is not a multiple of that count, the leftover columns take the
    lexicographically first set of distinct supports that keeps every row at
    weight ``d_f``; pattern multiplicities therefore differ by at most one.
    """
    for name, value in (("J", J), ("Z", Z), ("d_v", d_v)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if J < 1 or Z < 1:
        raise ConfigurationError(f"J and Z must be >= 1, got J={J}, Z={Z}")
    if not 1 <= d_v <= Z:
        raise ConfigurationError(f"d_v must satisfy 1 <= d_v <= Z={Z}, got d_v={d_v}")
    if (J * d_v) % Z:
        raise ConfigurationError(
            f"(J={J}, Z={Z}, d_v={d_v}): Z must divide J*d_v = {J * d_v}"
        )

    patterns = list(combinations(range(Z), d_v))
    full, r = divmod(J, len(patterns))
    tail = _regular_remainder(patterns, r, Z, d_v)
    if tail is None:
        raise ConfigurationError(
            f"(J={J}, Z={Z}, d_v={d_v}): no regular assignment of the "
            f"{r} leftover columns exists"
        )
    columns = patterns * full + tail

    F = np.zeros((Z, J), dtype=np.int8)
    for j, p in enumerate(columns):
        F[list(p), j] = 1
    user_resources = np.array(columns, dtype=np.int32).reshape(J, d_v)
    resource_users = np.array(
        [np.flatnonzero(F[z]) for z in range(Z)], dtype=np.int32
    ).reshape(Z, J * d_v // Z)
    user_slots = np.empty_like(user_resources)
    for j in range(J):
        for d, z in enumerate(user_resources[j]):
            user_slots[j, d] = int(np.flatnonzero(resource_users[z] == j)[0])

    graph = FactorGraph(Z, J, d_v, F, resource_users, user_resources, user_slots)
    _check_graph(graph)
    return graph


def _check_graph(graph: FactorGraph) -> None:
    F = graph.F
    if not np.all(F.sum(axis=0) == graph.d_v) or not np.all(F.sum(axis=1) == graph.d_f):
        raise InvariantError("factor graph is not regular")
    rebuilt = np.zeros_like(F)
    for z, users in enumerate(graph.resource_users):
        rebuilt[z, users] = 1
    if not np.array_equal(rebuilt, F):
        raise InvariantError("adjacency lists disagree with F")
    n_patterns = comb(graph.Z, graph.d_v)
    _, counts = np.unique(F.T, axis=0, return_counts=True)
    if graph.J <= n_patterns and counts.max() > 1:
        raise InvariantError("duplicate sparsity patterns")
    if graph.J > n_patterns and (len(counts) < n_patterns or counts.max() - counts.min() > 1):
        raise InvariantError("pattern multiplicities are unbalanced")


@dataclass(frozen=True)
class Codebook:
    """Per-user sparse codewords, ``codewords[j, s]`` is a length-``Z`` vector."""

    graph: FactorGraph
    M: int
    codewords: np.ndarray = field(repr=False)  # (J, M, Z) complex128
    rotation_seed: int = 0

    @property
    def J(self) -> int:
        return self.graph.J

    @property
    def Z(self) -> int:
        return self.graph.Z

    @property
    def d_v(self) -> int:
        return self.graph.d_v

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1


def _is_power_of_two(x) -> bool:
    return isinstance(x, (int, np.integer)) and x >= 1 and (x & (x - 1)) == 0


def _label_interleaver(M: int) -> np.ndarray:
    # odd labels first, then even: neighbours on one dimension land apart on the next
    return np.concatenate([np.arange(1, M, 2), np.arange(0, M, 2)])


def generate_codebook(graph: FactorGraph, M: int, rotation_seed: int = 0) -> Codebook:
    """Multidimensional codebook built from rotated M-PAM projections.

    On its ``d``-th resource, user ``j`` sends the PAM level selected by
    applying the label interleaver ``d`` times to ``s``. The ``k``-th user
    of a resource is rotated by ``pi * k / d_f`` so that the ``d_f``
    projections sharing a resource are spread evenly in phase. A nonzero
    ``rotation_seed`` adds a seeded common phase offset in ``[0, pi / d_f)``.
    Each user is normalised to unit average energy.
    """
    if not _is_power_of_two(M) or M < 2:
        raise ConfigurationError(f"M must be a power of 2 (>= 2), got {M!r}")
    J, Z, d_f = graph.J, graph.Z, graph.d_f
    offset = 0.0
    if rotation_seed:
        offset = np.random.default_rng(rotation_seed).uniform(0.0, np.pi / d_f)
    levels = (2.0 * np.arange(M) - (M - 1)).astype(np.complex128)
    perm = _label_interleaver(M)

    cw = np.zeros((J, M, Z), dtype=np.complex128)
    for j in range(J):
        labels = np.arange(M)
        for d, z in enumerate(graph.user_resources[j]):
            k = graph.user_slots[j][d]
            cw[j, :, z] = levels[labels] * np.exp(1j * (offset + np.pi * k / d_f))
            labels = perm[labels]
        energy = np.mean(np.sum(np.abs(cw[j]) ** 2, axis=1))
        cw[j] /= np.sqrt(energy)
    cw.setflags(write=False)

    book = Codebook(graph, M, cw, rotation_seed)
    _check_codebook(book)
    return book


def _check_codebook(book: Codebook) -> None:
    cw = book.codewords
    support = np.abs(cw) > 0
    if not np.array_equal(support, np.broadcast_to(book.graph.F.T[:, None, :] == 1, support.shape)):
        raise InvariantError("codeword support differs from the factor graph")
    energy = np.mean(np.sum(np.abs(cw) ** 2, axis=2), axis=1)
    if np.max(np.abs(energy - 1.0)) > 1e-9:
        raise InvariantError("codebook energy is not normalised")
    if min_codeword_distance(book) <= 0:
        raise InvariantError("codebook has coincident codewords")


def min_codeword_distance(book: Codebook) -> float:
    cw = book.codewords
    diff = cw[:, :, None, :] - cw[:, None, :, :]
    dist = np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))
    iu = np.triu_indices(book.M, k=1)
    return float(dist[:, iu[0], iu[1]].min())


def scma_encode(symbol: int, user: int, codebook: Codebook) -> np.ndarray:
    """Return the codeword of ``user`` for ``symbol`` (read-only view)."""
    if not 0 <= user < codebook.J:
        raise UsageError(f"user index {user} out of range 0..{codebook.J - 1}")
    if not 0 <= symbol < codebook.M:
        raise UsageError(f"symbol index {symbol} out of range 0..{codebook.M - 1}")
    return codebook.codewords[user, symbol]


def encode_symbols(symbols: np.ndarray, codebook: Codebook) -> np.ndarray:
    """Vectorised mapper: ``(..., J)`` symbol indices to ``(..., J, Z)`` codewords."""
    symbols = np.asarray(symbols)
    if symbols.shape[-1] != codebook.J:
        raise UsageError(f"expected {codebook.J} symbols per slot, got {symbols.shape[-1]}")
    if symbols.size and (symbols.min() < 0 or symbols.max() >= codebook.M):
        raise UsageError("symbol index out of range")
    users = np.arange(codebook.J)
    return codebook.codewords[users, symbols]


def _validate_mpa_inputs(y, gains, codebook, noise_var, iterations):
    if iterations < 1:
        raise ConfigurationError(f"MPA iterations must be >= 1, got {iterations}")
    if y.shape[-1] != codebook.Z:
        raise UsageError(f"received vector needs {codebook.Z} entries, got {y.shape[-1]}")
    if gains.shape[-1] != codebook.J:
        raise UsageError(f"expected {codebook.J} user gains, got {gains.shape[-1]}")
    if np.any(~(noise_var > 0)):
        raise ConfigurationError("noise variance must be strictly positive on every resource")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(gains))):
        raise InputError("received vector or gains contain NaN/Inf")


def mpa_detect_batch(
    y: np.ndarray,
    gains: np.ndarray,
    codebook: Codebook,
    noise_var,
    iterations: int = DEFAULT_MPA_ITERATIONS,
) -> np.ndarray:
    """Probability-domain MPA over a batch of received vectors.

    Parameters
    ----------
    y : (B, Z) complex
    gains : (B, J) complex effective gains (power scale and channel folded in)
    noise_var : scalar, (Z,) or (B, Z) positive noise variances
    iterations : number of flooding iterations

    Returns
    -------
    (B, J, M) array of per-user symbol posteriors.
    """
    y = np.ascontiguousarray(y, dtype=np.complex128)
    gains = np.ascontiguousarray(gains, dtype=np.complex128)
    if y.ndim != 2 or gains.ndim != 2 or y.shape[0] != gains.shape[0]:
        raise UsageError("batch MPA expects y of shape (B, Z) and gains of shape (B, J)")
    nv = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), y.shape)
    _validate_mpa_inputs(y, gains, codebook, nv, iterations)
    g = codebook.graph
    return _backend.impl.mpa_batch(
        y,
        gains,
        np.ascontiguousarray(nv),
        np.ascontiguousarray(codebook.codewords),
        g.resource_users,
        g.user_resources,
        g.user_slots,
        int(iterations),
    )


def mpa_detect(y, gains, codebook: Codebook, noise_var, iterations: int = DEFAULT_MPA_ITERATIONS):
    """Detect one received vector; returns the ``(J, M)`` posterior."""
    y = np.asarray(y, dtype=np.complex128)
    gains = np.asarray(gains, dtype=np.complex128)
    if y.ndim != 1 or gains.ndim != 1:
        raise UsageError("mpa_detect takes one received vector; use mpa_detect_batch")
    nv = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), y.shape)
    return mpa_detect_batch(y[None], gains[None], codebook, nv[None], iterations)[0]


def natural_bit_map(M: int) -> np.ndarray:
    """``(M, m)`` bit patterns of each symbol, MSB first."""
    m = M.bit_length() - 1
    s = np.arange(M)[:, None]
    return ((s >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def posteriors_to_bit_llrs(post: np.ndarray, bit_map: np.ndarray | None = None) -> np.ndarray:
    """Marginalise symbol posteriors ``(..., M)`` to bit LLRs ``(..., m)``.

    Positive LLR favours bit 0; values are clamped to +-30.
    """
    post = np.asarray(post, dtype=np.float64)
    M = post.shape[-1]
    if not _is_power_of_two(M) or M < 2:
        raise UsageError(f"posterior length must be a power of 2, got {M}")
    if bit_map is None:
        bit_map = natural_bit_map(M)
    bit_map = np.asarray(bit_map)
    if bit_map.shape != (M, M.bit_length() - 1) or len({tuple(r) for r in bit_map}) != M:
        raise UsageError("bit_map must be a bijection between symbols and bit patterns")
    if np.any(post < 0) or np.max(np.abs(post.sum(axis=-1) - 1.0), initial=0.0) > 1e-6:
        raise InvariantError("symbol posterior is not normalised")
    ones = bit_map.astype(np.float64)
    p1 = post @ ones
    p0 = post @ (1.0 - ones)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(p0) - np.log(p1)
    llr = np.nan_to_num(llr, nan=0.0, posinf=LLR_CLAMP, neginf=-LLR_CLAMP)
    return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)


def hard_decision(post: np.ndarray) -> np.ndarray:
    """Argmax over the last axis; ties resolve to the lowest symbol index."""
    return np.argmax(np.asarray(post), axis=-1)
