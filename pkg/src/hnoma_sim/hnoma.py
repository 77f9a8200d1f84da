"""Two-group power-domain superposition of SCMA groups and the MPA + SIC receiver.

Group 1 is the far (weak) group, group 2 the near (strong) one. The
receiver detects group 2 first, treating group 1 as Gaussian interference,
subtracts its hard-decision reconstruction and then detects group 1.
All functions accept a leading batch axis on symbols, gains and ``y``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigurationError, UsageError
from .scma import (
    DEFAULT_MPA_ITERATIONS,
    Codebook,
    encode_symbols,
    hard_decision,
    mpa_detect_batch,
)

FAR, NEAR = 0, 1  # positions of the groups in every per-group tuple


@dataclass(frozen=True)
class GroupConfig:
    group_id: int  # 1 = far, 2 = near
    codebook: Codebook
    power: float = 1.0

    def __post_init__(self):
        if not self.power >= 0:
            raise ConfigurationError(f"group {self.group_id}: power scale must be >= 0, got {self.power}")

    @property
    def users(self) -> int:
        return self.codebook.J


def validate_groups(groups) -> None:
    """Checks for the two-group receiver: ids, shared resources, power order."""
    if len(groups) != 2:
        raise ConfigurationError(f"the receiver supports exactly K=2 groups, got {len(groups)}")
    far, near = groups
    if (far.group_id, near.group_id) != (1, 2):
        raise ConfigurationError("groups must be ordered (far=1, near=2)")
    if far.codebook.Z != near.codebook.Z:
        raise ConfigurationError(
            f"groups must share the resources: Z={far.codebook.Z} vs Z={near.codebook.Z}"
        )
    if not near.power > far.power:
        raise ConfigurationError(
            f"near-group power ({near.power}) must exceed far-group power ({far.power})"
        )


def group_signal(symbols, gains, group: GroupConfig) -> np.ndarray:
    """``sqrt(p) * sum_j gains_j * x_j(symbols_j)`` over the group's users."""
    gains = np.asarray(gains)
    if gains.shape[-1] != group.users:
        raise UsageError(f"group {group.group_id}: expected {group.users} gains, got {gains.shape[-1]}")
    x = encode_symbols(symbols, group.codebook)  # (..., J, Z)
    if x.shape[:-1] != gains.shape:
        raise UsageError(f"group {group.group_id}: symbol and gain shapes differ")
    return np.sqrt(group.power) * np.einsum("...j,...jz->...z", gains, x)


def superpose(symbols_g1, symbols_g2, channels: ChannelRealization, groups) -> np.ndarray:
    """Noiseless received vector of both groups over the actual channel."""
    far, near = groups
    if far.codebook.Z != near.codebook.Z:
        raise UsageError("groups must share the same resources")
    return group_signal(symbols_g1, channels.h[FAR], far) + group_signal(
        symbols_g2, channels.h[NEAR], near
    )


def effective_stage1_noise(N0: float, channels: ChannelRealization, group1: GroupConfig) -> np.ndarray:
    """Per-resource noise seen while detecting group 2: ``N0`` plus group-1 interference power.

    Each occupied entry of a unit-energy codeword carries energy ``1/d_v``.
    """
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    cb = group1.codebook
    gain_power = np.abs(np.asarray(channels.h_est[FAR])) ** 2  # (..., J1)
    interference = gain_power @ cb.graph.F.T.astype(np.float64) / cb.d_v
    return N0 + group1.power * interference


def sic_subtract(y, decisions_g2, channels: ChannelRealization, group2: GroupConfig) -> np.ndarray:
    """Remove the reconstructed group-2 signal, built from estimated gains."""
    decisions_g2 = np.asarray(decisions_g2)
    if decisions_g2.shape[-1] != group2.users:
        raise UsageError(f"expected {group2.users} group-2 decisions, got {decisions_g2.shape[-1]}")
    return np.asarray(y) - group_signal(decisions_g2, channels.h_est[NEAR], group2)


@dataclass(frozen=True)
class ReceiverOutput:
    decisions: tuple  # (group 1, group 2), each (..., J_k)
    posteriors: tuple  # (group 1, group 2), each (..., J_k, M)
    residual: np.ndarray  # stage-2 input after SIC
    stage1_noise: np.ndarray
    sic_applied: bool = True
    decode_order: tuple = (2, 1)


def _detect(y, gains, codebook, noise, iterations):
    y2 = np.atleast_2d(y)
    batch = y2.shape[0]
    g2 = np.broadcast_to(gains, (batch, codebook.J)) if np.ndim(gains) == 1 else gains
    nv = np.broadcast_to(np.asarray(noise, dtype=np.float64), y2.shape)
    post = mpa_detect_batch(y2, g2, codebook, nv, iterations)
    return post if np.ndim(y) == 2 else post[0]


def scma_receive(y, gains_est, group: GroupConfig, N0: float, mpa_iterations: int = DEFAULT_MPA_ITERATIONS):
    """Single-group detection: MPA with gains ``sqrt(p) * h_est`` and noise ``N0``."""
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    post = _detect(y, np.sqrt(group.power) * np.asarray(gains_est), group.codebook, N0, mpa_iterations)
    return post, hard_decision(post)


def hnoma_receive(
    y,
    channels: ChannelRealization,
    groups,
    N0: float,
    mpa_iterations: int = DEFAULT_MPA_ITERATIONS,
) -> ReceiverOutput:
    """MPA for the near group under Gaussian-approximated interference, SIC, MPA for the far group.

    Only ``channels.h_est`` is read; the actual gains are never used.
    """
    validate_groups(groups)
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    far, near = groups
    y = np.asarray(y, dtype=np.complex128)

    nu1 = effective_stage1_noise(N0, channels, far)
    gains2 = np.sqrt(near.power) * np.asarray(channels.h_est[NEAR])
    post2 = _detect(y, gains2, near.codebook, nu1, mpa_iterations)
    dec2 = hard_decision(post2)

    residual = sic_subtract(y, dec2, channels, near)
    gains1 = np.sqrt(far.power) * np.asarray(channels.h_est[FAR])
    post1 = _detect(residual, gains1, far.codebook, N0, mpa_iterations)
    dec1 = hard_decision(post1)

    return ReceiverOutput(
        decisions=(dec1, dec2),
        posteriors=(post1, post2),
        residual=residual,
        stage1_noise=nu1,
    )


def power_split(ratio_db: float, total: float = 2.0) -> tuple[float, float]:
    """``(p1, p2)`` with ``p2/p1 = 10**(ratio_db/10)`` and ``p1 + p2 = total``."""
    ratio = 10.0 ** (ratio_db / 10.0)
    p1 = total / (1.0 + ratio)
    return p1, total - p1
