"""Flat Rayleigh fading, AWGN and the imperfect-CSI error model.

The estimation error has variance ``sigma_h2 / (1 + rho * snr)``; ``rho = inf``
means perfect knowledge. Every function draws from the caller's
``numpy.random.Generator``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvariantError


def complex_normal(rng: np.random.Generator, variance, size=None):
    """Circularly-symmetric complex Gaussian samples with total ``variance``."""
    scale = np.sqrt(np.asarray(variance, dtype=np.float64) / 2.0)
    shape = () if size is None else size
    if isinstance(shape, int):
        shape = (shape,)
    w = rng.standard_normal(tuple(shape) + (2,))
    z = scale * (w[..., 0] + 1j * w[..., 1])
    return complex(z) if size is None and np.ndim(z) == 0 else z


def sample_fading(rng: np.random.Generator, sigma_h2: float = 1.0, size=None):
    """Rayleigh-fading gain(s): CN(0, sigma_h2)."""
    if not sigma_h2 > 0:
        raise ConfigurationError(f"fading variance must be positive, got {sigma_h2}")
    return complex_normal(rng, sigma_h2, size)


def csi_error_variance(sigma_h2: float, rho: float, snr_linear: float) -> float:
    if not (rho > 0):
        raise ConfigurationError(f"estimation quality rho must be > 0 or inf, got {rho}")
    if not snr_linear > 0:
        raise ConfigurationError(f"SNR must be positive, got {snr_linear}")
    if math.isinf(rho):
        return 0.0
    return sigma_h2 / (1.0 + rho * snr_linear)


def apply_csi_error(h, rho: float, snr_linear: float, sigma_h2: float, rng: np.random.Generator):
    """Return ``(h_est, sigma_e2)`` with ``h = h_est + e`` and ``e ~ CN(0, sigma_e2)``.

    ``e`` is drawn independently of ``h``. For ``rho = inf`` no draw is
    made and ``h_est`` is ``h`` itself.
    """
    sigma_e2 = csi_error_variance(sigma_h2, rho, snr_linear)
    if sigma_e2 == 0.0:
        return (np.array(h, copy=True) if np.ndim(h) else h), 0.0
    e = complex_normal(rng, sigma_e2, np.shape(h) or None)
    return h - e, sigma_e2


def add_awgn(y, N0: float, rng: np.random.Generator):
    """Add CN(0, N0) noise to every entry; ``N0 = 0`` returns an unchanged copy."""
    if N0 < 0:
        raise ConfigurationError(f"noise variance must be >= 0, got {N0}")
    y = np.asarray(y, dtype=np.complex128)
    if N0 == 0:
        return y.copy()
    return y + complex_normal(rng, N0, y.shape)


@dataclass(frozen=True)
class ChannelRealization:
    """Actual and estimated gains per group (index 0 = far, 1 = near).

    ``h[k]`` and ``h_est[k]`` have shape ``(..., J_k)``; leading axes allow a
    batch of independent realizations. ``sigma_e2[k]`` is the error variance
    used for group ``k``.
    """

    h: tuple
    h_est: tuple
    sigma_e2: tuple
    sigma_h2: float = 1.0

    def __post_init__(self):
        if not len(self.h) == len(self.h_est) == len(self.sigma_e2):
            raise InvariantError("actual and estimated gains cover different groups")
        for h, he in zip(self.h, self.h_est):
            if np.shape(h) != np.shape(he):
                raise InvariantError("actual and estimated gains differ in shape")

    @property
    def error(self) -> tuple:
        return tuple(h - he for h, he in zip(self.h, self.h_est))

    @classmethod
    def perfect(cls, h, sigma_h2: float = 1.0) -> "ChannelRealization":
        h = tuple(np.asarray(x, dtype=np.complex128) for x in h)
        return cls(h, h, (0.0,) * len(h), sigma_h2)


def draw_realization(
    rng: np.random.Generator,
    users: tuple,
    sigma_h2: float,
    rho,
    snr_linear: float,
    batch: tuple = (),
) -> ChannelRealization:
    """Draw fading for each group and corrupt it with the CSI error model.

    ``rho`` is a scalar or one value per group. The unit-variance error
    samples are consumed even for ``rho = inf`` so that runs differing only
    in ``rho`` see the same fading and noise (common random numbers).
    """
    rhos = tuple(rho) if np.ndim(rho) else (rho,) * len(users)
    if len(rhos) != len(users):
        raise ConfigurationError("need one rho per group")
    hs, ests, var = [], [], []
    for J, r in zip(users, rhos):
        h = sample_fading(rng, sigma_h2, batch + (J,))
        unit = complex_normal(rng, 1.0, h.shape)
        v = csi_error_variance(sigma_h2, r, snr_linear)
        he = h - np.sqrt(v) * unit if v > 0 else h.copy()
        hs.append(h)
        ests.append(he)
        var.append(v)
    return ChannelRealization(tuple(hs), tuple(ests), tuple(var), sigma_h2)
