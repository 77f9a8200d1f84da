"""Desk-scale self-checks against independent reference computations.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them all.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _backend, channel, polar
from .errors import HnomaError
from .scma import build_factor_graph, generate_codebook, hard_decision, mpa_detect_batch

SOFT_BUDGET_S = 300.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def joint_map_posteriors(y, gains, codebook, noise_var):
    """Exact per-user marginals by enumerating all ``M**J`` joint hypotheses."""
    J, M, Z = codebook.codewords.shape
    hyp = np.array(list(itertools.product(range(M), repeat=J)))  # (M^J, J)
    y = np.atleast_2d(y)
    gains = np.atleast_2d(gains)
    out = np.empty((y.shape[0], J, M))
    for b in range(y.shape[0]):
        cw = gains[b][:, None, None] * codebook.codewords  # (J, M, Z)
        mean = cw[np.arange(J), hyp].sum(axis=1)  # (M^J, Z)
        metric = -np.sum(np.abs(y[b] - mean) ** 2, axis=1) / noise_var
        w = np.exp(metric - metric.max())
        for j in range(J):
            out[b, j] = np.bincount(hyp[:, j], weights=w, minlength=M)
        out[b] /= out[b].sum(axis=1, keepdims=True)
    return out


def reference_sc_decode(llr, info_mask):
    """Plain recursive min-sum SC decoder in natural order; returns ``u``."""

    def rec(L, mask):
        if L.size == 1:
            u = 0 if not mask[0] else int(L[0] < 0)
            return np.array([u], dtype=np.uint8), np.array([u], dtype=np.uint8)
        h = L.size // 2
        a, b = L[:h], L[h:]
        ua, va = rec(np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b)), mask[:h])
        ub, vb = rec(b + (1.0 - 2.0 * va) * a, mask[h:])
        return np.concatenate([ua, ub]), np.concatenate([va ^ vb, vb])

    return rec(np.asarray(llr, dtype=np.float64), np.asarray(info_mask, dtype=bool))[0]


def check_crc_vectors() -> CheckResult:
    reg = polar.crc_register(polar.bytes_to_bits(b"123456789"))
    frame = polar.crc_encode(polar.bytes_to_bits(b"123456789"))
    ok = reg == 0x31C3 and polar.crc_check(frame)
    frame[3] ^= 1
    ok = ok and not polar.crc_check(frame)
    return CheckResult("crc-vectors", ok, f"check value 0x{reg:04X} (expected 0x31C3)")


def check_polar_kernel() -> CheckResult:
    cases = [([1, 0], [1, 0]), ([0, 1], [1, 1]), ([0, 0, 0, 1], [1, 1, 1, 1]), ([1, 0, 0, 0], [1, 0, 0, 0])]
    bad = [u for u, x in cases if polar.polar_transform(np.array(u, dtype=np.uint8)).tolist() != x]
    return CheckResult("polar-kernel", not bad, "all kernel vectors match" if not bad else f"mismatch for {bad}")


def check_sc_vs_scl1(frames: int = 200, seed: int = 1) -> CheckResult:
    spec = polar.make_polar_spec(64, 0.5, 1, trials=20_000)
    rng = np.random.default_rng(seed)
    llr = 2.0 * (1.0 + 0.9 * rng.standard_normal((frames, 64))) / 0.81
    res = polar.scl_decode_batch(llr, spec, list_size=1)
    mask = spec.info_mask.astype(bool)
    mismatches = sum(
        not np.array_equal(reference_sc_decode(l, mask)[mask], res.info_bits[i]) for i, l in enumerate(llr)
    )
    return CheckResult("sc-vs-scl1", mismatches == 0, f"{mismatches}/{frames} frames differ")


def check_polar_roundtrip(frozen_path=None, frames: int = 50, seed: int = 2) -> CheckResult:
    """Noiseless encode/decode; with ``frozen_path`` the transmitter uses the file's code."""
    ref = polar.make_polar_spec(64, 0.5, 4)
    tx = ref
    if frozen_path is not None:
        try:
            n, frozen = polar.read_frozen_set(frozen_path)
            tx = polar.spec_from_frozen_set(n, frozen, list_size=4)
        except (HnomaError, OSError) as exc:
            return CheckResult("polar-roundtrip", False, f"cannot use {frozen_path}: {exc}")
        if tx.n != ref.n or tx.k != ref.k:
            return CheckResult("polar-roundtrip", False, f"{frozen_path}: (n, k)=({tx.n}, {tx.k}) differs from reference")
    rng = np.random.default_rng(seed)
    msg = rng.integers(0, 2, (frames, ref.k), dtype=np.uint8)
    words = np.stack([polar.polar_encode(polar.crc_encode(m, tx.crc), tx) for m in msg])
    res = polar.scl_decode_batch(20.0 * (1.0 - 2.0 * words), ref)
    bad = int(np.count_nonzero(np.any(res.message != msg, axis=1)))
    return CheckResult("polar-roundtrip", bad == 0, f"{bad}/{frames} frames not recovered")


def check_mpa_vs_map(trials: int = 50, snr_db: float = 8.0, seed: int = 3) -> CheckResult:
    cb = generate_codebook(build_factor_graph(6, 4, 2), 4)
    rng = np.random.default_rng(seed)
    N0 = 10.0 ** (-snr_db / 10.0)
    h = channel.sample_fading(rng, 1.0, (trials, 6))
    s = rng.integers(0, 4, (trials, 6))
    x = cb.codewords[np.arange(6), s]  # (trials, 6, Z)
    y = channel.add_awgn(np.einsum("tj,tjz->tz", h, x), N0, rng)
    mpa = mpa_detect_batch(y, h, cb, N0, 10)
    ref = joint_map_posteriors(y, h, cb, N0)
    agree = float(np.mean(hard_decision(mpa) == hard_decision(ref)))
    tv = float(np.mean(0.5 * np.abs(mpa - ref).sum(axis=-1)))
    ok = agree >= 0.99 and tv <= 0.05
    return CheckResult("mpa-vs-map", ok, f"decision agreement {agree:.4f}, mean TV {tv:.4f}")


def check_channel_statistics(samples: int = 200_000, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    h = channel.sample_fading(rng, 1.0, samples)
    var = float(np.mean(np.abs(h) ** 2))
    ks = stats.kstest(np.abs(h), stats.rayleigh(scale=np.sqrt(0.5)).cdf)
    se2 = channel.csi_error_variance(1.0, 1.0, 9.0)
    ok = abs(var - 1.0) < 0.01 and ks.pvalue > 0.01 and se2 == 0.1
    return CheckResult(
        "channel-statistics", ok, f"variance {var:.4f}, KS p={ks.pvalue:.3f}, sigma_e2(rho=1, snr=9)={se2}"
    )


def check_backends(seed: int = 5) -> CheckResult:
    names = _backend.available()
    if len(names) < 2:
        return CheckResult("backend-agreement", True, f"only {names[0]} backend available; skipped")
    py, cy = _backend.get("python"), _backend.get("cython")
    cb = generate_codebook(build_factor_graph(6, 4, 2), 4)
    g = cb.graph
    rng = np.random.default_rng(seed)
    y = channel.complex_normal(rng, 1.0, (20, 4))
    h = channel.complex_normal(rng, 1.0, (20, 6))
    nv = np.full((20, 4), 0.3)
    args = (y, h, nv, cb.codewords, g.resource_users, g.user_resources, g.user_slots, 10)
    dmpa = float(np.max(np.abs(py.mpa_batch(*args) - cy.mpa_batch(*args))))
    spec = polar.make_polar_spec(64, 0.5, 4, trials=20_000)
    llr = 2.0 + 3.0 * rng.standard_normal((20, 64))
    a = py.scl_batch(llr, spec.info_mask, 4)
    b = cy.scl_batch(llr, spec.info_mask, 4)
    same = all(np.array_equal(u, v) for u, v in zip(a, b))
    return CheckResult("backend-agreement", dmpa < 1e-9 and same, f"MPA max diff {dmpa:.1e}, SCL identical: {same}")


def run_checks(frozen_path=None) -> list:
    checks = [
        check_crc_vectors,
        check_polar_kernel,
        check_sc_vs_scl1,
        lambda: check_polar_roundtrip(frozen_path),
        check_mpa_vs_map,
        check_channel_statistics,
        check_backends,
    ]
    results = []
    for fn in checks:
        t0 = time.perf_counter()
        try:
            res = fn()
        except Exception as exc:  # a crashing check is a failing check
            res = CheckResult(getattr(fn, "__name__", "check"), False, f"raised {type(exc).__name__}: {exc}")
        results.append(CheckResult(res.name, res.passed, res.detail, time.perf_counter() - t0))
    return results
