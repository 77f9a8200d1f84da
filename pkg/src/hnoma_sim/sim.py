"""Seeded Monte-Carlo engine for uncoded and polar-coded SCMA / HNOMA links.

Trials are processed in fixed-size chunks. Chunk ``c`` of SNR point ``i``
draws from a Philox stream whose counter words hold ``(i, c)`` under a key
derived from the master seed, and always draws randomness for a full chunk
so that adding trials never changes earlier ones. Chunks reduce to integer
error counts that merge by addition; the scheduling order and worker count
cannot change a result.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import channel
from .errors import ConfigurationError
from .hnoma import (
    GroupConfig,
    group_signal,
    hnoma_receive,
    power_split,
    scma_receive,
)
from .polar import (
    CRC16_CCITT,
    PolarCodeSpec,
    construct_from_llrs,
    crc_parity_matrix,
    frame_to_symbols,
    make_polar_spec,
    message_length,
    polar_encode,
    polar_transform,
    scl_decode_batch,
)
from .scma import build_factor_graph, generate_codebook, posteriors_to_bit_llrs

log = logging.getLogger(__name__)

MODES = ("uncoded-scma", "uncoded-hnoma", "coded-scma", "coded-hnoma")
UNCODED_CHUNK = 2000  # symbol slots per random stream
CODED_CHUNK = 25  # frames per random stream
MIN_ERROR_EVENTS = 100
FADING = ("symbol", "block")
CONSTRUCTIONS = ("awgn", "scma")  # coherence of the gains in coded mode
WORKERS_ENV = "HNOMA_SIM_WORKERS"
_STREAM_TAG = 0x484E4F4D41  # separates simulation streams from other Philox users


@dataclass(frozen=True)
class PolarParams:
    n: int = 64
    rate: float = 0.5
    list_size: int = 4
    design_snr_db: float = 2.0
    construction_trials: int = 100_000
    construction_seed: int = 0
    # "awgn": BI-AWGN surrogate at design_snr_db (Es/N0);
    # "scma": the scenario's own link at design_snr_db (scenario SNR)
    construction: str = "awgn"


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one experiment.

    ``users`` has one entry per group: ``(J,)`` for the single-group modes,
    ``(J1, J2)`` (far, near) for the hybrid ones. ``rho`` likewise holds one
    estimation quality per group (``inf`` = perfect CSI).
    """

    mode: str
    users: tuple
    resources: int
    modulation_order: int
    snr_db: tuple
    trials: int
    seed: int
    degree: int = 2
    mpa_iterations: int = 10
    power_ratio_db: float = 6.0
    rho: tuple = (math.inf,)
    sigma_h2: float = 1.0
    polar: PolarParams | None = None
    fading: str = "symbol"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(int(u) for u in np.atleast_1d(self.users)))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        rho = tuple(float(r) for r in np.atleast_1d(self.rho))
        if len(rho) == 1 and len(self.users) > 1:
            rho = rho * len(self.users)
        object.__setattr__(self, "rho", rho)
        if self.coded and self.polar is None:
            object.__setattr__(self, "polar", PolarParams())
        problems = self.violations()
        if problems:
            raise ConfigurationError("invalid scenario:\n  " + "\n  ".join(problems))

    @property
    def coded(self) -> bool:
        return self.mode.startswith("coded")

    @property
    def hybrid(self) -> bool:
        return self.mode.endswith("hnoma")

    @property
    def overloading(self) -> float:
        return sum(self.users) / self.resources

    @property
    def bits_per_symbol(self) -> int:
        return int(self.modulation_order).bit_length() - 1

    def group_powers(self) -> tuple:
        return power_split(self.power_ratio_db) if self.hybrid else (1.0,)

    def reference_power(self) -> float:
        """Power scale entering the SNR definition (the near group's in hybrid modes)."""
        return self.group_powers()[-1]

    def noise_variance(self, snr_db: float) -> float:
        return self.reference_power() * self.sigma_h2 / 10.0 ** (snr_db / 10.0)

    def violations(self) -> list:
        out = []
        if self.mode not in MODES:
            out.append(f"mode: must be one of {', '.join(MODES)}, got {self.mode!r}")
            return out
        K = 2 if self.hybrid else 1
        if len(self.users) != K:
            out.append(f"groups: mode {self.mode} needs exactly {K} group(s), got {len(self.users)}")
        M = self.modulation_order
        if not (isinstance(M, (int, np.integer)) and M >= 2 and M & (M - 1) == 0):
            out.append(f"modulation_order: must be a power of 2 >= 2, got {M!r}")
        for k, J in enumerate(self.users, start=1):
            try:
                build_factor_graph(J, self.resources, self.degree)
            except ConfigurationError as exc:
                out.append(f"groups[{k - 1}].users: {exc}")
        if not self.snr_db:
            out.append("snr_db: grid must not be empty")
        elif any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            out.append("snr_db: grid must be strictly increasing")
        if not all(math.isfinite(s) for s in self.snr_db):
            out.append("snr_db: values must be finite")
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            out.append(f"trials: must be an integer >= 1, got {self.trials!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            out.append(f"seed: must be an integer in [0, 2^64), got {self.seed!r}")
        if self.mpa_iterations < 1:
            out.append(f"mpa_iterations: must be >= 1, got {self.mpa_iterations}")
        if self.hybrid and not self.power_ratio_db > 0:
            out.append(f"power_ratio_db: near group must be stronger (> 0 dB), got {self.power_ratio_db}")
        if len(self.rho) != len(self.users):
            out.append(f"rho: need one value per group, got {len(self.rho)}")
        if any(not r > 0 for r in self.rho):
            out.append(f"rho: must be > 0 or inf, got {self.rho}")
        if self.fading not in FADING:
            out.append(f"fading: must be one of {', '.join(FADING)}, got {self.fading!r}")
        if not self.sigma_h2 > 0:
            out.append(f"sigma_h2: must be > 0, got {self.sigma_h2}")
        if self.coded:
            p = self.polar
            try:
                message_length(p.n, p.rate, CRC16_CCITT)
            except ConfigurationError as exc:
                out.append(f"polar: {exc}")
            m = self.bits_per_symbol
            if m >= 1 and p.n % m:
                out.append(f"polar.n: {m} bits per symbol must divide n={p.n}")
            if p.list_size < 1:
                out.append(f"polar.list_size: must be >= 1, got {p.list_size}")
            if p.construction not in CONSTRUCTIONS:
                out.append(f"polar.construction: must be one of {', '.join(CONSTRUCTIONS)}, got {p.construction!r}")
            if p.construction_trials < 1000:
                out.append(f"polar.construction_trials: must be >= 1000, got {p.construction_trials}")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rho"] = ["inf" if math.isinf(r) else r for r in self.rho]
        d["users"] = list(self.users)
        d["snr_db"] = list(self.snr_db)
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def scenario_id(self) -> str:
        return self.name or self.fingerprint()[:12]


@dataclass(frozen=True)
class System:
    """Immutable per-scenario objects shared by all trials (and workers)."""

    groups: tuple
    polar: object = None


def _build_groups(config: ScenarioConfig) -> tuple:
    powers = config.group_powers()
    groups = []
    for k, (J, p) in enumerate(zip(config.users, powers), start=1):
        graph = build_factor_graph(J, config.resources, config.degree)
        groups.append(GroupConfig(k, generate_codebook(graph, config.modulation_order, rotation_seed=k - 1), p))
    return tuple(groups)


def _link_key(config: ScenarioConfig) -> ScenarioConfig:
    # fields that do not influence the code construction are normalised away
    return replace(config, snr_db=(0.0,), trials=1, seed=0, name="")


@lru_cache(maxsize=16)
def _polar_spec(key: ScenarioConfig):
    params = key.polar
    if params.construction == "awgn":
        return make_polar_spec(
            params.n,
            params.rate,
            params.list_size,
            params.design_snr_db,
            params.construction_trials,
            params.construction_seed,
        )
    k = message_length(params.n, params.rate, CRC16_CCITT)
    groups = _build_groups(key)
    draw = lambda rng, q: link_llr_source(key, groups, params.design_snr_db, rng, q)
    cons = construct_from_llrs(
        params.n,
        k + CRC16_CCITT.length,
        draw,
        params.construction_trials,
        params.construction_seed,
        chunk=2000,
        method="monte-carlo-scma",
        design_snr_db=params.design_snr_db,
    )
    meta = {
        "method": cons.method,
        "design_snr_db": params.design_snr_db,
        "trials": params.construction_trials,
        "seed": params.construction_seed,
    }
    return PolarCodeSpec(params.n, k, cons.info_set, CRC16_CCITT, params.list_size, meta)


def build_system(config: ScenarioConfig) -> System:
    spec = _polar_spec(_link_key(config)) if config.coded else None
    return System(_build_groups(config), spec)


@dataclass
class GroupCounts:
    group_id: int
    symbols: int = 0
    symbol_errors: int = 0
    bits: int = 0
    bit_errors: int = 0
    frames: int = 0
    frame_errors: int = 0

    def merge(self, other: "GroupCounts") -> "GroupCounts":
        return GroupCounts(
            self.group_id,
            self.symbols + other.symbols,
            self.symbol_errors + other.symbol_errors,
            self.bits + other.bits,
            self.bit_errors + other.bit_errors,
            self.frames + other.frames,
            self.frame_errors + other.frame_errors,
        )

    def totals(self, metric: str) -> tuple:
        return {
            "ser": (self.symbol_errors, self.symbols),
            "ber": (self.bit_errors, self.bits),
            "fer": (self.frame_errors, self.frames),
        }[metric]

    def rate(self, metric: str) -> float:
        errors, trials = self.totals(metric)
        return errors / trials if trials else math.nan

    def ci95(self, metric: str) -> float:
        errors, trials = self.totals(metric)
        if not trials:
            return math.nan
        p = errors / trials
        return 1.96 * math.sqrt(p * (1.0 - p) / trials)


@dataclass(frozen=True)
class PointResult:
    snr_db: float
    groups: tuple  # GroupCounts per group, ascending id


@dataclass(frozen=True)
class SimResult:
    config: ScenarioConfig
    points: tuple
    fingerprint: str
    duration_s: float = field(default=0.0, compare=False)
    warnings: tuple = ()

    @property
    def metrics(self) -> tuple:
        return ("ber", "fer", "ser") if self.config.coded else ("ber", "ser")

    def rates(self, metric: str, group: int) -> np.ndarray:
        return np.array([p.groups[group - 1].rate(metric) for p in self.points])

    def half_widths(self, metric: str, group: int) -> np.ndarray:
        return np.array([p.groups[group - 1].ci95(metric) for p in self.points])


def chunk_rng(seed: int, snr_index: int, chunk_index: int) -> np.random.Generator:
    """Counter-based stream for one chunk of trials."""
    bitgen = np.random.Philox(key=[seed, _STREAM_TAG], counter=[0, 0, snr_index, chunk_index])
    return np.random.Generator(bitgen)


def _chunk_size(config: ScenarioConfig) -> int:
    return CODED_CHUNK if config.coded else UNCODED_CHUNK


def _chunks(config: ScenarioConfig) -> list:
    size = _chunk_size(config)
    return [(c, min(size, config.trials - c * size)) for c in range(math.ceil(config.trials / size))]


def _bit_errors(a, b, m):
    diff = np.bitwise_xor(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    return int(sum(int(np.count_nonzero((diff >> i) & 1)) for i in range(m)))


def _draw_channels(rng, config, snr_linear, batch):
    return channel.draw_realization(
        rng, config.users, config.sigma_h2, config.rho, snr_linear, batch=batch
    )


def _received(rng, symbols, chan, groups, N0, size):
    y = sum(group_signal(s, h, g) for s, h, g in zip(symbols, chan.h, groups))
    noise = channel.complex_normal(rng, N0, y.shape)
    # noise is drawn for the full chunk; keep the leading ``size`` trials
    return (y + noise)[:size]


def _uncoded_chunk(config, system, snr_db, snr_index, chunk_index, size):
    C = UNCODED_CHUNK
    rng = chunk_rng(config.seed, snr_index, chunk_index)
    groups = system.groups
    M = config.modulation_order
    snr = 10.0 ** (snr_db / 10.0)
    N0 = config.noise_variance(snr_db)

    symbols = [rng.integers(0, M, size=(C, g.users)) for g in groups]
    chan = _draw_channels(rng, config, snr, (C,))
    y = _received(rng, symbols, chan, groups, N0, size)
    symbols = [s[:size] for s in symbols]
    chan = channel.ChannelRealization(
        tuple(h[:size] for h in chan.h), tuple(h[:size] for h in chan.h_est), chan.sigma_e2, chan.sigma_h2
    )

    if config.hybrid:
        out = hnoma_receive(y, chan, groups, N0, config.mpa_iterations)
        decisions = out.decisions
    else:
        _, dec = scma_receive(y, chan.h_est[0], groups[0], N0, config.mpa_iterations)
        decisions = (dec,)

    m = config.bits_per_symbol
    counts = []
    for g, s, d in zip(groups, symbols, decisions):
        counts.append(
            GroupCounts(
                g.group_id,
                symbols=int(s.size),
                symbol_errors=int(np.count_nonzero(s != d)),
                bits=int(s.size) * m,
                bit_errors=_bit_errors(s, d, m),
            )
        )
    return counts


def _coded_link(config, groups, codewords, snr_db, rng, size):
    """Map codewords ``(C, J_k, n)`` to symbols, transmit, detect; return bit LLRs ``(size, J_k, n)``."""
    C, _, n = codewords[0].shape
    m = config.bits_per_symbol
    n_s = n // m
    snr = 10.0 ** (snr_db / 10.0)
    N0 = config.noise_variance(snr_db)
    tx_symbols = [np.swapaxes(frame_to_symbols(c, m), 1, 2) for c in codewords]  # (C, n_s, J)

    if config.fading == "block":
        # one realization per frame, held over its n_s slots
        chan = _draw_channels(rng, config, snr, (C,))
        slot_chan = channel.ChannelRealization(
            tuple(np.repeat(h[:, None, :], n_s, axis=1) for h in chan.h),
            tuple(np.repeat(h[:, None, :], n_s, axis=1) for h in chan.h_est),
            chan.sigma_e2,
            chan.sigma_h2,
        )
    else:
        slot_chan = _draw_channels(rng, config, snr, (C, n_s))
    y = _received(rng, tx_symbols, slot_chan, groups, N0, size).reshape(size * n_s, -1)

    flat = lambda a: a[:size].reshape((size * n_s,) + a.shape[2:])
    flat_chan = channel.ChannelRealization(
        tuple(flat(h) for h in slot_chan.h),
        tuple(flat(h) for h in slot_chan.h_est),
        slot_chan.sigma_e2,
        slot_chan.sigma_h2,
    )
    if config.hybrid:
        posteriors = hnoma_receive(y, flat_chan, groups, N0, config.mpa_iterations).posteriors
    else:
        posteriors = (scma_receive(y, flat_chan.h_est[0], groups[0], N0, config.mpa_iterations)[0],)

    llrs = []
    for g, post in zip(groups, posteriors):
        llr = posteriors_to_bit_llrs(post)  # (size*n_s, J, m)
        llrs.append(llr.reshape(size, n_s, g.users, m).transpose(0, 2, 1, 3).reshape(size, g.users, n))
    return llrs, [t[:size] for t in tx_symbols]


def link_llr_source(config, groups, snr_db, rng, q):
    """``q`` symmetrised LLR frames of the scenario's link, pooled over all users.

    Random codewords are sent; each LLR is multiplied by ``1 - 2x`` so the
    rows look like the all-zero codeword to a genie-aided SC decoder.
    """
    n = config.polar.n
    per_frame = sum(g.users for g in groups)
    C = -(-q // per_frame)
    words = [rng.integers(0, 2, size=(C, g.users, n), dtype=np.uint8) for g in groups]
    llrs, _ = _coded_link(config, groups, words, snr_db, rng, C)
    rows = [(l * (1.0 - 2.0 * w)).reshape(-1, n) for l, w in zip(llrs, words)]
    return np.concatenate(rows)[:q]


def _coded_chunk(config, system, snr_db, snr_index, chunk_index, size):
    C = CODED_CHUNK
    rng = chunk_rng(config.seed, snr_index, chunk_index)
    spec = system.polar
    m = config.bits_per_symbol
    G, c0 = crc_parity_matrix(spec.k, spec.crc)

    # transmitter: message -> CRC -> polar, per frame and user
    messages, codewords = [], []
    for g in system.groups:
        msg = rng.integers(0, 2, size=(C, g.users, spec.k), dtype=np.uint8)
        check = ((msg.astype(np.int64) @ G.astype(np.int64) + c0) & 1).astype(np.uint8)
        messages.append(msg)
        codewords.append(polar_encode(np.concatenate([msg, check], axis=-1), spec))

    llrs, tx_symbols = _coded_link(config, system.groups, codewords, snr_db, rng, size)

    counts = []
    for g, llr, msg, tx in zip(system.groups, llrs, messages, tx_symbols):
        J = g.users
        res = scl_decode_batch(llr.reshape(size * J, spec.n), spec)
        dec_msg = res.message.reshape(size, J, spec.k)
        u = np.zeros((size * J, spec.n), dtype=np.uint8)
        u[:, list(spec.info_set)] = res.info_bits
        dec_sym = np.swapaxes(frame_to_symbols(polar_transform(u).reshape(size, J, spec.n), m), 1, 2)
        sent = msg[:size]
        counts.append(
            GroupCounts(
                g.group_id,
                symbols=int(tx.size),
                symbol_errors=int(np.count_nonzero(dec_sym != tx)),
                bits=int(sent.size),
                bit_errors=int(np.count_nonzero(dec_msg != sent)),
                frames=size * J,
                frame_errors=int(np.count_nonzero(np.any(dec_msg != sent, axis=-1))),
            )
        )
    return counts


def run_chunk(config, system, snr_index, chunk_index, size):
    snr_db = config.snr_db[snr_index]
    fn = _coded_chunk if config.coded else _uncoded_chunk
    return fn(config, system, snr_db, snr_index, chunk_index, size)


def _merge(parts):
    merged = list(parts[0])
    for part in parts[1:]:
        merged = [a.merge(b) for a, b in zip(merged, part)]
    return tuple(merged)


def run_point(config: ScenarioConfig, snr_db: float, system: System | None = None) -> tuple:
    """Per-group error counts at one SNR of the grid (serial)."""
    if snr_db not in config.snr_db:
        raise ConfigurationError(f"SNR {snr_db} dB is not on the scenario grid {config.snr_db}")
    system = system or build_system(config)
    i = config.snr_db.index(snr_db)
    return _merge([run_chunk(config, system, i, c, size) for c, size in _chunks(config)])


_WORKER_STATE = {}


def _init_worker(config, system):
    _WORKER_STATE["config"] = config
    _WORKER_STATE["system"] = system


def _worker_unit(unit):
    snr_index, chunk_index, size = unit
    counts = run_chunk(_WORKER_STATE["config"], _WORKER_STATE["system"], snr_index, chunk_index, size)
    return snr_index, counts


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ConfigurationError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def run_scenario(config: ScenarioConfig, workers: int | None = None, progress=None) -> SimResult:
    """Run every SNR point; chunks may execute concurrently in worker processes."""
    start = time.perf_counter()
    system = build_system(config)
    workers = default_workers() if workers is None else int(workers)
    units = [(i, c, size) for i in range(len(config.snr_db)) for c, size in _chunks(config)]

    per_point = {i: [] for i in range(len(config.snr_db))}
    if workers <= 1 or len(units) == 1:
        for i, c, size in units:
            per_point[i].append(run_chunk(config, system, i, c, size))
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(config, system)) as pool:
            for i, counts in pool.map(_worker_unit, units, chunksize=max(1, len(units) // (8 * workers))):
                per_point[i].append(counts)

    points = []
    warnings = []
    for i, snr in enumerate(config.snr_db):
        counts = _merge(per_point[i])
        points.append(PointResult(snr, counts))
        for g in counts:
            if g.symbol_errors < MIN_ERROR_EVENTS:
                warnings.append(
                    f"snr={snr:g} dB group {g.group_id}: only {g.symbol_errors} symbol errors "
                    f"(< {MIN_ERROR_EVENTS}); rate estimate has low confidence"
                )
        if progress is not None:
            progress(points[-1])
    return SimResult(config, tuple(points), config.fingerprint(), time.perf_counter() - start, tuple(warnings))


CSV_COLUMNS = ("scenario_id", "snr_db", "group", "metric", "value", "trials", "errors", "ci95")


def format_number(x: float) -> str:
    """Fixed notation, 6 significant digits, '.' decimal point, independent of locale."""
    if math.isnan(x):
        return "nan"
    return np.format_float_positional(x, precision=6, unique=False, fractional=False, trim="-")


@dataclass(frozen=True)
class Record:
    scenario_id: str
    snr_db: float
    group: int
    metric: str
    value: float
    trials: int
    errors: int
    ci95: float

    def row(self) -> list:
        return [
            self.scenario_id,
            format_number(self.snr_db),
            str(self.group),
            self.metric,
            format_number(self.value),
            str(self.trials),
            str(self.errors),
            format_number(self.ci95),
        ]


def _rounded(x: float) -> float:
    return float(format_number(x))


def summarize(result: SimResult) -> list:
    """One record per (snr, group, metric), sorted by snr, group, then metric name."""
    records = []
    sid = result.config.scenario_id
    for point in result.points:
        for g in sorted(point.groups, key=lambda c: c.group_id):
            for metric in sorted(result.metrics):
                errors, trials = g.totals(metric)
                records.append(
                    Record(
                        sid,
                        _rounded(point.snr_db),
                        g.group_id,
                        metric,
                        _rounded(g.rate(metric)),
                        trials,
                        errors,
                        _rounded(g.ci95(metric)),
                    )
                )
    return records


def write_csv(records, path) -> None:
    """Write atomically: a temporary file in the target directory is renamed into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow(rec.row())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> list:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_COLUMNS:
            raise ConfigurationError(f"{path}: unexpected CSV header {header}")
        return [
            Record(r[0], float(r[1]), int(r[2]), r[3], float(r[4]), int(r[5]), int(r[6]), float(r[7]))
            for r in reader
        ]


def with_overrides(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy of ``config`` with some fields replaced (re-validated)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, **changes)


__all__ = [
    "MODES",
    "PolarParams",
    "ScenarioConfig",
    "SimResult",
    "GroupCounts",
    "PointResult",
    "System",
    "build_system",
    "run_point",
    "run_scenario",
    "run_chunk",
    "chunk_rng",
    "default_workers",
    "with_overrides",
    "Record",
    "summarize",
    "write_csv",
    "read_csv",
    "format_number",
    "CSV_COLUMNS",
]
