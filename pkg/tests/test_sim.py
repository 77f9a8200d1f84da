import math

import numpy as np
import pytest

from hnoma_sim import sim
from hnoma_sim.errors import ConfigurationError
from hnoma_sim.sim import PolarParams, ScenarioConfig


def scma_config(**kw):
    base = dict(mode="uncoded-scma", users=(6,), resources=4, modulation_order=4, snr_db=(5.0, 10.0), trials=2000, seed=11)
    base.update(kw)
    return ScenarioConfig(**base)


def hnoma_config(**kw):
    base = dict(
        mode="uncoded-hnoma", users=(6, 6), resources=4, modulation_order=4, snr_db=(10.0, 20.0), trials=2000, seed=12
    )
    base.update(kw)
    return ScenarioConfig(**base)


def coded_config(**kw):
    polar = PolarParams(n=64, rate=0.5, list_size=4, construction_trials=2000)
    base = dict(
        mode="coded-scma", users=(6,), resources=4, modulation_order=4, snr_db=(8.0,), trials=50, seed=13, polar=polar
    )
    base.update(kw)
    return ScenarioConfig(**base)


# --- configuration ----------------------------------------------------------

def test_config_derived_values():
    c = hnoma_config()
    assert c.overloading == 3.0
    assert c.rho == (math.inf, math.inf)
    p1, p2 = c.group_powers()
    assert p1 + p2 == pytest.approx(2.0) and p2 / p1 == pytest.approx(10 ** 0.6)
    assert c.noise_variance(10.0) == pytest.approx(p2 / 10.0)
    assert scma_config().noise_variance(0.0) == 1.0
    assert coded_config().polar.n == 64
    assert ScenarioConfig("coded-scma", (6,), 4, 4, (0.0,), 1, 0).polar == PolarParams()


def test_config_collects_every_problem():
    with pytest.raises(ConfigurationError) as exc:
        ScenarioConfig("uncoded-scma", (5,), 4, 3, (10.0, 5.0), 0, -1)
    msg = str(exc.value)
    for key in ("groups[0].users", "modulation_order", "snr_db", "trials", "seed"):
        assert key in msg


@pytest.mark.parametrize(
    "kw",
    [
        dict(mode="coded-ofdm"),
        dict(users=(6, 6)),
        dict(rho=(0.0,)),
        dict(fading="slow"),
        dict(mpa_iterations=0),
        dict(sigma_h2=0.0),
        dict(snr_db=()),
    ],
)
def test_config_rejects(kw):
    with pytest.raises(ConfigurationError):
        scma_config(**kw)


def test_config_rejects_bad_polar_and_power():
    with pytest.raises(ConfigurationError):
        coded_config(polar=PolarParams(n=32))
    with pytest.raises(ConfigurationError):
        coded_config(polar=PolarParams(construction="ga"))
    with pytest.raises(ConfigurationError):
        coded_config(modulation_order=8)  # 3 does not divide 64
    with pytest.raises(ConfigurationError):
        hnoma_config(power_ratio_db=0.0)


def test_fingerprint_and_overrides():
    a, b = scma_config(), scma_config()
    assert a.fingerprint() == b.fingerprint()
    assert a.scenario_id == a.fingerprint()[:12]
    c = sim.with_overrides(a, seed=99, trials=None)
    assert c.seed == 99 and c.trials == a.trials and c.fingerprint() != a.fingerprint()
    assert scma_config(name="x").scenario_id == "x"


# --- engine -----------------------------------------------------------------

def test_chunk_streams_are_distinct_and_reproducible():
    a = sim.chunk_rng(1, 0, 0).standard_normal(4)
    assert np.array_equal(a, sim.chunk_rng(1, 0, 0).standard_normal(4))
    for other in (sim.chunk_rng(2, 0, 0), sim.chunk_rng(1, 1, 0), sim.chunk_rng(1, 0, 1)):
        assert not np.array_equal(a, other.standard_normal(4))


def test_run_is_deterministic():
    a = sim.run_scenario(scma_config(), workers=1)
    b = sim.run_scenario(scma_config(), workers=1)
    assert a.points == b.points
    c = sim.run_scenario(scma_config(seed=12), workers=1)
    assert a.points != c.points


def test_worker_count_does_not_change_counts():
    cfg = hnoma_config(trials=4500)
    assert sim.run_scenario(cfg, workers=1).points == sim.run_scenario(cfg, workers=2).points


def test_prefix_property():
    # truncating a chunk keeps its leading trials: cumulative errors grow by 0..J per slot
    cfg = scma_config(trials=2000)
    system = sim.build_system(cfg)
    errors = [sim.run_chunk(cfg, system, 0, 0, size)[0].symbol_errors for size in range(1, 151)]
    steps = np.diff([0] + errors)
    assert steps.min() >= 0 and steps.max() <= 6
    assert sim.run_point(scma_config(trials=1500), 5.0) == tuple(sim.run_chunk(cfg, system, 0, 0, 1500))
    assert errors[-1] > 0


def test_counts_are_consistent():
    res = sim.run_scenario(hnoma_config(), workers=1)
    m = 2
    for point in res.points:
        for g in point.groups:
            assert g.symbols == 2000 * 6 and g.bits == m * g.symbols
            assert g.symbol_errors <= g.bit_errors <= m * g.symbol_errors
            assert g.rate("ber") <= g.rate("ser") <= m * g.rate("ber")


def test_ci_shrinks_like_inverse_sqrt():
    small = sim.run_point(scma_config(trials=2000), 5.0)[0]
    large = sim.run_point(scma_config(trials=8000), 5.0)[0]
    ratio = small.ci95("ser") / large.ci95("ser")
    assert ratio == pytest.approx(2.0, rel=0.1)
    g = sim.GroupCounts(1, symbols=100, symbol_errors=10)
    assert g.ci95("ser") == pytest.approx(1.96 * math.sqrt(0.09 / 100))
    assert math.isnan(g.rate("fer"))


def test_ser_decreases_with_snr():
    res = sim.run_scenario(scma_config(snr_db=(5.0, 10.0, 15.0, 20.0)), workers=1)
    ser = res.rates("ser", 1)
    assert np.all(np.diff(ser) < 0)


def test_run_point_rejects_off_grid_snr():
    with pytest.raises(ConfigurationError):
        sim.run_point(scma_config(), 7.0)


def test_low_error_warning():
    res = sim.run_scenario(scma_config(trials=100, snr_db=(30.0,)), workers=1)
    assert res.warnings and "symbol errors" in res.warnings[0]


def test_coded_run():
    cfg = coded_config()
    res = sim.run_scenario(cfg, workers=1)
    g = res.points[0].groups[0]
    assert g.frames == 50 * 6 and g.bits == g.frames * 16 and g.symbols == g.frames * 32
    assert res.metrics == ("ber", "fer", "ser")
    assert g.frame_errors <= g.frames and g.bit_errors <= 16 * g.frame_errors
    assert sim.run_scenario(cfg, workers=1).points == res.points


def test_coded_hnoma_and_block_fading_run():
    cfg = coded_config(mode="coded-hnoma", users=(6, 6), trials=10, snr_db=(10.0,), fading="block")
    res = sim.run_scenario(cfg, workers=1)
    assert [g.frames for g in res.points[0].groups] == [60, 60]


def test_scma_matched_construction_is_cached_and_seeded():
    p = PolarParams(n=64, construction="scma", design_snr_db=8.0, construction_trials=2000)
    a = sim.build_system(coded_config(polar=p))
    b = sim.build_system(coded_config(polar=p, seed=1, trials=7))
    assert a.polar is b.polar
    assert len(a.polar.info_set) == 32


# --- summary and CSV --------------------------------------------------------

def test_summarize_layout():
    res = sim.run_scenario(hnoma_config(snr_db=(0.0, 4.0, 8.0, 12.0, 16.0, 20.0), trials=200), workers=1)
    records = sim.summarize(res)
    assert len(records) == 6 * 2 * 2
    keys = [(r.snr_db, r.group, r.metric) for r in records]
    assert keys == sorted(keys)
    r = records[0]
    assert r.errors / r.trials == pytest.approx(r.value, rel=1e-5)


def test_csv_round_trip(tmp_path):
    res = sim.run_scenario(hnoma_config(trials=300), workers=1)
    records = sim.summarize(res)
    path = tmp_path / "out.csv"
    sim.write_csv(records, path)
    assert sim.read_csv(path) == records
    text = path.read_text().splitlines()
    assert text[0] == ",".join(sim.CSV_COLUMNS)
    assert not list(tmp_path.glob(".tmp-*"))


def test_read_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n")
    with pytest.raises(ConfigurationError):
        sim.read_csv(path)


def test_format_number():
    assert sim.format_number(0.000123456789) == "0.000123457"
    assert sim.format_number(12.0) == "12"
    assert sim.format_number(1e-9) == "0.000000001"
    assert sim.format_number(math.nan) == "nan"


def test_default_workers(monkeypatch):
    monkeypatch.setenv(sim.WORKERS_ENV, "3")
    assert sim.default_workers() == 3
    monkeypatch.setenv(sim.WORKERS_ENV, "zero")
    with pytest.raises(ConfigurationError):
        sim.default_workers()
    monkeypatch.delenv(sim.WORKERS_ENV)
    assert sim.default_workers() >= 1
