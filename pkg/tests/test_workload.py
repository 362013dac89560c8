"""Arrival generation, scenario configuration, and the drift family."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intfsim import (
    DeployedModel,
    ScenarioSpec,
    drift_scenarios,
    generate_arrivals,
    load_scenario,
    rate_for_utilization,
    save_scenario,
)
from intfsim.workload import (
    LOAD_SHIFT_FACTORS,
    ScenarioError,
    default_slo_ms,
)


def spec_for(deployed, duration_s=10.0, seed=0, **kw):
    return ScenarioSpec(deployed=tuple(deployed), duration_s=duration_s, seed=seed, **kw)


def test_zero_rate_yields_no_events():
    spec = spec_for([DeployedModel("resnet50", 0.0, slo_ms=10.0)])
    assert generate_arrivals(spec) == []


def test_exponential_gap_statistics():
    # rate 100 rps: mean gap 10 ms, coefficient of variation 1
    gaps = []
    for seed in range(20):
        spec = spec_for([DeployedModel("resnet50", 100.0, slo_ms=10.0)],
                        duration_s=100.0, seed=seed)
        times = [e.arrival_time_ms for e in generate_arrivals(spec)]
        gaps.extend(np.diff(times))
    gaps = np.array(gaps)
    assert np.mean(gaps) == pytest.approx(10.0, rel=0.05)
    cv = np.std(gaps) / np.mean(gaps)
    assert cv == pytest.approx(1.0, rel=0.10)


def test_event_count_concentration():
    lam, T = 200.0, 20.0
    counts = []
    for seed in range(20):
        spec = spec_for([DeployedModel("m", lam, slo_ms=10.0)], duration_s=T, seed=seed)
        counts.append(len(generate_arrivals(spec)))
    sigma = math.sqrt(lam * T)
    assert abs(np.mean(counts) - lam * T) < 3 * sigma


def test_determinism():
    spec = spec_for(
        [DeployedModel("a", 50.0, slo_ms=5.0), DeployedModel("b", 80.0, slo_ms=5.0)],
        seed=42,
    )
    assert generate_arrivals(spec) == generate_arrivals(spec)


def test_merged_stream_sorted_ids_unique():
    spec = spec_for(
        [
            DeployedModel("a", 120.0, slo_ms=5.0),
            DeployedModel("b", 90.0, slo_ms=5.0),
            DeployedModel("c", 60.0, slo_ms=5.0),
        ],
        seed=1,
    )
    events = generate_arrivals(spec)
    times = [e.arrival_time_ms for e in events]
    assert times == sorted(times)
    ids = [e.request_id for e in events]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)
    for e in events:
        assert e.deadline_ms == e.arrival_time_ms + 5.0


def test_per_model_substreams_independent():
    """Adding a model never perturbs the other models' traces."""
    a_only = spec_for([DeployedModel("a", 100.0, slo_ms=5.0)], seed=9)
    both = spec_for(
        [DeployedModel("a", 100.0, slo_ms=5.0), DeployedModel("b", 100.0, slo_ms=5.0)],
        seed=9,
    )
    times_solo = [e.arrival_time_ms for e in generate_arrivals(a_only)]
    times_joint = [
        e.arrival_time_ms for e in generate_arrivals(both) if e.model_id == "a"
    ]
    assert times_solo == times_joint


def test_per_model_arrival_times_strictly_increasing():
    spec = spec_for([DeployedModel("a", 5000.0, slo_ms=5.0)], duration_s=1.0)
    times = [e.arrival_time_ms for e in generate_arrivals(spec)]
    assert all(b > a for a, b in zip(times, times[1:]))


@given(seed=st.integers(0, 2**31 - 1), rate=st.floats(1.0, 500.0))
@settings(max_examples=30, deadline=None)
def test_arrivals_within_horizon(seed, rate):
    spec = spec_for([DeployedModel("m", rate, slo_ms=5.0)], duration_s=2.0, seed=seed)
    for e in generate_arrivals(spec):
        assert 0.0 <= e.arrival_time_ms < 2000.0


def test_spec_validation():
    with pytest.raises(ScenarioError):
        ScenarioSpec(deployed=(), duration_s=1.0)
    with pytest.raises(ScenarioError):
        spec_for([DeployedModel("m", -1.0, slo_ms=5.0)])
    with pytest.raises(ScenarioError):
        spec_for([DeployedModel("m", 1.0, slo_ms=0.0)])
    with pytest.raises(ScenarioError):
        spec_for(
            [DeployedModel("m", 1.0, slo_ms=5.0), DeployedModel("m", 2.0, slo_ms=5.0)]
        )


def test_rate_for_utilization(table):
    p = table.get("resnet50", 8)
    rate = rate_for_utilization(table, "resnet50", rho=0.5, batch_size=8)
    assert rate == pytest.approx(0.5 * 8 / (p.solo_duration_ms / 1000.0))


def test_default_slo(table):
    assert default_slo_ms(table, "resnet50") == pytest.approx(
        5.0 * table.get("resnet50", 1).solo_duration_ms
    )


# --- drift scenario family ------------------------------------------------

def six_model_base(table, seed=0):
    deployed = tuple(
        DeployedModel(m, 10.0 + i, slo_ms=default_slo_ms(table, m))
        for i, m in enumerate(table.models())
    )
    return spec_for(deployed, seed=seed)


def test_drift_set_algebra(table):
    base = six_model_base(table)
    ds = drift_scenarios(base)
    s1 = {d.model_id for d in ds.training.deployed}
    s2 = {d.model_id for d in ds.test2.deployed}
    s3 = {d.model_id for d in ds.test3.deployed}
    pool = {d.model_id for d in base.deployed}
    assert s1 < pool  # strict subset
    assert s1 & s2 == set()
    assert s3 == s1 | s2 == pool
    assert {d.model_id for d in ds.test1.deployed} == s1


def test_drift_load_shift_outside_band(table):
    base = six_model_base(table)
    ds = drift_scenarios(base)
    original = {d.model_id: d.arrival_rate_rps for d in ds.training.deployed}
    for d in ds.test1.deployed:
        factor = d.arrival_rate_rps / original[d.model_id]
        assert factor < 0.5 or factor > 2.0
        assert factor in LOAD_SHIFT_FACTORS


def test_drift_needs_four_models(table):
    deployed = tuple(
        DeployedModel(m, 10.0, slo_ms=5.0) for m in table.models()[:3]
    )
    with pytest.raises(ScenarioError):
        drift_scenarios(spec_for(deployed))


def test_drift_datasets_use_distinct_seeds(table):
    ds = drift_scenarios(six_model_base(table, seed=5))
    seeds = [s.seed for _, s in ds.named()]
    assert len(set(seeds)) == 4


# --- scenario file round-trip ----------------------------------------------

def test_scenario_roundtrip(tmp_path, table):
    spec = six_model_base(table, seed=11)
    path = tmp_path / "scenario.json"
    save_scenario(spec, path)
    again = load_scenario(path)
    assert again == spec


def test_scenario_roundtrip_preserves_arrivals(tmp_path, table):
    spec = six_model_base(table, seed=3)
    path = tmp_path / "s.json"
    save_scenario(spec, path)
    assert generate_arrivals(load_scenario(path)) == generate_arrivals(spec)
