"""Profile table loading, validation, and synthetic generation."""

from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from intfsim import (
    Archetype,
    DEFAULT_ARCHETYPES,
    ModelProfile,
    ProfileTable,
    gen_synthetic_profiles,
    load_profiles,
    throughput_curve,
    write_profiles,
)
from intfsim.profiles import HEAVY_EFFICIENCY, ProfileError

REPO_ROOT = Path(__file__).resolve().parent.parent


def test_model_profile_field_validation():
    with pytest.raises(ProfileError):
        ModelProfile("m", 1, -1.0, 0.5, 0.5, 0.5).validate()
    with pytest.raises(ProfileError):
        ModelProfile("m", 1, 1.0, 0.5, 1.2, 0.5).validate()
    ModelProfile("m", 1, 1.0, 0.0, 1.0, 0.5).validate()


def test_roundtrip_field_exact(table, tmp_path):
    path = tmp_path / "profiles.csv"
    write_profiles(table, path)
    again = load_profiles(path)
    assert again.max_batch_size == table.max_batch_size
    assert set(again.entries) == set(table.entries)
    for key, p in table.entries.items():
        assert again.entries[key] == p


def test_load_counts_entries(table, tmp_path):
    path = tmp_path / "one.csv"
    one = gen_synthetic_profiles(DEFAULT_ARCHETYPES[:1])
    write_profiles(one, path)
    loaded = load_profiles(path)
    assert len(loaded.entries) == 8
    assert loaded.models() == ["resnet50"]


def test_bundled_default_csv():
    table = load_profiles(REPO_ROOT / "profiles" / "default.csv")
    assert len(table.entries) == 48
    assert len(table.models()) == 6


def test_out_of_range_throughput_names_row(tmp_path):
    path = tmp_path / "bad.csv"
    good = gen_synthetic_profiles(DEFAULT_ARCHETYPES[:1])
    write_profiles(good, path)
    lines = path.read_text().splitlines()
    parts = lines[3].split(",")
    parts[4] = "1.2"  # dram_throughput out of [0, 1]
    lines[3] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ProfileError) as exc:
        load_profiles(path)
    assert "row 4" in str(exc.value)
    assert "dram_throughput" in str(exc.value)


def test_missing_batch_size_coverage(tmp_path):
    path = tmp_path / "gap.csv"
    good = gen_synthetic_profiles(DEFAULT_ARCHETYPES[:1])
    write_profiles(good, path)
    lines = path.read_text().splitlines()
    del lines[4]  # drop one batch size for the model
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ProfileError):
        load_profiles(path)


def test_missing_file():
    with pytest.raises(ProfileError):
        load_profiles("/nonexistent/profiles.csv")


def test_lightweight_gain_over_200_percent(table):
    # a highly batching-efficient model more than triples its throughput
    for model in ("resnet50", "yolov8n"):
        curve = dict(throughput_curve(table, model))
        assert curve[8] / curve[1] > 3.0


def test_heavy_gain_about_26_5_percent(table):
    curve = dict(throughput_curve(table, "roberta_b"))
    assert curve[8] / curve[1] == pytest.approx(1.265, abs=0.01)


def test_zero_efficiency_means_linear_duration():
    arch = Archetype("flatliner", 3.0, 0.0, (0.4, 0.4, 0.4))
    t = gen_synthetic_profiles([arch])
    for bs in range(1, 9):
        assert t.get("flatliner", bs).solo_duration_ms == pytest.approx(3.0 * bs)
    curve = dict(throughput_curve(t, "flatliner"))
    assert curve[8] == pytest.approx(curve[1])


def test_efficiency_out_of_range_rejected():
    with pytest.raises(ProfileError):
        gen_synthetic_profiles([Archetype("m", 1.0, 1.5, (0.4, 0.4, 0.4))])


def test_throughput_curve_values():
    entries = {
        ("m", bs): ModelProfile("m", bs, 5.0 + 15.0 * (bs - 1) / 7.0, 0.4, 0.4, 0.4)
        for bs in range(1, 9)
    }
    t = ProfileTable(entries=entries, max_batch_size=8)
    curve = dict(throughput_curve(t, "m"))
    assert curve[1] == pytest.approx(200.0)
    assert curve[8] == pytest.approx(400.0)


def test_throughput_curve_unknown_model(table):
    with pytest.raises(ProfileError):
        throughput_curve(table, "nope")


def test_curves_monotone_for_every_archetype(table):
    for model in table.models():
        curve = [rps for _, rps in throughput_curve(table, model)]
        assert all(b >= a - 1e-9 for a, b in zip(curve, curve[1:]))


def test_durations_monotone_in_batch_size(table):
    for model in table.models():
        durs = [table.get(model, bs).solo_duration_ms for bs in range(1, 9)]
        assert durs == sorted(durs)


def test_generator_deterministic():
    a = gen_synthetic_profiles(seed=3)
    b = gen_synthetic_profiles(seed=3)
    assert a.entries == b.entries
    c = gen_synthetic_profiles(seed=4)
    assert a.entries != c.entries


def test_heavy_efficiency_constant_matches_target():
    # gain = 8 / (1 + 7 * (1 - eff)) should give ~1.265
    gain = 8.0 / (1.0 + 7.0 * (1.0 - HEAVY_EFFICIENCY))
    assert gain == pytest.approx(1.265, abs=1e-3)


@given(
    base=st.floats(0.5, 20.0),
    eff=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**31 - 1),
)
def test_synthetic_profiles_always_valid(base, eff, seed):
    arch = Archetype("prop_model", base, eff, (0.5, 0.45, 0.55))
    t = gen_synthetic_profiles([arch], seed=seed)
    durs = []
    for bs in range(1, 9):
        p = t.get("prop_model", bs)
        assert p.solo_duration_ms > 0
        for frac in p.throughputs():
            assert 0.0 <= frac <= 1.0
        durs.append(p.solo_duration_ms)
    assert durs == sorted(durs)
    if eff > 0:
        curve = [rps for _, rps in throughput_curve(t, "prop_model")]
        assert all(b >= a - 1e-9 * abs(a) for a, b in zip(curve, curve[1:]))


def test_throughputs_vector(table):
    p = table.get("resnet50", 1)
    np.testing.assert_allclose(
        p.throughputs(), [p.l2_throughput, p.dram_throughput, p.sm_throughput]
    )
