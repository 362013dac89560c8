"""Static-snapshot and EWMA co-location feature tracking."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intfsim import (
    DeployedModel,
    InterferenceOracle,
    Mode,
    ScenarioSpec,
    STATIC_MODE,
    ewma_mode,
    finalize_features,
    gen_synthetic_profiles,
    init_estimate,
    observe,
    run_scenario,
)
from intfsim.colocation import estimate_from_history, samples_from_outcomes
from intfsim.profiles import Archetype
from intfsim.workload import default_slo_ms

ALPHAS = (1.0 / 3.0, 0.5, 2.0 / 3.0)


def test_mode_validation():
    with pytest.raises(ValueError):
        Mode("weird")
    with pytest.raises(ValueError):
        ewma_mode(0.0)
    with pytest.raises(ValueError):
        ewma_mode(1.5)
    assert ewma_mode(1.0).alpha == 1.0


def test_init_from_empty_gpu():
    est = init_estimate(1, STATIC_MODE, (0.0, 0.0, 0.0))
    np.testing.assert_array_equal(est.r_hat, [0.0, 0.0, 0.0])
    assert est.n_observations == 1


def test_init_snapshot():
    est = init_estimate(1, STATIC_MODE, (0.6, 0.5, 0.4))
    np.testing.assert_allclose(est.r_hat, [0.6, 0.5, 0.4])


def test_init_rejects_negative():
    with pytest.raises(ValueError):
        init_estimate(1, STATIC_MODE, (-0.1, 0.0, 0.0))


def test_static_never_updates():
    est = init_estimate(1, STATIC_MODE, (0.6, 0.5, 0.4))
    for _ in range(5):
        observe(est, (0.9, 0.9, 0.9))
    np.testing.assert_allclose(est.r_hat, [0.6, 0.5, 0.4])
    assert est.n_observations == 1


def test_ewma_single_step_hand_example():
    est = init_estimate(1, ewma_mode(0.5), (0.4, 0.4, 0.4))
    observe(est, (0.8, 0.0, 0.4))
    np.testing.assert_allclose(est.r_hat, [0.6, 0.2, 0.4])


def test_alpha_one_tracks_latest():
    est = init_estimate(1, ewma_mode(1.0), (0.4, 0.4, 0.4))
    for x in ((0.8, 0.0, 0.4), (0.1, 0.9, 0.2)):
        observe(est, x)
        np.testing.assert_allclose(est.r_hat, x)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_geometric_convergence_closed_form(alpha):
    """Constant observations: |r_hat - c| shrinks by (1 - alpha) per step."""
    r0 = np.array([0.9, 0.1, 0.5])
    c = np.array([0.3, 0.6, 0.2])
    est = init_estimate(1, ewma_mode(alpha), r0)
    for k in range(1, 30):
        observe(est, c)
        expected = c + (1.0 - alpha) ** k * (r0 - c)
        np.testing.assert_allclose(est.r_hat, expected, atol=1e-12)


@given(
    alpha=st.sampled_from(ALPHAS),
    r0=st.lists(st.floats(0.0, 2.0), min_size=3, max_size=3),
    xs=st.lists(
        st.lists(st.floats(0.0, 2.0), min_size=3, max_size=3),
        min_size=1,
        max_size=20,
    ),
)
def test_ewma_convexity(alpha, r0, xs):
    est = init_estimate(1, ewma_mode(alpha), r0)
    absorbed = [np.asarray(r0)]
    for x in xs:
        observe(est, x)
        absorbed.append(np.asarray(x))
    lo = np.min(absorbed, axis=0)
    hi = np.max(absorbed, axis=0)
    assert np.all(est.r_hat >= lo - 1e-12)
    assert np.all(est.r_hat <= hi + 1e-12)


def test_ewma_order_sensitivity():
    a = np.array([0.8, 0.1, 0.3])
    b = np.array([0.2, 0.9, 0.6])
    ab = observe(observe(init_estimate(0, ewma_mode(0.5), np.zeros(3)), a), b)
    ba = observe(observe(init_estimate(0, ewma_mode(0.5), np.zeros(3)), b), a)
    assert not np.allclose(ab.r_hat, ba.r_hat)
    # each result lies nearer its own most recent observation
    assert np.linalg.norm(ab.r_hat - b) < np.linalg.norm(ba.r_hat - b)
    assert np.linalg.norm(ba.r_hat - a) < np.linalg.norm(ab.r_hat - a)


def test_estimate_from_history_replay():
    history = [np.array([0.4, 0.4, 0.4]), np.array([0.8, 0.0, 0.4])]
    est = estimate_from_history(1, ewma_mode(0.5), history)
    np.testing.assert_allclose(est.r_hat, [0.6, 0.2, 0.4])
    assert est.n_observations == 2
    with pytest.raises(ValueError):
        estimate_from_history(1, STATIC_MODE, [])


def test_finalize_features_concatenates(table):
    p = table.get("resnet50", 4)
    est = init_estimate(1, STATIC_MODE, (0.5, 0.4, 0.3))
    x = finalize_features(p, est)
    np.testing.assert_allclose(x[:3], p.throughputs())
    np.testing.assert_allclose(x[3:], [0.5, 0.4, 0.3])


def test_figure4_shape_two_peer_swap():
    """A batch co-located briefly with peer A, then longer with peer C.

    The static snapshot keeps A's metrics; the EWMA lands strictly between
    A and C, closer to C (the more recent and longer-lived peer).
    """
    a = np.array([0.30, 0.20, 0.10])
    c = np.array([0.60, 0.55, 0.50])
    history = [a, c, np.zeros(3)]

    static = estimate_from_history(0, STATIC_MODE, history)
    np.testing.assert_allclose(static.r_hat, a)

    ewma = estimate_from_history(0, ewma_mode(0.5), history[:2])
    assert np.all(ewma.r_hat > np.minimum(a, c))
    assert np.all(ewma.r_hat < np.maximum(a, c))
    # alpha = 1/2 weighs the stale and recent peers equally after one
    # transition; any larger alpha pulls the estimate strictly toward C
    assert np.linalg.norm(ewma.r_hat - c) <= np.linalg.norm(ewma.r_hat - a) + 1e-9
    heavy = estimate_from_history(0, ewma_mode(2.0 / 3.0), history[:2])
    assert np.linalg.norm(heavy.r_hat - c) < np.linalg.norm(heavy.r_hat - a)


def quiet_scenario(table):
    """Load so light that no two batches ever overlap."""
    deployed = (
        DeployedModel("solo", 2.0, slo_ms=default_slo_ms(table, "solo", 100.0)),
    )
    return ScenarioSpec(
        deployed=deployed,
        duration_s=5.0,
        batching_window_ms=0.0,
        seed=0,
        oracle=InterferenceOracle(noise_sigma=0.0),
    )


def test_solo_batches_have_zero_colo_features_and_unit_y():
    table = gen_synthetic_profiles([Archetype("solo", 1.0, 0.9, (0.4, 0.3, 0.5))])
    result = run_scenario(quiet_scenario(table), table)
    assert result.outcomes
    for mode in (STATIC_MODE, ewma_mode(0.5)):
        for s in samples_from_outcomes(result.outcomes, table, mode):
            np.testing.assert_array_equal(s.x[3:], [0.0, 0.0, 0.0])
            assert s.y == pytest.approx(1.0)


def test_modes_agree_without_colo_churn():
    table = gen_synthetic_profiles([Archetype("solo", 1.0, 0.9, (0.4, 0.3, 0.5))])
    result = run_scenario(quiet_scenario(table), table)
    static = samples_from_outcomes(result.outcomes, table, STATIC_MODE)
    for alpha in ALPHAS:
        ew = samples_from_outcomes(result.outcomes, table, ewma_mode(alpha))
        for s, e in zip(static, ew):
            np.testing.assert_array_equal(s.x, e.x)
            assert s.y == e.y
