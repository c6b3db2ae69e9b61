import logging
import math

import numpy as np
import pytest

from analytic import first_order_detunings, revival_probability_w0_zero
from conftest import TWO_PI, chain_propagator
from dynamics import (
    TensorPropagator,
    TimeSeries,
    cross_chain_revival,
    detuning_table,
    evolve,
    evolve_many,
    evolve_tensor,
    first_order_revival_series,
    make_propagator,
    orbit_radius,
    parity_expectation,
    photon_statistics,
    photon_statistics_series,
    revival_peaks,
    revival_series,
    time_grid,
    trajectory,
)
from errors import TruncationError, ValidationError
from initial_states import components_to_tensor, parse_initial_spec
from model import ChainState, ModelParams, TensorState


def test_propagator_rejects_mismatched_states():
    params = ModelParams(g=1.0, n_max=32)
    with pytest.raises(ValidationError, match="psi0"):
        make_propagator(params, -1, ChainState.basis(1, 0, 32))
    with pytest.raises(ValidationError, match="psi0"):
        make_propagator(params, 1, ChainState.basis(1, 0, 16))
    with pytest.raises(TruncationError):
        make_propagator(params, 1, ChainState.basis(1, 30, 32))


def test_overlaps_are_normalized(prop_05):
    assert prop_05.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_free_revival_matches_closed_form(free_prop):
    times = np.linspace(0.0, 2 * TWO_PI, 2001)
    series = revival_series(free_prop, times)
    assert series.label == "P"
    assert series.warnings == ()
    np.testing.assert_allclose(series.values, revival_probability_w0_zero(2.0, 1.0, times), atol=1e-8)


@pytest.mark.parametrize("g", [0.5, 1.0])
def test_free_revival_other_couplings(g):
    prop = chain_propagator(0.0, g=g, n_max=64)
    times = np.linspace(0.0, 2 * TWO_PI, 401)
    np.testing.assert_allclose(revival_series(prop, times).values, revival_probability_w0_zero(g, 1.0, times), atol=1e-8)


def test_collapse_floor(free_prop):
    value = revival_series(free_prop, [math.pi]).values[0]
    assert value == pytest.approx(math.exp(-16.0), rel=1e-4)


def test_evolution_is_unitary_and_starts_at_the_initial_state(prop_05):
    start = evolve(prop_05, 0.0)
    assert abs(start.amps[0] - 1.0) < 1e-10
    later = evolve(prop_05, 7.3)
    assert np.linalg.norm(later.amps) == pytest.approx(1.0, abs=1e-10)
    assert later.time_tag == 7.3


def test_evolution_composes_in_time(prop_05):
    halfway = evolve(prop_05, 3.7)
    restarted = make_propagator(prop_05.params, 1, halfway)
    np.testing.assert_allclose(evolve(restarted, 5.2).amps, evolve(prop_05, 8.9).amps, atol=1e-10)


def test_evolve_many_matches_single_steps(prop_03):
    times = np.array([0.5, 1.5, 4.0])
    rows = evolve_many(prop_03, times)
    for row, t in zip(rows, times):
        np.testing.assert_allclose(row, evolve(prop_03, t).amps, atol=1e-12)


def test_times_must_increase(prop_03):
    with pytest.raises(ValidationError, match="t_grid"):
        revival_series(prop_03, [0.0, 2.0, 1.0])
    with pytest.raises(ValidationError, match="t_max"):
        time_grid(0.0, 10)


def test_free_photon_statistics_are_poissonian(free_prop):
    probabilities = photon_statistics(evolve(free_prop, math.pi))
    n = np.arange(probabilities.size)
    assert probabilities.sum() == pytest.approx(1.0)
    assert np.dot(n, probabilities) == pytest.approx(16.0, abs=1e-8)
    series = photon_statistics_series(free_prop, [0.0, math.pi])
    assert series.shape == (2, 128)
    np.testing.assert_allclose(series[1], probabilities, atol=1e-12)


def test_qubit_frequency_leaves_a_delayed_wavefront(free_prop, prop_05):
    t = 4.9 * TWO_PI
    late = photon_statistics(evolve(prop_05, t))
    free = photon_statistics(evolve(free_prop, t))
    assert late[17:].sum() > 0.03
    assert late[13:17].sum() < 0.5 * late[17:].sum()
    assert late[:13].sum() > 0.9
    assert free[17:].sum() < 1e-6


def test_free_trajectory_is_a_circle(free_prop):
    times = np.linspace(0.0, TWO_PI, 50)
    x, p = trajectory(free_prop, times)
    np.testing.assert_allclose(x.values, 2.0 * math.sqrt(2.0) * (np.cos(times) - 1.0), atol=1e-9)
    np.testing.assert_allclose(p.values, -2.0 * math.sqrt(2.0) * np.sin(times), atol=1e-9)
    np.testing.assert_allclose(orbit_radius(x, p, 2.0)[1:], 2.0 * math.sqrt(2.0), atol=1e-9)


def test_orbit_spirals_inward(prop_05):
    x, p = trajectory(prop_05, [TWO_PI, 5 * TWO_PI])
    radius = orbit_radius(x, p, 2.0)
    assert radius[1] < radius[0]


def test_time_series_frame_uses_periods():
    series = TimeSeries(np.array([0.0, TWO_PI]), np.array([1.0, 0.5]), "P")
    frame = series.to_frame(omega=2.0)
    assert frame["t"].tolist() == pytest.approx([0.0, 2.0])
    assert list(frame.columns) == ["t", "P"]
    assert len(series) == 2


def test_tail_growth_is_reported(caplog):
    prop = chain_propagator(0.0, g=2.0, n_max=40)
    with caplog.at_level(logging.WARNING):
        series = revival_series(prop, np.linspace(0.0, TWO_PI, 101))
    assert series.warnings
    assert "raise n_max" in caplog.text


def test_detuning_table_requires_qubit_frequency(free_prop):
    with pytest.raises(ValidationError, match="omega0"):
        detuning_table(free_prop)


def test_detuning_table_top_weights(prop_05):
    table = detuning_table(prop_05)
    assert table.frame["weight"].sum() == pytest.approx(1.0)
    assert table.metadata["parity"] == 1
    assert table.metadata["energy_reference"] == -4.0
    top = table.top(10)
    magnitudes = top["delta"].abs()
    assert magnitudes.max() == pytest.approx(0.131, abs=0.005)
    assert (magnitudes - 0.116).abs().min() <= 0.010
    assert top["weight"].is_monotonic_decreasing


def test_detuning_of_resonant_level_tracks_first_order(prop_05):
    params = ModelParams(g=2.0, omega0=0.5, n_max=128)
    frame = detuning_table(prop_05).frame.set_index("level")
    first = first_order_detunings(params, 1, 6)
    resonant = frame.loc[4, "delta"]
    assert resonant == pytest.approx(0.131, abs=0.005)
    assert abs(resonant - first[4]) == pytest.approx(0.013, abs=0.005)


def test_detuning_of_level_five_tracks_first_order(prop_05):
    frame = detuning_table(prop_05).frame.set_index("level")
    assert abs(frame.loc[5, "delta"] - 0.119168) <= 0.006


def test_first_order_series_label_and_start():
    params = ModelParams(g=2.0, omega0=0.5, n_max=128)
    series = first_order_revival_series(params, [0.0, TWO_PI])
    assert series.label == "P_order1"
    assert series.values[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("omega0, tolerance", [(0.3, 0.05), (0.5, 0.08)])
def test_first_order_peaks_follow_exact_peaks(omega0, tolerance):
    params = ModelParams(g=2.0, omega0=omega0, n_max=128)
    times = np.linspace(0.0, 7 * math.pi, 3501)
    exact = revival_peaks(revival_series(chain_propagator(omega0), times), 1.0, (1, 2, 3))
    approx = revival_peaks(first_order_revival_series(params, times), 1.0, (1, 2, 3))
    assert np.max(np.abs(exact["value"] - approx["value"])) <= tolerance


def test_partial_revivals_decay(prop_05):
    times = np.linspace(0.0, 11 * math.pi, 5501)
    peaks = revival_peaks(revival_series(prop_05, times), 1.0, range(1, 6))
    assert list(peaks.columns) == ["k", "t", "value"]
    np.testing.assert_allclose(peaks["value"], [0.9653, 0.8677, 0.7257, 0.5658, 0.5635], atol=2e-3)
    assert peaks["value"][0] < 0.995
    assert np.all(np.diff(peaks["value"]) <= 0.02)
    lower = TWO_PI * (peaks["k"] - 0.05)
    assert np.all(peaks["t"] >= lower)


def test_revival_peaks_window_must_contain_samples():
    series = TimeSeries(np.linspace(0.0, 1.0, 11), np.ones(11), "P")
    with pytest.raises(ValidationError, match="periods"):
        revival_peaks(series, 1.0, [3])


def test_parity_expectation_of_basis_states():
    assert parity_expectation(TensorState.basis("g", 0, 16)) == 1.0
    assert parity_expectation(TensorState.basis("e", 0, 16)) == -1.0
    assert parity_expectation(TensorState.basis("e", 3, 16)) == 1.0


def test_chain_evolution_matches_tensor_diagonalization():
    params = ModelParams(g=1.0, omega0=0.5, n_max=32)
    state = components_to_tensor(parse_initial_spec("+,0:0.6,0;-,1:0,0.8"), 32)
    dense = TensorPropagator.from_state(params, state)
    for t in (0.0, 1.3, 6.0):
        via_chains = evolve_tensor(state, params, t)
        np.testing.assert_allclose(via_chains.amps, dense.evolve(t).amps, atol=1e-9)
    assert len(evolve_tensor(state, params, np.array([0.5, 1.0]))) == 2


def test_parity_is_conserved():
    params = ModelParams(g=1.0, omega0=0.5, n_max=32)
    state = components_to_tensor(parse_initial_spec("+,0:0.6,0;-,0:0.8,0"), 32)
    initial = parity_expectation(state)
    assert initial == pytest.approx(0.36 - 0.64)
    for t in (0.7, 3.1, 12.0):
        assert parity_expectation(evolve_tensor(state, params, t)) == pytest.approx(initial, abs=1e-12)


def test_cross_chain_revival_frame():
    params = ModelParams(g=2.0, omega0=0.5, n_max=128)
    state = components_to_tensor(parse_initial_spec("+,0:1,0;-,0:1,0"), 128)
    times = np.linspace(0.0, TWO_PI, 41)
    frame = cross_chain_revival(state, params, times)
    assert list(frame.columns) == ["t", "P_plus", "P_minus", "P_combined", "P_coherent", "parity"]
    np.testing.assert_allclose(frame["P_combined"], 0.5 * (frame["P_plus"] + frame["P_minus"]))
    assert frame["parity"].abs().max() <= 1e-12
    assert frame["P_coherent"][0] == pytest.approx(1.0)


def test_free_chains_revive_identically():
    params = ModelParams(g=2.0, omega0=0.0, n_max=96)
    state = TensorState.from_components([("g", 0, 1.0), ("e", 0, 1.0)], 96)
    frame = cross_chain_revival(state, params, np.linspace(0.0, TWO_PI, 21))
    np.testing.assert_allclose(frame["P_plus"], frame["P_minus"], atol=1e-10)


def test_tensor_revival_matches_chain_revival():
    params = ModelParams(g=1.0, omega0=0.5, n_max=32)
    times = np.linspace(0.0, 3.0, 31)
    dense = TensorPropagator.from_state(params, TensorState.basis("g", 0, 32))
    chain = revival_series(make_propagator(params, 1, ChainState.basis(1, 0, 32)), times)
    np.testing.assert_allclose(dense.revival(times), chain.values, atol=1e-9)
