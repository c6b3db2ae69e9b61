#!/usr/bin/env python3
"""
Acceptance evaluation script: runs the headline checks at desk scale and
prints a pass/fail table with the measured numbers.
"""

import logging
import math
import os
import sys
from datetime import datetime

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from analytic import perturbative_energy, revival_probability_w0_zero, two_mode_revival
from dynamics import (
    cross_chain_revival,
    detuning_table,
    evolve,
    first_order_revival_series,
    make_propagator,
    orbit_radius,
    revival_peaks,
    revival_series,
    trajectory,
)
from initial_states import components_to_tensor, parse_initial_spec
from model import ChainState, ModelParams, build_two_qubit_graph, build_two_qubit_hamiltonian, cross_parity_leakage, two_qubit_parity
from settings import SOFTWARE_VERSION, load_settings
from wigner import default_axes, squeezing_diagnostic, wigner, wigner_negativity

TWO_PI = 2.0 * math.pi


def propagator(omega0, g=2.0, level=0, n_max=128):
    params = ModelParams(omega=1.0, omega0=omega0, g=g, n_max=n_max)
    return make_propagator(params, 1, ChainState.basis(1, level, n_max))


def check(results, name, passed, measured):
    results.append({"criterion": name, "passed": bool(passed), "measured": measured})
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {measured}")


def main():
    settings = load_settings()
    logging.basicConfig(level=settings.log_level)
    print(f"Acceptance report, version {SOFTWARE_VERSION}, {datetime.now():%Y-%m-%d %H:%M}")
    results = []

    times = np.linspace(0.0, 4 * math.pi, 2001)
    worst = 0.0
    for g in (0.5, 1.0, 2.0):
        exact = revival_series(propagator(0.0, g), times).values
        worst = max(worst, float(np.max(np.abs(exact - revival_probability_w0_zero(g, 1.0, times)))))
    check(results, "closed form vs propagation (omega0=0)", worst <= 1e-8, f"sup error {worst:.2e}")

    free = propagator(0.0)
    floor = revival_series(free, [math.pi]).values[0]
    check(results, "collapse floor at t=pi", abs(floor / math.exp(-16) - 1) <= 1e-4, f"{floor:.6e}")

    long_times = np.linspace(0.0, 11 * math.pi, 5501)
    exact_05 = revival_series(propagator(0.5), long_times)
    peaks = revival_peaks(exact_05, 1.0, range(1, 6))
    decreasing = bool(np.all(np.diff(peaks["value"]) <= 0.02))
    check(results, "partial revivals decrease (omega0=0.5)", peaks["value"][0] < 0.995 and decreasing, peaks["value"].round(4).tolist())

    table = detuning_table(propagator(0.5))
    top = table.top(10)
    largest = float(top["delta"].abs().max())
    near_116 = float(top["delta"].abs().sub(0.116).abs().min())
    check(results, "detuning |delta|=0.116 among top-10 weights", near_116 <= 0.010, f"closest offset {near_116:.4f}")
    print(f"      largest |delta| among top-10 weights: {largest:.4f}")

    first = perturbative_energy(ModelParams(g=2.0, omega0=0.5, n_max=128), 1, 4, 1).delta
    check(results, "first-order delta at N=4", abs(first - 705 * math.exp(-8) / 2) <= 1e-5, f"{first:.6f}")

    for omega0, tolerance in ((0.3, 0.05), (0.5, 0.08)):
        params = ModelParams(g=2.0, omega0=omega0, n_max=128)
        grid = np.linspace(0.0, 7 * math.pi, 3501)
        exact_peaks = revival_peaks(revival_series(propagator(omega0), grid), 1.0, (1, 2, 3))["value"]
        approx_peaks = revival_peaks(first_order_revival_series(params, grid), 1.0, (1, 2, 3))["value"]
        gap = float(np.max(np.abs(exact_peaks - approx_peaks)))
        check(results, f"first-order revival peaks (omega0={omega0})", gap <= tolerance, f"max gap {gap:.4f}")

    params = ModelParams(g=2.0, omega0=0.3, n_max=128)
    exact_peaks = revival_peaks(revival_series(propagator(0.3), np.linspace(0.0, 7 * math.pi, 3501)), 1.0, (1, 2, 3))
    for convention in ("printed", "phase"):
        estimate = two_mode_revival(params, TWO_PI * exact_peaks["k"].to_numpy(), convention)
        gap = np.abs(estimate - exact_peaks["value"].to_numpy())
        check(results, f"two-mode estimate ({convention})", bool(np.all(gap <= 0.08)), gap.round(4).tolist())

    params = ModelParams(g=2.0, omega0=0.5, n_max=128)
    state = components_to_tensor(parse_initial_spec("+,0:0.70710678118654752,0;-,0:0.70710678118654752,0"), 128)
    frame = cross_chain_revival(state, params, times)
    parity_drift = float(frame["parity"].abs().max())
    check(results, "parity conservation", parity_drift <= 1e-12, f"max |<Pi>| {parity_drift:.2e}")

    prop = propagator(0.5)
    x_axis, p_axis = default_axes()
    state_t1 = evolve(prop, TWO_PI)
    snapshot = wigner(state_t1, x_axis, p_axis, n_jobs=settings.n_jobs)
    squeeze = squeezing_diagnostic(state_t1, 2.0)
    check(results, "tangential squeezing at t=1", squeeze.tangential > squeeze.normal, f"{squeeze.tangential:.4f} vs {squeeze.normal:.4f}")
    print(f"      Wigner integral {snapshot.integral():.4f}, negativity {wigner_negativity(snapshot):.2e}")

    x, p = trajectory(prop, np.array([TWO_PI, 5 * TWO_PI]))
    radius = orbit_radius(x, p, 2.0)
    check(results, "orbit spirals inward", radius[1] < radius[0], radius.round(4).tolist())

    graph = build_two_qubit_graph(6)
    small = ModelParams(g=2.0, omega0=0.5, n_max=32)
    parities = [two_qubit_parity(c, n) for n in range(32) for c in ("gg", "ge", "eg", "ee")]
    leakage = cross_parity_leakage(build_two_qubit_hamiltonian(small), parities)
    check(results, "two-qubit structure", len(graph.components()) == 2 and leakage == 0.0, f"components={len(graph.components())}")

    report = pd.DataFrame(results)
    print()
    print(report.to_string(index=False))
    print(f"\n{int(report['passed'].sum())}/{len(report)} checks passed")
    return 0 if report["passed"].all() else 1


if __name__ == "__main__":
    sys.exit(main())
