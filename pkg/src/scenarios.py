"""
Run configurations, the figure scenario catalog and the custom-run driver.

Every file written here starts with `#key=value` metadata lines that are
enough to regenerate it byte for byte (see `replay`). Times in configs and
outputs are in units of the mode period 2π/ω.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analytic import resonant_level, perturbative_energy, perturbative_spectrum, revival_probability_w0_zero, significant_levels, two_mode_revival
from dynamics import (
    Propagator,
    chain_revival_frame,
    detuning_table,
    evolve,
    first_order_revival_series,
    make_propagator,
    photon_statistics_series,
    revival_series,
    trajectory,
)
from errors import ValidationError, require
from initial_states import StateComponent, format_initial_spec, normalize_components, parse_initial_spec, split_by_parity
from model import ChainState, ModelParams, build_two_qubit_graph, build_two_qubit_hamiltonian, cross_parity_leakage, two_qubit_parity
from reporting import clamp_probabilities, read_metadata, write_csv
from settings import SOFTWARE_VERSION
from wigner import squeezing_diagnostic, wigner, wigner_negativity

logger = logging.getLogger(__name__)

OUTPUTS = ("revival", "photons", "trajectory", "detunings", "spectrum", "wigner")
DEFAULT_GRID = (-6.5, 6.5, 201)
PHOTON_FLOOR = 1e-16
FIG2A_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0, 2.0)
FIG3A_WIGNER_TIME = 0.25
FIG3BCD_TIMES = (0.5, 1.0, 5.0)
FIG5_LEVELS = 6
TWO_PI = 2.0 * math.pi

Grid = Tuple[float, float, int]


def parse_grid(text: str) -> Grid:
    """`"min,max,points"` → (min, max, points)."""
    parts = [part.strip() for part in str(text).split(",")]
    if len(parts) != 3:
        raise ValidationError("grid", f"expected 'min,max,points', got {text!r}")
    try:
        low, high, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError("grid", f"expected 'min,max,points', got {text!r}") from None
    require(high > low, "grid", f"max must exceed min, got {low}..{high}")
    require(points >= 2, "grid", f"need at least 2 points, got {points}")
    return low, high, points


def grid_axes(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    low, high, points = grid
    axis = np.linspace(low, high, points)
    return axis, axis.copy()


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    initial: Tuple[StateComponent, ...]
    t_max: float = 3.0
    n_steps: int = 2001
    outputs: Tuple[str, ...] = ("revival",)
    out_path: str = "results/run.csv"
    order: Optional[int] = None
    grid: Grid = DEFAULT_GRID
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        normalize_components(self.initial)
        require(self.t_max > 0, "t_max", f"must be positive, got {self.t_max}")
        require(self.n_steps >= 2, "n_steps", f"must be at least 2, got {self.n_steps}")
        require(len(self.outputs) > 0, "outputs", "select at least one output")
        for output in self.outputs:
            require(output in OUTPUTS, "outputs", f"unknown output {output!r}; choose from {', '.join(OUTPUTS)}")
        require(self.order in (None, 0, 1, 2), "order", f"must be 0, 1 or 2, got {self.order}")
        object.__setattr__(self, "grid", parse_grid(",".join(str(v) for v in self.grid)))

    def times(self) -> np.ndarray:
        """Physical sample times over [0, t_max·2π/ω]."""
        return np.linspace(0.0, self.t_max * TWO_PI / self.model.omega, self.n_steps)

    def metadata(self) -> Dict[str, object]:
        return {
            "software_version": SOFTWARE_VERSION,
            "command": "custom",
            "outputs": ",".join(self.outputs),
            "omega": float(self.model.omega),
            "omega0": float(self.model.omega0),
            "g": float(self.model.g),
            "n_max": self.model.n_max,
            "initial": format_initial_spec(self.initial),
            "t_max": float(self.t_max),
            "n_steps": self.n_steps,
            "order": "none" if self.order is None else self.order,
            "grid": self.grid,
            "time_unit": "2pi/omega",
        }


def config_from_metadata(metadata: Mapping[str, str], out_path: str) -> RunConfig:
    """Rebuild the RunConfig recorded in a custom-run header."""
    try:
        model = ModelParams(
            omega=float(metadata["omega"]),
            omega0=float(metadata["omega0"]),
            g=float(metadata["g"]),
            n_max=int(metadata["n_max"]),
        )
        order = None if metadata["order"] == "none" else int(metadata["order"])
        return RunConfig(
            model=model,
            initial=tuple(parse_initial_spec(metadata["initial"])),
            t_max=float(metadata["t_max"]),
            n_steps=int(metadata["n_steps"]),
            outputs=tuple(metadata["outputs"].split(",")),
            out_path=str(out_path),
            order=order,
            grid=parse_grid(metadata["grid"]),
        )
    except KeyError as exc:
        raise ValidationError("metadata", f"header lacks {exc.args[0]!r}") from None


ChainProps = Dict[int, Tuple[float, Propagator]]


def _tag(p: int) -> str:
    return "plus" if p == 1 else "minus"


def _is_chain_vacuum(state: ChainState) -> bool:
    return abs(state.amps[0]) ** 2 > 1.0 - 1e-12


def _propagators(config: RunConfig) -> Tuple[ChainProps, Dict[int, ChainState]]:
    chains = split_by_parity(config.initial, config.model.n_max)
    props = {p: (weight, make_propagator(config.model, p, state)) for p, (weight, state) in chains.items()}
    return props, {p: state for p, (_, state) in chains.items()}


def _periods(times: np.ndarray, omega: float) -> np.ndarray:
    return times * omega / TWO_PI


def _revival_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    times = config.times()
    params = config.model
    columns: Dict[str, np.ndarray] = {"t": _periods(times, params.omega)}
    extra: Dict[str, object] = {}
    for p, (weight, prop) in props.items():
        tag = _tag(p)
        series = revival_series(prop, times)
        columns[f"P_{tag}"] = series.values
        extra[f"weight_{tag}"] = weight
        if series.warnings:
            extra[f"warning_{tag}"] = series.warnings[0]
        if not _is_chain_vacuum(states[p]):
            continue
        if params.omega0 == 0.0:
            columns[f"P_w0_zero_{tag}"] = revival_probability_w0_zero(params.beta0, params.omega, times)
        if config.order is not None:
            columns[f"P_order{config.order}_{tag}"] = first_order_revival_series(params, times, config.order, p).values
    if len(props) > 1:
        combined = chain_revival_frame(props, times)
        for name in ("P_combined", "P_coherent", "parity"):
            columns[name] = combined[name].to_numpy()
    return pd.DataFrame(columns), extra


def _photon_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    times = config.times()
    frames = []
    for p, (_, prop) in props.items():
        frames.append(_photon_frame(prop, times, p))
    return pd.concat(frames, ignore_index=True), {"photon_floor": PHOTON_FLOOR}


def _photon_frame(prop: Propagator, times: np.ndarray, p: int) -> pd.DataFrame:
    """Long table (t, parity, n_b, P) keeping levels that ever exceed PHOTON_FLOOR."""
    stats = photon_statistics_series(prop, times)
    levels = np.flatnonzero(stats.max(axis=0) > PHOTON_FLOOR)
    t_col = np.repeat(_periods(times, prop.params.omega), levels.size)
    return pd.DataFrame(
        {
            "t": t_col,
            "parity": p,
            "n_b": np.tile(levels, times.size),
            "P": stats[:, levels].ravel(),
        }
    )


def _trajectory_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    times = config.times()
    frames = []
    for p, (_, prop) in props.items():
        x, p_bar = trajectory(prop, times)
        radius = np.hypot(x.values + math.sqrt(2.0) * config.model.beta0, p_bar.values)
        frames.append(
            pd.DataFrame(
                {"t": _periods(times, config.model.omega), "parity": p, "x": x.values, "p": p_bar.values, "radius": radius}
            )
        )
    return pd.concat(frames, ignore_index=True), {"orbit_center_x": -math.sqrt(2.0) * config.model.beta0}


def _detuning_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    frames = []
    extra: Dict[str, object] = {}
    for p, (_, prop) in props.items():
        table = detuning_table(prop)
        frames.append(table.frame.assign(parity=p))
        extra.update({k: v for k, v in table.metadata.items() if k != "parity"})
    return pd.concat(frames, ignore_index=True), extra


def _spectrum_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    params = config.model
    frames = []
    for p, (_, prop) in props.items():
        frame = pd.DataFrame(
            {"parity": p, "level": np.arange(prop.spectrum.size), "E": prop.energies, "weight": prop.weights}
        )
        if config.order is not None:
            size = significant_levels(params)
            approx = np.full(prop.spectrum.size, np.nan)
            approx[:size] = perturbative_spectrum(params, p, config.order, size)
            frame[f"E_order{config.order}"] = approx
        frames.append(frame)
    return pd.concat(frames, ignore_index=True), {}


def _wigner_snapshot(state: ChainState, grid: Grid, beta0: float, n_jobs: int) -> Tuple[pd.DataFrame, dict]:
    x_axis, p_axis = grid_axes(grid)
    gridded = wigner(state, x_axis, p_axis, n_jobs=n_jobs)
    squeeze = squeezing_diagnostic(state, beta0)
    extra = {
        "integral": gridded.integral(),
        "negativity": wigner_negativity(gridded),
        "var_tangential": squeeze.tangential,
        "var_normal": squeeze.normal,
    }
    return gridded.to_frame(), extra


def _wigner_output(config: RunConfig, props: ChainProps, states: Dict[int, ChainState]) -> Tuple[pd.DataFrame, dict]:
    t_final = config.t_max * TWO_PI / config.model.omega
    frames = []
    extra: Dict[str, object] = {"wigner_time": float(config.t_max)}
    for p, (_, prop) in props.items():
        frame, stats = _wigner_snapshot(evolve(prop, t_final), config.grid, config.model.beta0, config.n_jobs)
        frames.append(frame.assign(parity=p)[["parity", "x", "p", "W"]])
        extra.update({f"{key}_{_tag(p)}": value for key, value in stats.items()})
    return pd.concat(frames, ignore_index=True), extra


_OUTPUT_BUILDERS: Dict[str, Callable] = {
    "revival": _revival_output,
    "photons": _photon_output,
    "trajectory": _trajectory_output,
    "detunings": _detuning_output,
    "spectrum": _spectrum_output,
    "wigner": _wigner_output,
}


def output_path(config: RunConfig, output: str) -> Path:
    """out_path itself for a single output, `<stem>_<output><suffix>` otherwise."""
    path = Path(config.out_path)
    if len(config.outputs) == 1:
        return path
    return path.with_name(f"{path.stem}_{output}{path.suffix or '.csv'}")


def run_custom(config: RunConfig) -> List[Path]:
    logger.info(f"Custom run: {config.model.as_dict()}, initial={format_initial_spec(config.initial)}")
    props, states = _propagators(config)
    written = []
    for output in config.outputs:
        frame, extra = _OUTPUT_BUILDERS[output](config, props, states)
        metadata = {**config.metadata(), "output": output, **extra}
        written.append(write_csv(frame, output_path(config, output), metadata))
    return written


# Figure scenarios


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    description: str
    omega0: float
    runner: Callable[["ScenarioRun"], List[Tuple[str, pd.DataFrame, dict]]]
    g: float = 2.0
    initial: str = "+,0"
    t_max: float = 3.0
    n_steps: int = 2001


@dataclass(frozen=True)
class ScenarioRun:
    """A scenario with its overrides applied."""

    scenario: Scenario
    params: ModelParams
    t_max: float
    n_steps: int
    grid: Grid
    n_jobs: int = 1

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max * TWO_PI / self.params.omega, self.n_steps)

    def initial_chain(self) -> Tuple[int, ChainState]:
        chains = split_by_parity(parse_initial_spec(self.scenario.initial), self.params.n_max)
        require(len(chains) == 1, "initial", "figure scenarios start on a single chain")
        p, (_, state) = next(iter(chains.items()))
        return p, state

    def propagator(self, omega0: Optional[float] = None) -> Propagator:
        params = self.params if omega0 is None else self.params.with_changes(omega0=omega0)
        p, state = self.initial_chain()
        return make_propagator(params, p, state)

    def metadata(self) -> Dict[str, object]:
        return {
            "software_version": SOFTWARE_VERSION,
            "scenario": self.scenario.scenario_id,
            "omega": float(self.params.omega),
            "omega0": float(self.params.omega0),
            "g": float(self.params.g),
            "n_max": self.params.n_max,
            "initial": self.scenario.initial,
            "t_max": float(self.t_max),
            "n_steps": self.n_steps,
            "grid": self.grid,
            "time_unit": "2pi/omega",
        }


def _photon_scenario(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    prop = run.propagator()
    p, _ = run.initial_chain()
    return [("", _photon_frame(prop, run.times(), p).drop(columns="parity"), {})]


def _photon_snapshots(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    prop = run.propagator()
    p, _ = run.initial_chain()
    times = np.array(FIG2A_TIMES) * TWO_PI / run.params.omega
    return [("", _photon_frame(prop, times, p).drop(columns="parity"), {"sample_times": FIG2A_TIMES})]


def _revival_scenario(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    series = revival_series(run.propagator(), run.times())
    extra = {"warning": series.warnings[0]} if series.warnings else {}
    return [("", series.to_frame(run.params.omega), extra)]


def _revival_comparison(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    times = run.times()
    columns = {"t": _periods(times, run.params.omega)}
    for omega0 in (0.0, run.params.omega0):
        columns[f"P_omega0_{omega0:g}"] = revival_series(run.propagator(omega0), times).values
    return [("", pd.DataFrame(columns), {})]


def _trajectory_frame(run: ScenarioRun, prop: Propagator) -> pd.DataFrame:
    times = run.times()
    x, p = trajectory(prop, times)
    radius = np.hypot(x.values + math.sqrt(2.0) * run.params.beta0, p.values)
    return pd.DataFrame({"t": _periods(times, run.params.omega), "x": x.values, "p": p.values, "radius": radius})


def _phase_space_scenario(snapshot_times: Sequence[float]) -> Callable[[ScenarioRun], List[Tuple[str, pd.DataFrame, dict]]]:
    def runner(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
        prop = run.propagator()
        files = [("trajectory", _trajectory_frame(run, prop), {})]
        rows = []
        for period in snapshot_times:
            state = evolve(prop, period * TWO_PI / run.params.omega)
            frame, stats = _wigner_snapshot(state, run.grid, run.params.beta0, run.n_jobs)
            files.append((f"wigner_t{period:g}", frame, {"wigner_time": float(period), **stats}))
            rows.append({"t": float(period), **stats})
        files.append(("squeezing", pd.DataFrame(rows), {}))
        return files

    return runner


def _two_mode_scenario(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    params = run.params
    times = run.times()
    exact = revival_series(run.propagator(), times)
    first = first_order_revival_series(params, times, 1)
    printed = two_mode_revival(params, times, "printed")
    phase = two_mode_revival(params, times, "phase")
    clamped, count = clamp_probabilities(printed, "two-mode revival")
    level = resonant_level(params, 0)
    frame = pd.DataFrame(
        {
            "t": _periods(times, params.omega),
            "P_exact": exact.values,
            "P_order1": first.values,
            "P_two_mode_printed": printed,
            "P_two_mode_phase": phase,
            "P_two_mode_clamped": clamped,
        }
    )
    extra = {
        "resonant_level": level,
        "delta_resonant": perturbative_energy(params, 1, level, 1).delta,
        "clamped_count": count,
    }
    return [("", frame, extra)]


def _detuning_scenario(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    table = detuning_table(run.propagator())
    return [("", table.frame, dict(table.metadata))]


def _graph_scenario(run: ScenarioRun) -> List[Tuple[str, pd.DataFrame, dict]]:
    graph = build_two_qubit_graph(FIG5_LEVELS)
    h = build_two_qubit_hamiltonian(run.params)
    parities = [two_qubit_parity(config, n) for n in range(run.params.n_max) for config in ("gg", "ge", "eg", "ee")]
    extra = {
        "n_levels": FIG5_LEVELS,
        "components": len(graph.components()),
        "parity_leakage": cross_parity_leakage(h, parities),
    }
    return [("", graph.to_frame(), extra)]


SCENARIOS: Dict[str, Scenario] = {
    s.scenario_id: s
    for s in (
        Scenario("fig1a", "photon statistics P_nb(t), omega0=0", 0.0, _photon_scenario, t_max=2.0, n_steps=201),
        Scenario("fig1b", "return probability of |+,0_b>, omega0=0", 0.0, _revival_scenario),
        Scenario("fig1c", "return probability of |+,2_b>, omega0=0", 0.0, _revival_scenario, initial="+,2"),
        Scenario("fig2a", "photon statistics snapshots, omega0=0.5", 0.5, _photon_snapshots),
        Scenario("fig2b", "return probability, omega0=0 against omega0=0.5", 0.5, _revival_comparison),
        Scenario("fig3a", "trajectory and Wigner function, omega0=0", 0.0, _phase_space_scenario((FIG3A_WIGNER_TIME,)), t_max=1.0, n_steps=201),
        Scenario("fig3bcd", "trajectory and Wigner functions, omega0=0.5", 0.5, _phase_space_scenario(FIG3BCD_TIMES), t_max=5.0, n_steps=1001),
        Scenario("fig4a", "exact, first-order and two-mode revivals, omega0=0.3", 0.3, _two_mode_scenario),
        Scenario("fig4b", "exact, first-order and two-mode revivals, omega0=0.5", 0.5, _two_mode_scenario),
        Scenario("fig4c", "weighted detuning distribution, omega0=0.5", 0.5, _detuning_scenario),
        Scenario("fig5", "two-qubit parity chain graph", 0.0, _graph_scenario, t_max=1.0, n_steps=2),
    )
}

SCENARIO_OVERRIDES = ("n_max", "t_max", "n_steps", "grid", "n_jobs", "omega")


def prepare_scenario(scenario_id: str, overrides: Optional[Mapping[str, object]] = None) -> ScenarioRun:
    if scenario_id not in SCENARIOS:
        raise ValidationError("scenario", f"unknown id {scenario_id!r}; choose from {', '.join(SCENARIOS)}")
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(SCENARIO_OVERRIDES))
    require(not unknown, "overrides", f"cannot override {', '.join(unknown)}")
    scenario = SCENARIOS[scenario_id]
    omega = float(overrides.get("omega", 1.0))
    params = ModelParams(
        omega=omega,
        omega0=scenario.omega0 * omega,
        g=scenario.g * omega,
        n_max=int(overrides.get("n_max", 256)),
    )
    t_max = float(overrides.get("t_max", scenario.t_max))
    n_steps = int(overrides.get("n_steps", scenario.n_steps))
    require(t_max > 0, "t_max", f"must be positive, got {t_max}")
    require(n_steps >= 2, "n_steps", f"must be at least 2, got {n_steps}")
    grid = overrides.get("grid", DEFAULT_GRID)
    if not isinstance(grid, str):
        grid = ",".join(str(v) for v in grid)
    return ScenarioRun(scenario, params, t_max, n_steps, parse_grid(grid), int(overrides.get("n_jobs", 1)))


def run_scenario(scenario_id: str, overrides: Optional[Mapping[str, object]] = None, out_dir: str = "results") -> List[Path]:
    run = prepare_scenario(scenario_id, overrides)
    logger.info(f"Scenario {scenario_id}: {run.scenario.description}")
    written = []
    for suffix, frame, extra in run.scenario.runner(run):
        name = f"{scenario_id}_{suffix}.csv" if suffix else f"{scenario_id}.csv"
        metadata = {**run.metadata(), "file": name, **extra}
        written.append(write_csv(frame, Path(out_dir) / name, metadata))
    logger.info(f"Scenario {scenario_id} finished: {len(written)} file(s)")
    return written


def replay(path, out: str) -> List[Path]:
    """
    Regenerate a file from its header. Scenario files are rerun into the
    directory `out`; custom-run files are rerun with `out` as their out_path.
    """
    metadata = read_metadata(path)
    if "scenario" in metadata:
        overrides = {
            "n_max": int(metadata["n_max"]),
            "t_max": float(metadata["t_max"]),
            "n_steps": int(metadata["n_steps"]),
            "grid": metadata["grid"],
            "omega": float(metadata["omega"]),
        }
        return run_scenario(metadata["scenario"], overrides, out)
    return run_custom(config_from_metadata(metadata, out))
