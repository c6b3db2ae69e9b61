import argparse
import logging
import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from errors import EXIT_OK, ValidationError, exit_code_for, remediation_hint
from initial_states import describe_components, parse_initial_spec
from model import ModelParams, build_two_qubit_graph
from reporting import write_csv
from scenarios import OUTPUTS, SCENARIOS, RunConfig, parse_grid, run_custom, run_scenario
from settings import SOFTWARE_VERSION, load_settings

logger = logging.getLogger("rabi")

COMMAND_OUTPUTS = {
    "evolve": ("revival", "trajectory"),
    "spectrum": ("spectrum",),
    "wigner": ("wigner",),
    "detunings": ("detunings",),
}


def _common_flags(settings) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--g", type=float, default=2.0, help="coupling strength (units of omega)")
    parent.add_argument("--omega", type=float, default=1.0, help="mode frequency")
    parent.add_argument("--omega0", type=float, default=0.0, help="qubit frequency")
    parent.add_argument("--nmax", type=int, default=settings.n_max, help="Fock truncation per chain")
    parent.add_argument("--tmax", type=float, default=None, help="final time in units of 2pi/omega")
    parent.add_argument("--steps", type=int, default=None, help="number of time samples")
    parent.add_argument("--initial", default="+,0", help='initial state, e.g. "+,0" or "+,0:0.7071,0;-,0:0.7071,0"')
    parent.add_argument("--out", default=None, help="output file (scenario: output directory)")
    parent.add_argument("--order", type=int, choices=(0, 1, 2), default=None, help="perturbative order to compare against")
    parent.add_argument("--grid", default=None, help="Wigner grid as min,max,points, e.g. --grid -6.5,6.5,201")
    parent.add_argument("--jobs", type=int, default=settings.n_jobs, help="parallel workers for Wigner grids")
    return parent


def build_parser(settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabi-dsc",
        description="Quantum Rabi model at deep strong coupling: parity chains, revivals, detunings and Wigner functions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {SOFTWARE_VERSION}")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level (default from RABI_LOG_LEVEL)")
    common = _common_flags(settings)
    commands = parser.add_subparsers(dest="command", required=True)

    scenario = commands.add_parser("scenario", parents=[common], help="reproduce one figure's data")
    scenario.add_argument("scenario_id", choices=sorted(SCENARIOS))

    evolve = commands.add_parser("evolve", parents=[common], help="return probability and trajectory per chain")
    evolve.add_argument("--outputs", default=",".join(COMMAND_OUTPUTS["evolve"]), help=f"comma list from {', '.join(OUTPUTS)}")
    commands.add_parser("spectrum", parents=[common], help="chain eigenvalues and initial-state weights")
    commands.add_parser("wigner", parents=[common], help="Wigner function of the state at --tmax")
    commands.add_parser("detunings", parents=[common], help="weighted detuning table")

    graph = commands.add_parser("graph2q", parents=[common], help="two-qubit parity chain graph")
    graph.add_argument("--levels", type=int, default=6, help="photon levels in the graph")
    return parser


def _run_config(args, settings) -> RunConfig:
    outputs = COMMAND_OUTPUTS.get(args.command)
    if args.command == "evolve":
        outputs = tuple(part.strip() for part in args.outputs.split(",") if part.strip())
    model = ModelParams(omega=args.omega, omega0=args.omega0, g=args.g, n_max=args.nmax)
    initial = parse_initial_spec(args.initial)
    logger.info(f"Initial state: {describe_components(initial)}")
    default_tmax = 1.0 if args.command == "wigner" else 3.0
    return RunConfig(
        model=model,
        initial=tuple(initial),
        t_max=args.tmax if args.tmax is not None else default_tmax,
        n_steps=args.steps if args.steps is not None else 2001,
        outputs=outputs,
        out_path=args.out or str(Path(settings.output_dir) / f"{args.command}.csv"),
        order=args.order,
        grid=parse_grid(args.grid) if args.grid else (-6.5, 6.5, 201),
        n_jobs=args.jobs,
    )


def _scenario_overrides(args) -> dict:
    if args.omega <= 0:
        raise ValidationError("omega", f"must be positive, got {args.omega}")
    overrides = {"n_max": args.nmax, "n_jobs": args.jobs, "omega": args.omega}
    if args.tmax is not None:
        overrides["t_max"] = args.tmax
    if args.steps is not None:
        overrides["n_steps"] = args.steps
    if args.grid:
        overrides["grid"] = args.grid
    return overrides


def dispatch(args, settings) -> list:
    if args.command == "scenario":
        return run_scenario(args.scenario_id, _scenario_overrides(args), args.out or settings.output_dir)
    if args.command == "graph2q":
        graph = build_two_qubit_graph(args.levels)
        metadata = {
            "software_version": SOFTWARE_VERSION,
            "command": "graph2q",
            "n_levels": args.levels,
            "components": len(graph.components()),
        }
        return [write_csv(graph.to_frame(), args.out or Path(settings.output_dir) / "graph2q.csv", metadata)]
    return run_custom(_run_config(args, settings))


def attach_grid_values(argv: list) -> list:
    """Rewrite `--grid -3,3,7` as `--grid=-3,3,7`; argparse reads a leading minus as a flag."""
    joined = []
    pending = False
    for token in argv:
        if pending and not token.startswith("--"):
            joined[-1] = f"--grid={token}"
        else:
            joined.append(token)
        pending = token == "--grid"
    return joined


def main(argv=None) -> int:
    settings = load_settings()
    parser = build_parser(settings)
    args = parser.parse_args(attach_grid_values(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO), format="%(levelname)s %(name)s: %(message)s")

    try:
        written = dispatch(args, settings)
    except Exception as exc:
        logger.error(f"{args.command} failed: {exc}")
        hint = remediation_hint(exc)
        if hint:
            print(f"hint: {hint}", file=sys.stderr)
        return exit_code_for(exc)

    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
