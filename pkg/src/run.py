"""Command line runner: check, solve and run scenarios, or emit presets.

    python -m src.run check configs/default_config.yaml
    python -m src.run solve preset:qutrit_v
    python -m src.run run configs/two_qubit_mixed.yaml
    python -m src.run preset two_qubit_bell --emit configs/two_qubit_bell.yaml
"""
import argparse
import json
import logging
import os
import sys

import numpy as np
from tqdm import tqdm

from src.algebra.basis import PAULI_BLOCH
from src.algebra.cartan import verify_cartan
from src.config import PRESETS, emit_config, load_config, preset, save_config
from src.decoupler.control import control_modes, synthesize
from src.decoupler.stationary import EXACT
from src.dynamics.lidar import lidar_controls
from src.dynamics.metrics import (
    coherence_metrics,
    convergence_bound_check,
    entanglement_series,
    tracking_error,
)
from src.dynamics.simulate import integrate, integrate_density_oracle, stationary_series
from src.plot_data import controls_frame, emit_plot_data, trajectory_frame, write_csv, write_plot_stub
from src.utils.errors import AssumptionError, ConfigError, DecouplingError, OutputError
from src.vectorizer.blocks import block_split, check_control_alignment
from src.vectorizer.system import check_assumptions, dissipation_rate, vectorize

logger = logging.getLogger(__name__)

PRESET_PREFIX = "preset:"


def _native(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def write_json(data, path):
    try:
        with open(path, 'w') as f:
            json.dump(data, f, indent=4, default=_native)
            f.write("\n")
    except OSError as exc:
        raise OutputError(path, exc) from exc
    return path


def resolve_config(source):
    if source.startswith(PRESET_PREFIX):
        return preset(source[len(PRESET_PREFIX):])
    return load_config(source)


def prepare_output_dir(config):
    directory = config.output_dir
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise OutputError(directory, exc) from exc
    return directory


class Scenario:
    """A config resolved into its system, vectorized form and initial state."""

    def __init__(self, config):
        self.config = config
        self.spec, self.basis, self.split = config.system.build()
        self.vs = vectorize(self.spec, self.basis, self.split)
        self.m0 = config.initial_state.coherence_vector(self.basis)
        if len(self.m0) != self.basis.size:
            raise ConfigError(
                f"initial state has {len(self.m0)} coordinates, system has {self.basis.size}"
            )
        if not self.m0.satisfies_purity(self.basis):
            raise ConfigError("initial coherence vector violates the purity bound")
        self.rho0 = config.initial_state.density_matrix(self.basis)

    @property
    def labels(self):
        return self.basis.labels

    @property
    def p_labels(self):
        return [self.labels[i] for i in self.split.p_indices]

    def label_indices(self, labels):
        try:
            return [self.labels.index(str(label)) for label in labels]
        except ValueError as exc:
            raise ConfigError(f"unknown coordinate label in {labels}; labels are {self.labels}") from exc


def run_checks(scenario):
    vs = scenario.vs
    assumptions = check_assumptions(vs)
    cartan = verify_cartan(scenario.split)
    controls = {"ok": True}
    try:
        block_split(vs)
        controls["scale"] = check_control_alignment(vs)
    except AssumptionError as exc:
        controls = {"ok": False, "message": str(exc), "details": exc.details}
    report = {
        "scenario": scenario.config.name,
        "dimension": scenario.basis.dim,
        "convention": scenario.basis.convention,
        "assumptions": assumptions.to_dict(),
        "d_min": dissipation_rate(vs),
        "cartan": cartan.to_dict(),
        "controls": controls,
    }
    report["ok"] = assumptions.ok and cartan.ok and controls["ok"]
    return report


def solution_report(scenario, synthesis):
    report = {
        "scenario": scenario.config.name,
        "solver": synthesis.solution.to_dict(),
        "control_labels": scenario.p_labels,
        "modes": [mode.to_dict() for mode in control_modes(synthesis.law)],
        "d_min": dissipation_rate(scenario.vs),
    }
    if synthesis.analytic is not None:
        report["analytic"] = {
            "amplitude": synthesis.analytic.amplitude,
            "phase": synthesis.analytic.phase,
            "coherence_squared": synthesis.analytic.coherence_squared,
            "degenerate": synthesis.analytic.degenerate,
        }
    return report


def _lidar_applicable(vs):
    if vs.basis.dim != 2 or vs.split.p_indices != (0, 1):
        return False
    gamma = -float(vs.D[2, 2])
    return bool(np.abs(vs.D - np.diag([-gamma / 2, -gamma / 2, -gamma])).max() <= 1e-10)


def run_scenario(config, quiet=False):
    """Synthesize, integrate every requested comparison and write all outputs."""
    say = (lambda *args: None) if quiet else print
    scenario = Scenario(config)
    directory = prepare_output_dir(config)
    prefix = config.outputs.prefix
    options = config.solver
    time = config.time
    grid = time.grid
    vs = scenario.vs
    p = list(scenario.split.p_indices)

    checks = run_checks(scenario)
    write_json(checks, os.path.join(directory, f"{prefix}_checks.json"))
    synthesis = synthesize(vs, scenario.m0, options, t0=time.t0)
    solution = synthesis.solution
    say(f"Stationary solution: {solution.status} (residual {solution.residual_norm:.3e})")
    write_json(solution_report(scenario, synthesis), os.path.join(directory, f"{prefix}_solution.json"))

    def integrate_kind(kind, u=None):
        return integrate(vs, scenario.m0, grid, u=u, kind=kind, method=time.method,
                         step=time.step, rtol=time.rtol, atol=time.atol)

    jobs = [("controlled", lambda: integrate_kind("controlled", synthesis.law)),
            ("target", lambda: integrate_kind("target"))]
    if config.comparisons.uncontrolled:
        jobs.append(("uncontrolled", lambda: integrate_kind("uncontrolled")))
    if config.comparisons.stationary or config.outputs.bound_check:
        jobs.append(("stationary", lambda: stationary_series(synthesis, grid)))
    if config.comparisons.oracle:
        jobs.append(("oracle", lambda: integrate_density_oracle(
            scenario.spec, synthesis.law, scenario.rho0, grid, step=time.step).to_coherence(scenario.basis)))

    trajectories = {}
    for name, job in tqdm(jobs, desc="integrating", disable=quiet):
        trajectories[name] = job()

    written = []
    report = {
        "scenario": config.name,
        "status": solution.status,
        "residual_norm": solution.residual_norm,
    }
    shown = [k for k in ("controlled", "uncontrolled", "target", "stationary", "oracle")
             if k in trajectories and (k == "controlled" or getattr(config.comparisons, k, False))]
    for kind in shown:
        path = os.path.join(directory, f"{prefix}_{kind}.csv")
        write_csv(trajectory_frame(trajectories[kind], scenario.labels), path)

    for index in p:
        panel = f"m_{scenario.labels[index]}"
        _, columns = emit_plot_data(
            {k: trajectories[k] for k in shown if k != "oracle"}, None, panel, directory, prefix,
            coordinate=index,
        )
        written.append((f"{prefix}_{panel}.csv", columns))

    frame = controls_frame(grid, synthesis.controls(grid), scenario.p_labels)
    write_csv(frame, os.path.join(directory, f"{prefix}_controls.csv"))
    written.append((f"{prefix}_controls.csv", list(frame.columns)))

    target = trajectories["target"]
    errors = {k: tracking_error(trajectories[k], target, p) for k in ("controlled", "uncontrolled")
              if k in trajectories}
    _, columns = emit_plot_data(None, errors, "tracking_error", directory, prefix, times=grid)
    written.append((f"{prefix}_tracking_error.csv", columns))
    report["final_tracking_error"] = {k: float(v[-1]) for k, v in errors.items()}

    pairs = {name: scenario.label_indices(labels) for name, labels in config.outputs.coherence_pairs.items()}
    if pairs:
        series = {}
        for kind in ("controlled", "uncontrolled", "target"):
            if kind in trajectories:
                for name, values in coherence_metrics(trajectories[kind], pairs).items():
                    series[f"{name}_{kind}"] = values
        _, columns = emit_plot_data(None, series, "coherence", directory, prefix, times=grid)
        written.append((f"{prefix}_coherence.csv", columns))

    if scenario.basis.dim == 4:
        series = {k: entanglement_series(trajectories[k], scenario.basis)
                  for k in ("controlled", "uncontrolled", "target") if k in trajectories}
        _, columns = emit_plot_data(None, series, "entanglement", directory, prefix, times=grid)
        written.append((f"{prefix}_entanglement.csv", columns))
        report["final_entanglement"] = {k: float(v[-1]) for k, v in series.items()}

    if "oracle" in trajectories:
        gap = float(np.abs(trajectories["oracle"].states - trajectories["controlled"].states).max())
        report["oracle_gap"] = gap
        say(f"Oracle agreement: {gap:.3e}")

    if config.outputs.bound_check and solution.status == EXACT:
        bound = convergence_bound_check(trajectories["controlled"], trajectories["stationary"],
                                        dissipation_rate(vs))
        report["bound"] = bound.to_dict()
        if not bound.holds:
            logger.warning("contraction bound violated at t=%g", bound.worst_time)

    if config.comparisons.lidar:
        if _lidar_applicable(vs):
            report["lidar"] = _run_lidar(scenario, synthesis, grid, directory, prefix, written)
            say(f"Lidar controls: {report['lidar']['status']}")
        else:
            say("Lidar comparison skipped: needs one qubit under amplitude damping")

    stub = write_plot_stub(os.path.join(directory, f"{prefix}_plots.txt"), config.name, written)
    write_json(report, os.path.join(directory, f"{prefix}_report.json"))
    say(f"Final tracking error: {report['final_tracking_error']}")
    say(f"Results saved in: {directory}")
    logger.debug("plot stub at %s", stub)
    return report


def _run_lidar(scenario, synthesis, grid, directory, prefix, written):
    vs = scenario.vs
    scale = 1.0 if scenario.basis.convention == PAULI_BLOCH else np.sqrt(2.0)
    m0 = np.asarray(scenario.m0.values) * scale
    omega = float(vs.O0[1, 0])
    gamma = -float(vs.D[2, 2])
    run = lidar_controls(omega, gamma, m0, grid)
    times = run.trajectory.times
    ours = synthesis.controls(times)

    frame = trajectory_frame(run.trajectory, ["x", "y", "z"])
    frame["u_x"] = run.controls[:, 0]
    frame["u_y"] = run.controls[:, 1]
    write_csv(frame, os.path.join(directory, f"{prefix}_lidar.csv"))

    _, columns = emit_plot_data(
        None,
        {"lidar_u_x": run.controls[:, 0], "lidar_u_y": run.controls[:, 1],
         "u_x": ours[:, 0], "u_y": ours[:, 1]},
        "lidar_controls", directory, prefix, times=times,
    )
    written.append((f"{prefix}_lidar_controls.csv", columns))
    gap = np.linalg.norm(run.controls - ours, axis=1)
    _, columns = emit_plot_data(None, {"gap": gap}, "lidar_gap", directory, prefix, times=times)
    written.append((f"{prefix}_lidar_gap.csv", columns))
    return {
        "status": run.status,
        "divergence_time": run.divergence_time,
        "predicted_convergent": run.predicted_convergent,
        "final_gap": float(gap[-1]),
    }


def command_check(config, quiet=False):
    scenario = Scenario(config)
    directory = prepare_output_dir(config)
    report = run_checks(scenario)
    write_json(report, os.path.join(directory, f"{config.outputs.prefix}_checks.json"))
    if not quiet:
        failed = [name for name in ("H1", "H2", "H3") if not report["assumptions"][name]]
        print(f"Assumptions: {'all hold' if not failed else 'violated ' + ', '.join(failed)}")
        print(f"Cartan decomposition: {'ok' if report['cartan']['ok'] else 'violated'}")
        print(f"d_min = {report['d_min']:.6g}")
    if not report["ok"]:
        raise AssumptionError("scenario does not satisfy the decoupling assumptions",
                              details=report["assumptions"]["details"])
    return report


def command_solve(config, quiet=False):
    scenario = Scenario(config)
    directory = prepare_output_dir(config)
    write_json(run_checks(scenario), os.path.join(directory, f"{config.outputs.prefix}_checks.json"))
    synthesis = synthesize(scenario.vs, scenario.m0, config.solver, t0=config.time.t0)
    report = solution_report(scenario, synthesis)
    write_json(report, os.path.join(directory, f"{config.outputs.prefix}_solution.json"))
    if not quiet:
        print(f"Stationary solution: {synthesis.solution.status} "
              f"(residual {synthesis.solution.residual_norm:.3e})")
        for label, mode in zip(scenario.p_labels, report["modes"]):
            parts = [f"{c['amplitude']:.6g} cos({c['frequency']:.6g} t + {c['phase']:.4f})"
                     for c in mode["components"]]
            print(f"  u_{label} = {mode['offset']:.6g}" + "".join(" + " + part for part in parts))
    return report


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--quiet', action='store_true', help='No status lines or progress bars')
    common.add_argument('--verbose', action='store_true', help='Log at DEBUG level')

    parser = argparse.ArgumentParser(prog="src.run", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (("check", "Check the decoupling assumptions and the Cartan split"),
                       ("solve", "Solve the stationary equations and report the controls"),
                       ("run", "Synthesize, integrate and write all outputs")):
        sub = commands.add_parser(name, help=text, parents=[common])
        sub.add_argument('config', type=str, help='Path to a scenario file or preset:<name>')
    sub = commands.add_parser("preset", help="Print or save a shipped scenario", parents=[common])
    sub.add_argument('name', type=str, choices=PRESETS)
    sub.add_argument('--emit', type=str, default=None, help='Write the scenario to this path')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "preset":
            config = preset(args.name)
            if args.emit:
                save_config(config, args.emit)
                if not args.quiet:
                    print(f"Scenario {args.name} saved to {args.emit}")
            else:
                sys.stdout.write(emit_config(config))
            return 0
        config = resolve_config(args.config)
        if args.command == "check":
            command_check(config, args.quiet)
        elif args.command == "solve":
            command_solve(config, args.quiet)
        else:
            run_scenario(config, args.quiet)
    except DecouplingError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": OutputError.category, "message": str(exc)}), file=sys.stderr)
        return OutputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
