"""Scenario documents: load, validate, emit and the shipped presets.

A scenario is a YAML document with the sections system, initial_state,
time, solver, comparisons and outputs. Complex matrices are written as
{re: [[...]], im: [[...]]}.
"""
import logging
import os
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from src.algebra.basis import gellmann_basis, pauli_bloch_basis, pauli_orthonormal_basis
from src.algebra.cartan import CartanSplit, qutrit_basis, two_qubit_basis
from src.decoupler.stationary import SolverOptions
from src.utils.errors import ConfigError, OutputError
from src.vectorizer.presets import preset_system
from src.vectorizer.states import CoherenceVector, coherence_to_rho, rho_to_coherence
from src.vectorizer.system import OpenSystemSpec

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NOISE_DECOUPLING_OUTPUT_DIR"

PRESETS = ("one_qubit", "qutrit_v", "two_qubit_mixed", "two_qubit_bell")

PRESET_PARAMS = {
    "one_qubit": {"convention", "omega", "gamma", "channel"},
    "qutrit_v": {"convention", "energies", "gamma", "gamma1", "gamma2"},
    "two_qubit": {"convention", "omega", "omega1", "omega2", "gamma", "gamma1", "gamma2"},
}

INLINE_BASES = {
    "gellmann": None,
    "pauli_bloch": pauli_bloch_basis,
    "pauli_orthonormal": pauli_orthonormal_basis,
    "qutrit_v": qutrit_basis,
    "two_qubit": two_qubit_basis,
}


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def _from_dict(cls, section, data):
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    return cls(**data)


def decode_matrix(entry, name="matrix"):
    """{re: [[...]], im: [[...]]} -> complex ndarray; im may be omitted."""
    if not isinstance(entry, dict) or "re" not in entry:
        raise ConfigError(f"{name} must be a mapping with 're' and optional 'im' arrays")
    re = np.asarray(entry["re"], dtype=float)
    im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ConfigError(f"{name}: real part {re.shape} and imaginary part {im.shape} differ")
    return re + 1j * im


def encode_matrix(mat):
    mat = np.asarray(mat, dtype=complex)
    return {"re": np.real(mat).tolist(), "im": np.imag(mat).tolist()}


@dataclass
class SystemConfig:
    preset: str = None  # one_qubit | qutrit_v | two_qubit
    params: dict = field(default_factory=dict)
    spec: dict = None  # inline: dim, H0, controls, lindblads
    basis: str = None  # inline only, see INLINE_BASES
    p_indices: list = None  # inline only

    def __post_init__(self):
        self.params = dict(self.params or {})
        if (self.preset is None) == (self.spec is None):
            raise ConfigError("system needs exactly one of 'preset' or 'spec'")
        if self.preset is not None:
            if self.preset not in PRESET_PARAMS:
                raise ConfigError(f"unknown system preset {self.preset!r}; choose one of {sorted(PRESET_PARAMS)}")
            unknown = set(self.params or {}) - PRESET_PARAMS[self.preset]
            if unknown:
                raise ConfigError(f"unknown parameters for {self.preset}: {sorted(unknown)}")
        if self.spec is not None and (self.basis not in INLINE_BASES or not self.p_indices):
            raise ConfigError(
                f"inline systems need 'basis' (one of {sorted(INLINE_BASES)}) and 'p_indices'"
            )

    def build(self):
        """(OpenSystemSpec, basis, split)."""
        if self.preset is not None:
            return preset_system(self.preset, self.params)
        spec = self.spec
        try:
            dim = int(spec["dim"])
            system = OpenSystemSpec(
                dim=dim,
                H0=decode_matrix(spec["H0"], "H0"),
                controls=tuple(decode_matrix(c, f"controls[{i}]") for i, c in enumerate(spec.get("controls", []))),
                lindblads=tuple(
                    (decode_matrix(entry["L"], f"lindblads[{i}]"), float(entry["rate"]))
                    for i, entry in enumerate(spec.get("lindblads", []))
                ),
            )
        except KeyError as exc:
            raise ConfigError(f"inline system spec is missing {exc}") from exc
        factory = INLINE_BASES[self.basis]
        basis = gellmann_basis(dim) if factory is None else factory()
        p = [int(i) for i in self.p_indices]
        eps = [i for i in range(basis.size) if i not in p]
        return system, basis, CartanSplit(basis, tuple(p), tuple(eps))

    def to_dict(self):
        return _drop_none({
            "preset": self.preset,
            "params": dict(self.params) if self.preset is not None else None,
            "spec": self.spec,
            "basis": self.basis,
            "p_indices": self.p_indices,
        })


@dataclass
class InitialStateConfig:
    coherence: list = None
    convention: str = None
    density: dict = None
    ket: dict = None

    def __post_init__(self):
        given = [k for k in ("coherence", "density", "ket") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ConfigError(f"initial_state needs exactly one of coherence, density, ket; got {given}")

    def density_matrix(self, basis):
        if self.density is not None:
            return decode_matrix(self.density, "initial_state.density")
        if self.ket is not None:
            psi = decode_matrix(self.ket, "initial_state.ket").ravel()
            norm = np.linalg.norm(psi)
            if norm == 0:
                raise ConfigError("initial_state.ket is the zero vector")
            psi = psi / norm
            return np.outer(psi, psi.conj())
        return coherence_to_rho(self.coherence_vector(basis), basis)

    def coherence_vector(self, basis):
        if self.coherence is not None:
            convention = self.convention or basis.convention
            if convention != basis.convention:
                raise ConfigError(
                    f"initial_state is given in the {convention} convention, system basis is {basis.convention}"
                )
            return CoherenceVector(values=np.asarray(self.coherence, dtype=float), convention=convention)
        return rho_to_coherence(self.density_matrix(basis), basis)

    def to_dict(self):
        return _drop_none({
            "coherence": self.coherence,
            "convention": self.convention,
            "density": self.density,
            "ket": self.ket,
        })


@dataclass
class TimeConfig:
    t0: float = 0.0
    t_end: float = 10.0
    n_points: int = 201  # output grid
    step: float = 0.001  # RK4 substep
    method: str = "rk4"  # rk4 | rk45
    rtol: float = 1e-9
    atol: float = 1e-12

    def __post_init__(self):
        for name in ("t0", "t_end", "step", "rtol", "atol"):
            setattr(self, name, float(getattr(self, name)))
        self.n_points = int(self.n_points)
        if self.n_points < 2 or not self.t_end > self.t0:
            raise ConfigError(
                f"time grid is empty: t0={self.t0}, t_end={self.t_end}, n_points={self.n_points}"
            )
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if self.method not in ("rk4", "rk45"):
            raise ConfigError(f"unknown integration method {self.method!r}")

    @property
    def grid(self):
        return np.linspace(self.t0, self.t_end, self.n_points)

    def to_dict(self):
        return {name.name: getattr(self, name.name) for name in fields(self)}


@dataclass
class ComparisonsConfig:
    uncontrolled: bool = True
    target: bool = True
    stationary: bool = False
    lidar: bool = False
    oracle: bool = False

    def to_dict(self):
        return {name.name: bool(getattr(self, name.name)) for name in fields(self)}


@dataclass
class OutputsConfig:
    directory: str = "results"
    prefix: str = "run"
    coherence_pairs: dict = field(default_factory=dict)  # panel name -> basis labels
    bound_check: bool = True

    def to_dict(self):
        return {
            "directory": self.directory,
            "prefix": self.prefix,
            "coherence_pairs": {k: list(v) for k, v in self.coherence_pairs.items()},
            "bound_check": bool(self.bound_check),
        }


@dataclass
class ScenarioConfig:
    name: str
    system: SystemConfig
    initial_state: InitialStateConfig
    time: TimeConfig = field(default_factory=TimeConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)
    comparisons: ComparisonsConfig = field(default_factory=ComparisonsConfig)
    outputs: OutputsConfig = field(default_factory=OutputsConfig)

    @property
    def output_dir(self):
        return os.environ.get(OUTPUT_DIR_ENV) or self.outputs.directory

    def to_dict(self):
        return {
            "name": self.name,
            "system": self.system.to_dict(),
            "initial_state": self.initial_state.to_dict(),
            "time": self.time.to_dict(),
            "solver": _drop_none(self.solver.to_dict()),
            "comparisons": self.comparisons.to_dict(),
            "outputs": self.outputs.to_dict(),
        }


SECTIONS = ("name", "system", "initial_state", "time", "solver", "comparisons", "outputs")


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("scenario document must be a mapping")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown scenario sections: {sorted(unknown)}")
    for required in ("system", "initial_state"):
        if required not in data:
            raise ConfigError(f"scenario is missing the {required!r} section")
    return ScenarioConfig(
        name=str(data.get("name", "scenario")),
        system=_from_dict(SystemConfig, "system", data["system"]),
        initial_state=_from_dict(InitialStateConfig, "initial_state", data["initial_state"]),
        time=_from_dict(TimeConfig, "time", data.get("time")),
        solver=SolverOptions.from_dict(data.get("solver")),
        comparisons=_from_dict(ComparisonsConfig, "comparisons", data.get("comparisons")),
        outputs=_from_dict(OutputsConfig, "outputs", data.get("outputs")),
    )


def parse_config(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return config_from_dict(data)


class _NoAliasDumper(yaml.SafeDumper):
    def ignore_aliases(self, data):
        return True


def emit_config(config):
    return yaml.dump(config.to_dict(), Dumper=_NoAliasDumper, sort_keys=False)


def load_config(config_path="configs/default_config.yaml"):
    try:
        with open(config_path, 'r') as f:
            text = f.read()
    except OSError as exc:
        raise OutputError(config_path, exc) from exc
    config = parse_config(text)
    logger.debug("loaded scenario %s from %s", config.name, config_path)
    return config


def save_config(config, path):
    try:
        with open(path, 'w') as f:
            f.write(emit_config(config))
    except OSError as exc:
        raise OutputError(path, exc) from exc


def preset(name, **params):
    """The shipped scenarios, with the parameters of the worked examples.

    Keyword arguments override the system parameters of the scenario.
    """
    half_root2 = float(np.sqrt(2.0) / 2.0)
    if name == "one_qubit":
        return ScenarioConfig(
            name=name,
            system=SystemConfig(
                preset="one_qubit",
                params={"convention": "pauli-bloch", "omega": 3.0, "gamma": 1.0,
                        "channel": "amplitude_damping", **params},
            ),
            initial_state=InitialStateConfig(
                coherence=[half_root2, 0.0, half_root2], convention="pauli-bloch"
            ),
            solver=SolverOptions(method="analytic_one_qubit"),
            comparisons=ComparisonsConfig(stationary=True, lidar=True, oracle=True),
            outputs=OutputsConfig(
                directory="results/one_qubit", prefix="one_qubit", coherence_pairs={"C": ["x", "y"]}
            ),
        )
    if name == "qutrit_v":
        return ScenarioConfig(
            name=name,
            system=SystemConfig(preset="qutrit_v", params={"gamma": 1.0, **params}),
            initial_state=InitialStateConfig(density={
                "re": [[0.5, 0.25, 0.25], [0.25, 0.25, 0.0], [0.25, 0.0, 0.25]],
                "im": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            }),
            comparisons=ComparisonsConfig(stationary=True, oracle=True),
            outputs=OutputsConfig(
                directory="results/qutrit_v", prefix="qutrit_v",
                coherence_pairs={"C01": ["4", "5"], "C02": ["6", "7"]},
            ),
        )
    if name in ("two_qubit_mixed", "two_qubit_bell"):
        params = {"omega": 1.0, "gamma": 1.0, **params}
        zeros = [[0.0] * 4 for _ in range(4)]
        if name == "two_qubit_mixed":
            # I/8 + |phi0><phi0|/2
            density = {
                "re": [[0.375, 0.0, 0.0, 0.25], [0.0, 0.125, 0.0, 0.0],
                       [0.0, 0.0, 0.125, 0.0], [0.25, 0.0, 0.0, 0.375]],
                "im": zeros,
            }
            # the zz channel is a free direction of the stationary equations; seed it at gamma/4
            solver = SolverOptions(initial_xi=[0.0] * 8 + [float(params["gamma"]) / 4.0])
        else:
            density = {
                "re": [[0.5, 0.0, 0.0, 0.5], [0.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, 0.0, 0.0], [0.5, 0.0, 0.0, 0.5]],
                "im": zeros,
            }
            solver = SolverOptions(allow_least_squares=True)
        return ScenarioConfig(
            name=name,
            system=SystemConfig(preset="two_qubit", params=params),
            initial_state=InitialStateConfig(density=density),
            solver=solver,
            comparisons=ComparisonsConfig(stationary=True, oracle=True),
            outputs=OutputsConfig(directory=f"results/{name}", prefix=name),
        )
    raise ConfigError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
