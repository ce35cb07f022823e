"""Experiment configuration and its flat ``key = value`` text form.

The text form is INI-style: one ``[section]`` per nested dataclass, every
field written explicitly, floats written with ``repr`` so parsing the output
of :meth:`ExperimentConfig.to_text` gives back an equal config::

    [experiment]
    scenario = recursive
    seed = 7
    n_qubits = 12
    targets = 5
    levels = 4

    [noise]
    delta_t = 0.2
    delta_0 = 0.2
    law = uniform
    seed = 7

Missing keys take their defaults; ``[noise] seed`` defaults to the
experiment seed.  ``targets`` is either an explicit comma list or empty, in
which case ``target_count`` indices are drawn from ``target_seed``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from ..errors import ConfigError
from ..selective import NoiseSpec
from ..statevector import TargetSet

SCENARIOS = (
    "grover_baseline",
    "phase_mismatch",
    "iterative",
    "recursive",
    "hamiltonian",
    "nondiagonal",
    "workspace",
    "per_target_matching",
)
UNITARY_KINDS = ("walsh_hadamard", "qubit_product", "dense_walsh", "dense_random")
SWEEP_PARAMS = ("delta_t", "delta_0", "phi", "varphi", "n_qubits", "levels", "s_alpha", "noise_seed")
MAX_QUBITS = 22
MAX_JOINT_QUBITS = 20


@dataclass(frozen=True)
class UnitarySpec:
    kind: str = "walsh_hadamard"
    seed: int = 0
    spread: float = 0.0


@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str = "fg"
    s: float = 0.0
    s_alpha: float | None = None
    t_max: float | None = None
    samples: int = 2001


@dataclass(frozen=True)
class WorkspaceConfig:
    ancilla_qubits: int = 1
    a_op: str = "neg_identity"
    b_op: str = "identity"
    mode: str = "iterative"


@dataclass(frozen=True)
class NondiagonalConfig:
    ep_distance: float = 0.0
    eq_distance: float = 0.0
    basis_seed: int = 0
    mode: str = "iterative"


@dataclass(frozen=True)
class SweepSpec:
    param: str | None = None
    values: tuple[float, ...] = ()
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values or ()))


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seed: int
    n_qubits: int = 10
    targets: tuple[int, ...] | None = None
    target_count: int = 1
    target_seed: int = 0
    n_iters: int | str = "auto"
    phi: float = math.pi
    phi_list: tuple[float, ...] | None = None
    varphi: float = math.pi
    levels: int = 0
    budget: int | None = None
    output: str | None = None
    exploratory: bool = False
    unitary: UnitarySpec = field(default_factory=UnitarySpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    hamiltonian: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    workspace: WorkspaceConfig = field(default_factory=WorkspaceConfig)
    nondiagonal: NondiagonalConfig = field(default_factory=NondiagonalConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def target_set(self) -> TargetSet:
        if self.targets:
            return TargetSet(self.dim, self.targets)
        rng = np.random.default_rng(self.target_seed)
        picks = rng.choice(self.dim, size=self.target_count, replace=False)
        return TargetSet(self.dim, tuple(int(i) for i in picks))

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.scenario == "per_target_matching" and not self.exploratory:
            raise ConfigError("exploratory", "per_target_matching is exploratory; pass --exploratory")
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigError("n_qubits", f"must lie in [1, {MAX_QUBITS}]")
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if self.targets:
            if any(not 0 <= t < self.dim for t in self.targets):
                raise ConfigError("targets", f"indices must lie in [0, {self.dim})")
            if len(set(self.targets)) != len(self.targets) or len(self.targets) >= self.dim:
                raise ConfigError("targets", "need distinct indices with 1 <= M < N")
        elif not 1 <= self.target_count < self.dim:
            raise ConfigError("target_count", "need 1 <= M < N")
        if self.n_iters != "auto" and (not isinstance(self.n_iters, int) or self.n_iters < 0):
            raise ConfigError("n_iters", "must be 'auto' or a non-negative integer")
        if self.levels < 0:
            raise ConfigError("levels", "must be non-negative")
        for name in ("delta_t", "delta_0"):
            d = getattr(self.noise, name)
            if d >= math.pi / 2:
                raise ConfigError(
                    f"noise.{name}",
                    f"{d} >= π/2; the recursive analysis assumes small perturbations of the inversions",
                )
        if self.scenario in ("iterative", "workspace", "nondiagonal"):
            if math.isclose(math.remainder(self.varphi, 2 * math.pi), 0.0, abs_tol=1e-15):
                raise ConfigError("varphi", "must not be a multiple of 2π")
        if self.unitary.kind not in UNITARY_KINDS:
            raise ConfigError("unitary.kind", f"unknown kind {self.unitary.kind!r}")
        if self.hamiltonian.kind not in ("fg", "fg_perturbed", "new"):
            raise ConfigError("hamiltonian.kind", f"unknown kind {self.hamiltonian.kind!r}")
        if self.hamiltonian.samples < 2:
            raise ConfigError("hamiltonian.samples", "must be >= 2")
        ws = self.workspace
        if self.scenario == "workspace":
            if not 1 <= ws.ancilla_qubits <= 4:
                raise ConfigError("workspace.ancilla_qubits", "must lie in [1, 4]")
            if self.n_qubits + ws.ancilla_qubits > MAX_JOINT_QUBITS:
                raise ConfigError("workspace.ancilla_qubits", f"joint register exceeds 2^{MAX_JOINT_QUBITS}")
            if ws.mode not in ("iterative", "recursive"):
                raise ConfigError("workspace.mode", "must be 'iterative' or 'recursive'")
        if self.nondiagonal.mode not in ("iterative", "recursive"):
            raise ConfigError("nondiagonal.mode", "must be 'iterative' or 'recursive'")
        if self.sweep.param is not None:
            if self.sweep.param not in SWEEP_PARAMS:
                raise ConfigError("sweep.param", f"must be one of {SWEEP_PARAMS}")
            if not self.sweep.values:
                raise ConfigError("sweep.values", "empty sweep")
        return self

    # ---------------------------------------------------------------- text form

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        top = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in _SECTIONS:
                continue
            top[f.name] = _fmt(v)
        cp["experiment"] = top
        for name in _SECTIONS:
            sub = getattr(self, name)
            cp[name] = {f.name: _fmt(getattr(sub, f.name)) for f in fields(sub)}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            for k, v in cp[section].items():
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc)) from exc
        exp = dict(cp["experiment"]) if cp.has_section("experiment") else {}
        kwargs = {}
        for f in fields(cls):
            if f.name in _SECTIONS:
                continue
            if f.name in exp:
                kwargs[f.name] = _parse(f.name, exp[f.name])
        kwargs.update({k: v for k, v in overrides.items() if v is not None and k not in _SECTIONS})
        if "scenario" not in kwargs:
            raise ConfigError("scenario", "missing")
        if "seed" not in kwargs:
            raise ConfigError("seed", "missing; runs are seeded explicitly")
        noise = dict(cp["noise"]) if cp.has_section("noise") else {}
        noise.setdefault("seed", str(kwargs["seed"]))
        try:
            kwargs["noise"] = NoiseSpec.from_mapping(noise)
        except ValueError as exc:
            raise ConfigError("noise", str(exc)) from exc
        for name, typ in _SECTIONS.items():
            if name == "noise":
                continue
            raw = dict(cp[name]) if cp.has_section(name) else {}
            sub = {}
            for f in fields(typ):
                if f.name in raw:
                    sub[f.name] = _parse(f"{name}.{f.name}", raw[f.name], f.type)
            kwargs[name] = typ(**sub)
        return cls(**kwargs)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        noise_kw = {k: kw.pop(k) for k in ("delta_t", "delta_0") if kw.get(k) is not None}
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        if noise_kw:
            try:
                cfg = replace(cfg, noise=replace(cfg.noise, **noise_kw))
            except ValueError as exc:
                raise ConfigError("noise", str(exc)) from exc
        return cfg


_SECTIONS = {
    "unitary": UnitarySpec,
    "noise": NoiseSpec,
    "hamiltonian": HamiltonianSpec,
    "workspace": WorkspaceConfig,
    "nondiagonal": NondiagonalConfig,
    "sweep": SweepSpec,
}

_INT_KEYS = {"seed", "n_qubits", "target_count", "target_seed", "levels", "budget",
             "unitary.seed", "hamiltonian.samples", "workspace.ancilla_qubits",
             "nondiagonal.basis_seed", "sweep.workers"}
_FLOAT_KEYS = {"phi", "varphi", "unitary.spread", "hamiltonian.s", "hamiltonian.s_alpha",
               "hamiltonian.t_max", "nondiagonal.ep_distance", "nondiagonal.eq_distance"}
_INT_LIST_KEYS = {"targets"}
_FLOAT_LIST_KEYS = {"phi_list", "sweep.values"}
_BOOL_KEYS = {"exploratory"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _parse(key: str, raw: str, typ=None):
    raw = raw.strip()
    try:
        if key in _BOOL_KEYS:
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"not a boolean: {raw!r}")
            return raw.lower() in ("true", "1", "yes")
        if raw == "":
            return None
        if key == "n_iters":
            return "auto" if raw == "auto" else int(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return parse_angle(raw)
        if key in _INT_LIST_KEYS:
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if key in _FLOAT_LIST_KEYS:
            return tuple(parse_angle(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


def parse_angle(raw: str) -> float:
    """Float, also accepting ``pi``, ``pi/2``, ``2*pi/3`` style literals."""
    s = raw.strip().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    if "pi" not in s:
        raise ValueError(f"not a number: {raw!r}")
    num, _, den = s.partition("/")
    coef = num.replace("pi", "").rstrip("*") or "1"
    if coef == "-":
        coef = "-1"
    value = float(coef) * math.pi
    return value / float(den) if den else value


def load_config(path: str, **overrides) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    return ExperimentConfig.from_text(text, **overrides)
