"""Run configuration: a strict nested YAML schema mapped onto the solver dataclasses.

Physics parameters have no defaults; tolerances and output options do.
Angles are given in degrees and converted to radians when the problem is built.
"""
from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .driver import GridSpec, ProblemSpec, SolverSpec, UpstreamPerturbation, WedgeBump
from .errors import ConfigError


@dataclass
class GasSection:
    gamma: float


@dataclass
class PerturbationSection:
    density: float = 0.0
    velocity: float = 0.0
    beta: float = 0.25


@dataclass
class UpstreamSection:
    mach: float
    p: float
    rho: float
    perturbation: PerturbationSection = field(default_factory=PerturbationSection)


@dataclass
class BumpSection:
    kind: str
    amplitude: float
    center: float
    width: float


@dataclass
class WedgeSection:
    theta0_deg: float
    bump: BumpSection | None = None
    w0: float | None = 0.0


@dataclass
class GridSection:
    R: float = 8.0
    k: float = 1.0
    n1: int = 64
    n2: int = 64
    grading: float = 1.0


@dataclass
class SolverSection:
    inner_tol: float = 1e-9
    outer_tol: float = 1e-8
    damping: float = 0.7
    max_inner: int = 60
    max_outer: int = 200
    newton: bool = False
    outer: str = "anderson"
    anderson_depth: int = 5
    delta: float = 0.1
    C0: float = 10.0


@dataclass
class EstimatesSection:
    beta: float = 0.25
    alpha: float = 0.5


@dataclass
class PolarSection:
    samples: int = 400


@dataclass
class SweepSection:
    axis: str = "amplitude"
    values: list = field(default_factory=list)


@dataclass
class OutputSection:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    decay: bool = True


@dataclass
class RunConfig:
    gas: GasSection
    upstream: UpstreamSection
    wedge: WedgeSection | None = None
    grid: GridSection = field(default_factory=GridSection)
    solver: SolverSection = field(default_factory=SolverSection)
    estimates: EstimatesSection = field(default_factory=EstimatesSection)
    polar: PolarSection = field(default_factory=PolarSection)
    sweep: SweepSection | None = None
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dump())

    def problem(self) -> ProblemSpec:
        if self.wedge is None:
            raise ConfigError("section 'wedge' is required for a solve")
        b = self.wedge.bump
        bump = WedgeBump() if b is None else WedgeBump(b.kind, b.amplitude, b.center, b.width)
        pt = self.upstream.perturbation
        g, s = self.grid, self.solver
        return ProblemSpec(
            mach=self.upstream.mach, theta0=float(np.radians(self.wedge.theta0_deg)), gamma=self.gas.gamma,
            p=self.upstream.p, rho=self.upstream.rho, bump=bump,
            upstream=UpstreamPerturbation(pt.density, pt.velocity, pt.beta), w0=self.wedge.w0,
            grid=GridSpec(g.R, g.n1, g.n2, g.k, g.grading),
            solver=SolverSpec(s.inner_tol, s.outer_tol, s.damping, s.max_inner, s.max_outer, s.newton,
                              s.delta, s.C0, s.outer, s.anderson_depth),
            beta=self.estimates.beta, alpha=self.estimates.alpha)


# -- parsing with line diagnostics -------------------------------------------

_TYPES = {float: (int, float), int: (int,), bool: (bool,), str: (str,), list: (list,)}


def _build(cls, node: yaml.Node, path: str):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {node.start_mark.line + 1}: '{path or 'root'}' must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    hints = _hints(cls)
    kw = {}
    for knode, vnode in node.value:
        key = knode.value
        where = f"{path}.{key}" if path else key
        line = knode.start_mark.line + 1
        if key not in fields:
            raise ConfigError(f"line {line}: unknown key '{where}'")
        if key in kw:
            raise ConfigError(f"line {line}: duplicate key '{where}'")
        kw[key] = _value(hints[key], vnode, where)
    missing = [n for n, f in fields.items() if n not in kw and f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING]
    if missing:
        raise ConfigError(f"line {node.start_mark.line + 1}: missing key(s) "
                          + ", ".join(f"'{path + '.' if path else ''}{m}'" for m in missing))
    return cls(**kw)


def _hints(cls):
    return typing.get_type_hints(cls)


def _value(tp, node: yaml.Node, where: str):
    line = node.start_mark.line + 1
    args = typing.get_args(tp)
    optional = type(None) in args
    if optional:
        tp = next(a for a in args if a is not type(None))
    if dataclasses.is_dataclass(tp):
        if optional and isinstance(node, yaml.ScalarNode) and node.tag.endswith(":null"):
            return None
        return _build(tp, node, where)
    value = yaml.safe_load(yaml.serialize(node))
    if value is None and optional:
        return None
    base = typing.get_origin(tp) or tp
    ok = _TYPES.get(base, (base,))
    if base is float and isinstance(value, bool) or not isinstance(value, ok):
        raise ConfigError(f"line {line}: '{where}' must be {base.__name__}, got {value!r}")
    if base is float:
        value = float(value)
    if base is list and not all(isinstance(v, (int, float, str)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"line {line}: '{where}' must be a flat list")
    return value


def parse_config(text: str) -> RunConfig:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    if node is None:
        raise ConfigError("empty configuration")
    cfg = _build(RunConfig, node, "")
    _check(cfg)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text)


def _check(cfg: RunConfig) -> None:
    if cfg.gas.gamma <= 1.0:
        raise ConfigError("gas.gamma must exceed 1")
    for name in ("mach", "p", "rho"):
        if getattr(cfg.upstream, name) <= 0:
            raise ConfigError(f"upstream.{name} must be positive")
    if cfg.polar.samples < 3:
        raise ConfigError("polar.samples must be at least 3")
    if cfg.sweep is not None and cfg.sweep.axis != "amplitude":
        raise ConfigError(f"unsupported sweep axis {cfg.sweep.axis!r} (only 'amplitude')")
    if cfg.solver.outer not in ("anderson", "picard"):
        raise ConfigError("solver.outer must be 'anderson' or 'picard'")
