"""YAML run configurations with a validating loader.

A configuration is a nested mapping; unknown keys and bad values raise
``ConfigError`` naming the offending field path (``mode.tau``, ...).
``normalize`` resolves frequencies into epochs rounded to a multiple of
``dt``, so ``load -> save -> load`` is a fixed point.

Example::

    instance: {generator: lattice, params: {rows: 4, cols: 3}, seed: 0}
    partition: {blocks: 4}
    mode: {tag: concurrent, tau: 1.0e-9}
    t_total: 1.0e-7
    trials: 100
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

import yaml

from .errors import ConfigError

GENERATORS = ("sk", "lattice", "er", "ba")


@dataclass
class InstanceSpec:
    path: str | None = None
    generator: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0


@dataclass
class PartitionSpec:
    blocks: int = 1
    scheme: str = "contiguous"
    seed: int = 0


@dataclass
class ModeSpec:
    tag: str = "monolithic"
    tau: float | None = None
    frequency: float | None = None
    quantize_sync: bool = True
    order: str = "fixed"


@dataclass
class DeviceSpec:
    r: float = 310e3
    c: float = 50e-15


@dataclass
class ScheduleSpec:
    kind: str = "constant"
    beta_start: float = 10.0
    beta_end: float | None = None
    duration: float | None = None


@dataclass
class KuramotoSpec:
    kj: object = 1.0
    ks: object = 0.0


@dataclass
class OutputSpec:
    csv: str | None = None
    manifest: str | None = None


@dataclass
class MetricSpec:
    w1_vs_pi: bool = False
    kl: bool = False
    bounds: bool = False
    ttt_target_ratio: float = 0.98
    bks: float | None = None
    e_bits: list = field(default_factory=list)


@dataclass
class RunConfig:
    instance: InstanceSpec = field(default_factory=InstanceSpec)
    partition: PartitionSpec = field(default_factory=PartitionSpec)
    mode: ModeSpec = field(default_factory=ModeSpec)
    model: str = "linear"
    device: DeviceSpec = field(default_factory=DeviceSpec)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    kuramoto: KuramotoSpec = field(default_factory=KuramotoSpec)
    t_total: float = 1e-7
    dt: float = 1e-12
    trials: int = 1
    seed: int = 0
    batch_size: int | None = None
    workers: int = 1
    checkpoints: int = 20
    outputs: OutputSpec = field(default_factory=OutputSpec)
    metrics: MetricSpec = field(default_factory=MetricSpec)

    def to_dict(self) -> dict:
        return asdict(self)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()


_SECTIONS = {
    "instance": InstanceSpec, "partition": PartitionSpec, "mode": ModeSpec, "device": DeviceSpec,
    "schedule": ScheduleSpec, "kuramoto": KuramotoSpec, "outputs": OutputSpec, "metrics": MetricSpec,
}


def _num(v, path, kind=float, positive=False, nonneg=False, optional=False):
    if v is None and optional:
        return None
    if isinstance(v, bool) or v is None:
        raise ConfigError(f"expected a number, got {v!r}", path=path)
    if isinstance(v, str):
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"expected a number, got {v!r}", path=path) from None
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"expected an integer, got {v!r}", path=path)
        v = int(v)
    else:
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError("must be finite", path=path)
    if positive and v <= 0:
        raise ConfigError("must be positive", path=path)
    if nonneg and v < 0:
        raise ConfigError("must be nonnegative", path=path)
    return v


def _choice(v, path, options):
    if v not in options:
        raise ConfigError(f"must be one of {', '.join(options)}; got {v!r}", path=path)
    return v


def _bool(v, path):
    if not isinstance(v, bool):
        raise ConfigError(f"expected true/false, got {v!r}", path=path)
    return v


def _section(cls, raw, path):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping", path=path)
    names = {f.name for f in fields(cls)}
    for k in raw:
        if k not in names:
            raise ConfigError("unknown field", path=f"{path}.{k}")
    return cls(**raw)


def from_dict(raw: dict, base_dir: str | None = None) -> RunConfig:
    """Validate and normalize a raw mapping into a ``RunConfig``."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping", path="")
    top = {f.name for f in fields(RunConfig)}
    for k in raw:
        if k not in top:
            raise ConfigError("unknown field", path=k)
    kw = {}
    for k, v in raw.items():
        kw[k] = _section(_SECTIONS[k], v, k) if k in _SECTIONS else v
    cfg = RunConfig(**kw)
    _validate(cfg, base_dir)
    return normalize(cfg)


def _validate(cfg: RunConfig, base_dir):
    inst = cfg.instance
    if (inst.path is None) == (inst.generator is None):
        raise ConfigError("give exactly one of path or generator", path="instance")
    if inst.path is not None:
        p = inst.path if os.path.isabs(inst.path) or base_dir is None else os.path.join(base_dir, inst.path)
        if not os.path.isfile(p):
            raise ConfigError(f"file not found: {inst.path}", path="instance.path")
        inst.path = p
    else:
        _choice(inst.generator, "instance.generator", GENERATORS)
        if not isinstance(inst.params, dict):
            raise ConfigError("expected a mapping", path="instance.params")
    inst.seed = _num(inst.seed, "instance.seed", int, nonneg=True)
    p = cfg.partition
    p.blocks = _num(p.blocks, "partition.blocks", int, positive=True)
    _choice(p.scheme, "partition.scheme", ("contiguous", "random"))
    p.seed = _num(p.seed, "partition.seed", int, nonneg=True)
    m = cfg.mode
    _choice(m.tag, "mode.tag", ("monolithic", "serial", "concurrent"))
    _choice(m.order, "mode.order", ("fixed", "random"))
    _bool(m.quantize_sync, "mode.quantize_sync")
    if m.tau is not None and m.frequency is not None:
        raise ConfigError("tau and frequency are mutually exclusive", path="mode.frequency")
    m.tau = _num(m.tau, "mode.tau", positive=True, optional=True)
    m.frequency = _num(m.frequency, "mode.frequency", positive=True, optional=True)
    if m.tag != "monolithic" and m.tau is None and m.frequency is None:
        raise ConfigError(f"{m.tag} mode needs tau or frequency", path="mode.tau")
    _choice(cfg.model, "model", ("linear", "kuramoto"))
    cfg.device.r = _num(cfg.device.r, "device.r", positive=True)
    cfg.device.c = _num(cfg.device.c, "device.c", positive=True)
    s = cfg.schedule
    _choice(s.kind, "schedule.kind", ("constant", "linear", "geometric"))
    s.beta_start = _num(s.beta_start, "schedule.beta_start", positive=True)
    s.beta_end = _num(s.beta_end, "schedule.beta_end", positive=True, optional=True)
    s.duration = _num(s.duration, "schedule.duration", positive=True, optional=True)
    if s.kind != "constant" and s.beta_end is None:
        raise ConfigError("required for a non-constant schedule", path="schedule.beta_end")
    cfg.t_total = _num(cfg.t_total, "t_total", positive=True)
    cfg.dt = _num(cfg.dt, "dt", positive=True)
    cfg.trials = _num(cfg.trials, "trials", int, positive=True)
    cfg.seed = _num(cfg.seed, "seed", int, nonneg=True)
    cfg.batch_size = _num(cfg.batch_size, "batch_size", int, positive=True, optional=True)
    cfg.workers = _num(cfg.workers, "workers", int, positive=True)
    cfg.checkpoints = _num(cfg.checkpoints, "checkpoints", int, positive=True)
    mt = cfg.metrics
    for k in ("w1_vs_pi", "kl", "bounds"):
        _bool(getattr(mt, k), f"metrics.{k}")
    mt.ttt_target_ratio = _num(mt.ttt_target_ratio, "metrics.ttt_target_ratio", positive=True)
    if mt.ttt_target_ratio > 1:
        raise ConfigError("must lie in (0, 1]", path="metrics.ttt_target_ratio")
    mt.bks = _num(mt.bks, "metrics.bks", positive=True, optional=True)
    if not isinstance(mt.e_bits, list):
        raise ConfigError("expected a list", path="metrics.e_bits")
    mt.e_bits = [_num(v, f"metrics.e_bits[{i}]", positive=True) for i, v in enumerate(mt.e_bits)]


def normalize(cfg: RunConfig) -> RunConfig:
    """Express the epoch as ``tau`` rounded to a whole number of steps."""
    m = cfg.mode
    if m.frequency is not None:
        m.tau, m.frequency = 1.0 / m.frequency, None
    if m.tau is not None:
        m.tau = max(1, round(m.tau / cfg.dt)) * cfg.dt
    return cfg


def loads(text: str, base_dir: str | None = None) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}", path="") from None
    return from_dict(raw or {}, base_dir)


def load(path: str) -> RunConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}", path="") from None
    return loads(text, os.path.dirname(os.path.abspath(path)))


def dumps(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def save(cfg: RunConfig, path: str):
    with open(path, "w") as f:
        f.write(dumps(cfg))
