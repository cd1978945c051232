"""Config-driven runs and their CSV / JSON outputs.

CSV floats are written with ``repr`` so reruns are byte-identical; the
manifest carries the config echo, hashes and a timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import time

import numpy as np

from . import __version__
from . import execution as ex
from .config import RunConfig
from .dynamics import DeviceParams, KuramotoParams, TemperatureSchedule
from .errors import ConfigError
from .model import ProblemInstance, gen_ba_maxcut, gen_er_maxcut, gen_lattice, gen_sk, load_gset
from .partition import make_partition

EPOCH_COLUMNS = ("trial", "t", "epoch", "energy", "cut", "grad_err_sq", "ext_grad_l1", "pair_grad_l1")
COUPLED_COLUMNS = ("trial", "t", "ideal_energy", "approx_energy", "pair_grad_l1", "ext_grad_l1",
                   "grad_err_sq", "pair_int_l1", "ext_int_l1", "state_l1")


def build_instance(spec) -> ProblemInstance:
    if spec.path is not None:
        return load_gset(spec.path)
    p = dict(spec.params)
    try:
        if spec.generator == "sk":
            return gen_sk(int(p.get("n", 200)), spec.seed)
        if spec.generator == "lattice":
            return gen_lattice(int(p.get("rows", 4)), int(p.get("cols", 3)), bool(p.get("periodic", True)),
                               float(p.get("coupling", 1.0)))
        if spec.generator == "er":
            return gen_er_maxcut(int(p.get("n", 400)), int(p.get("edges", 4 * int(p.get("n", 400)))),
                                 spec.seed, bool(p.get("bimodal", True)))
        if spec.generator == "ba":
            return gen_ba_maxcut(int(p.get("n", 400)), int(p.get("attach", 4)), spec.seed,
                                 bool(p.get("bimodal", True)))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"instance.params: {e}", path="instance.params") from None
    raise ConfigError(f"instance.generator: unknown generator {spec.generator!r}", path="instance.generator")


def build_schedule(cfg: RunConfig) -> TemperatureSchedule:
    s = cfg.schedule
    return TemperatureSchedule(s.kind, s.beta_start, s.beta_end, s.duration or cfg.t_total)


def build_mode(cfg: RunConfig) -> ex.ExecMode:
    m = cfg.mode
    return ex.ExecMode(m.tag, m.tau, m.quantize_sync, m.order)


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if path is None:
        return text
    with open(path, "w", newline="") as f:
        f.write(text)
    return text


def epoch_rows(res: ex.RunResult):
    for k, tr in enumerate(res.trials):
        for b in range(len(res.t)):
            yield (int(tr), res.t[b], int(res.epoch[b]), res.energy[b, k], res.cut[b, k],
                   res.grad_err_sq[b, k], res.ext_grad_l1[b, k], res.pair_grad_l1[b, k])


def coupled_rows(log: ex.CoupledLog):
    for k, tr in enumerate(log.trials):
        for c, t in enumerate(log.times):
            yield (int(tr), t, *(getattr(log, name)[c, k] for name in COUPLED_COLUMNS[2:]))


def manifest(cfg: RunConfig, inst: ProblemInstance, extra: dict | None = None) -> dict:
    return {
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config": cfg.to_dict(),
        "config_hash": cfg.content_hash(),
        "instance": inst.metadata(),
        **(extra or {}),
    }


def write_manifest(path, data: dict):
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=str)
        f.write("\n")


def run_experiment(cfg: RunConfig, inst: ProblemInstance | None = None) -> tuple[ex.RunResult, str]:
    """Run ``cfg``, write the epoch CSV and manifest if requested.

    Returns the result and the CSV text.
    """
    inst = inst or build_instance(cfg.instance)
    p = make_partition(inst.n, cfg.partition.blocks, cfg.partition.scheme, cfg.partition.seed)
    dev = DeviceParams(cfg.device.r, cfg.device.c)
    sched = build_schedule(cfg)
    mode = build_mode(cfg)
    common = dict(dt=cfg.dt, batch_size=cfg.batch_size, workers=cfg.workers)
    if mode.tag == "serial":
        res = ex.run_serial(inst, p, mode, dev, sched, cfg.t_total, cfg.seed, cfg.trials, **common)
    else:
        kp = KuramotoParams(cfg.kuramoto.kj, cfg.kuramoto.ks) if cfg.model == "kuramoto" else None
        if mode.tag == "monolithic":
            p = make_partition(inst.n, 1)
        res = ex.run_concurrent(inst, p, mode, dev, sched, cfg.t_total, cfg.seed, cfg.trials,
                                model=cfg.model, kuramoto=kp, **common)
    text = write_csv(cfg.outputs.csv, EPOCH_COLUMNS, epoch_rows(res))
    if cfg.outputs.manifest:
        _, e, cut = ex.best_state(res)
        write_manifest(cfg.outputs.manifest, manifest(cfg, inst, {
            "outputs": {"csv": cfg.outputs.csv},
            "summary": {"best_energy": e, "best_cut": cut if not inst.has_field else None,
                        "epochs": int(res.meta["epochs"]), "tau": res.tau},
        }))
    return res, text


def run_coupled_experiment(cfg: RunConfig, inst: ProblemInstance | None = None):
    """Single-epoch ideal/concurrent pair with log-spaced checkpoints."""
    inst = inst or build_instance(cfg.instance)
    p = make_partition(inst.n, cfg.partition.blocks, cfg.partition.scheme, cfg.partition.seed)
    dev = DeviceParams(cfg.device.r, cfg.device.c)
    tau = cfg.mode.tau if cfg.mode.tau is not None else cfg.t_total
    log = ex.run_coupled(inst, p, tau, dev, build_schedule(cfg), cfg.t_total, cfg.seed, cfg.trials,
                         dt=cfg.dt, n_checkpoints=cfg.checkpoints, quantize_sync=cfg.mode.quantize_sync,
                         batch_size=cfg.batch_size, workers=cfg.workers)
    text = write_csv(cfg.outputs.csv, COUPLED_COLUMNS, coupled_rows(log))
    if cfg.outputs.manifest:
        write_manifest(cfg.outputs.manifest, manifest(cfg, inst, {"outputs": {"csv": cfg.outputs.csv}}))
    return log, text
