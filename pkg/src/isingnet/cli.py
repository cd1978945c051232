"""Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical
failure, 4 capacity error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from . import metrics as M
from . import plotdata, recipes, runner
from .advisor import AdvisorInput, advise
from .config import RunConfig
from .errors import IsingNetError, UsageError
from .model import enumerate_gibbs, instance_metadata_json, load_gset, serialize_gset
from .partition import make_partition, spectrum, split, tau_flip


def _instance_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("instance")
    g.add_argument("--instance", help="GSet-format instance file")
    g.add_argument("--generator", choices=cfgmod.GENERATORS)
    g.add_argument("--n", type=int, help="spins (sk, er, ba)")
    g.add_argument("--rows", type=int, default=4)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--open", action="store_true", help="open instead of periodic lattice")
    g.add_argument("--edges", type=int, help="edge count (er)")
    g.add_argument("--attach", type=int, default=4, help="edges per new node (ba)")
    g.add_argument("--unit-weights", action="store_true", help="unit instead of +-1 weights (er, ba)")
    g.add_argument("--instance-seed", type=int, default=0)


def _run_args(p: argparse.ArgumentParser):
    _instance_args(p)
    p.add_argument("--config", help="YAML run configuration; overrides flags")
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--scheme", choices=("contiguous", "random"), default="contiguous")
    p.add_argument("--mode", choices=("monolithic", "serial", "concurrent"), default="monolithic")
    t = p.add_mutually_exclusive_group()
    t.add_argument("--tau", type=float, help="synchronization period (s)")
    t.add_argument("--frequency", type=float, help="synchronization frequency (Hz)")
    p.add_argument("--full-precision", action="store_true", help="exchange full-precision states")
    p.add_argument("--random-order", action="store_true", help="random serial sweep order")
    p.add_argument("--model", choices=("linear", "kuramoto"), default="linear")
    p.add_argument("--r", type=float, default=310e3)
    p.add_argument("--c", type=float, default=50e-15)
    p.add_argument("--schedule", choices=("constant", "linear", "geometric"), default="constant")
    p.add_argument("--beta", type=float, default=10.0, help="(initial) inverse temperature")
    p.add_argument("--beta-end", type=float)
    p.add_argument("--t-total", type=float, default=1e-7)
    p.add_argument("--dt", type=float, default=1e-12)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoints", type=int, default=20)
    p.add_argument("--csv", help="output CSV path")
    p.add_argument("--manifest", help="output JSON manifest path")


def _instance_dict(a) -> dict:
    if a.instance:
        return {"path": a.instance}
    if not a.generator:
        raise UsageError("give --instance or --generator")
    params = {}
    if a.generator == "lattice":
        params = {"rows": a.rows, "cols": a.cols, "periodic": not a.open}
    else:
        params["n"] = a.n or (200 if a.generator == "sk" else 400)
        if a.generator == "er":
            params["edges"] = a.edges or 10 * params["n"]
        if a.generator == "ba":
            params["attach"] = a.attach
        if a.generator in ("er", "ba"):
            params["bimodal"] = not a.unit_weights
    return {"generator": a.generator, "params": params, "seed": a.instance_seed}


def config_from_args(a) -> RunConfig:
    if a.config:
        return cfgmod.load(a.config)
    raw = {
        "instance": _instance_dict(a),
        "partition": {"blocks": a.blocks, "scheme": a.scheme},
        "mode": {"tag": a.mode, "tau": a.tau, "frequency": a.frequency,
                 "quantize_sync": not a.full_precision, "order": "random" if a.random_order else "fixed"},
        "model": a.model,
        "device": {"r": a.r, "c": a.c},
        "schedule": {"kind": a.schedule, "beta_start": a.beta, "beta_end": a.beta_end},
        "t_total": a.t_total, "dt": a.dt, "trials": a.trials, "seed": a.seed,
        "batch_size": a.batch_size, "workers": a.workers, "checkpoints": a.checkpoints,
        "outputs": {"csv": a.csv, "manifest": a.manifest},
    }
    return cfgmod.from_dict(raw, os.getcwd())


def _instance_from_args(a):
    spec = cfgmod.from_dict({"instance": _instance_dict(a)}, os.getcwd()).instance
    return runner.build_instance(spec)


# --- commands -----------------------------------------------------------------

def cmd_generate(a):
    a.generator = a.kind
    inst = _instance_from_args(a)
    text = serialize_gset(inst)
    if a.out:
        with open(a.out, "w") as f:
            f.write(text)
        print(instance_metadata_json(inst))
    else:
        sys.stdout.write(text)


def cmd_parse(a):
    print(instance_metadata_json(load_gset(a.file)))


def cmd_spectrum(a):
    inst = _instance_from_args(a)
    s = split(inst, make_partition(inst.n, a.blocks, a.scheme, a.partition_seed))
    rep = spectrum(inst, s)
    out = json.loads(rep.to_json())
    rc = a.r * a.c
    for mode in ("radius", "mean_abs"):
        try:
            out[f"tau_flip_{mode}"] = tau_flip(rep, rc, mode)
        except UsageError as e:
            out[f"tau_flip_{mode}"] = str(e)
    print(json.dumps(out, indent=2))


def cmd_simulate(a):
    cfg = config_from_args(a)
    res, text = runner.run_experiment(cfg)
    if not cfg.outputs.csv:
        sys.stdout.write(text)


def cmd_coupled(a):
    cfg = config_from_args(a)
    _, text = runner.run_coupled_experiment(cfg)
    if not cfg.outputs.csv:
        sys.stdout.write(text)


def cmd_compare_dist(a):
    cfg = config_from_args(a)
    inst = runner.build_instance(cfg.instance)
    beta = cfg.schedule.beta_end or cfg.schedule.beta_start
    pi = M.EmpiricalDistribution.from_gibbs(enumerate_gibbs(inst, beta), tail=M.MASS_TOL)
    log, _ = runner.run_coupled_experiment(cfg, inst)
    rows = []
    for c, t in enumerate(log.times):
        mu = M.EmpiricalDistribution.from_spins(log.approx_spins[c])
        nu = M.EmpiricalDistribution.from_spins(log.ideal_spins[c])
        rows.append((t, M.w1_hamming(mu, pi), M.w1_hamming(nu, pi), M.w1_hamming(mu, nu),
                     M.kl_divergence(mu, nu), beta / 4 * float(log.grad_err_sq[c].mean())))
    sys.stdout.write(runner.write_csv(a.out, ("t", "w1_approx_pi", "w1_ideal_pi", "w1_pair", "kl_approx_ideal",
                                              "kl_functional"), rows))


def cmd_benchmark(a):
    os.makedirs(a.out, exist_ok=True)
    kw = {"seed": a.seed, "workers": a.workers}
    if a.recipe == "lattice":
        rep = recipes.lattice_w1(trials=a.trials or 1000, **kw)
        plotdata.emit_plotdata(rep.w1_rows, "w1", os.path.join(a.out, "fig5_w1.csv"))
        plotdata.emit_plotdata(rep.bound_rows, "bounds", os.path.join(a.out, "fig6_bounds.csv"))
        summary = {"lipschitz": rep.lipschitz, "max_guaranteed_tau": rep.max_guaranteed_tau,
                   "w1_min_tau": rep.w1_min_tau}
    elif a.recipe == "sk":
        rep = recipes.sk_divergence(trials=a.trials or 20, paper_scale=a.paper_scale, **kw)
        plotdata.emit_plotdata(rep.rows, "sk", os.path.join(a.out, "fig7_sk.csv"))
        summary = {"u1": rep.u1, "threshold": rep.threshold,
                   "divergence_tau": {f"{m}_B{b}": v for (m, b), v in rep.divergence_tau.items()}}
    else:
        rep = recipes.maxcut_benchmark(trials=a.trials or 10, paper_scale=a.paper_scale, **kw)
        plotdata.emit_plotdata(rep.ttt_rows, "ttt", os.path.join(a.out, "fig8_ttt.csv"))
        plotdata.emit_plotdata(rep.ett_rows, "ett", os.path.join(a.out, "fig9_ett.csv"))
        plotdata.emit_plotdata(rep.cut_rows, "cut_error", os.path.join(a.out, "cut_error.csv"))
        summary = {"bks": rep.bks, "heuristics": rep.heuristics}
    with open(os.path.join(a.out, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))


def cmd_advise(a):
    adv = advise(AdvisorInput(a.priority, a.frequency, a.rho, a.rc, a.rc_max is not None, a.rc_max, a.blocks))
    print(adv.text())


def cmd_emit_plotdata(a):
    with open(a.records) as f:
        records = json.load(f)
    text = plotdata.emit_plotdata(records, a.family, a.out)
    if not a.out:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isingnet", description="Partitioned analog Ising machine simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", help="generate an instance in GSet format")
    s.add_argument("kind", choices=cfgmod.GENERATORS)
    _instance_args(s)
    s.add_argument("--out", help="output file (default: stdout)")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("parse", help="validate a GSet file and print its metadata")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("spectrum", help="spectral radii and spin-flip time heuristics")
    _instance_args(s)
    s.add_argument("--blocks", type=int, default=1)
    s.add_argument("--scheme", choices=("contiguous", "random"), default="contiguous")
    s.add_argument("--partition-seed", type=int, default=0)
    s.add_argument("--r", type=float, default=310e3)
    s.add_argument("--c", type=float, default=50e-15)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("simulate", help="run one configuration and write epoch logs")
    _run_args(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("coupled", help="ideal/concurrent pair on shared noise")
    _run_args(s)
    s.set_defaults(func=cmd_coupled)

    s = sub.add_parser("compare-dist", help="W1 and KL tables per checkpoint of a coupled run")
    _run_args(s)
    s.add_argument("--out", help="CSV path")
    s.set_defaults(func=cmd_compare_dist)

    s = sub.add_parser("benchmark", help="run a named experiment recipe")
    s.add_argument("recipe", choices=("lattice", "sk", "maxcut"))
    s.add_argument("--out", default="results")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--paper-scale", action="store_true", help="full-size SK and MaxCut runs (n=2000; days of compute)")
    s.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("advise", help="recommend serial or concurrent execution")
    s.add_argument("--priority", choices=("latency", "energy"), required=True)
    s.add_argument("--frequency", type=float, required=True, help="available sync frequency (Hz)")
    s.add_argument("--rho", type=float, required=True, help="spectral radius of J")
    s.add_argument("--rc", type=float, default=310e3 * 50e-15)
    s.add_argument("--rc-max", type=float, help="largest achievable RC if adjustable")
    s.add_argument("--blocks", type=int, default=2)
    s.set_defaults(func=cmd_advise)

    s = sub.add_parser("emit-plotdata", help="tidy CSV for a figure family from JSON records")
    s.add_argument("--family", required=True)
    s.add_argument("--records", required=True, help="JSON list of records")
    s.add_argument("--out")
    s.set_defaults(func=cmd_emit_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(over="ignore", invalid="ignore")
    try:
        args.func(args)
    except IsingNetError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
