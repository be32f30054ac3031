"""Command-line entry point.

Subcommands: simulate, sample, soliton, soliton-discrete, ldtest,
concentrate, gncheck, rankcheck, distance, headline.  Global flags:
--config FILE (JSON parameter block), --set key=value (repeatable
overrides), --seed, --threads, --out, --format.

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence, 4 acceptance-property violation.

Thread count only affects scheduling: every work unit draws from a stream
keyed by (seed, unit id) and results merge in fixed order, so outputs are
bitwise identical at any --threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, elliptic, experiments, gn, hormander, sde, variational
from .interp import interpolate, seminorm_distance
from .io import RunManifest, write_csv, write_json
from .lattice import (GibbsSpec, LatticeField, load_field_binary,
                      load_field_json, save_field_binary, save_field_json)
from .rng import stream
from .sampling import McmcConfig, ld_prob_grad, mcmc_gibbs, uniform_sphere_sample
from .variational import MinimizeOptions

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PROPERTY = 4

REQUIRED = object()


class ConfigError(Exception):
    pass


class PropertyViolation(Exception):
    pass


SCHEMAS = {
    "soliton": {"m": REQUIRED, "L": 1.0, "grid": 512},
    "soliton-discrete": {"n": 64, "m": REQUIRED, "restarts": 8, "tol": 1e-10},
    "simulate": {
        "n": 64, "m": REQUIRED, "gamma": 1.0, "beta": "inf", "dt": None,
        "T": 10.0, "init": "random-sphere", "init_file": None,
        "scheme": "strang", "record_every": 100, "snapshots": 0,
    },
    "sample": {
        "n": 16, "m": REQUIRED, "beta": None, "beta_schedule": None,
        "steps": 1_000_000, "burn_in": 200_000, "thinning": 200, "chains": 2,
    },
    "ldtest": {"n": 8, "m": 1.0, "g_list": [18.0, 28.0, 42.0],
               "samples": 1_000_000},
    "concentrate": {
        "m": REQUIRED, "beta": 1.0, "a": 1.5, "n_list": [8, 16, 32],
        "eps": 1.0, "steps": 2_000_000, "burn_in": 500_000, "thinning": 500,
        "scaling": "power",
    },
    "gncheck": {"n_random": 100_000, "sizes": list(gn.DEFAULT_SCAN_SIZES)},
    "rankcheck": {"n_min": 2, "n_max": 6, "points": 50,
                  "modes": ["explicit-family", "nested-brackets"]},
    "distance": {"field_a": REQUIRED, "field_b": REQUIRED, "grid_factor": 4},
    "headline": {
        "m": REQUIRED, "beta": 1.0, "a": 1.5, "n_list": [8, 16, 32],
        "eps": 0.5, "method": "mcmc", "steps": 2_000_000,
        "burn_in": 500_000, "thinning": 2000, "T": None, "scaling": "power",
    },
}


def parse_config(command, file_config=None, overrides=None):
    """Resolve a subcommand config: defaults <- file <- CLI overrides.

    Rejects unknown keys naming the offender and the accepted set, and
    reports missing required keys.
    """
    schema = SCHEMAS[command]
    resolved = {k: v for k, v in schema.items() if v is not REQUIRED}
    for src in (file_config or {}, overrides or {}):
        for key, val in src.items():
            if key not in schema:
                raise ConfigError(
                    f"unknown key {key!r} for {command}; accepted: "
                    + ", ".join(sorted(schema))
                )
            resolved[key] = val
    for key, val in schema.items():
        if val is REQUIRED and key not in resolved:
            raise ConfigError(f"missing required key {key!r} for {command}")
    if command == "sample":
        if resolved.get("beta") is not None and resolved.get("beta_schedule") is not None:
            raise ConfigError("give either beta or beta_schedule, not both")
        if resolved.get("beta") is None and resolved.get("beta_schedule") is None:
            raise ConfigError("missing required key 'beta' for sample")
    return resolved


def _parse_beta(val):
    if isinstance(val, str) and val.lower() in ("inf", "infinity"):
        return math.inf
    return float(val)


def _load_field(path):
    if path.endswith(".json"):
        return load_field_json(path)
    return load_field_binary(path)


def _run_ordered(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --- subcommand bodies ----------------------------------------------------


def cmd_soliton(cfg, out, seed, threads, fmt):
    params = elliptic.soliton_params(float(cfg["m"]), float(cfg["L"]))
    doc = {
        "branch": params.branch, "m": params.m, "L": params.L,
        "alpha": params.alpha, "omega": params.omega, "lam": params.lam,
        "k": params.k, "energy": elliptic.soliton_energy(params),
    }
    write_json(os.path.join(out, "soliton.json"), doc)
    grid = int(cfg["grid"])
    xs = np.arange(grid) / grid * params.L
    qs = np.asarray(elliptic.soliton_eval(params, xs), float)
    write_csv(os.path.join(out, "profile.csv"), ["x", "Q"],
              [(float(x), float(q)) for x, q in zip(xs, qs)])
    return ["soliton.json", "profile.csv"]


def cmd_soliton_discrete(cfg, out, seed, threads, fmt):
    opts = MinimizeOptions(tol=float(cfg["tol"]), restarts=int(cfg["restarts"]),
                           seed=seed)
    res = variational.minimize_energy(int(cfg["n"]), float(cfg["m"]), opts)
    write_json(os.path.join(out, "minimize.json"), {
        "energy": res.energy, "iterations": res.iterations,
        "restarts_used": res.restarts_used, "grad_norm": res.grad_norm,
        "converged": res.converged,
    })
    save_field_binary(res.field, os.path.join(out, "field.bin"))
    save_field_json(res.field, os.path.join(out, "field.json"))
    return ["minimize.json", "field.bin", "field.json"]


def cmd_simulate(cfg, out, seed, threads, fmt):
    n, m = int(cfg["n"]), float(cfg["m"])
    beta = _parse_beta(cfg["beta"])
    dt = float(cfg["dt"]) if cfg["dt"] is not None else sde.default_dt(n)
    params = sde.SdeParams(n=n, m=m, gamma=float(cfg["gamma"]), beta=beta,
                           dt=dt, scheme=cfg["scheme"],
                           record_every=int(cfg["record_every"]))
    rng = stream(seed, 0)
    init = cfg["init"]
    if init == "file":
        psi0 = _load_field(cfg["init_file"]).values
    elif init == "random-sphere":
        psi0 = uniform_sphere_sample(n, m, rng)
    elif init in ("soliton", "soliton-plus-noise"):
        sol = elliptic.soliton_params(m)
        psi0 = (variational.discrete_soliton(n, m)
                if sol.branch == "dnoidal" else elliptic.soliton_samples(sol, n))
        if init == "soliton-plus-noise":
            psi0 = psi0 + 0.05 * math.sqrt(m) * (rng.standard_normal(n)
                                                 + 1j * rng.standard_normal(n))
            psi0 *= math.sqrt(n * m) / np.linalg.norm(psi0)
    else:
        raise ConfigError(f"unknown init {init!r}; accepted: file, "
                          "random-sphere, soliton, soliton-plus-noise")
    traj = sde.integrate(psi0, params, float(cfg["T"]), rng)
    rows = [(float(t),) + tuple(float(v) for v in ob)
            for t, ob in zip(traj.times, traj.observables)]
    write_csv(os.path.join(out, "observables.csv"),
              ["t", "H", "G", "V", "theta_grad_norm"], rows)
    outputs = ["observables.csv"]
    nsnap = int(cfg["snapshots"])
    if nsnap > 0:
        save_field_binary(traj.final, os.path.join(out, "final.bin"))
        outputs.append("final.bin")
    return outputs


def cmd_sample(cfg, out, seed, threads, fmt):
    n, m = int(cfg["n"]), float(cfg["m"])
    beta = _parse_beta(cfg["beta"])
    chains = int(cfg["chains"])

    def one(chain_id):
        spec = GibbsSpec(n=n, m=m, beta=beta)
        mc = McmcConfig(steps=int(cfg["steps"]), burn_in=int(cfg["burn_in"]),
                        thinning=int(cfg["thinning"]),
                        seed=(seed << 8) + chain_id)
        return mcmc_gibbs(spec, mc)

    results = _run_ordered(one, range(chains), threads)
    rows = []
    for cid, res in enumerate(results):
        for i, h in enumerate(res.energies):
            rows.append((cid, i, float(h)))
    write_csv(os.path.join(out, "energies.csv"), ["chain", "index", "H"], rows)
    write_json(os.path.join(out, "chains.json"), {
        "chain_seeds": [(seed << 8) + c for c in range(chains)],
        "ess": [r.ess for r in results],
        "acceptance": [r.acceptance for r in results],
        "delta_rot": [r.delta_rot for r in results],
    })
    return ["energies.csv", "chains.json"]


def cmd_ldtest(cfg, out, seed, threads, fmt):
    n, m = int(cfg["n"]), float(cfg["m"])
    rows = []
    ordered = True
    for i, g in enumerate([float(g) for g in cfg["g_list"]]):
        rep = ld_prob_grad(n, m, g, int(cfg["samples"]), stream(seed, 100 + i))
        rows.append((g, rep.mc_estimate, rep.ci99[0], rep.ci99[1],
                     rep.product_upper, rep.chernoff_opt, rep.chernoff_half,
                     rep.delta_opt, rep.lambda_opt, rep.hits, rep.n_samples))
        ordered &= rep.ci99[1] <= rep.product_upper <= rep.chernoff_opt or rep.hits == 0
    write_csv(os.path.join(out, "ldtest.csv"),
              ["g", "mc_estimate", "ci99_lo", "ci99_hi", "product_upper",
               "chernoff_opt", "chernoff_half", "delta_opt", "lambda_opt",
               "hits", "samples"], rows)
    if not ordered:
        raise PropertyViolation("Monte Carlo estimate exceeded an analytic bound")
    return ["ldtest.csv"]


def cmd_concentrate(cfg, out, seed, threads, fmt):
    rows = experiments.concentration_experiment(
        float(cfg["m"]), float(cfg["beta"]), float(cfg["a"]),
        [int(v) for v in cfg["n_list"]], float(cfg["eps"]),
        steps=int(cfg["steps"]), burn_in=int(cfg["burn_in"]),
        thinning=int(cfg["thinning"]), seed=seed, scaling=cfg["scaling"])
    write_csv(os.path.join(out, "concentrate.csv"),
              ["n", "beta_n", "e0n", "p_hat", "se", "ci99_lo", "ci99_hi",
               "samples", "ess", "acceptance"],
              [(r.n, r.beta_n, r.e0n, r.p_hat, r.se, r.ci99[0], r.ci99[1],
                r.n_samples, r.ess, r.acceptance) for r in rows])
    return ["concentrate.csv"]


def cmd_gncheck(cfg, out, seed, threads, fmt):
    c_hat = gn.gn_constant()
    bad = gn.count_violations(c_hat, n_random=int(cfg["n_random"]),
                              sizes=tuple(int(s) for s in cfg["sizes"]))
    write_json(os.path.join(out, "gncheck.json"),
               {"c_hat": c_hat, "violations": bad})
    print(f"c_hat = {c_hat!r}, violations = {bad}")
    if bad:
        raise PropertyViolation(f"{bad} Gagliardo-Nirenberg ratio violations")
    return ["gncheck.json"]


def cmd_rankcheck(cfg, out, seed, threads, fmt):
    rows = []
    failures = 0
    rng = stream(seed, 0)
    for n in range(int(cfg["n_min"]), int(cfg["n_max"]) + 1):
        for mode in cfg["modes"]:
            bad = 0
            for _ in range(int(cfg["points"])):
                psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                if hormander.lie_rank(psi, mode=mode) != 2 * n - 1:
                    bad += 1
            failures += bad
            rows.append((n, mode, int(cfg["points"]), bad))
            print(f"n={n} {mode}: {'PASS' if bad == 0 else f'{bad} FAILURES'}")
    write_csv(os.path.join(out, "rankcheck.csv"),
              ["n", "mode", "points", "failures"], rows)
    if failures:
        raise PropertyViolation(f"{failures} rank failures")
    return ["rankcheck.csv"]


def cmd_distance(cfg, out, seed, threads, fmt):
    fa = _load_field(cfg["field_a"])
    fb = _load_field(cfg["field_b"])
    d, gamma, shift = seminorm_distance(interpolate(fa), interpolate(fb),
                                        grid_factor=int(cfg["grid_factor"]))
    write_json(os.path.join(out, "distance.json"),
               {"distance": d, "gamma": gamma, "shift": shift})
    print(f"distance = {d!r} (gamma = {gamma!r}, shift = {shift!r})")
    return ["distance.json"]


def cmd_headline(cfg, out, seed, threads, fmt):
    rows = experiments.run_headline(
        float(cfg["m"]), float(cfg["beta"]), float(cfg["a"]),
        [int(v) for v in cfg["n_list"]], float(cfg["eps"]),
        method=cfg["method"], steps=int(cfg["steps"]),
        burn_in=int(cfg["burn_in"]), thinning=int(cfg["thinning"]),
        T=cfg["T"] if cfg["T"] is None else float(cfg["T"]), seed=seed,
        scaling=cfg["scaling"])
    write_csv(os.path.join(out, "headline.csv"),
              ["n", "beta_n", "e0n", "p_near", "se", "mean_distance",
               "mean_distance_fine", "samples", "method"],
              [(r.n, r.beta_n, r.e0n, r.p_near, r.se, r.mean_distance,
                r.mean_distance_fine, r.n_samples, r.method) for r in rows])
    for r in rows:
        print(f"n={r.n}: P(dist < eps) = {r.p_near:.3f} +- {r.se:.3f} "
              f"(mean dist {r.mean_distance:.4f})")
    return ["headline.csv"]


COMMANDS = {
    "soliton": cmd_soliton,
    "soliton-discrete": cmd_soliton_discrete,
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "ldtest": cmd_ldtest,
    "concentrate": cmd_concentrate,
    "gncheck": cmd_gncheck,
    "rankcheck": cmd_rankcheck,
    "distance": cmd_distance,
    "headline": cmd_headline,
}


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, _, val = text.partition("=")
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def build_parser():
    ap = argparse.ArgumentParser(prog="dnlslab",
                                 description="lattice Schrodinger heat-bath lab")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON file with the parameter block")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                    help="override a config key (repeatable)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="runs/latest")
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        file_cfg = None
        if args.config:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        overrides = dict(_parse_override(s) for s in args.set)
        cfg = parse_config(args.command, file_cfg, overrides)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = RunManifest(args.out, args.command, cfg, args.seed,
                           args.threads, __version__)
    manifest.start()
    try:
        outputs = COMMANDS[args.command](cfg, args.out, args.seed,
                                         args.threads, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropertyViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest.finish([os.path.join(args.out, p) for p in outputs])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
