"""Batch command-line front-end.

Subcommands: fit, chain, simulate, sweep, bounds.  Each reads a JSON
experiment config, runs the requested construction or evolution, and writes
CSV/JSON artifacts (plus report figures) into the output directory.

Exit codes: 0 success, 2 malformed config, 3 numeric or precondition
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bounds as bd
from . import chainmap, dynamics, pseudomode, spectral
from .config import ExperimentConfig, load_config, matrix_to_json
from .errors import BathmodesError, ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _out_dir(cfg: ExperimentConfig, args) -> str:
    out = args.out or cfg.output
    if not out:
        raise ConfigError("no output directory: set --out or the 'output' field")
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x: float) -> str:
    return "%.17g" % x


# --- surrogate dispatch ------------------------------------------------------

def _pseudomode_params(cfg: ExperimentConfig, M: int) -> tuple[float, float]:
    sc = cfg.surrogate
    if sc.kappa is not None and sc.omega_c is not None:
        return sc.kappa, sc.omega_c
    if sc.kappa_over_delta is not None:
        if sc.omega_c is None:
            raise ConfigError("kappa_over_delta needs an explicit omega_c")
        delta = 2.0 * sc.omega_c / (M - 1) if M > 1 else 0.0
        return sc.kappa_over_delta * delta, sc.omega_c
    kappa, omega_c = pseudomode.select_parameters(cfg.coupling, M)
    if sc.omega_c is not None:
        omega_c = sc.omega_c
    if sc.kappa is not None:
        kappa = sc.kappa
    return kappa, omega_c


def _build_fit(cfg: ExperimentConfig, M=None) -> pseudomode.LorentzianFit:
    if cfg.surrogate.kind != "pseudomode":
        raise ConfigError("this command needs a pseudomode surrogate block")
    M = M if M is not None else cfg.surrogate.M
    if M is None:
        raise ConfigError("pseudomode surrogate needs the mode count M")
    kappa, omega_c = _pseudomode_params(cfg, M)
    return pseudomode.fit_lorentzians(cfg.coupling, omega_c, kappa, M)


def _run_surrogate(cfg: ExperimentConfig, value=None) -> dynamics.TrajectoryResult:
    ev = cfg.evolve
    if ev is None:
        raise ConfigError("this command needs an 'evolve' block")
    kind = cfg.surrogate.kind
    if kind == "pseudomode":
        fit = _build_fit(cfg, value)
        pm = pseudomode.to_pseudomode(fit, cfg.surrogate.n_max)
        return dynamics.lindblad_evolve(
            cfg.system, pm, ev.init_density(), ev.t_end, ev.h,
            dim_cap=ev.dim_cap, leak_threshold=ev.leak_threshold,
        )
    if kind == "chain":
        N = value if value is not None else cfg.surrogate.N
        if N is None or cfg.surrogate.omega_c is None:
            raise ConfigError("chain surrogate needs N and omega_c")
        cm = chainmap.build_chain(cfg.coupling, cfg.surrogate.omega_c, N, cfg.surrogate.n_max)
        return dynamics.chain_evolve(
            cfg.system, cm, ev.init_vector(), ev.t_end, ev.h,
            dim_cap=ev.dim_cap, leak_threshold=ev.leak_threshold,
        )
    if kind == "oracle":
        return dynamics.volterra_oracle(
            cfg.system, cfg.coupling, ev.t_end, ev.h, ev.init_density()
        )
    raise ConfigError(f"unknown surrogate type {kind!r}")


def _run_oracle(cfg: ExperimentConfig) -> dynamics.TrajectoryResult:
    ev = cfg.evolve
    h = ev.oracle_h if ev.oracle_h is not None else ev.h
    if cfg.surrogate.kind == "chain":
        init = np.outer(ev.init_vector(), np.conj(ev.init_vector()))
    else:
        init = ev.init_density()
    return dynamics.volterra_oracle(cfg.system, cfg.coupling, ev.t_end, h, init)


def _bound_context(cfg: ExperimentConfig, omega_c=None) -> bd.BoundContext:
    window = spectral.FrequencyWindow(omega_c) if omega_c else None
    try:
        v_inf = spectral.sup_v(cfg.coupling, window)
    except ConfigError:
        # tabulated couplings have no unbounded sup; fall back to the grid
        v_inf = spectral.sup_v(
            cfg.coupling, spectral.FrequencyWindow(max(abs(w) for w in cfg.coupling.omega))
        )
    return bd.BoundContext(v_inf, cfg.system.norm_L, cfg.gamma_constant)


def _row_certificate(cfg: ExperimentConfig, value: int) -> float:
    """Total a-priori certificate (surrogate error + cutoff) for one sweep row."""
    ev = cfg.evolve
    t = ev.t_end
    if cfg.surrogate.kind == "pseudomode":
        kappa, omega_c = _pseudomode_params(cfg, value)
        ctx = _bound_context(cfg, omega_c)
        parts = pseudomode.lorentz_l1_error_bound(cfg.coupling, omega_c, kappa, value)
        surrogate_term = bd.coupling_replacement_bound_from_l1(ctx, sum(parts), t)
    elif cfg.surrogate.kind == "chain":
        omega_c = cfg.surrogate.omega_c
        ctx = _bound_context(cfg, omega_c)
        _, surrogate_term = bd.chain_truncation_bound(ctx, cfg.coupling, omega_c, value, t)
    else:
        raise ConfigError("sweeps need a pseudomode or chain surrogate")
    cutoff = bd.cutoff_error_sq_int(ctx, cfg.coupling, omega_c, t)
    return surrogate_term + cutoff


def _write_trajectory_csv(path: str, result: dynamics.TrajectoryResult) -> None:
    D = result.states.shape[1]
    header = ["t"]
    for i in range(D):
        for j in range(D):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    header.append("leakage")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, t in enumerate(result.times):
            row = [_fmt(t)]
            for i in range(D):
                for j in range(D):
                    z = result.states[k, i, j]
                    row += [_fmt(z.real), _fmt(z.imag)]
            row.append(_fmt(result.leakage[k]))
            writer.writerow(row)


# --- commands ----------------------------------------------------------------

def cmd_fit(cfg: ExperimentConfig, args) -> int:
    out = _out_dir(cfg, args)
    fit = _build_fit(cfg)
    parts = pseudomode.lorentz_l1_error_bound(
        cfg.coupling, fit.omega_c, fit.kappa, fit.n_modes
    )
    _write_json(os.path.join(out, "fit.json"), pseudomode.fit_to_json(fit))
    _write_json(
        os.path.join(out, "bound.json"),
        {
            "smoothing": parts[0],
            "discretization": parts[1],
            "tails": parts[2],
            "total": sum(parts),
        },
    )
    return EXIT_OK


def cmd_chain(cfg: ExperimentConfig, args) -> int:
    out = _out_dir(cfg, args)
    if cfg.surrogate.kind != "chain":
        raise ConfigError("the chain command needs a chain surrogate block")
    N, omega_c = cfg.surrogate.N, cfg.surrogate.omega_c
    if N is None or omega_c is None:
        raise ConfigError("chain surrogate needs N and omega_c")
    cm = chainmap.build_chain(cfg.coupling, omega_c, N, cfg.surrogate.n_max)
    rule = chainmap.gauss_rule(np.asarray(cm.alpha), np.asarray(cm.b))
    _write_json(os.path.join(out, "chain.json"), chainmap.chain_to_json(cm))
    _write_json(os.path.join(out, "gauss.json"), chainmap.gauss_rule_to_json(rule))
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    out = _out_dir(cfg, args)
    result = _run_surrogate(cfg)
    if args.strict and "warning" in result.metadata:
        print(f"leakage above threshold: {result.metadata['warning']}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_trajectory_csv(os.path.join(out, "trajectory.csv"), result)
    _write_json(os.path.join(out, "metadata.json"), result.metadata)
    from . import plotting

    plotting.trajectory_figure(
        os.path.join(out, "trajectory.png"),
        result.times, result.states, result.leakage,
    )
    return EXIT_OK


def _sweep_worker(payload) -> tuple[int, float, float, float]:
    raw, overrides, value = payload
    from .config import parse_config

    cfg = parse_config(json.loads(raw))
    t0 = time.perf_counter()
    result = _run_surrogate(cfg, value)
    oracle = _run_oracle(cfg)
    err = dynamics.trace_distance(result.states[-1], oracle.states[-1])
    cert = _row_certificate(cfg, value)
    return value, err, cert, time.perf_counter() - t0


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    out = _out_dir(cfg, args)
    if not cfg.sweep:
        raise ConfigError("sweep command needs a nonempty 'sweep' block")
    label = "M" if cfg.surrogate.kind == "pseudomode" else "N"
    payloads = [(json.dumps(cfg.raw), (), v) for v in cfg.sweep]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    else:
        rows = [_sweep_worker(p) for p in payloads]
    rows.sort(key=lambda r: r[0])

    with open(os.path.join(out, "report.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([label, "trace_distance", "certificate"])
        for value, err, cert, _ in rows:
            writer.writerow([str(value), _fmt(err), _fmt(cert)])

    values = np.array([r[0] for r in rows], dtype=float)
    errors = np.array([r[1] for r in rows], dtype=float)
    certs = np.array([r[2] for r in rows], dtype=float)
    slope = None
    if len(rows) >= 2 and np.all(errors > 0):
        slope = float(np.polyfit(np.log(values), np.log(errors), 1)[0])
    meta = {
        "parameter": label,
        "slope": slope,
        "timings": {str(r[0]): r[3] for r in rows},
    }
    _write_json(os.path.join(out, "metadata.json"), meta)
    from . import plotting

    plotting.convergence_figure(
        os.path.join(out, "convergence.png"), values, errors, certs, label
    )
    return EXIT_OK


def cmd_bounds(cfg: ExperimentConfig, args) -> int:
    out = _out_dir(cfg, args)
    if not cfg.certificates:
        raise ConfigError("bounds command needs a nonempty 'certificates' list")
    records = []
    for item in cfg.certificates:
        name = item.get("name")
        if name == "g_factor":
            ctx = _bound_context(cfg, item.get("omega_c"))
            val = bd.g_factor(ctx, float(item["t"]))
            records.append(bd.certificate_record(name, item, val))
        elif name == "cutoff_error_sq_int":
            ctx = _bound_context(cfg, item.get("omega_c"))
            val = bd.cutoff_error_sq_int(
                ctx, cfg.coupling, float(item["omega_c"]), float(item["t"])
            )
            records.append(bd.certificate_record(name, item, val))
        elif name == "coupling_replacement":
            ctx = _bound_context(cfg, item.get("omega_c"))
            other = spectral.spec_from_json(item["coupling2"])
            window = (
                spectral.FrequencyWindow(float(item["omega_c"]))
                if "omega_c" in item else None
            )
            val = bd.coupling_replacement_bound(
                ctx, cfg.coupling, other, float(item["t"]), window
            )
            records.append(bd.certificate_record(name, {"t": item["t"]}, val))
        elif name == "chain_truncation":
            ctx = _bound_context(cfg, item.get("omega_c"))
            analytic, exact = bd.chain_truncation_bound(
                ctx, cfg.coupling, float(item["omega_c"]), int(item["N"]),
                float(item["t"]),
            )
            records.append(bd.certificate_record(name, item, analytic, "analytic"))
            records.append(bd.certificate_record(name, item, exact, "exact_sup"))
        elif name == "lorentz_l1":
            parts = pseudomode.lorentz_l1_error_bound(
                cfg.coupling, float(item["omega_c"]), float(item["kappa"]), int(item["M"])
            )
            records.append(bd.certificate_record(name, item, sum(parts)))
        elif name == "harmonic_cutoff_V":
            val = bd.harmonic_cutoff_V(
                cfg.coupling, float(item["omega_c"]), float(item["t"])
            )
            records.append(bd.certificate_record(name, item, val))
        elif name == "xi":
            val = bd.xi_bound(
                float(item["a"]), float(item["b"]), float(item["y"]), float(item["p"])
            )
            records.append(bd.certificate_record(name, item, val))
        else:
            raise ConfigError(f"unknown certificate name {name!r}")
    _write_json(os.path.join(out, "bounds.json"), records)
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "chain": cmd_chain,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bathmodes",
        description="Discrete-mode surrogates for non-Markovian bosonic environments",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="override a dotted config path; value parsed as JSON",
    )
    parser.add_argument("--strict", action="store_true", help="abort on leakage warnings")
    parser.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        # structural problems surfacing after load are still config errors
        # unless they came from a numeric precondition; preconditions raise
        # from the library with specific messages, so inspect the phase
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BathmodesError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
