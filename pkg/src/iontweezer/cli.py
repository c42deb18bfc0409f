"""Command-line entry point: ``iontweezer <subcommand> --config run.json``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import ConventionalTrap, Tweezer, get_species, make_chain
from .config import ConfigError, RunConfig, parse_config
from .eigvec import EigvecProblem, recovered_overlaps, solve_eigenvectors
from .ida import IdaConfig, generate_solvable_target, idade
from .modes import build_a_matrix, diagonalize
from .multispecies import restore_com, strength_by_scaling_model
from .optics import load_species, tweezer_report
from .thermo import (
    LeakageError,
    RampSchedule,
    analytic_delta_f,
    identity_residual,
    jarzynski_estimate,
    propagate,
    work_distribution,
)

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2
TWO_PI = 2 * math.pi


@dataclass
class Results:
    name: str
    summary: dict
    rows: list[dict] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    exit_code: int = EXIT_OK


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields = list(dict.fromkeys(k for r in rows for k in r))
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(_plain(v)) if isinstance(v, (list, tuple, np.ndarray)) else _plain(v) for k, v in r.items()})
    return buf.getvalue()


def emit_results(results: Results, out_dir: str | Path, fmt: str = "both") -> list[Path]:
    """Write ``<name>.json`` and/or ``<name>.csv`` (plus extra tables) atomically."""
    out_dir = Path(out_dir)
    written = []
    if fmt in ("json", "both"):
        p = out_dir / f"{results.name}.json"
        payload = {"summary": results.summary, "rows": results.rows, **results.tables}
        _atomic_write(p, json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n")
        written.append(p)
    if fmt in ("csv", "both"):
        for name, rows in [(results.name, results.rows), *results.tables.items()]:
            if rows:
                p = out_dir / f"{name}.csv"
                _atomic_write(p, _csv_text(rows))
                written.append(p)
    return written


def _trap(cfg: RunConfig) -> ConventionalTrap:
    t = cfg.chain.trap
    return ConventionalTrap.from_hz(*t.freqs_Hz, reference=get_species(t.reference),
                                    transverse_scaling=t.transverse_scaling, dc_ratio=t.dc_ratio)


def _chain(cfg: RunConfig):
    if cfg.chain is None:
        raise ConfigError("chain: block required for this subcommand")
    chain = make_chain(cfg.chain.species, _trap(cfg))
    tweezers = []
    for t in cfg.chain.tweezers:
        if t.ion >= chain.n:
            raise ConfigError(f"chain.tweezers: ion index {t.ion} out of range for {chain.n} ions")
        tweezers.append(Tweezer(t.ion, (TWO_PI * t.omega_x_Hz, TWO_PI * t.omega_y_Hz, TWO_PI * t.omega_z_Hz),
                                (t.sign_x, t.sign_y, t.sign_z)))
    return chain, tweezers


def _ida_config(cfg: RunConfig, seed: int) -> IdaConfig:
    s = cfg.solver
    return IdaConfig(TWO_PI * s.tolerance_Hz, s.max_iter, s.population, s.zeta, s.kappa, s.eta, seed, s.max_rounds)


def run_modes(cfg: RunConfig, threads: int, atomic_data, axis: str = "all") -> Results:
    chain, tweezers = _chain(cfg)
    axes = cfg.modes.axes if axis == "all" else [axis]
    rows, summary = [], {"positions_um": chain.positions * 1e6, "species": [s.name for s in chain.species]}
    for axis in axes:
        m = diagonalize(build_a_matrix(chain, axis, tweezers))
        summary[f"freqs_{axis}_Hz"] = m.freqs / TWO_PI
        for k in range(chain.n):
            rows.append({"axis": axis, "mode": k, "frequency_Hz": m.freqs[k] / TWO_PI,
                         **{f"b_{i}": m.vectors[i, k] for i in range(chain.n)}})
    return Results("modes", summary, rows)


def _solution_summary(sol) -> dict:
    return {
        "converged": sol.converged,
        "omega_opt_Hz": sol.omega / TWO_PI,
        "sign": sol.sign,
        "target_Hz": sol.w_target / TWO_PI,
        "achieved_Hz": sol.w_res / TWO_PI,
        "error_Hz": sol.error / TWO_PI,
        "rounds": sol.rounds,
        "iterations": sol.iterations,
        "strong_anti_trapping": sol.strong_anti_trapping,
    }


def run_solve_freqs(cfg: RunConfig, threads: int, atomic_data) -> Results:
    chain, _ = _chain(cfg)
    if cfg.solver.target_frequencies_Hz is None:
        raise ConfigError("solver.target_frequencies_Hz: required for solve-freqs")
    axis = cfg.solver.axis
    a_conv = build_a_matrix(chain, axis).matrix
    w_tar = TWO_PI * np.asarray(cfg.solver.target_frequencies_Hz)
    if w_tar.size != chain.n:
        raise ConfigError(f"solver.target_frequencies_Hz: expected {chain.n} values, got {w_tar.size}")
    history: list[float] = []
    sol = idade(w_tar, a_conv, _ida_config(cfg, cfg.seed), chain, axis, history)
    summary = {**_solution_summary(sol), "seed": cfg.seed}
    rows = [{"ion": i, "omega_opt_Hz": sol.omega[i] / TWO_PI, "sign": int(sol.sign[i])} for i in range(chain.n)]
    hist = [{"step": k, "best_error_Hz": e / TWO_PI} for k, e in enumerate(history)]
    return Results("solve_freqs", summary, rows, {"solve_freqs_history": hist},
                   EXIT_OK if sol.converged else EXIT_FAILED)


def run_bench_freqs(cfg: RunConfig, threads: int, atomic_data) -> Results:
    chain, _ = _chain(cfg)
    axis = cfg.solver.axis
    a_conv = build_a_matrix(chain, axis).matrix
    conv = chain.conv_freqs()
    max_strength = cfg.bench.max_strength_ratio * float(np.min(conv[:, "xyz".index(axis)]))
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.bench.n_targets)
    targets = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        targets.append((generate_solvable_target(chain, axis, rng, max_strength, cfg.bench.allow_anti_trapping),
                        int(ss.generate_state(1)[0])))

    def solve(item):
        (w_tar, omega, sign), seed = item
        sol = idade(w_tar, a_conv, _ida_config(cfg, seed), chain, axis)
        return {"target": w_tar / TWO_PI, "converged": sol.converged, "error_Hz": sol.error / TWO_PI,
                "rounds": sol.rounds, "iterations": sol.iterations, "strong_anti_trapping": sol.strong_anti_trapping}

    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        rows = list(pool.map(solve, targets))
    ok = sum(r["converged"] for r in rows)
    summary = {"n_targets": len(rows), "successes": ok, "success_fraction": ok / len(rows),
               "tolerance_Hz": cfg.solver.tolerance_Hz}
    return Results("bench_freqs", summary, [{"target_index": i, **r} for i, r in enumerate(rows)])


def run_solve_vecs(cfg: RunConfig, threads: int, atomic_data) -> Results:
    chain, tweezers = _chain(cfg)
    axis = cfg.eigvec.axis
    a_conv = build_a_matrix(chain, axis).matrix
    if cfg.eigvec.target_vectors is not None:
        b_tar = np.asarray(cfg.eigvec.target_vectors, dtype=float)
    else:
        b_tar = diagonalize(build_a_matrix(chain, axis, tweezers)).vectors
    try:
        problem = EigvecProblem(b_tar, a_conv, cfg.eigvec.tolerance)
    except ValueError as exc:
        raise ConfigError(f"eigvec.target_vectors: {exc}") from exc
    sol = solve_eigenvectors(problem)
    summary = {"feasible": sol.feasible, "residual": sol.residual, "physical": sol.physical,
               "degenerate": sol.degenerate}
    rows = []
    if sol.feasible:
        summary["freqs_Hz"] = sol.freqs / TWO_PI
        summary["column_overlaps"] = recovered_overlaps(sol, b_tar)
        rows = [{"ion": i, "omega_opt_Hz": sol.omega[i] / TWO_PI, "sign": int(sol.sign[i])} for i in range(chain.n)]
    return Results("solve_vecs", summary, rows, exit_code=EXIT_OK if sol.feasible else EXIT_FAILED)


def _per_wavelength(value, n, name):
    if value is None or isinstance(value, (int, float)):
        return [value] * n
    if len(value) != n:
        raise ConfigError(f"optics.{name}: expected {n} values, one per wavelength")
    return list(value)


def run_tweezer_params(cfg: RunConfig, threads: int, atomic_data) -> Results:
    try:
        species = load_species(atomic_data)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        raise ConfigError(f"atomic data: {exc}") from exc
    o = cfg.optics
    n = len(o.wavelengths_nm)
    waists = _per_wavelength(o.waist_um, n, "waist_um")
    powers = _per_wavelength(o.power_W, n, "power_W")
    rows = []
    for lam, w, p in zip(o.wavelengths_nm, waists, powers):
        target = None if p is not None else TWO_PI * o.target_trap_Hz
        rows.append(tweezer_report(species, lam * 1e-9, w * 1e-6, power=p, omega_target=target))
    return Results("tweezer_params", {"species": species.name, "n_wavelengths": n}, rows)


def run_thermo(cfg: RunConfig, threads: int, atomic_data) -> Results:
    t = cfg.thermo
    omega_z = TWO_PI * t.omega_z_Hz

    def one(tau):
        ramp = RampSchedule.mass_ratio(omega_z, t.mass_expt_amu, t.mass_tar_amu, tau)
        return ramp, propagate(ramp, t.n_max)

    try:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            runs = list(pool.map(one, t.tau_omega_f))
    except LeakageError as exc:
        return Results("thermo", {"error": str(exc), "leakage": exc.leakage}, exit_code=EXIT_FAILED)
    rows, dists = [], []
    for tau, (ramp, tm) in zip(t.tau_omega_f, runs):
        for beta in t.beta_hbar_omega_f:
            d = work_distribution(tm, beta, ramp.omega_i, ramp.omega_f)
            est = jarzynski_estimate(d)
            rows.append({"tau_omega_f": tau, "beta_hbar_omega_f": beta, "mean_work": est.mean_work,
                         "delta_f_estimate": est.delta_f,
                         "delta_f_exact": analytic_delta_f(ramp.omega_i, ramp.omega_f, beta),
                         "identity_residual": identity_residual(d, ramp.omega_i, ramp.omega_f),
                         "leakage": tm.leakage})
            if t.dump_distribution:
                dists += [{"tau_omega_f": tau, "beta_hbar_omega_f": beta, "work": w, "probability": p}
                          for w, p in zip(d.work, d.probs)]
    summary = {"max_abs_identity_residual": max(abs(r["identity_residual"]) for r in rows),
               "omega_f_over_omega_i": math.sqrt(t.mass_expt_amu / t.mass_tar_amu), "n_max": t.n_max}
    tables = {"thermo_work_distribution": dists} if dists else {}
    return Results("thermo", summary, rows, tables)


def run_multispecies(cfg: RunConfig, threads: int, atomic_data) -> Results:
    if cfg.chain is None:
        raise ConfigError("chain: block required for this subcommand")
    trap = _trap(cfg)
    m = cfg.multispecies
    ref = get_species(m.reference_species) if m.reference_species else None
    r = restore_com(cfg.chain.species, trap, m.axis, ref)
    summary = {
        "axis": r.axis,
        "omega_opt_Hz": r.omega_opt / TWO_PI,
        "sign": r.sign,
        "strength_ratio": r.strength_ratio,
        "strength_ratio_by_scaling_model": strength_by_scaling_model(cfg.chain.species, trap, m.axis),
        "freqs_reference_Hz": r.freqs_reference / TWO_PI,
        "freqs_before_Hz": r.freqs_before / TWO_PI,
        "freqs_after_Hz": r.freqs_after / TWO_PI,
        "com_overlap_before": r.com_overlap_before,
        "com_overlap_after": r.com_overlap_after,
        "uniform_residual": r.uniform_residual,
        "all_vectors_feasible": r.all_vectors_feasible,
    }
    rows = [{"mode": k, "reference_Hz": a / TWO_PI, "before_Hz": b / TWO_PI, "after_Hz": c / TWO_PI}
            for k, (a, b, c) in enumerate(zip(r.freqs_reference, r.freqs_before, r.freqs_after))]
    return Results("multispecies", summary, rows)


COMMANDS = {
    "modes": (run_modes, "normal modes of a chain with tweezers"),
    "solve-freqs": (run_solve_freqs, "tweezer strengths for a target spectrum (IDADE)"),
    "bench-freqs": (run_bench_freqs, "success statistics of IDADE on random solvable targets"),
    "solve-vecs": (run_solve_vecs, "tweezer strengths for target eigenvectors"),
    "tweezer-params": (run_tweezer_params, "power, light shifts and scattering of a tweezer"),
    "thermo": (run_thermo, "work statistics and Jarzynski estimator for a power ramp"),
    "multispecies": (run_multispecies, "tweezer restoring the centre-of-mass mode of a mixed chain"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iontweezer", description="Phonon-mode engineering of ion chains with optical tweezers")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the configured RNG seed")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--format", choices=["json", "csv", "both"], help="output format")
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
        p.add_argument("--atomic-data", help="atomic data JSON (default: bundled Yb171)")
        if name == "modes":
            p.add_argument("--axis", choices=["x", "y", "z", "all"], default="all")
    return ap


def dispatch(command: str, cfg: RunConfig, threads: int = 0, atomic_data=None, **extra) -> Results:
    return COMMANDS[command][0](cfg, threads, atomic_data, **extra)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg = cfg.model_copy(update={"seed": args.seed})
        if args.threads < 0:
            raise ConfigError("--threads must be non-negative")
        extra = {"axis": args.axis} if args.command == "modes" else {}
        results = dispatch(args.command, cfg, args.threads, args.atomic_data, **extra)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = args.out or cfg.output.dir
    fmt = args.format or cfg.output.format
    for p in emit_results(results, out, fmt):
        print(p)
    if results.exit_code != EXIT_OK:
        print(f"{args.command}: no feasible solution (see {out})", file=sys.stderr)
    return results.exit_code


if __name__ == "__main__":
    sys.exit(main())
