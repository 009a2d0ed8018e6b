"""Batch command-line front end.

Subcommands: gen-unitary, sample, diagnose, qa-curve, permanent,
distribution. Every run is fully determined by its configuration and seed;
repeated invocations write byte-identical output files (timing metadata
goes to stdout, never into the files). Errors exit nonzero with a
single-line ``error:<code>: message`` prefix (codes: usage, domain, io).

A flat key=value config file can predefine any ``sample`` option (keys are
the long flag names with underscores, e.g. ``cache_size=4000``); explicit
command-line flags override file values.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import bosonic, diagnostics, perfmodel, samplers
from .permanent import counters, permanent

SAMPLERS = ("brute", "rejection", "mcmc", "mis", "scmcmc", "scmcmc-improved")

_CONFIG_KEYS = (
    "photons", "modes", "sampler", "proposal", "cache_size", "jump",
    "lambda", "count", "seed", "burn_in", "unitary", "out",
    "retain_candidates", "discard_cache", "strategy", "threads",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise _UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = value.strip()
    return out


def _write_config(cfg: dict, path) -> None:
    with open(path, "w") as fh:
        for key in _CONFIG_KEYS:
            if cfg.get(key) is not None:
                fh.write(f"{key}={cfg[key]}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="bosonsamp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-unitary", help="write a Haar-random unitary file")
    p.add_argument("--modes", "-m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="run a sampler and write a samples file")
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--photons", "-n", type=int)
    p.add_argument("--modes", "-m", type=int)
    p.add_argument("--sampler", choices=SAMPLERS)
    p.add_argument("--proposal", choices=samplers.PROPOSAL_KINDS)
    p.add_argument("--cache-size", "-L", type=int)
    p.add_argument("--jump", "-K", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--count", "-N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--unitary", help="unitary file (otherwise generated from seed)")
    p.add_argument("--out")
    p.add_argument("--retain-candidates", action="store_true", default=None)
    p.add_argument("--discard-cache", action="store_true", default=None)
    p.add_argument("--threads", type=int,
                   help="worker cap; never affects results")
    p.add_argument("--save-config", help="write the effective config here")

    p = sub.add_parser("diagnose", help="decorrelation report for a samples file")
    p.add_argument("--samples", required=True)
    p.add_argument("--lags", type=int, default=200)
    p.add_argument("--strategy", choices=bosonic.VALUE_STRATEGIES,
                   default="sort_order")
    p.add_argument("--unitary",
                   help="enables similarity against the exact table")
    p.add_argument("--jump", "-K", type=int,
                   help="correlation window for cache distance stats")
    p.add_argument("--markov", action="store_true",
                   help="explicit transition-matrix analysis (needs --unitary)")
    p.add_argument("--markov-steps", type=int, default=60)
    p.add_argument("--proposal", choices=samplers.PROPOSAL_KINDS,
                   default="uniform")
    p.add_argument("--out", help="report CSV path (default stdout)")

    p = sub.add_parser("qa-curve", help="quantum-advantage sweeps (CSV)")
    p.add_argument("--eta", required=True,
                   help="comma-separated transmission probabilities")
    p.add_argument("--network", choices=perfmodel.NETWORKS, default="square")
    p.add_argument("--rate", default="const:1e10",
                   help="const:<Hz> or scaled:<Hz>")
    p.add_argument("--classical-preset", choices=tuple(perfmodel.CLASSICAL_PRESETS),
                   default="scmcmc")
    p.add_argument("--max-n", type=int, default=100)
    p.add_argument("--min-eta-cap", type=int,
                   help="also report the minimum eta at this photon cap")
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("permanent", help="permanent of a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--algorithm", choices=("glynn", "ryser", "naive"),
                   default="glynn")

    p = sub.add_parser("distribution", help="dump the exact output distribution")
    p.add_argument("--photons", "-n", type=int, required=True)
    p.add_argument("--modes", "-m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--unitary")
    p.add_argument("--out", help="CSV path (default stdout)")

    return parser


def _read_matrix(path) -> np.ndarray:
    """Unitary file layout without the unitarity requirement."""
    with open(path) as fh:
        try:
            m = int(fh.readline().split()[0])
        except (IndexError, ValueError):
            raise ValueError(f"{path}: first line must be the dimension") from None
        rows = []
        for i in range(m):
            parts = fh.readline().split()
            if len(parts) != 2 * m:
                raise ValueError(
                    f"{path}: line {i + 2}: expected {2 * m} numbers, got {len(parts)}"
                )
            vals = [float(x) for x in parts]
            rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(m)])
    return np.array(rows, dtype=np.complex128)


def _cmd_gen_unitary(args) -> int:
    if args.modes < 1:
        raise _UsageError("--modes must be >= 1")
    u = bosonic.haar_random_unitary(args.modes, args.seed)
    bosonic.write_unitary(u, args.out)
    print(f"unitarity_residual={bosonic.unitarity_residual(u):.3e}")
    return 0


def _merge_sample_config(args) -> dict:
    cfg = {key: None for key in _CONFIG_KEYS}
    if args.config:
        raw = _read_config(args.config)
        casts = {
            "photons": int, "modes": int, "cache_size": int, "jump": int,
            "count": int, "seed": int, "burn_in": int, "threads": int,
            "lambda": float,
            "retain_candidates": lambda s: s.lower() in ("1", "true", "yes"),
            "discard_cache": lambda s: s.lower() in ("1", "true", "yes"),
        }
        for key, value in raw.items():
            cfg[key] = casts.get(key, str)(value)
    overrides = {
        "photons": args.photons, "modes": args.modes, "sampler": args.sampler,
        "proposal": args.proposal, "cache_size": args.cache_size,
        "jump": args.jump, "lambda": args.lam, "count": args.count,
        "seed": args.seed, "burn_in": args.burn_in, "unitary": args.unitary,
        "out": args.out, "retain_candidates": args.retain_candidates,
        "discard_cache": args.discard_cache, "threads": args.threads,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if cfg["proposal"] is None:
        cfg["proposal"] = "uniform"
    if cfg["burn_in"] is None:
        cfg["burn_in"] = samplers.DEFAULT_BURN_IN
    if cfg["retain_candidates"] is None:
        cfg["retain_candidates"] = False
    if cfg["discard_cache"] is None:
        cfg["discard_cache"] = False
    return cfg


def _cmd_sample(args) -> int:
    cfg = _merge_sample_config(args)
    for key in ("sampler", "count", "seed", "out"):
        if cfg[key] is None:
            raise _UsageError(f"missing required option --{key.replace('_', '-')}")
    kind = cfg["sampler"]
    if kind in ("mis", "scmcmc-improved") and cfg["jump"] is None:
        raise _UsageError(f"sampler {kind} needs --jump")
    if kind in ("scmcmc", "scmcmc-improved") and cfg["cache_size"] is None:
        raise _UsageError(f"sampler {kind} needs --cache-size")

    if cfg["unitary"]:
        u = bosonic.read_unitary(cfg["unitary"])
        m = u.shape[0]
        if cfg["modes"] is not None and cfg["modes"] != m:
            raise _UsageError(f"--modes {cfg['modes']} != unitary dimension {m}")
        if cfg["photons"] is None:
            raise _UsageError("--photons is required with --unitary")
        inst = bosonic.ProblemInstance(cfg["photons"], m, u)
    else:
        if cfg["photons"] is None or cfg["modes"] is None:
            raise _UsageError("need --photons and --modes (or --unitary)")
        inst = bosonic.random_instance(cfg["photons"], cfg["modes"], cfg["seed"])

    counters.reset()
    t0 = time.perf_counter()
    count, seed = cfg["count"], cfg["seed"]
    common = dict(proposal=cfg["proposal"], burn_in=cfg["burn_in"])
    if kind == "brute":
        run = samplers.brute_force_sample(bosonic.full_distribution(inst), count, seed)
    elif kind == "rejection":
        run = samplers.rejection_sample(inst, count, seed, lam=cfg["lambda"])
    elif kind == "mcmc":
        run = samplers.mcmc_sample(inst, count, seed, **common)
    elif kind == "mis":
        run = samplers.mis_sample(inst, cfg["jump"], count, seed, **common)
    elif kind == "scmcmc":
        run = samplers.sc_mcmc_sample(
            inst, cfg["cache_size"], count, seed,
            retain_candidates=cfg["retain_candidates"],
            discard_cache=cfg["discard_cache"], **common)
    else:
        run = samplers.improved_sc_mcmc_sample(
            inst, cfg["cache_size"], cfg["jump"], count, seed,
            retain_candidates=cfg["retain_candidates"],
            discard_cache=cfg["discard_cache"], **common)
    wall = time.perf_counter() - t0

    out = cfg["out"]
    cand_path = f"{out}.candidates" if cfg["retain_candidates"] else None
    idx_path = f"{out}.indices" if cfg["retain_candidates"] else None
    if cfg["retain_candidates"] and run.candidates is None:
        cand_path = idx_path = None
    samplers.write_sample_run(run, out, cand_path, idx_path)
    if args.save_config:
        _write_config(cfg, args.save_config)

    share = counters.seconds / wall if wall > 0 else 0.0
    print(f"samples={len(run.samples)}")
    print(f"permanent_evals={run.permanent_evals}")
    print(f"acceptance_count={run.acceptance_count}")
    print(f"wall_time_s={wall:.3f}")
    print(f"permanent_time_share={share:.4f}")
    return 0


def _cmd_diagnose(args) -> int:
    header, patterns = samplers.load_samples(args.samples)
    if not patterns:
        raise ValueError(f"{args.samples}: no samples")
    n, m = int(header["n"]), int(header["m"])

    inst = None
    if args.unitary:
        u = bosonic.read_unitary(args.unitary)
        inst = bosonic.ProblemInstance(n, u.shape[0], u)
    if args.strategy == "neg_log_p" and inst is None:
        raise _UsageError("--strategy neg_log_p needs --unitary")

    rows: list[tuple] = [("n_samples", "", len(patterns)),
                         ("strategy", "", args.strategy)]
    values = bosonic.values_for(patterns, args.strategy, inst)
    for k, r in enumerate(diagnostics.autocorrelations(values, args.lags), start=1):
        rows.append(("r_k", k, "degenerate" if r is None else f"{r:.6f}"))
    d = diagnostics.durbin_watson(values)
    rows.append(("durbin_watson", "", f"{d:.6f}"))
    rows.append(("dw_first_order", "", f"{1 - d / 2:.6f}"))

    if inst is not None and inst.state_space_size() <= bosonic.enum_cap():
        table = bosonic.full_distribution(inst)
        freq = diagnostics.frequency_histogram(patterns, n, m, cap=len(table))
        sim = diagnostics.similarity(freq, table.normalized)
        rows.append(("similarity", "", f"{sim:.6f}"))

    cand_file = header.get("candidates_file")
    idx_file = header.get("indices_file")
    if idx_file:
        indices = samplers.load_indices(idx_file)
        run = samplers.SampleRun(
            sampler=header.get("sampler", "?"), n=n, m=m,
            seed=int(header.get("seed", 0)), samples=list(patterns),
            source_indices=indices)
        jump = args.jump or int(header.get("K", 200))
        stats = diagnostics.cache_distance_stats(run, jump)
        rows += [
            ("mean_distance", "", f"{stats.mean_distance:.4f}"),
            ("adjacent_count", "", stats.adjacent_count),
            ("adjacent_ratio", "", f"{stats.adjacent_ratio:.6f}"),
            ("window_count", jump, stats.window_count),
            ("window_ratio", jump, f"{stats.window_ratio:.6f}"),
        ]
        for k in sorted(stats.histogram):
            if k > 200:
                break
            rows.append(("distance_hist", k, stats.histogram[k]))
    elif cand_file:
        rows.append(("cache_distance_stats", "", "skipped: no indices file"))

    if args.markov:
        if inst is None:
            raise _UsageError("--markov needs --unitary")
        p, _, raw = diagnostics.transition_matrix(inst, args.proposal)
        pi = raw / raw.sum()
        rows.append(("row_sum_error", "",
                     f"{abs(p.sum(axis=1) - 1.0).max():.3e}"))
        rows.append(("stationary_error", "",
                     f"{abs(pi @ p - pi).max():.3e}"))
        curve = diagnostics.averaged_tvd_curve(p, pi, args.markov_steps)
        for k, v in enumerate(curve, start=1):
            rows.append(("d_A", k, f"{v:.6e}"))

    if args.out:
        with open(args.out, "w") as fh:
            diagnostics.write_report_rows(rows, fh)
    else:
        diagnostics.write_report_rows(rows, sys.stdout)
    return 0


def _parse_rate(text: str) -> perfmodel.RepetitionRate:
    form, _, hz = text.partition(":")
    if form not in perfmodel.RATE_FORMS or not hz:
        raise _UsageError("--rate must look like const:1e10 or scaled:76e6")
    return perfmodel.RepetitionRate(form, float(hz))


def _cmd_qa_curve(args) -> int:
    rate = _parse_rate(args.rate)
    try:
        etas = [float(tok) for tok in args.eta.split(",") if tok]
    except ValueError:
        raise _UsageError(f"bad --eta list {args.eta!r}") from None
    for eta in etas:
        if not 0 < eta <= 1:
            raise ValueError(f"eta {eta} outside (0, 1]")

    lines = []
    for eta in etas:
        params = perfmodel.preset_params(args.classical_preset, eta,
                                         args.network, rate)
        thr = perfmodel.threshold_photons(params)
        lines.append(f"# threshold eta={eta:g} n="
                     f"{'unreachable' if thr is None else thr}")
    if args.min_eta_cap:
        params = perfmodel.preset_params(args.classical_preset, 1.0,
                                         args.network, rate)
        eta_min = perfmodel.min_eta_at_cap(params, args.min_eta_cap)
        lines.append(f"# min_eta cap={args.min_eta_cap} eta={eta_min:.6f}")
    lines.append("n,eta,t_c,t_q,qa")
    for eta in etas:
        params = perfmodel.preset_params(args.classical_preset, eta,
                                         args.network, rate)
        for n in range(1, args.max_n + 1):
            tc = perfmodel.classical_time(n, params)
            tq = perfmodel.quantum_time(n, params)
            lines.append(f"{n},{eta:g},{tc:.6e},{tq:.6e},"
                         f"{perfmodel.qa(n, params):.6f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_permanent(args) -> int:
    mat = _read_matrix(args.matrix)
    value = permanent(mat, algorithm=args.algorithm)
    print(f"{value.real:.17e} {value.imag:.17e}")
    return 0


def _cmd_distribution(args) -> int:
    if args.unitary:
        u = bosonic.read_unitary(args.unitary)
        inst = bosonic.ProblemInstance(args.photons, u.shape[0], u)
    else:
        if args.modes is None or args.seed is None:
            raise _UsageError("need --modes and --seed (or --unitary)")
        inst = bosonic.random_instance(args.photons, args.modes, args.seed)
    table = bosonic.full_distribution(inst)
    norm = table.normalized
    lines = [f"# p_cf={table.collision_free_mass:.17e}", "pattern,raw,normalized"]
    for pat, raw, p in zip(table.patterns, table.raw, norm):
        modes = ";".join(str(j) for j in bosonic.occupied_modes(pat))
        lines.append(f"{modes},{raw:.17e},{p:.17e}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "gen-unitary": _cmd_gen_unitary,
    "sample": _cmd_sample,
    "diagnose": _cmd_diagnose,
    "qa-curve": _cmd_qa_curve,
    "permanent": _cmd_permanent,
    "distribution": _cmd_distribution,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error:domain: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
