"""Command-line entry point.

Exit codes: 0 pass, 1 assertion failure, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, build_objects, parse_config, simulate, validate
from .diagnostics import (
    DeGiorgiParams,
    DiagnosticError,
    attractor_probe,
    degiorgi_sequences,
    delta_certificate,
    energy_constant_estimate,
    estimate_c_omega,
    iter_lemma_check,
    mu_bound_check,
    regularity_scaling,
    separation_profile,
)
from .dynamics import StateError, StepError
from .grid import GridError
from .kernel import KernelError, build_kernel, convolve_direct
from .potential import FloryHuggins, PotentialDomainError, PotentialParams, Quadratic, check_assumptions
from .trajectory import Trajectory, TrajectoryError, write_manifest

log = logging.getLogger("nlch")

EXIT_OK, EXIT_ASSERT, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class AssertionFailed(Exception):
    """A diagnostic ran but its assertion did not hold."""


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_report(out: Path, name: str, report: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / f"{name}.json"
    p.write_text(json.dumps(report, indent=1, default=_json_default))
    return p


def _out_dir(args, fallback: str | None = None) -> Path:
    return Path(args.out or fallback or ".")


def _load_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config: required for this command")
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    return cfg


def _load_traj(path: str) -> tuple[Trajectory, object, object]:
    traj = Trajectory.load(path)
    if traj.config is None:
        raise ConfigError(f"--traj: {path} has no manifest.json with a config echo")
    _, k, pot = build_objects(traj.config)
    return traj, k, pot


# ---- commands -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    target = args.out or cfg.output_dir
    if not target:
        raise ConfigError("output_dir: give it in the config or via --out")
    out = Path(target)
    traj = simulate(cfg)
    files = traj.save(out)
    manifest = write_manifest(out, cfg.echo(), files)
    print(json.dumps({"out": str(out), "snapshots": len(traj), "content_hash": manifest["content_hash"]}))
    return EXIT_OK


def cmd_degiorgi(args) -> int:
    traj, k, pot = _load_traj(args.traj)
    p = pot.params
    T = traj.t_end if args.T is None else args.T
    delta = args.delta
    if delta is None:
        prof = separation_profile(traj, max(T - 3 * args.tau_tilde, 0.0))
        delta = min(prof.delta_emp / 2, 0.999 * min(p.eps0 / 2, p.eps1))
    dp = DeGiorgiParams(T, args.tau_tilde, delta, args.n_levels, args.sign)
    rep = degiorgi_sequences(traj, dp, k, p, c_omega=args.c_omega)
    out = _out_dir(args, args.traj)
    report = {"params": dp.__dict__, **rep.to_dict()}
    write_report(out, "degiorgi", report)
    rep.write_csv(out / "degiorgi.csv")
    print(json.dumps({"y_n": rep.y_n, "decayed": rep.decayed, "po_holds": rep.po_holds}))
    nested = all(b <= a for a, b in zip(rep.y_n, rep.y_n[1:]))
    if not nested or not rep.po_holds:
        raise AssertionFailed("nesting or truncation bound violated")
    if args.require_decay and not rep.decayed:
        raise AssertionFailed("y_n did not decay")
    return EXIT_OK


def cmd_certify(args) -> int:
    consts = {
        "c_f": args.c_f,
        "c_omega": args.c_omega,
        "c_j": args.c_j,
        "l1_gradJ": args.l1_gradj,
        "energy_constant": args.energy_constant,
        "eps0": args.eps0,
        "eps1": args.eps1,
    }
    source = "arguments"
    if args.traj:
        traj, k, pot = _load_traj(args.traj)
        p = pot.params
        consts["c_f"] = consts["c_f"] or p.c_f
        consts["eps0"], consts["eps1"] = p.eps0, p.eps1
        consts["l1_gradJ"] = consts["l1_gradJ"] or k.l1_gradJ
        consts["energy_constant"] = consts["energy_constant"] or energy_constant_estimate(traj, args.tau, p)
        if consts["c_omega"] is None:
            consts["c_omega"] = 2 * estimate_c_omega(traj.domain, seed=args.seed or 0)[0]
        source = "trajectory estimates (energy constant and C_Omega are empirical)"
    for key, default in (("c_f", 1.0), ("c_omega", 1.0), ("l1_gradJ", 1.0), ("energy_constant", 1.0)):
        if consts[key] is None:
            consts[key] = default
    cert = delta_certificate(consts, args.tau)
    report = {**cert.to_dict(), "source": source}
    if args.traj:
        report["delta_emp"] = separation_profile(traj, args.tau).delta_emp  # side by side, not compared
    write_report(_out_dir(args), "certificate", report)
    print(json.dumps({"ln_delta": cert.ln_delta, "ln_tau_tilde": cert.ln_tau_tilde, "feasible": cert.feasible}))
    if not cert.feasible:
        raise AssertionFailed("certificate failed its log-space re-evaluation")
    return EXIT_OK


def cmd_check_potential(args) -> int:
    p = PotentialParams(theta=args.theta, eps0=args.eps0, eps1=args.eps1, c_f=args.c_f)
    pot = FloryHuggins(p) if args.kind == "flory_huggins" else Quadratic(p)
    rep = check_assumptions(p, args.n_samples, pot)
    write_report(_out_dir(args), "check_potential", {"kind": args.kind, **p.__dict__, **rep.to_dict()})
    print(json.dumps(rep.to_dict()))
    if not (rep.a1_ok and rep.a2_ok and rep.a3_ok):
        raise AssertionFailed("assumption check failed")
    return EXIT_OK


def kernel_bound_checks(k, n_fields: int, seed: int, direct_max: int = 4096) -> dict:
    """Random fields with ``|phi| <= 1``: convolution bounds, and FFT vs direct on small grids."""
    rng = np.random.default_rng(seed)
    d = k.domain
    sup_conv = sup_grad = 0.0
    worst_rel = 0.0
    for i in range(n_fields):
        phi = rng.uniform(-1, 1, d.shape) if i % 2 else np.sign(rng.standard_normal(d.shape))
        conv = k.apply(phi)
        sup_conv = max(sup_conv, float(np.max(np.abs(conv))))
        g = k.apply_grad(phi)
        sup_grad = max(sup_grad, float(np.max(np.sqrt(np.sum(g**2, axis=0)))))
        if d.size <= direct_max and i < 5:
            ref = convolve_direct(k, phi)
            worst_rel = max(worst_rel, float(np.max(np.abs(conv - ref)) / max(np.max(np.abs(ref)), 1e-300)))
    return {
        "n_fields": n_fields,
        "sup_conv": sup_conv,
        "sup_grad_conv": sup_grad,
        "conv_bound_ok": sup_conv <= k.l1_J * (1 + 1e-12),
        "grad_bound_ok": sup_grad <= k.l1_gradJ * (1 + 1e-12),
        "fft_vs_direct_rel": worst_rel if d.size <= direct_max else None,
    }


def cmd_check_kernel(args) -> int:
    cfg = _load_config(args)
    d = cfg.domain.build()
    k = build_kernel(cfg.kernel.model_dump(), d)
    checks = kernel_bound_checks(k, args.n_fields, cfg.seed)
    report = {**k.describe(), **checks}
    write_report(_out_dir(args), "check_kernel", report)
    print(json.dumps(report, default=_json_default))
    ok = checks["conv_bound_ok"] and checks["grad_bound_ok"]
    if checks["fft_vs_direct_rel"] is not None:
        ok = ok and checks["fft_vs_direct_rel"] <= 1e-12
    if not ok:
        raise AssertionFailed("kernel bound or FFT/direct agreement failed")
    return EXIT_OK


def cmd_iter_lemma(args) -> int:
    if args.y0 is None and args.log_y0 is None:
        raise ConfigError("--y0 or --log-y0: one is required")
    rep = iter_lemma_check(args.C, args.b, args.eps, y0=args.y0, n_max=args.n, log_y0=args.log_y0)
    write_report(_out_dir(args), "iter_lemma", rep.to_dict())
    print(
        json.dumps(
            {
                "threshold": rep.threshold,
                "log_threshold": rep.log_threshold,
                "precondition_holds": rep.precondition_holds,
                "conclusion_holds": rep.conclusion_holds,
            }
        )
    )
    if rep.precondition_holds and not rep.conclusion_holds:
        raise AssertionFailed("conclusion failed although the threshold holds")
    if args.require_precondition and not rep.precondition_holds:
        raise AssertionFailed("y0 exceeds the threshold")
    return EXIT_OK


def _random_members(n: int, m: float, seed: int, block: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    means = rng.uniform(-1 + m, 1 - m, n)
    return [
        {"type": "random", "mean": float(c), "amplitude": 1 - abs(float(c)), "block": block, "seed": seed + 1 + i}
        for i, c in enumerate(means)
    ]


def cmd_probe_attractor(args) -> int:
    cfg = _load_config(args)
    data = _random_members(args.n_members, args.m, cfg.seed, args.block)
    rep = attractor_probe(cfg, data, args.m, args.t_long, threads=args.threads, window=args.window)
    out = _out_dir(args, cfg.output_dir)
    write_report(out, "attractor", {**rep.to_dict(), "initial_data": data})
    print(
        json.dumps(
            {"delta_ens": rep.delta_ens, "alpha_ens": rep.alpha_ens, "c_ens": rep.c_ens, "ok": rep.common_bound_ok}
        )
    )
    if rep.partial:
        log.error("members %s failed", rep.failures)
        return EXIT_NUMERIC
    if not rep.common_bound_ok:
        raise AssertionFailed("no common separation / Hölder bound")
    return EXIT_OK


def _simulate_seed(cfg_dict: dict) -> Trajectory:
    return simulate(RunConfig.model_validate(cfg_dict))


def cmd_regularity(args) -> int:
    cfg = _load_config(args)
    taus = [float(t) for t in args.taus.split(",")]
    if len(taus) < 3:
        raise DiagnosticError("--taus: need at least 3 values")
    d, k, pot, _ = validate(cfg)
    cfgs = [cfg.model_copy(update={"seed": cfg.seed + i}).echo() for i in range(args.n_runs)]
    if args.threads > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            runs = list(pool.map(_simulate_seed, cfgs))
    else:
        runs = [_simulate_seed(c) for c in cfgs]
    rep = regularity_scaling(runs, taus, k, pot)
    out = _out_dir(args, cfg.output_dir)
    write_report(out, "regularity", rep.to_dict())
    print(json.dumps({"beta_fit": rep.beta_fit, "c0_fit": rep.c0_fit, "fits": rep.fits}))
    values = [rep.c0_fit, rep.c1_mu_inf, rep.c2_dtmu, rep.c3_holder, rep.alpha_holder]
    if not all(math.isfinite(v) and v >= 0 for v in values):
        raise AssertionFailed("a fitted constant is negative or not finite")
    if rep.beta_fit > args.beta_max:
        raise AssertionFailed(f"beta_fit={rep.beta_fit:.3f} exceeds {args.beta_max}")
    return EXIT_OK


def cmd_mu_bound(args) -> int:
    traj, k, pot = _load_traj(args.traj)
    delta = args.delta if args.delta is not None else separation_profile(traj, args.tau).delta_emp
    rep = mu_bound_check(traj, args.tau, delta, k, pot.params)
    write_report(_out_dir(args, args.traj), "mu_bound", rep.to_dict())
    print(json.dumps({"c1": rep.c1, "max_sup_mu": rep.max_sup_mu, "holds": rep.holds, "c2": rep.c2}))
    if not rep.holds:
        raise AssertionFailed("sup |mu| exceeds C1")
    return EXIT_OK


# ---- parser -------------------------------------------------------------------


def _common(sub: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if sub else None
    p.add_argument("--config", default=default, help="run configuration (JSON)")
    p.add_argument("--out", default=default, help="output directory")
    p.add_argument("--seed", type=int, default=default, help="override the config seed")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS if sub else 1, help="worker processes")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlch", description=__doc__.splitlines()[0], parents=[_common(False)])
    subs = parser.add_subparsers(dest="command", required=True)
    common = [_common(True)]

    s = subs.add_parser("simulate", parents=common, help="integrate a run config and write a trajectory")
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("degiorgi", parents=common, help="level-set sequences on a trajectory window")
    s.add_argument("--traj", required=True)
    s.add_argument("--T", type=float, default=None, help="window end (default: trajectory end)")
    s.add_argument("--tau-tilde", type=float, required=True)
    s.add_argument("--delta", type=float, default=None, help="default: half the empirical gap on the window")
    s.add_argument("--n-levels", type=int, default=10)
    s.add_argument("--sign", choices=("plus", "minus"), default="plus")
    s.add_argument("--c-omega", type=float, default=None)
    s.add_argument("--require-decay", action="store_true")
    s.set_defaults(func=cmd_degiorgi)

    s = subs.add_parser("certify", parents=common, help="log-space (delta, tau_tilde) certificate")
    s.add_argument("--traj", default=None, help="estimate missing constants from this trajectory")
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--c-f", type=float, default=None)
    s.add_argument("--c-omega", type=float, default=None)
    s.add_argument("--c-j", type=float, default=None)
    s.add_argument("--l1-gradj", type=float, default=None)
    s.add_argument("--energy-constant", type=float, default=None)
    s.add_argument("--eps0", type=float, default=0.5)
    s.add_argument("--eps1", type=float, default=0.25)
    s.set_defaults(func=cmd_certify)

    s = subs.add_parser("check-potential", parents=common, help="sample the potential assumptions")
    s.add_argument("--theta", type=float, default=1.0)
    s.add_argument("--eps0", type=float, default=0.5)
    s.add_argument("--eps1", type=float, default=0.25)
    s.add_argument("--c-f", type=float, default=4.0)
    s.add_argument("--n-samples", type=int, default=200)
    s.add_argument("--kind", choices=("flory_huggins", "quadratic"), default="flory_huggins")
    s.set_defaults(func=cmd_check_potential)

    s = subs.add_parser("check-kernel", parents=common, help="kernel norms and convolution bounds")
    s.add_argument("--n-fields", type=int, default=100)
    s.set_defaults(func=cmd_check_kernel)

    s = subs.add_parser("iter-lemma", parents=common, help="geometric-decay lemma recursion")
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--y0", type=float, default=None)
    s.add_argument("--log-y0", type=float, default=None)
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--require-precondition", action="store_true")
    s.set_defaults(func=cmd_iter_lemma)

    s = subs.add_parser("probe-attractor", parents=common, help="ensemble of random data to long times")
    s.add_argument("--n-members", type=int, default=8)
    s.add_argument("--m", type=float, default=0.5)
    s.add_argument("--t-long", type=float, default=20.0)
    s.add_argument("--window", type=float, default=1.0)
    s.add_argument("--block", type=int, default=1)
    s.set_defaults(func=cmd_probe_attractor)

    s = subs.add_parser("regularity", parents=common, help="fit post-tau suprema against tau")
    s.add_argument("--taus", default="0.01,0.1,1")
    s.add_argument("--n-runs", type=int, default=1)
    s.add_argument("--beta-max", type=float, default=0.6)
    s.set_defaults(func=cmd_regularity)

    s = subs.add_parser("mu-bound", parents=common, help="chemical potential bound on a trajectory")
    s.add_argument("--traj", required=True)
    s.add_argument("--tau", type=float, default=0.1)
    s.add_argument("--delta", type=float, default=None)
    s.set_defaults(func=cmd_mu_bound)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("NLCH_LOG", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (StepError, StateError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (
        ConfigError,
        DiagnosticError,
        GridError,
        KernelError,
        PotentialDomainError,
        TrajectoryError,
        ValueError,
        OSError,
    ) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
