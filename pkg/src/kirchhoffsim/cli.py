"""Command-line front end: simulate / verify / linear / sweep.

Configuration is a flat key = value text document with an explicit schema
version; every output embeds the fully resolved effective configuration as
'# key = value' lines so a reported number can always be reproduced from
the file that carries it.

Exit codes: 0 all claims pass (or plain simulate succeeded), 1 at least one
claim failed, 2 configuration error, 3 numeric failure (blow-up or step
underflow).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .asymptotics import (
    VerificationReport,
    estimate_limit,
    predicted_coefficient_limit,
    verify_propositions,
    verify_theorem_1,
    verify_theorem_2,
    verify_theorem_A,
)
from .coefficients import LinearCoefficient
from .diagnostics import beta_functionals
from .errors import (
    BlowupDetected,
    ConfigError,
    InsufficientTail,
    KirchhoffError,
    StepUnderflow,
)
from .spectrum import Problem, build_problem, laplacian_interval_spectrum
from .stepper import SamplingPolicy, StepController, evolve, evolve_linear
from .trace import Trace

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CLAIM_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TRACE_HEADER = ("t,b,B,norm_u2,norm_A12u2,norm_Au2,norm_du2,norm_A12du2,"
                "norm_ddu2,E_lyap,log_beta0,log_beta1,log_beta2,log_beta3,"
                "log_beta4")
LINEAR_HEADER = ("t,b,B,norm_u2,norm_A12u2,norm_Au2,norm_du2,norm_A12du2,"
                 "norm_ddu2")
SWEEP_HEADER = "param,value,predicted,measured,spread,pass,error"


@dataclass(frozen=True)
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    eigenvalues: tuple = ()
    preset: str = ""
    count: int = 0
    length: float = 0.0
    gamma: float = 1.0
    epsilon: float = 0.05
    u0: tuple = ()
    u1: tuple = ()
    t_end: float = 1e5
    eta_b: float = 1e-3
    dt_min: float = 1e-12
    dt_max_factor: float = 0.1
    flush_threshold: float = 1e-300
    samples_per_decade: int = 16
    t_first: float = 1e-3
    lambdas: tuple = ()
    tolerance: float = 0.0   # 0 means per-claim defaults
    claims: tuple = ()
    out_dir: str = "out"
    coeff_family: str = "power"
    coeff_k: float = 1.0
    coeff_p: float = 1.0
    sigma_m: float = 0.0     # 0 means smallest frequency
    sweep_epsilon: tuple = ()
    sweep_gamma: tuple = ()
    threads: int = 1
    seed: int = 0            # reserved; dynamics are deterministic


def _parse_floats(s: str) -> tuple:
    s = s.strip()
    if not s:
        return ()
    try:
        return tuple(float(x) for x in s.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad float list {s!r}: {exc}") from None


def _parse_strs(s: str) -> tuple:
    s = s.strip()
    if not s:
        return ()
    return tuple(x.strip() for x in s.split(",") if x.strip())


def _fmt_floats(v: tuple) -> str:
    return ",".join(repr(float(x)) for x in v)


# key -> (parser, formatter)
_KEYS = {
    "schema_version": (int, str),
    "eigenvalues": (_parse_floats, _fmt_floats),
    "preset": (str, str),
    "count": (int, str),
    "length": (float, lambda x: repr(float(x))),
    "gamma": (float, lambda x: repr(float(x))),
    "epsilon": (float, lambda x: repr(float(x))),
    "u0": (_parse_floats, _fmt_floats),
    "u1": (_parse_floats, _fmt_floats),
    "t_end": (float, lambda x: repr(float(x))),
    "eta_b": (float, lambda x: repr(float(x))),
    "dt_min": (float, lambda x: repr(float(x))),
    "dt_max_factor": (float, lambda x: repr(float(x))),
    "flush_threshold": (float, lambda x: repr(float(x))),
    "samples_per_decade": (int, str),
    "t_first": (float, lambda x: repr(float(x))),
    "lambdas": (_parse_floats, _fmt_floats),
    "tolerance": (float, lambda x: repr(float(x))),
    "claims": (_parse_strs, lambda v: ",".join(v)),
    "out_dir": (str, str),
    "coeff_family": (str, str),
    "coeff_k": (float, lambda x: repr(float(x))),
    "coeff_p": (float, lambda x: repr(float(x))),
    "sigma_m": (float, lambda x: repr(float(x))),
    "sweep_epsilon": (_parse_floats, _fmt_floats),
    "sweep_gamma": (_parse_floats, _fmt_floats),
    "threads": (int, str),
    "seed": (int, str),
}


def parse_config(text: str) -> RunConfig:
    """Parse a flat key = value document. Unknown keys are rejected.

    Lines starting with '#' are comments; a leading '# ' before a key=value
    pair is stripped, so an emitted metadata block parses back directly.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            line = line.lstrip("#").strip()
        if not line or "=" not in line:
            if line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser, _ = _KEYS[key]
        try:
            values[key] = parser(val)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    cfg = RunConfig(**values)
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.schema_version}")
    return cfg


def emit_config(cfg: RunConfig, prefix: str = "") -> str:
    lines = []
    for key, (_, fmt) in _KEYS.items():
        lines.append(f"{prefix}{key} = {fmt(getattr(cfg, key))}")
    return "\n".join(lines) + "\n"


def resolve_config(cfg: RunConfig) -> RunConfig:
    """Fill in the eigenvalues from a preset and normalize defaults."""
    if cfg.preset:
        if cfg.eigenvalues:
            raise ConfigError("give either eigenvalues or a preset, not both")
        if cfg.preset != "laplacian_interval":
            raise ConfigError(f"unknown preset {cfg.preset!r}")
        if cfg.count < 1 or cfg.length <= 0:
            raise ConfigError("preset laplacian_interval needs count >= 1 and length > 0")
        spec = laplacian_interval_spectrum(cfg.count, cfg.length)
        cfg = replace(cfg, eigenvalues=tuple(float(x) for x in spec.lam),
                      preset="", count=0, length=0.0)
    if not cfg.eigenvalues:
        raise ConfigError("config must provide eigenvalues or a preset")
    if not cfg.u0:
        raise ConfigError("config must provide u0")
    u1 = cfg.u1 if cfg.u1 else tuple(0.0 for _ in cfg.u0)
    return replace(cfg, u1=u1)


def build_run(cfg: RunConfig) -> tuple[Problem, StepController, SamplingPolicy]:
    try:
        problem = build_problem(cfg.eigenvalues, cfg.gamma, cfg.epsilon,
                                cfg.u0, cfg.u1)
        ctrl = StepController(eta_b=cfg.eta_b, dt_min=cfg.dt_min,
                              dt_max_factor=cfg.dt_max_factor,
                              flush_threshold=cfg.flush_threshold)
        sampler = SamplingPolicy(samples_per_decade=cfg.samples_per_decade,
                                 t_first=cfg.t_first)
    except (ValueError, KirchhoffError) as exc:
        raise ConfigError(str(exc)) from None
    if not (cfg.t_end > 0):
        raise ConfigError("t_end must be > 0")
    return problem, ctrl, sampler


def _fmt_cell(x: float, below_floor: bool = False) -> str:
    if below_floor:
        return "underflow"
    return repr(float(x))


def write_trace_csv(path: Path, cfg: RunConfig, trace: Trace):
    """Nonlinear trace with the fixed column contract."""
    betas = beta_functionals(trace)
    acc = trace.accel()
    lam2 = trace.lam2
    norm = lambda x, h: np.einsum("k,nk->n", lam2**h, x**2)  # noqa: E731
    cols = {
        "norm_u2": norm(trace.u, 0),
        "norm_A12u2": norm(trace.u, 1),
        "norm_Au2": norm(trace.u, 2),
        "norm_du2": norm(trace.v, 0),
        "norm_A12du2": norm(trace.v, 1),
        "norm_ddu2": norm(acc, 0),
    }
    e_lyap = trace.lyapunov_energy()
    lines = [emit_config(cfg, prefix="# ").rstrip("\n"), TRACE_HEADER]
    any_flush = np.any(trace.flushed, axis=1)
    for i in range(trace.n_samples):
        row = [repr(float(trace.t[i])), repr(float(trace.b[i])),
               repr(float(trace.B[i]))]
        fl = bool(any_flush[i])
        for name in ("norm_u2", "norm_A12u2", "norm_Au2", "norm_du2",
                     "norm_A12du2", "norm_ddu2"):
            val = float(cols[name][i])
            row.append(_fmt_cell(val, below_floor=fl and val == 0.0))
        row.append(repr(float(e_lyap[i])))
        for series in betas.as_tuple():
            row.append(repr(float(series[i].log_value)))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_linear_csv(path: Path, cfg: RunConfig, trace: Trace):
    acc = trace.accel()
    lam2 = trace.lam2
    norm = lambda x, h: np.einsum("k,nk->n", lam2**h, x**2)  # noqa: E731
    series = [norm(trace.u, 0), norm(trace.u, 1), norm(trace.u, 2),
              norm(trace.v, 0), norm(trace.v, 1), norm(acc, 0)]
    lines = [emit_config(cfg, prefix="# ").rstrip("\n"), LINEAR_HEADER]
    any_flush = np.any(trace.flushed, axis=1)
    for i in range(trace.n_samples):
        row = [repr(float(trace.t[i])), repr(float(trace.b[i])),
               repr(float(trace.B[i]))]
        fl = bool(any_flush[i])
        for s in series:
            val = float(s[i])
            row.append(_fmt_cell(val, below_floor=fl and val == 0.0))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _write_report(path: Path, cfg: RunConfig, reports: list[VerificationReport]):
    parts = [emit_config(cfg, prefix="# ")]
    overall = True
    for rep in reports:
        parts.append(rep.to_text())
        overall = overall and rep.passed
    parts.append(f"overall pass={'true' if overall else 'false'}\n")
    path.write_text("".join(parts))
    return overall


def _insufficient_report(title: str, exc: InsufficientTail) -> VerificationReport:
    from .asymptotics import Claim

    return VerificationReport(title, (Claim(
        id="tail", detail="insufficient_tail", kind="bound", predicted=None,
        measured=float("nan"), tolerance=0.0, passed=False, note=str(exc)),))


def cmd_simulate(cfg: RunConfig, out_dir: Path) -> int:
    problem, ctrl, sampler = build_run(cfg)
    trace = evolve(problem, cfg.t_end, ctrl, sampler)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out_dir / "trace.csv", cfg, trace)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out_dir: Path) -> int:
    problem, ctrl, sampler = build_run(cfg)
    trace = evolve(problem, cfg.t_end, ctrl, sampler)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out_dir / "trace.csv", cfg, trace)

    lambdas = cfg.lambdas or tuple(sorted({float(x) for x in trace.lam
                                           if x >= problem.nu}))
    tol = cfg.tolerance if cfg.tolerance > 0 else None
    reports = [verify_theorem_A(trace)]
    try:
        reports.append(verify_theorem_1(trace, lambdas))
    except InsufficientTail as exc:
        reports.append(_insufficient_report("theorem_1", exc))
    try:
        reports.append(verify_theorem_2(trace, tol=tol))
    except InsufficientTail as exc:
        reports.append(_insufficient_report("theorem_2", exc))
    if cfg.claims:
        reports = [rep.filter_claims(cfg.claims) for rep in reports]
        reports = [rep for rep in reports if rep.claims]
        if not reports:
            raise ConfigError(f"no claims match filter {','.join(cfg.claims)!r}")
    ok = _write_report(out_dir / "report.txt", cfg, reports)
    return EXIT_OK if ok else EXIT_CLAIM_FAIL


def cmd_linear(cfg: RunConfig, out_dir: Path) -> int:
    cfg_l = cfg
    try:
        coeff = LinearCoefficient(cfg_l.coeff_family, cfg_l.coeff_k, cfg_l.coeff_p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    problem, ctrl, sampler = build_run(cfg_l)
    trace = evolve_linear(problem.spectrum, coeff, cfg_l.epsilon,
                          cfg_l.u0, cfg_l.u1, cfg_l.t_end, ctrl, sampler)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_linear_csv(out_dir / "trace.csv", cfg_l, trace)
    sigma = cfg_l.sigma_m if cfg_l.sigma_m > 0 else float(trace.lam[0])
    try:
        reports = [verify_propositions(trace, sigma)]
    except InsufficientTail as exc:
        reports = [_insufficient_report("propositions_linear", exc)]
    if cfg.claims:
        reports = [rep.filter_claims(cfg.claims) for rep in reports]
    ok = _write_report(out_dir / "report.txt", cfg_l, reports)
    return EXIT_OK if ok else EXIT_CLAIM_FAIL


def _sweep_row(cfg: RunConfig, param: str, value: float) -> tuple:
    run_cfg = replace(cfg, **{param: value})
    try:
        problem, ctrl, sampler = build_run(run_cfg)
        trace = evolve(problem, run_cfg.t_end, ctrl, sampler)
        pred = predicted_coefficient_limit(problem.gamma, problem.nu)
        est = estimate_limit(trace.t, (1.0 + trace.t) * trace.b)
        tol = run_cfg.tolerance if run_cfg.tolerance > 0 else 0.02
        ok = (abs(est.value - pred) <= tol * pred
              and est.spread <= 0.5 * tol * pred)
        return (param, value, pred, est.value, est.spread, ok, "")
    except (KirchhoffError, ValueError) as exc:
        return (param, value, float("nan"), float("nan"), float("nan"),
                False, f"{type(exc).__name__}: {exc}")


def cmd_sweep(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.sweep_epsilon and cfg.sweep_gamma:
        raise ConfigError("sweep over one parameter at a time")
    if cfg.sweep_epsilon:
        param, values = "epsilon", cfg.sweep_epsilon
    elif cfg.sweep_gamma:
        param, values = "gamma", cfg.sweep_gamma
    else:
        raise ConfigError("sweep needs sweep_epsilon or sweep_gamma")

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(lambda v: _sweep_row(cfg, param, v), values))
    else:
        rows = [_sweep_row(cfg, param, v) for v in values]

    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [emit_config(cfg, prefix="# ").rstrip("\n"), SWEEP_HEADER]
    all_ok = True
    for param_name, value, pred, meas, spread, ok, err in rows:
        all_ok = all_ok and ok
        lines.append(",".join([
            param_name, repr(float(value)), repr(float(pred)),
            repr(float(meas)), repr(float(spread)),
            "true" if ok else "false", err.replace(",", ";")]))
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK if all_ok else EXIT_CLAIM_FAIL


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    if args.t_end is not None:
        updates["t_end"] = args.t_end
    if args.epsilon is not None:
        updates["epsilon"] = args.epsilon
    if args.gamma is not None:
        updates["gamma"] = args.gamma
    if args.claims is not None:
        updates["claims"] = _parse_strs(args.claims)
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    return replace(cfg, **updates) if updates else cfg


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kirchhoffsim",
        description="Simulate and verify decay asymptotics of the "
                    "norm-coupled damped wave system")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "verify", "linear", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to key=value config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--t-end", dest="t_end", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--claims", default=None,
                       help="comma-separated claim ids to keep")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; dynamics are deterministic")
    return ap


_COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "linear": cmd_linear,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve_config(parse_config(text))
        cfg = _apply_overrides(cfg, args)
        out_dir = Path(cfg.out_dir)
        return _COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowupDetected, StepUnderflow) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
