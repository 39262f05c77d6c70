"""Command-line front end.

Subcommands: ``analyze`` (hypothesis checks), ``count`` (lattice counts),
``density`` (tent-integral ladder), ``verify`` (full pipeline + audit
bundle), ``expsum`` (shifted sum factorization traces), ``approx``
(rational-approximation certificates at given frequencies), and
``kernel-check`` (transform sandwich grid).

Configuration lives in one JSON file; every numeric literal is a string so
values parse exactly (fractions like ``"1/4"`` or decimal literals).  Flags
``--seed``, ``--threads``, ``--budget`` and ``--out`` override config
entries; the environment variables SHIFTBANDS_SEED, SHIFTBANDS_THREADS and
SHIFTBANDS_BUDGET supply defaults when neither is present.

Exit codes: 0 on success, 1 on configuration or input errors, 2 when a
check ran and failed (hypotheses in ``analyze``, grid violations in
``kernel-check``, a non-pass status in ``verify``).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _accel
from .counting import CountSpec, count_points, count_series
from .density import DEFAULT_LADDER, density, find_nonsingular_real_zero
from .dioph import (ApproximationParams, BudgetExceededError, baker_search,
                    birch_search, identity_checks, omega_values,
                    special_from_slices)
from .dissection import (DissectionParams, ExperimentSpec, classify,
                         r_plus_minus, verify_asymptotic, write_bundle)
from .exact import ExactReal
from .expsums import CertificateBundle, decay_witness, s_star, shifted_S
from .forms import FormSystem, check_hypotheses, system_from_document, taylor_shift
from .kernels import kernel_ft_quadrature, sandwich_grid, sandwich_ok, schedule

KERNEL_GRID_TOLERANCE = 1e-6


class ConfigError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__("config.%s: %s" % (location, message))
        self.location = location


def _fraction(raw, location: str) -> Fraction:
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError) as ex:
        raise ConfigError(location, "not an exact number: %r (%s)" % (raw, ex))


def parse_mu(doc: dict, location: str = "mu") -> ExactReal:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(location, "expected an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "rational":
            return ExactReal.rational(_fraction(doc["value"], location + ".value"))
        if kind == "sqrt":
            return ExactReal.sqrt(int(doc["disc"]))
        if kind == "quadratic":
            return ExactReal.quadratic(
                _fraction(doc.get("a", "0"), location + ".a"),
                _fraction(doc.get("b", "1"), location + ".b"),
                int(doc["disc"]))
        if kind == "decimal":
            return ExactReal.decimal(str(doc["value"]))
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as ex:
        raise ConfigError(location, str(ex))
    raise ConfigError(location + ".kind", "unknown kind %r" % (kind,))


@dataclass
class ExperimentConfig:
    system: FormSystem
    mu: ExactReal
    tau: tuple
    eta: Fraction
    P_values: tuple[int, ...]
    sandwich_P: tuple[int, ...]
    delta: float
    theta0: Optional[Fraction]
    alphas: tuple
    ladder: tuple[float, ...]
    samples: int
    seed: int
    method: str
    tolerance: float
    budget: Optional[int]
    out: Optional[str]
    mu_doc: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as ex:
            raise ConfigError("<file>", str(ex))
        except json.JSONDecodeError as ex:
            raise ConfigError("<json>", str(ex))
        return cls.from_document(doc, base_dir=os.path.dirname(path))

    @classmethod
    def from_document(cls, doc: dict, base_dir: str = ".") -> "ExperimentConfig":
        if "system" in doc:
            try:
                system = system_from_document(doc["system"])
            except (KeyError, ValueError, TypeError) as ex:
                raise ConfigError("system", str(ex))
        elif "system_path" in doc:
            spath = os.path.join(base_dir, doc["system_path"])
            try:
                with open(spath) as fh:
                    system = system_from_document(json.load(fh))
            except (OSError, json.JSONDecodeError, KeyError, ValueError) as ex:
                raise ConfigError("system_path", str(ex))
        else:
            raise ConfigError("system", "missing (need 'system' or 'system_path')")

        mu_doc = doc.get("mu", {"kind": "sqrt", "disc": 2})
        mu = parse_mu(mu_doc)
        tau = tuple(_fraction(t, "tau[%d]" % i)
                    for i, t in enumerate(doc.get("tau", ["0"] * system.count)))
        if len(tau) != system.count:
            raise ConfigError("tau", "expected %d entries, got %d"
                              % (system.count, len(tau)))
        eta = _fraction(doc.get("eta", "1/4"), "eta")
        if eta <= 0:
            raise ConfigError("eta", "must be positive")
        try:
            P_values = tuple(int(p) for p in doc.get("P", [16]))
        except (TypeError, ValueError) as ex:
            raise ConfigError("P", str(ex))
        if not P_values or any(p < 0 for p in P_values):
            raise ConfigError("P", "need a nonempty list of nonnegative integers")
        sandwich_P = tuple(int(p) for p in doc.get("sandwich_P", []))
        delta = float(_fraction(doc.get("delta", "1/4"), "delta"))
        theta0 = _fraction(doc["theta0"], "theta0") if "theta0" in doc else None
        alphas = tuple(
            tuple(_fraction(a, "alpha[%d][%d]" % (i, j))
                  for j, a in enumerate(row))
            for i, row in enumerate(doc.get("alpha", []))
        )
        ladder = tuple(float(x) for x in doc.get("ladder", DEFAULT_LADDER))
        samples = int(doc.get("samples", 1 << 14))
        seed = int(doc.get("seed", 0))
        method = doc.get("method", "auto")
        tolerance = float(_fraction(doc.get("tolerance", "0.15"), "tolerance"))
        budget = int(doc["budget"]) if "budget" in doc else None
        out = doc.get("out")
        return cls(system=system, mu=mu, tau=tau, eta=eta, P_values=P_values,
                   sandwich_P=sandwich_P, delta=delta, theta0=theta0,
                   alphas=alphas, ladder=ladder, samples=samples, seed=seed,
                   method=method, tolerance=tolerance, budget=budget, out=out,
                   mu_doc=mu_doc)


# ---------------------------------------------------------------------------
# helpers


def _emit(path: Optional[str], name: str, payload) -> None:
    if not path:
        return
    os.makedirs(path, exist_ok=True)
    target = os.path.join(path, name)
    if name.endswith(".json"):
        with open(target, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in payload:
                writer.writerow(row)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    env_seed = os.environ.get("SHIFTBANDS_SEED")
    env_budget = os.environ.get("SHIFTBANDS_BUDGET")
    if args.seed is not None:
        cfg.seed = args.seed
    elif env_seed is not None:
        cfg.seed = int(env_seed)
    if args.budget is not None:
        cfg.budget = args.budget
    elif env_budget is not None and cfg.budget is None:
        cfg.budget = int(env_budget)
    if args.out is not None:
        cfg.out = args.out
    threads = args.threads or os.environ.get("SHIFTBANDS_THREADS")
    if threads and _accel.NUMBA_ENABLED:
        import numba
        numba.set_num_threads(int(threads))
    return cfg


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("<args>", "--config is required for this command")
    cfg = ExperimentConfig.from_file(args.config)
    return _apply_overrides(cfg, args)


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    cfg = _load(args)
    expansion = taylor_shift(cfg.system)
    report = check_hypotheses(cfg.system, expansion, seed=cfg.seed)
    for line in report.summary_lines():
        print(line)
    _emit(cfg.out, "analyze.json", {
        "all_pass": report.all_pass,
        "lines": report.summary_lines(),
    })
    return 0 if report.all_pass else 2


def cmd_count(args) -> int:
    cfg = _load(args)
    expansion = taylor_shift(cfg.system)
    spec = CountSpec(system=cfg.system, expansion=expansion, mu=cfg.mu,
                     tau=cfg.tau, eta=cfg.eta, P=max(cfg.P_values),
                     method=cfg.method)
    density_c = 0.0
    rows = count_series(spec, cfg.P_values, density_c)
    table = [["P", "count", "ratio", "method", "boundary_flags"]]
    for r in rows:
        ratio = "" if r.ratio is None else repr(r.ratio)
        print("P=%-6d N=%-12d method=%s flags=%d time=%.2fs"
              % (r.P, r.count, r.method, r.boundary_flags, r.elapsed))
        table.append([r.P, r.count, ratio, r.method, r.boundary_flags])
    _emit(cfg.out, "counts.csv", table)
    return 0


def cmd_density(args) -> int:
    cfg = _load(args)
    est = density(cfg.system, ladder=cfg.ladder, samples=cfg.samples,
                  seed=cfg.seed)
    for rung in est.ladder:
        print("L=%-8g I_L=%.6f +- %.2g" % (rung.L, rung.value, rung.std_error))
    print("c = %.6f +- %.2g  converged=%s" % (est.c, est.std_error,
                                              est.converged))
    zero = find_nonsingular_real_zero(cfg.system, seed=cfg.seed)
    if zero is None:
        print("no nonsingular real zero found")
    else:
        print("real zero: residual %.2g, smallest singular value %.3g"
              % (zero.residual, zero.smallest_singular_value))
    _emit(cfg.out, "density.json", {
        "estimate": est.to_document(),
        "zero": None if zero is None else {
            "point": list(zero.point), "residual": zero.residual,
            "smallest_singular_value": zero.smallest_singular_value,
        },
    })
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    expansion = taylor_shift(cfg.system)
    spec = ExperimentSpec(system=cfg.system, expansion=expansion, mu=cfg.mu,
                          tau=cfg.tau, eta=cfg.eta, P_values=cfg.P_values,
                          delta=cfg.delta, ladder=cfg.ladder,
                          samples=cfg.samples, seed=cfg.seed,
                          tolerance=cfg.tolerance, method=cfg.method,
                          sandwich_P=cfg.sandwich_P)
    report = verify_asymptotic(spec)
    for line in report.summary_lines():
        print(line)
    if cfg.out:
        for path in write_bundle(report, cfg.out):
            print("wrote %s" % path)
    return 0 if report.status == "pass" else 2


def cmd_expsum(args) -> int:
    cfg = _load(args)
    if not cfg.alphas:
        raise ConfigError("alpha", "expsum needs at least one alpha row")
    expansion = taylor_shift(cfg.system)
    P = min(cfg.P_values)
    rows = [["alpha", "S", "abs_S", "factorization_residual"]]
    for alpha in cfg.alphas:
        res = shifted_S(cfg.system, expansion, cfg.mu, P, alpha)
        label = "(" + ", ".join(str(a) for a in alpha) + ")"
        print("alpha=%s |S|=%.6g residual=%.3g"
              % (label, abs(res.value), res.residual))
        rows.append([label, repr(res.value), abs(res.value), res.residual])
    _emit(cfg.out, "expsum.csv", rows)
    return 0


def cmd_approx(args) -> int:
    cfg = _load(args)
    if not cfg.alphas:
        raise ConfigError("alpha", "approx needs at least one alpha row")
    system = cfg.system
    expansion = taylor_shift(system)
    params = ApproximationParams.for_system(system.n, system.d, system.count,
                                            theta0=cfg.theta0)
    P = max(cfg.P_values)
    budget = cfg.budget or 10 ** 7
    payload = []
    for alpha in cfg.alphas:
        entry = {"alpha": [str(a) for a in alpha], "P": P}
        birch = birch_search(alpha, P, params.theta0, system.d)
        omega = omega_values(expansion, alpha, cfg.mu)
        try:
            baker = baker_search(omega, P, params.delta, budget=budget)
        except BudgetExceededError as ex:
            baker = None
            entry["simultaneous_error"] = str(ex)
        entry["window"] = None if birch is None else {
            "q": birch.q, "numerators": list(birch.numerators)}
        entry["simultaneous"] = None if baker is None else {
            "r": baker.r,
            "numerators": {str(k): v for k, v in baker.numerators.items()}}
        if birch is not None and baker is not None:
            special = special_from_slices(expansion, baker)
            report = identity_checks(expansion, birch, baker, special)
            entry["identities"] = {"all_pass": report.all_pass,
                                   "details": report.details}
            bundle = CertificateBundle(birch=birch, baker=baker,
                                       special=special, degree=system.d)
            entry["decay_witness"] = decay_witness(alpha, P, bundle, cfg.mu,
                                                   system.d)
            D, _ = bundle.top_solution()
            if (D * baker.r) ** system.n <= (cfg.budget or 4_000_000):
                star = s_star(alpha, bundle, system, expansion, cfg.mu, P)
                entry["s_star"] = {"value": repr(star.value),
                                   "abs": abs(star.value),
                                   "q": star.q, "r": star.r, "D": star.D}
        label = "(" + ", ".join(str(a) for a in alpha) + ")"
        w = entry.get("window")
        s = entry.get("simultaneous")
        print("alpha=%s window=%s simultaneous=%s"
              % (label,
                 "none" if w is None else "q=%d" % w["q"],
                 "none" if s is None else "r=%d" % s["r"]))
        payload.append(entry)
    _emit(cfg.out, "approx.json", payload)
    return 0


def cmd_kernel_check(args) -> int:
    if args.config:
        cfg = _load(args)
        eta = float(cfg.eta)
        delta = cfg.delta
        P = max(cfg.P_values)
        out = cfg.out
    else:
        eta, delta, P = 0.25, 0.25, 100
        out = args.out
    sched = schedule(P, delta, eta)
    rows = sandwich_grid(eta, sched.rho)
    ts = np.array([r.t for r in rows])
    errs = []
    for sign, attr in ((-1, "lower"), (+1, "upper")):
        closed = np.array([getattr(r, attr) for r in rows])
        quad = kernel_ft_quadrature(sign, ts, eta, sched.rho)
        errs.append(float(np.max(np.abs(quad - closed))))
    ordered = sandwich_ok(rows)
    print("grid points: %d  (eta=%g rho=%g)" % (len(rows), eta, sched.rho))
    print("max |closed-form - quadrature|: minus %.3g, plus %.3g" % tuple(errs))
    print("ordering 0 <= lower <= indicator <= upper <= 1: %s"
          % ("pass" if ordered else "FAIL"))
    ok = ordered and max(errs) < KERNEL_GRID_TOLERANCE
    print("kernel check: %s" % ("pass" if ok else "FAIL"))
    _emit(out, "kernel_grid.csv",
          [["t", "lower", "indicator", "upper"]]
          + [[repr(r.t), repr(r.lower), repr(r.indicator), repr(r.upper)]
             for r in rows])
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftbands",
        description="Lattice counts, exponential sums, and sandwich "
                    "verification for shifted form systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "analyze": cmd_analyze,
        "count": cmd_count,
        "density": cmd_density,
        "verify": cmd_verify,
        "expsum": cmd_expsum,
        "approx": cmd_approx,
        "kernel-check": cmd_kernel_check,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to the JSON experiment config")
        p.add_argument("--out", help="directory for report artifacts")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--threads", type=int,
                       help="worker threads for compiled kernels")
        p.add_argument("--budget", type=int, help="override point budgets")
        p.set_defaults(handler=fn)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as ex:
        print(json.dumps({"error": str(ex), "location": ex.location}),
              file=sys.stderr)
        return 1
    except (ValueError, OSError) as ex:
        print(json.dumps({"error": str(ex)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
