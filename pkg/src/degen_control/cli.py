"""Command line: ``degen-control run`` and ``degen-control verify``.

Configuration is a flat ``key = value`` file (``#`` starts a comment)
overridden by flags. ``run`` goes spectrum, family, control, simulation,
bounds and writes a JSON report plus the control CSV; ``verify`` runs the
property suites only.

Exit codes
----------
0 ok, 2 rejected configuration, 3 special-function failure, 4 family
failure (including the Gram tolerance), 5 terminal or proof-chain failure.
``verify`` reports the first failing suite with its own code, see
:data:`SUITE_CODES`.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .bessel import ZeroFinderError
from .params import AdmissibilityError, derive

log = logging.getLogger("degen_control")

REPORT_SCHEMA = "degen-control-report/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SPECIAL = 3
EXIT_FAMILY = 4
EXIT_TERMINAL = 5

#: ``verify`` exit code per suite, checked in this order.
SUITE_CODES = {
    "bessel": 3,
    "orthonormality": 6,
    "hardy_poincare": 7,
    "unitary": 8,
    "gen_derivative": 9,
    "lambda": 10,
    "multiplier": 11,
}


class ConfigError(ValueError):
    """Malformed configuration (unknown key, bad value)."""


@dataclass
class RunConfig:
    """Run configuration; see the module docstring for the file format."""

    alpha: float = 0.0
    beta: float = 0.0
    mu: float = 0.0
    T: float = 1.0
    modes: int = 8
    monitor_modes: int | None = None
    delta: float = 0.5
    samples: int = 2048
    panels: int = 16
    order: int = 64
    u0: str = "first"
    terminal_tol: float = 1e-6
    gram_tol: float = 1e-6
    out: str = "report.json"
    control_out: str = "control.csv"
    psi_out: str | None = None
    threads: int | None = None
    backend: str | None = None

    def __post_init__(self):
        if self.monitor_modes is None:
            self.monitor_modes = 2 * self.modes

    def validate(self) -> None:
        """Structural checks; parameter admissibility is left to ``derive``."""
        if self.modes < 1:
            raise ConfigError("modes must be >= 1")
        if self.monitor_modes < self.modes:
            raise ConfigError("monitor_modes must be >= modes")
        if self.samples < 64:
            raise ConfigError("samples must be >= 64")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.panels < 1 or self.order < 2:
            raise ConfigError("panels >= 1 and order >= 2 required")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def echo(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_ALIASES = {"K": "modes", "N": "samples", "delta_param": "delta", "initial_state": "u0",
            "time_samples": "samples", "monitor": "monitor_modes"}


def _coerce(key: str, text: str):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    if text.lower() in ("", "none") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return text


def parse_config_text(text: str) -> dict:
    """``key = value`` lines to a dict of typed values."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | None, overrides: dict) -> RunConfig:
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    if values.get("threads") is None and os.environ.get("DEGEN_CONTROL_THREADS"):
        values["threads"] = _coerce("threads", os.environ["DEGEN_CONTROL_THREADS"])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def initial_coefficients(spec: str, params, mode_list, K: int) -> np.ndarray:
    """Initial coordinates from ``first``, ``mode:k`` or ``a1,a2,...``."""
    from .bounds import initial_first_mode

    spec = spec.strip()
    if spec == "first":
        return initial_first_mode(params, mode_list[:K])
    if spec.startswith("mode:"):
        try:
            k = int(spec[5:])
        except ValueError as exc:
            raise ConfigError(f"bad mode index in {spec!r}") from exc
        if not 1 <= k <= K:
            raise ConfigError(f"u0 mode {k} outside 1..{K}")
        a = np.zeros(K)
        a[k - 1] = 1.0
        return a
    try:
        a = np.array([float(s) for s in spec.replace(";", ",").split(",") if s.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse u0 {spec!r}") from exc
    if a.size == 0 or a.size > K:
        raise ConfigError(f"u0 needs between 1 and {K} coefficients")
    return np.concatenate([a, np.zeros(K - a.size)])


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_control_csv(path: str, t, f) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,f\n")
        for ti, fi in zip(t, f):
            fh.write(f"{float(ti)!r},{float(fi)!r}\n")


def execute(cfg: RunConfig) -> tuple[int, dict]:
    """Run the pipeline; returns the exit code and the report."""
    from . import bounds
    from .evolution import ControlSignal, State, controlled_evolve
    from .family import FamilyError, biorthogonal_family, series_terminal, synthesize_control, write_psi_csv
    from .quadrature import graded_rule
    from .spectrum import modes

    report = {"schema": REPORT_SCHEMA, "version": __version__, "config": cfg.echo(), "status": {}}
    timings = {}

    def fail(code, stage, message):
        report["status"] = {"exit_code": code, "ok": False, "stage": stage, "message": message}
        report["timings"] = timings
        return code, report

    t0 = time.perf_counter()
    try:
        params = derive(cfg.alpha, cfg.beta, cfg.mu, cfg.T)
    except AdmissibilityError as exc:
        return fail(EXIT_CONFIG, "params", f"{exc.constraint}: {exc}")
    report["params"] = dict(alpha=params.alpha, beta=params.beta, mu=params.mu, T=params.T,
                            kappa=params.kappa, nu=params.nu, gamma=params.gamma, mu_crit=params.mu_crit)
    K, Km = cfg.modes, cfg.monitor_modes
    try:
        rule = graded_rule(params.kappa, cfg.panels, cfg.order)
        mode_list = modes(params, Km, rule=rule)
    except ZeroFinderError as exc:
        return fail(EXIT_SPECIAL, "spectrum", f"zero {exc.index}: {exc}")
    timings["spectrum"] = time.perf_counter() - t0
    report["eigen"] = [dict(k=m.k, zero=m.zero, lam=m.lam, gen_deriv=m.gen_deriv, norm_check=m.norm_check)
                       for m in mode_list]
    try:
        coeffs = initial_coefficients(cfg.u0, params, mode_list, K)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, "u0", str(exc))

    t1 = time.perf_counter()
    try:
        fam = biorthogonal_family(params, mode_list[:K], params.T, cfg.delta, cfg.samples,
                                  backend=cfg.backend, threads=cfg.threads)
    except FamilyError as exc:
        return fail(EXIT_FAMILY, "family", str(exc))
    except ZeroFinderError as exc:
        return fail(EXIT_SPECIAL, "family", str(exc))
    timings["family"] = time.perf_counter() - t1
    timings["family_detail"] = dict(fam.timings)
    gram_dev = fam.gram_deviation()
    report["family"] = dict(gram_max_deviation=gram_dev, gram_radius=fam.gram_radius,
                            imag_residue=fam.imag_residue, n_tau=fam.n_tau, tau_step=fam.tau_step,
                            precision_bits=fam.precision_bits, backend=fam.backend,
                            truncation_radius=fam.truncation_radius, tail_bound=fam.tail_bound,
                            kronecker_max=float(fam.kronecker.max()) if K > 1 else 0.0)
    if cfg.psi_out:
        write_psi_csv(cfg.psi_out, fam)
    if not gram_dev <= cfg.gram_tol:
        return fail(EXIT_FAMILY, "family", f"gram deviation {gram_dev:.3e} > {cfg.gram_tol:.1e}")

    t2 = time.perf_counter()
    f = ControlSignal(synthesize_control(coeffs, fam, mode_list), params.T)
    write_control_csv(cfg.control_out, f.t, f.samples)
    final = controlled_evolve(State(coeffs), mode_list, f)
    term = np.abs(final.coefficients)
    timings["control"] = time.perf_counter() - t2
    report["terminal"] = dict(abs_coefficients=term, max=float(term.max()), tol=cfg.terminal_tol,
                              synthesized_max=float(term[:K].max()),
                              spillover_max=float(term[K:].max()) if Km > K else 0.0)
    # same terminal state from exact moments in ball arithmetic; reported, not gated
    sv, srad = series_terminal(params, coeffs, mode_list, K, params.T, cfg.delta, fam.precision_bits,
                               backend=cfg.backend)
    report["terminal_series"] = dict(abs_coefficients=sv, max=float(sv.max()), radius=srad)
    u0n = float(np.linalg.norm(coeffs))
    report["control"] = dict(L2=f.l2_norm(), sup=f.sup_norm(), N=f.N, u0_norm=u0n, path=cfg.control_out)

    t3 = time.perf_counter()
    c_cal = bounds.calibrate_constant(params, fam, mode_list)
    report["cost"] = bounds.cost_report(params, f, u0n, cfg.delta, c_cal=1.0).as_dict()
    report["calibration"] = dict(c_cal=c_cal, note="record only; upper bound reported with c_cal = 1")
    first = bounds.initial_first_mode(params, mode_list[:K])
    if np.array_equal(first, coeffs):
        f_first = f
    else:
        f_first = ControlSignal(synthesize_control(first, fam, mode_list), params.T)
    chain = bounds.verify_proof_chain(params, fam, mode_list, cfg.delta, control=f_first,
                                      coefficients=first, backend=cfg.backend)
    timings["proof_chain"] = time.perf_counter() - t3
    report["proof_chain"] = dict(passed=chain.passed, items=chain.as_list())
    timings["total"] = time.perf_counter() - t0
    report["timings"] = timings

    terminal_ok = bool(term.max() <= cfg.terminal_tol)
    ok = terminal_ok and chain.passed
    msg = "ok"
    if not terminal_ok:
        msg = f"terminal max {term.max():.3e} > {cfg.terminal_tol:.1e}"
    elif not chain.passed:
        msg = "proof chain: " + ", ".join(it.name for it in chain.failures())
    report["status"] = {"exit_code": EXIT_OK if ok else EXIT_TERMINAL, "ok": ok, "stage": "done", "message": msg}
    return (EXIT_OK if ok else EXIT_TERMINAL), report


def run_verify(cfg: RunConfig) -> tuple[int, dict]:
    """Property suites for the configured parameters."""
    from . import suites

    try:
        params = derive(cfg.alpha, cfg.beta, cfg.mu, cfg.T)
    except AdmissibilityError as exc:
        return EXIT_CONFIG, {"status": {"exit_code": EXIT_CONFIG, "message": f"{exc.constraint}: {exc}"}}
    nus = tuple(sorted({0.0, 0.25, 0.5, 1.0, 2.0, round(params.nu, 15)}))
    runs = {
        "bessel": lambda: suites.bessel_suite(nus),
        "orthonormality": lambda: suites.orthonormality_suite(params),
        "hardy_poincare": lambda: suites.hardy_poincare_suite(params),
        "unitary": lambda: suites.unitary_suite(params),
        "gen_derivative": lambda: suites.gen_derivative_suite(params),
        "lambda": lambda: suites.lambda_suite(params),
        "multiplier": lambda: suites.multiplier_suite(params, cfg.delta),
    }
    out = {"schema": REPORT_SCHEMA, "version": __version__, "config": cfg.echo(), "suites": {}}
    code = EXIT_OK
    for name, fn in runs.items():
        try:
            res = fn()
        except ZeroFinderError as exc:
            out["suites"][name] = {"passed": False, "error": str(exc)}
            code = code or SUITE_CODES[name]
            continue
        out["suites"][name] = res.as_dict()
        if not res.passed and code == EXIT_OK:
            code = SUITE_CODES[name]
    out["status"] = {"exit_code": code, "ok": code == EXIT_OK}
    return code, out


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="degen-control", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "synthesize and certify a null control"),
                           ("verify", "run the property suites only")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", nargs="?", help="key = value configuration file")
        s.add_argument("--alpha", type=float)
        s.add_argument("--beta", type=float)
        s.add_argument("--mu", type=float)
        s.add_argument("--T", type=float)
        s.add_argument("--modes", type=int)
        s.add_argument("--monitor-modes", dest="monitor_modes", type=int)
        s.add_argument("--delta", type=float)
        s.add_argument("--samples", type=int)
        s.add_argument("--u0", help="first | mode:k | a1,a2,...")
        s.add_argument("--out", help="JSON report path")
        s.add_argument("--control-out", dest="control_out", help="control CSV path")
        s.add_argument("--psi-out", dest="psi_out", help="optional psi CSV path")
        s.add_argument("--threads", type=int)
        s.add_argument("--backend", choices=("arb", "mpmath"))
        s.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    overrides = {k: getattr(args, k) for k in _FIELD_TYPES if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        code, report = execute(cfg)
        path = cfg.out
    else:
        code, report = run_verify(cfg)
        path = cfg.out if args.out else None
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_clean(report), fh, indent=2)
    status = report["status"]
    if code == EXIT_OK:
        log.info("ok%s", f" (report: {path})" if path else "")
    else:
        where = status.get("stage") or next((k for k, v in report.get("suites", {}).items()
                                             if not v["passed"]), "")
        print(f"failed [{code}] {where}: {status.get('message', '')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
