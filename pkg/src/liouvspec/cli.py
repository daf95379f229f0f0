"""Command-line front end.

Usage::

    liouvspec spectrum --config run.json --out results/ [--threads N] [--svg]

All physical inputs are in units of the two-photon loss rate gamma.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    classical_steady_state,
    detect_inversion,
    detect_ndos,
    phase_diagram,
    write_phase_csv,
    write_threshold_csv,
)
from .errors import LiouvspecError
from .greens import (
    GF_SECTORS,
    compute_spectral_result,
    default_omega_grid,
    write_poles_csv,
    write_spectrum_csv,
)
from .lindblad import VdpParams, build_vdp, liouvillian
from .perturbation import (
    SOURCES,
    beyond_lifetime_spectral_function,
    lifetime_spectral_function,
    write_perturbative_csv,
)
from .spectrum import (
    TOL_DEG,
    TOL_ZERO,
    cutoff_shift,
    steady_state,
    vdp_spectrum,
    write_eigenvalues_csv,
)
from .svg import line_plot

log = logging.getLogger("liouvspec")

COMMANDS = ("steady-state", "spectrum", "perturbative", "phase-diagram", "eigvals")
THREADS_ENV = "LIOUVSPEC_THREADS"

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_COMPUTE = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: VdpParams
    omega_min: float | None = None
    omega_max: float | None = None
    omega_points: int = 4001
    command: str | None = None
    options: dict = field(default_factory=dict)

    def omega_grid(self, params: VdpParams | None = None) -> np.ndarray:
        params = params or self.model
        if self.omega_min is None or self.omega_max is None:
            grid = default_omega_grid(params, self.omega_points)
            lo = grid[0] if self.omega_min is None else self.omega_min
            hi = grid[-1] if self.omega_max is None else self.omega_max
            return np.linspace(lo, hi, self.omega_points)
        return np.linspace(self.omega_min, self.omega_max, self.omega_points)

    def echo(self) -> dict:
        out = {
            "model": asdict(self.model),
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
            "omega_points": self.omega_points,
            "command": self.command,
            "options": self.options,
        }
        return out


MODEL_KEYS = {"omega0", "u", "r", "n_max"}
GRID_KEYS = {"omega_min", "omega_max", "omega_points"}
BLOCK_KEYS = {"steady_state", "spectrum", "perturbative", "phase_diagram", "eigvals"}


def load_config(source) -> RunConfig:
    """Parse a JSON config (path, JSON text or dict) into a :class:`RunConfig`."""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = Path(source).read_text()
        raw = json.loads(text)
    unknown = set(raw) - MODEL_KEYS - GRID_KEYS - BLOCK_KEYS - {"command"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        model = VdpParams(
            omega0=float(raw.get("omega0", 0.0)),
            u=float(raw.get("u", 0.0)),
            r=float(raw.get("r", 1.0)),
            n_max=int(raw.get("n_max", 15)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    points = int(raw.get("omega_points", 4001))
    lo = raw.get("omega_min")
    hi = raw.get("omega_max")
    if points < 2:
        raise ConfigError("omega_points must be >= 2")
    if lo is not None and hi is not None and not float(hi) > float(lo):
        raise ConfigError("omega_max must exceed omega_min")
    command = raw.get("command")
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    options = {k: raw[k] for k in BLOCK_KEYS if k in raw}
    return RunConfig(
        model=model,
        omega_min=None if lo is None else float(lo),
        omega_max=None if hi is None else float(hi),
        omega_points=points,
        command=command,
        options=options,
    )


class Run:
    """Collects outputs, timings and invariant checks for one invocation."""

    def __init__(self, config: RunConfig, out: Path, threads: int, svg: bool):
        self.config = config
        self.out = out
        self.threads = threads
        self.svg = svg
        self.files: list[Path] = []
        self.timings: dict[str, float] = {}
        self.checks: dict[str, dict] = {}
        self.extra: dict = {}

    def stage(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = run.timings.get(name, 0.0) + time.perf_counter() - self.t0

        return _Timer()

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(p)
        return p

    def check(self, name: str, value: float, limit: float, hard: bool = True) -> None:
        self.checks[name] = {
            "value": float(value),
            "limit": float(limit),
            "passed": bool(value <= limit),
            "hard": hard,
        }

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if v["hard"] and not v["passed"]]

    def manifest(self) -> dict:
        return {
            "tool": "liouvspec",
            "version": __version__,
            "config": self.config.echo(),
            "tolerances": {
                "tol_zero": TOL_ZERO,
                "tol_deg": TOL_DEG,
                "omega_min_ndos": 1e-3,
                "tau_neg": 1e-6,
                "eps_mask": 1e-6,
            },
            "threads": self.threads,
            "wall_clock_s": self.timings,
            "checks": self.checks,
            "extra": self.extra,
            "outputs": {p.name: _sha256(p) for p in self.files if p.exists()},
        }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _spectrum_checks(run: Run, params: VdpParams, spec) -> None:
    model = build_vdp(params)
    lmat = liouvillian(model)
    scale = np.abs(lmat).max()
    ident = np.eye(model.dim).reshape(-1, order="F")
    run.check("trace_preservation", np.abs(ident.conj() @ lmat).max() / scale, 1e-10)
    run.check("biorthonormality", spec.biorthogonality_error(), 1e-9)
    run.check("completeness", spec.completeness_residual(), 1e-8)
    run.check("no_growing_modes", spec.eigenvalues.real.max() / np.abs(spec.eigenvalues).max(), 1e-9)
    run.extra["sectors"] = sorted(int(k) for k in np.unique(spec.charges))


def _cutoff_check(run: Run, params: VdpParams, omega) -> None:
    with run.stage("cutoff_stability"):
        bigger = replace(params, n_max=params.n_max + 5)
        a0 = compute_spectral_result(vdp_spectrum(params, sectors=GF_SECTORS), omega).a
        a1 = compute_spectral_result(vdp_spectrum(bigger, sectors=GF_SECTORS), omega).a
        run.check("cutoff_stability_spectral_function", np.abs(a1 - a0).max() / np.abs(a0).max(), 1e-2, hard=False)
        run.check("cutoff_stability_k1_eigenvalues", cutoff_shift(params), 1e-6, hard=False)


def cmd_steady_state(run: Run) -> None:
    params = run.config.model
    with run.stage("diagonalize"):
        spec = vdp_spectrum(params, workers=run.threads, sectors=(0,))
        rho = steady_state(spec)
    with run.stage("oracle"):
        oracle = classical_steady_state(params.n_max, params.r).p
    p = np.diag(rho).real
    run.check("steady_state_oracle", np.abs(p - oracle).max(), 1e-10)
    run.check("steady_state_diagonal", np.abs(rho - np.diag(np.diag(rho))).max(), 1e-10)
    inverted = detect_inversion(p)
    run.extra["inversion"] = inverted
    with open(run.path("populations.csv"), "w") as fh:
        fh.write("n,p_n,p_n_oracle\n")
        for n, (a, b) in enumerate(zip(p, oracle)):
            fh.write(f"{n},{a:.12e},{b:.12e}\n")
    print(f"steady state r={params.r:g}: population inversion {'yes' if inverted else 'no'}")
    if run.svg:
        line_plot(run.path("populations.svg"), np.arange(p.size), {"p_n": p, "oracle": oracle}, "n", "p_n")


def cmd_spectrum(run: Run) -> None:
    params = run.config.model
    opts = run.config.options.get("spectrum", {})
    eta = float(opts.get("eta_floor", 0.0))
    omega = run.config.omega_grid()
    with run.stage("diagonalize"):
        spec = vdp_spectrum(params, workers=run.threads, sectors=GF_SECTORS)
    _spectrum_checks(run, params, spec)
    with run.stage("greens"):
        result = compute_spectral_result(spec, omega, eta=eta)
    rho = spec.rho_s
    n = params.n_max
    # exact identity on the truncated space: sum w = tr([a, a^dag] rho) = 1 - (n_max + 1) p_{n_max}
    expected = 1.0 - (n + 1) * rho[n, n].real
    run.check("sum_rule_truncated_identity", abs(result.sum_rule - expected), 1e-8)
    run.check("keldysh_positivity", max(0.0, float(result.gk_im.max())), 1e-10)
    run.extra["sum_rule"] = {"re": result.sum_rule.real, "im": result.sum_rule.imag}
    ndos = detect_ndos(result.a, omega, u=params.u or None, n_max=params.n_max)
    run.extra["ndos"] = {"negative": ndos.negative, "interval": ndos.interval}
    write_spectrum_csv(result, run.path("spectrum.csv"))
    write_poles_csv(result.poles, run.path("poles.csv"))
    print(f"sum rule: sum Re w = {result.sum_rule.real:.6f}, sum Im w = {result.sum_rule.imag:.1e}")
    print(f"NDoS: {'yes' if ndos.negative else 'no'}" + (f" on {ndos.interval}" if ndos.interval else ""))
    curves = {f"A (U={params.u:g})": result.a}
    if opts.get("u0_reference"):
        ref_params = replace(params, u=0.0)
        ref = compute_spectral_result(vdp_spectrum(ref_params, sectors=GF_SECTORS), omega, eta=eta)
        write_spectrum_csv(ref, run.path("spectrum_u0.csv"))
        curves["A (U=0)"] = ref.a
    if opts.get("cutoff_check", True):
        _cutoff_check(run, params, omega)
    if run.svg:
        line_plot(run.path("spectrum.svg"), omega, curves, "omega / gamma", "A(omega)")
        line_plot(run.path("t_eff.svg"), omega, {"T_eff": result.t_eff}, "omega / gamma", "T_eff")


def cmd_eigvals(run: Run) -> None:
    params = run.config.model
    with run.stage("diagonalize"):
        spec = vdp_spectrum(params, workers=run.threads)
    _spectrum_checks(run, params, spec)
    write_eigenvalues_csv(spec, run.path("eigvals.csv"))
    if run.svg:
        order = np.argsort(spec.eigenvalues.real)
        line_plot(
            run.path("eigvals.svg"),
            np.arange(len(spec)),
            {"Re lambda (sorted)": spec.eigenvalues.real[order]},
            "mode",
            "Re lambda / gamma",
        )


def cmd_perturbative(run: Run) -> None:
    params = run.config.model
    opts = run.config.options.get("perturbative", {})
    source = opts.get("linewidth_source", "trace_formula")
    if source not in SOURCES:
        raise ConfigError(f"linewidth_source must be one of {SOURCES}")
    omega = run.config.omega_grid()
    with run.stage("diagonalize"):
        spec = vdp_spectrum(params, workers=run.threads, sectors=GF_SECTORS)
    with run.stage("greens"):
        exact = compute_spectral_result(spec, omega).a
        p = np.diag(spec.rho_s).real
        a_lt = lifetime_spectral_function(params, p, omega, source)
        a_bl = beyond_lifetime_spectral_function(params, spec.rho_s, omega, source)
    write_perturbative_csv(run.path("perturbative_spectrum.csv"), omega, a_lt, a_bl, exact)
    for name, a in (("exact", exact), ("lifetime", a_lt), ("beyond_lifetime", a_bl)):
        res = detect_ndos(a, omega)
        run.extra[f"ndos_{name}"] = res.negative
        print(f"NDoS ({name}): {'yes' if res.negative else 'no'}")
    if run.svg:
        line_plot(
            run.path("perturbative_spectrum.svg"),
            omega,
            {"exact": exact, "lifetime": a_lt, "beyond lifetime": a_bl},
            "omega / gamma",
            "A(omega)",
        )


def cmd_phase_diagram(run: Run) -> None:
    params = run.config.model
    opts = run.config.options.get("phase_diagram", {})
    r_grid = np.geomspace(float(opts.get("r_min", 0.2)), float(opts.get("r_max", 8.0)), int(opts.get("r_points", 40)))
    u_grid = np.geomspace(float(opts.get("u_min", 0.5)), float(opts.get("u_max", 200.0)), int(opts.get("u_points", 40)))
    with run.stage("sweep"):
        diagram = phase_diagram(
            r_grid,
            u_grid,
            n_max=params.n_max,
            workers=run.threads,
            points=run.config.omega_points,
            thresholds=bool(opts.get("thresholds", True)),
        )
    write_phase_csv(diagram, run.path("phase.csv"))
    write_threshold_csv(diagram, run.path("threshold.csv"))
    run.extra["cell_errors"] = {f"{k[0]}|{k[1]}": v for k, v in diagram.errors.items()}
    if diagram.errors:
        print(f"{len(diagram.errors)} cells reported errors (see manifest)", file=sys.stderr)
    if run.svg:
        nan = float("nan")
        line_plot(
            run.path("threshold.svg"),
            r_grid,
            {
                "U_c exact": [nan if v is None else v for v in diagram.u_c_exact],
                "U_c lifetime": [nan if v is None else v for v in diagram.u_c_lifetime],
            },
            "r",
            "U_c / gamma",
        )


HANDLERS = {
    "steady-state": cmd_steady_state,
    "spectrum": cmd_spectrum,
    "perturbative": cmd_perturbative,
    "phase-diagram": cmd_phase_diagram,
    "eigvals": cmd_eigvals,
}


def _threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liouvspec", description=__doc__.splitlines()[0])
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="defaults to the config's 'command'")
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=None, help=f"worker count (fallback: ${THREADS_ENV})")
    parser.add_argument("--svg", action="store_true", help="also write SVG plots")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"liouvspec {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config) if args.config else load_config({})
        command = args.command or config.command
        if command is None:
            raise ConfigError("no command given on the command line or in the config")
        config.command = command
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    run = Run(config, out, _threads(args.threads), args.svg)
    try:
        HANDLERS[command](run)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LiouvspecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    manifest = out / "manifest.json"
    manifest.write_text(json.dumps(run.manifest(), indent=2, sort_keys=True) + "\n")
    if run.failures:
        for name in run.failures:
            c = run.checks[name]
            print(f"invariant violated: {name} ({c['value']:.3e} > {c['limit']:.1e})", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
