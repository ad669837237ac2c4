"""Command-line front end.

Usage::

    toric-gk COMMAND [CONFIG] [-o OUTPUT]

Exit codes: 0 when every tolerance check passes, 1 when at least one fails,
2 for invalid input (unreadable or malformed config, bad parameters).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import clifford, connection, curvature, optimize
from .exceptions import ConvexityError, InadmissibleParamsError, ToricGKError
from .frame import assemble_frame, frame_residuals, validate_params
from .polytope import GridSpec, MomentPolytope, PotentialModel, interior_grid
from .validation import check_params

COMMANDS = ("validate", "frame", "curvature", "equivalence", "connection-suite",
            "clifford-selftest", "csc-optimize")

DEFAULT_TOLERANCES = {
    "identity": 1e-9,
    "equivalence": 1e-7,
    "ricci": 1e-7,
    "fd_curvature": 1e-4,
    "connection": 1e-5,
    "epsilon": 1e-7,
    "clifford": 1e-12,
    "csc_objective": 1e-8,
}

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class ConfigError(ValueError):
    """The configuration is unreadable or violates the schema."""


@dataclass
class RunConfig:
    model: PotentialModel
    params: object
    grid: GridSpec
    tolerances: dict
    seed: int = 0
    options: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.model.dim


def _require(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"missing '{key}' in {where}")
    return mapping[key]


def _parse_polytope(spec) -> MomentPolytope:
    n = int(_require(spec, "dim", "polytope"))
    facets = _require(spec, "facets", "polytope")
    pairs = []
    for k, f in enumerate(facets):
        normal = _require(f, "normal", f"polytope.facets[{k}]")
        if len(normal) != n:
            raise ConfigError(f"polytope.facets[{k}].normal has length {len(normal)}, expected {n}")
        pairs.append((normal, float(_require(f, "offset", f"polytope.facets[{k}]"))))
    return MomentPolytope.from_facets(pairs)


def _parse_potential(spec, polytope) -> PotentialModel:
    kind = spec.get("kind", "guillemin") if isinstance(spec, dict) else "guillemin"
    terms = [(t["powers"], t["coeff"]) for t in (spec or {}).get("perturbation", [])]
    if kind == "guillemin" and terms:
        kind = "guillemin_plus_polynomial"
    return PotentialModel(polytope, kind, tuple(terms))


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON config and build the run objects."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    polytope = _parse_polytope(_require(data, "polytope", "config"))
    model = _parse_potential(data.get("potential", {}), polytope)
    raw = data.get("params", {})
    try:
        params = check_params(raw.get("C"), raw.get("F"), model.dim)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    g = data.get("grid", {})
    grid = GridSpec(int(g.get("resolution", 21)), float(g.get("margin", 0.05)))
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in data.get("tolerances", {}).items():
        tolerances[key] = float(value)
    options = {k: v for k, v in data.items()
               if k not in ("polytope", "potential", "params", "grid", "tolerances", "seed")}
    return RunConfig(model, params, grid, tolerances, int(data.get("seed", 0)), options)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    return parse_config(data)


def fmt(x) -> str:
    return format(float(x), ".17g")


def _check(name, value, tol, failures):
    ok = bool(np.isfinite(value) and value <= tol)
    if not ok:
        failures.append(f"{name}: {value:.3e} > {tol:.1e}")
    return {"value": float(value), "tolerance": tol, "passed": ok}


# ---------------------------------------------------------------- commands

def cmd_validate(cfg: RunConfig):
    pts = interior_grid(cfg.model.polytope, cfg.grid)
    cfg.model.check_convexity(pts)
    report = validate_params(cfg.model, cfg.params, pts)
    if not report.passed:
        raise InadmissibleParamsError(
            f"parameters inadmissible: min eigenvalue {report.min_eigenvalue:.6g} "
            f"at mu={report.argmin}", min_eigenvalue=report.min_eigenvalue,
            point=np.asarray(report.argmin))
    return json.dumps(report.as_dict(), indent=2) + "\n", []


def cmd_frame(cfg: RunConfig):
    pts = interior_grid(cfg.model.polytope, cfg.grid)
    tol = cfg.tolerances["identity"]
    failures: list = []
    out = []
    for mu in pts:
        fr = assemble_frame(cfg.model, cfg.params, mu)
        res = frame_residuals(fr)
        checks = {k: _check(f"{k} at {mu.tolist()}", v, tol, failures) for k, v in res.items()}
        out.append({"frame": fr.as_dict(), "residuals": checks})
    return json.dumps(out, indent=1) + "\n", failures


def _csv(samples, n) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"mu_{i + 1}" for i in range(n)]
               + ["kappa_boulanger", "kappa_goto", "kappa_from_ricci", "abs_diff"])
    for s in samples:
        w.writerow([fmt(x) for x in s.as_row()])
    return buf.getvalue()


def cmd_curvature(cfg: RunConfig):
    pts = interior_grid(cfg.model.polytope, cfg.grid)
    samples, summary = curvature.equivalence_scan(cfg.model, cfg.params, pts, float("inf"))
    failures = [f"{e['mu']}: {e['error']}" for e in summary.errors]
    return _csv(samples, cfg.dim), failures


def cmd_equivalence(cfg: RunConfig):
    pts = interior_grid(cfg.model.polytope, cfg.grid)
    tol = cfg.tolerances["equivalence"]
    samples, summary = curvature.equivalence_scan(cfg.model, cfg.params, pts, tol)
    failures = [f"{e['mu']}: {e['error']}" for e in summary.errors]
    if not summary.passed and not summary.errors:
        failures.append(f"max relative discrepancy {summary.max_rel_diff:.3e} > {tol:.1e}")
    rtol = cfg.tolerances["ricci"]
    worst = max((abs(s.kappa_from_ricci - s.kappa_goto) / (1 + abs(s.kappa_goto))
                 for s in samples if s.ok), default=0.0)
    if worst > rtol:
        failures.append(f"ricci trace discrepancy {worst:.3e} > {rtol:.1e}")
    return _csv(samples, cfg.dim), failures


def _sample_points(pts, count):
    if count >= len(pts):
        return pts
    idx = np.unique(np.linspace(0, len(pts) - 1, count).round().astype(int))
    return pts[idx]


def cmd_connection_suite(cfg: RunConfig):
    opts = cfg.options.get("connection", {})
    pts = _sample_points(interior_grid(cfg.model.polytope, cfg.grid),
                         int(opts.get("max_points", 5)))
    tol_c, tol_r, tol_e = (cfg.tolerances[k] for k in ("connection", "fd_curvature", "epsilon"))
    failures: list = []
    out = []
    for mu in pts:
        where = f" at {mu.tolist()}"
        row = {"mu": mu.tolist()}
        for k, v in connection.covariant_constancy_residuals(cfg.model, cfg.params, mu).items():
            row[k] = _check(k + where, v, tol_c, failures)
        for k, v in connection.curvature_symmetry_residuals(cfg.model, cfg.params, mu).items():
            row[k] = _check(k + where, v, tol_r, failures)
        for k, v in connection.integrability_residuals(cfg.model, cfg.params, mu).items():
            row[k] = _check(k + where, v, tol_r, failures)
        eps = connection.epsilon_section_residual(cfg.model, cfg.params, mu)
        row["epsilon_section"] = _check("epsilon_section" + where, eps, tol_e, failures)
        row["kappa_canonical"] = float(
            connection.canonical_scalar_curvature(cfg.model, cfg.params, mu))
        out.append(row)
    return json.dumps(out, indent=1) + "\n", failures


def run_clifford_selftest(seed: int = 0, dims=(1, 2), trials: int = 20, tol: float = 1e-12):
    reports = [clifford.self_test(n, seed=seed, trials=trials, tol=tol) for n in dims]
    failures = [f"n={r['n']} {name}: {c['residual']:.3e}"
                for r in reports for name, c in r["checks"].items() if not c["passed"]]
    return {"seed": seed, "reports": reports, "passed": not failures}, failures


def cmd_clifford_selftest(cfg: RunConfig | None):
    opts = {} if cfg is None else cfg.options.get("clifford", {})
    seed = 0 if cfg is None else cfg.seed
    tol = DEFAULT_TOLERANCES["clifford"] if cfg is None else cfg.tolerances["clifford"]
    report, failures = run_clifford_selftest(seed, tuple(opts.get("n", (1, 2))),
                                             int(opts.get("trials", 20)), tol)
    return json.dumps(report, indent=1) + "\n", failures


def cmd_csc_optimize(cfg: RunConfig):
    opts = cfg.options.get("optimize", {})
    basis_spec = opts.get("basis")
    if not basis_spec:
        raise ConfigError("csc-optimize needs optimize.basis, a list of {\"powers\": [...]}")
    bounds = [tuple(b.get("bounds", (-np.inf, np.inf))) for b in basis_spec]
    try:
        basis = optimize.PerturbationBasis([b["powers"] for b in basis_spec], bounds)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"optimize.basis: {exc}") from exc
    budget = opts.get("budget", 200)
    if not isinstance(budget, int) or budget < 1:
        raise ConfigError(f"optimize.budget must be a positive integer, got {budget!r}")
    pts = interior_grid(cfg.model.polytope, cfg.grid)
    report = optimize.optimize(cfg.model, cfg.params, pts, basis, budget)
    tol = cfg.tolerances["csc_objective"]
    failures = []
    if not report.final_objective <= tol:
        failures.append(f"final objective {report.final_objective:.3e} > {tol:.1e} "
                        f"({report.reason})")
    return json.dumps(report.as_dict(), indent=1) + "\n", failures


HANDLERS = {
    "validate": cmd_validate,
    "frame": cmd_frame,
    "curvature": cmd_curvature,
    "equivalence": cmd_equivalence,
    "connection-suite": cmd_connection_suite,
    "clifford-selftest": cmd_clifford_selftest,
    "csc-optimize": cmd_csc_optimize,
}


def run(command: str, config_path: str | None, output_path: str | None = None,
        stderr=None) -> int:
    """Dispatch one command; returns the exit code."""
    stderr = sys.stderr if stderr is None else stderr
    if command not in HANDLERS:
        print(f"error: unknown command {command!r}", file=stderr)
        return EXIT_INVALID
    try:
        if config_path is None:
            if command != "clifford-selftest":
                raise ConfigError(f"'{command}' needs a config file")
            cfg = None
        else:
            cfg = load_config(config_path)
        text, failures = HANDLERS[command](cfg)
    except InadmissibleParamsError as exc:
        print(f"error: {exc}", file=stderr)
        print(json.dumps({"min_eigenvalue": exc.min_eigenvalue,
                          "point": None if exc.point is None else np.asarray(exc.point).tolist()}),
              file=stderr)
        return EXIT_INVALID
    except ConvexityError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    except (ConfigError, ToricGKError, OSError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    if output_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    for line in failures:
        print(f"FAIL {line}", file=stderr)
    return EXIT_FAIL if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toric-gk",
                                description="Scalar curvature of toric generalized Kähler "
                                            "structures of symplectic type.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", nargs="?", help="JSON run configuration")
    p.add_argument("-o", "--output", default="-", help="output file (default: stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.output)


if __name__ == "__main__":
    sys.exit(main())
