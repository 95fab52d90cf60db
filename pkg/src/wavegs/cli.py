"""Batch front-end: validate a JSON run configuration, dispatch, write artifacts.

Subcommands mirror the tasks: solve, gram, dalembert, series, witness.  Every
run writes a result.json embedding the fully resolved configuration, the tool
version and the seed, so artifacts are auditable and reproducible; two runs
with the same config and seed differ only in the timestamp field.

Exit codes: 0 success, 2 config error, 3 solver non-convergence,
4 refused (a hypothesis check failed for the requested task).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import DomainSpec, OperatorSpec, SpectralCatalog, build_catalog
from .control import (
    RasterSet,
    dalembert_split,
    kernel_gram,
    rectangle_margin,
    slice_profiles,
    xi_eta_infimum,
)
from .embedding import noncompact_witness, sphere_embedding_series, torus_gap_series
from .energy import EnergyContext, NonlinearitySpec
from .fields import (
    ProductGrid,
    SpectralField,
    WeightField,
    field_to_csv,
    synthesize,
    weight_rectangle,
)
from .saddle import NoCoerciveDirectionError, SolverConfig, ground_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_REFUSED = 4

TASKS = ("solve", "gram", "dalembert", "series", "witness")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    task: str
    domain: DomainSpec
    operator: OperatorSpec
    k_max: int
    l_max: int
    nonlinearity: NonlinearitySpec
    weight_spec: dict
    grid_spec: dict
    solver: SolverConfig
    series: dict
    witness_count: int
    raster: dict
    seed: int
    out: Path
    threads: int = 1
    warnings: list = field(default_factory=list)
    refusal: str | None = None
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {
            "task": self.task,
            "domain": self.domain.to_json(),
            "operator": self.operator.to_json(),
            "cutoffs": {"k_max": self.k_max, "l_max": self.l_max},
            "nonlinearity": self.nonlinearity.to_json(),
            "weight": self.weight_spec,
            "grid": self.grid_spec,
            "solver": {
                "tol_inner": self.solver.tol_inner,
                "tol_outer": self.solver.tol_outer,
                "max_inner": self.solver.max_inner,
                "max_outer": self.solver.max_outer,
                "n_starts": self.solver.n_starts,
                "step_inner0": self.solver.step_inner0,
                "step_outer0": self.solver.step_outer0,
                "divergence_norm": self.solver.divergence_norm,
                "divergence_value": self.solver.divergence_value,
                "eps_kernel": self.solver.eps_kernel,
                "seed": self.solver.seed,
            },
            "series": self.series,
            "witness_count": self.witness_count,
            "raster": self.raster,
            "seed": self.seed,
            "threads": self.threads,
        }


def _parse_domain(node) -> DomainSpec:
    kind = node.get("kind", "circle")
    if kind == "circle":
        return DomainSpec.circle()
    if kind == "torus":
        return DomainSpec.torus(int(node.get("dim", 1)))
    if kind == "sphere":
        return DomainSpec.sphere(int(node.get("dim", 2)))
    raise ConfigError(f"unknown domain kind {kind!r}")


def _parse_operator(node, domain) -> OperatorSpec:
    if "power" in node:
        return OperatorSpec.laplacian_power(int(node["power"]))
    if node.get("klein_gordon"):
        return OperatorSpec.klein_gordon(domain.dim)
    if "coefficients" in node:
        return OperatorSpec(tuple(node["coefficients"]))
    raise ConfigError("operator needs 'power', 'klein_gordon' or 'coefficients'")


def _is_klein_gordon(op: OperatorSpec, dim: int) -> bool:
    return op.coefficients == (Fraction(dim - 1, 2) ** 2, Fraction(1))


def _embedding_threshold(domain: DomainSpec, op: OperatorSpec) -> float | None:
    """p* from the embedding diagnostics; None means no supported criterion."""
    m = op.power_degree
    if domain.kind == "torus":
        if m is None:
            return None
        if domain.dim == 1:
            return float("inf")
        if m % 2 == 0:
            gap = domain.dim - m
            return float("inf") if gap <= 0 else 2.0 * domain.dim / gap
        return None
    if _is_klein_gordon(op, domain.dim):
        return 2.0 * (domain.dim + 1) / (domain.dim - 1) if domain.dim > 1 else float("inf")
    if m is not None and (m % 2 == 0 or domain.dim == 1):
        gap = domain.dim - m
        return float("inf") if gap <= 0 else 2.0 * (domain.dim + 1) / gap
    return None


def _build_weight(spec: dict, grid: ProductGrid, warnings: list) -> WeightField:
    kind = spec.get("kind", "constant")
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        if value < 0:
            raise ConfigError("constant weight must be nonnegative")
        return WeightField.constant(grid, value)
    if kind == "rectangle":
        smoothing = float(spec.get("smoothing", 0.1))
        if smoothing == 0.0:
            warnings.append("pure indicator weight: quadrature of q f(u) may be under-resolved")
        return weight_rectangle(
            grid,
            tuple(spec["x"]),
            tuple(spec["t"]),
            inside=float(spec.get("inside", 1.0)),
            outside=float(spec.get("outside", 0.0)),
            smoothing=smoothing,
        )
    if kind == "grid_file":
        path = Path(spec["path"])
        if path.suffix == ".json":
            values = np.asarray(json.loads(path.read_text()), dtype=float).ravel()
        else:
            values = np.loadtxt(path, delimiter=",").ravel()
        if np.any(values < 0):
            raise ConfigError("weight grid file contains negative values")
        return WeightField(grid, values)
    raise ConfigError(f"unknown weight kind {kind!r}")


def validate_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse, fill defaults, enforce invariants; warnings never block diagnostics."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    overrides = overrides or {}

    task = raw.get("task")
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    warnings: list = []
    refusal = None

    try:
        domain = _parse_domain(raw.get("domain", {"kind": "circle"}))
        operator = _parse_operator(raw.get("operator", {"power": 1}), domain)
        cut = raw.get("cutoffs", {})
        k_max = int(cut.get("k_max", 8))
        l_max = int(cut.get("l_max", 8))
        nl_node = raw.get("nonlinearity", {"terms": [[1.0, 4.0]]})
        nonlinearity = NonlinearitySpec(tuple((a, p) for a, p in nl_node["terms"]))
        solver_node = dict(raw.get("solver", {}))
        n_starts = int(solver_node.pop("starts", solver_node.pop("n_starts", 4)))
        solver = SolverConfig(
            n_starts=n_starts,
            seed=int(raw.get("seed", 0)),
            **{k: v for k, v in solver_node.items()},
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    p_star = _embedding_threshold(domain, operator)
    if p_star is not None and nonlinearity.p >= p_star:
        warnings.append(
            f"p = {nonlinearity.p} is at or above the compactness threshold p* = {p_star}; "
            "ground-state existence is not covered"
        )

    if task == "solve":
        m = operator.power_degree
        if domain.kind == "torus" and domain.dim >= 2 and m == 1:
            refusal = (
                "compact embedding fails for the classical wave on higher tori "
                "(bounded-gap mode family); solve refused, diagnostics still allowed"
            )
        if domain.kind == "sphere":
            refusal = "sphere solves are out of scope (catalog and series diagnostics only)"

    seed = int(overrides.get("seed", raw.get("seed", 0)))
    out = Path(overrides.get("out", raw.get("out", "out")))
    threads = int(overrides.get("threads", raw.get("threads", 1)))

    return RunConfig(
        task=task,
        domain=domain,
        operator=operator,
        k_max=k_max,
        l_max=l_max,
        nonlinearity=nonlinearity,
        weight_spec=raw.get("weight", {"kind": "constant", "value": 1.0}),
        grid_spec=raw.get("grid", {"oversample": 2}),
        solver=SolverConfig(
            tol_inner=solver.tol_inner,
            tol_outer=solver.tol_outer,
            max_inner=solver.max_inner,
            max_outer=solver.max_outer,
            n_starts=solver.n_starts,
            step_inner0=solver.step_inner0,
            step_outer0=solver.step_outer0,
            divergence_norm=solver.divergence_norm,
            divergence_value=solver.divergence_value,
            eps_kernel=solver.eps_kernel,
            seed=seed,
        ),
        series=raw.get("series", {}),
        witness_count=int(raw.get("witness", {}).get("count", 5)),
        raster=raw.get("raster", {"resolution": 256, "set": {"kind": "weight_support"}}),
        seed=seed,
        out=out,
        threads=threads,
        warnings=warnings,
        refusal=refusal,
        raw=raw,
    )


def _make_grid(config: RunConfig, catalog: SpectralCatalog) -> ProductGrid:
    node = config.grid_spec
    if "nx" in node and "nt" in node:
        return ProductGrid(catalog.domain.dim, int(node["nx"]), int(node["nt"]))
    return ProductGrid.for_catalog(catalog, int(node.get("oversample", 2)))


def _write_result(config: RunConfig, payload: dict) -> None:
    config.out.mkdir(parents=True, exist_ok=True)
    doc = {
        "version": __version__,
        "task": config.task,
        "seed": config.seed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config": config.resolved(),
        "warnings": config.warnings,
        "result": payload,
    }
    (config.out / "result.json").write_text(json.dumps(doc, sort_keys=True, indent=2))


def _run_solve(config: RunConfig) -> int:
    catalog = build_catalog(config.domain, config.operator, config.k_max, config.l_max)
    grid = _make_grid(config, catalog)
    weight = _build_weight(config.weight_spec, grid, config.warnings)
    if weight.is_trivial():
        raise ConfigError("weight vanishes identically")
    ctx = EnergyContext(catalog, grid, weight, config.nonlinearity)
    try:
        result = ground_state(ctx, config.solver, threads=config.threads)
    except NoCoerciveDirectionError as exc:
        _write_result(config, {"error": str(exc)})
        return EXIT_NO_CONVERGENCE

    log_path = config.out
    log_path.mkdir(parents=True, exist_ok=True)
    with open(log_path / "solver_log.jsonl", "w") as fh:
        for rec in result.history:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (log_path / "coefficients.json").write_text(
        json.dumps(result.u_star.to_json(), sort_keys=True)
    )
    field_to_csv(result.u_star, grid, log_path / "field.csv")
    payload = {
        "energy": result.energy,
        "s_w": result.s_w,
        "residual": result.residual,
        "converged": result.converged,
        "message": result.message,
        "quadrature_gap": result.quadrature_gap,
        "dropped_kernel": result.dropped_kernel,
        "kernel_gram": result.kernel_report.to_json() if result.kernel_report else None,
        "outer_records": len(result.history),
    }
    _write_result(config, payload)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _run_gram(config: RunConfig) -> int:
    catalog = build_catalog(config.domain, config.operator, config.k_max, config.l_max)
    grid = _make_grid(config, catalog)
    weight = _build_weight(config.weight_spec, grid, config.warnings)
    report = kernel_gram(weight, catalog, grid, config.solver.eps_kernel)
    _write_result(config, {"gram": report.to_json()})
    return EXIT_OK


def _raster_from_config(config: RunConfig, grid, weight) -> RasterSet:
    node = config.raster
    resolution = int(node.get("resolution", 256))
    setspec = node.get("set", {"kind": "weight_support"})
    kind = setspec.get("kind", "weight_support")
    if kind == "rectangle":
        return RasterSet.rectangle(tuple(setspec["x"]), tuple(setspec["t"]), resolution)
    if kind == "full":
        return RasterSet.full(resolution)
    if kind == "weight_support":
        return RasterSet.from_weight(weight, float(setspec.get("threshold", 0.0)))
    raise ConfigError(f"unknown raster set kind {kind!r}")


def _run_dalembert(config: RunConfig) -> int:
    catalog = build_catalog(config.domain, config.operator, config.k_max, config.l_max)
    if not (config.domain.is_circle and config.operator.power_degree == 1):
        _write_result(config, {"error": "d'Alembert diagnostics need the classical wave on the circle"})
        return EXIT_REFUSED
    grid = _make_grid(config, catalog)
    weight = _build_weight(config.weight_spec, grid, config.warnings)
    omega = _raster_from_config(config, grid, weight)
    inf_a, inf_b = xi_eta_infimum(omega)
    offsets, meas_a, meas_b = slice_profiles(omega)
    config.out.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        config.out / "slices.csv",
        np.column_stack([offsets, meas_a, meas_b]),
        delimiter=",",
        header="offset,measure_A,measure_B",
        comments="",
    )
    payload: dict = {"inf_A": inf_a, "inf_B": inf_b, "resolution": omega.resolution}
    setspec = config.raster.get("set", {})
    if setspec.get("kind") == "rectangle":
        x0, x1 = setspec["x"]
        t0, t1 = setspec["t"]
        payload["rectangle_margin"] = rectangle_margin(x0, x1, t0, t1)

    # split demo: a seeded random kernel field, reconstruction checked on the grid
    rng = np.random.default_rng(config.seed)
    coeffs = np.zeros(catalog.size)
    coeffs[catalog.zero_idx] = rng.standard_normal(catalog.kernel_dim())
    u0 = SpectralField(catalog, coeffs)
    phi, psi = dalembert_split(u0)
    xs, ts = np.meshgrid(grid.x_nodes, grid.t_nodes, indexing="ij")
    recon = phi(xs + ts) + psi(xs - ts)
    err = float(np.max(np.abs(recon.ravel() - synthesize(u0, grid))))
    payload["split_reconstruction_error"] = err
    s = np.linspace(0.0, 2 * np.pi, 257)[:-1]
    np.savetxt(
        config.out / "profiles.csv",
        np.column_stack([s, phi(s), psi(s)]),
        delimiter=",",
        header="s,phi,psi",
        comments="",
    )
    _write_result(config, payload)
    return EXIT_OK


def _run_series(config: RunConfig) -> int:
    node = config.series
    p = float(node.get("p", config.nonlinearity.p))
    if config.domain.kind == "torus":
        m = config.operator.power_degree
        if m is None:
            raise ConfigError("torus series needs a pure power operator")
        report = torus_gap_series(config.domain.dim, m, p, int(node.get("cutoff", 48)))
    else:
        kg = _is_klein_gordon(config.operator, config.domain.dim)
        m = 1 if kg else config.operator.power_degree
        if m is None:
            raise ConfigError("sphere series needs a pure power or the mass-shift operator")
        report = sphere_embedding_series(
            config.domain.dim,
            m,
            p,
            j_cut=int(node.get("j_cut", 64)),
            l_cut=int(node.get("l_cut", 10000)),
            operator="klein_gordon" if kg else "power",
        )
    config.out.mkdir(parents=True, exist_ok=True)
    report.terms_to_csv(config.out / "series_terms.csv")
    _write_result(config, {"series": report.to_json()})
    return EXIT_OK


def _run_witness(config: RunConfig) -> int:
    m = config.operator.power_degree
    try:
        wit = noncompact_witness(config.domain.dim, m if m is not None else 0, config.witness_count)
    except ValueError as exc:
        _write_result(config, {"error": str(exc)})
        return EXIT_REFUSED
    _write_result(
        config,
        {"witness": [{"k": list(k), "l": l, "lambda": lam} for k, l, lam in wit]},
    )
    return EXIT_OK


def run(config: RunConfig) -> int:
    """Dispatch a validated config; artifacts land in config.out."""
    for msg in config.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    if config.refusal is not None:
        print(f"refused: {config.refusal}", file=sys.stderr)
        _write_result(config, {"error": config.refusal})
        return EXIT_REFUSED
    try:
        if config.task == "solve":
            return _run_solve(config)
        if config.task == "gram":
            return _run_gram(config)
        if config.task == "dalembert":
            return _run_dalembert(config)
        if config.task == "series":
            return _run_series(config)
        return _run_witness(config)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wavegs",
        description="Ground states and hypothesis diagnostics for periodic nonlinear waves",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TASKS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    try:
        config = validate_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.task != args.command:
        print(
            f"config error: config task {config.task!r} does not match subcommand {args.command!r}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    try:
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
