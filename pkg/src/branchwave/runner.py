"""Experiment dispatch and machine-readable reporting.

Every experiment writes a versioned JSON summary (schema "branchwave/1")
plus CSV series into the output directory; when plotting is enabled the
report path also renders the matching figures as PNG files next to the
delimited output.  Summaries are deterministic: no timestamps, sorted
keys, and fixed-order reductions throughout the numerics.
"""

from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import numpy as np

from . import figures
from .config import ExperimentConfig
from .errors import NumericalContractError, ValidationError
from .evolution import (StepperConfig, assemble_euclidean, assemble_metric,
                        evolve, write_snapshot)
from .geometry import SheetPoint, build_grid, geodesic_distance_detailed
from .metricfield import (dtilde_1, dtilde_inf, gauss_curvature,
                          inj_bound_comparison, inj_bound_covering,
                          inj_bound_global, inj_bound_local,
                          inj_bound_punctured, make_surface, membership,
                          metric_coefficients)
from .packets import PacketSpec, lift_to_cover, packet_values
from .scattering import (channel_masses, multi_sheet_survey, s_entry_estimate,
                         transmission_experiment)
from .spectral import (branched_disc_eigenvalues, cluster_eigenvalues,
                       disc_oracle_spectrum, localization_error_decay,
                       stationary_phase_pointwise, tail_mass_decay)

SCHEMA = "branchwave/1"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating))
                        else x for x in row])


def _mass_series_csv(path: Path, series) -> None:
    n = series.sheet_masses.shape[1]
    header = (["t"] + [f"sheet{k}_mass" for k in range(n)]
              + [f"far{k}" for k in range(n)] + ["boundary"])
    rows = [[t, *series.sheet_masses[i], *series.far_masses[i],
             series.boundary_masses[i]]
            for i, t in enumerate(series.times)]
    _write_csv(path, header, rows)


def _summary(cfg: ExperimentConfig, results: dict, units: dict,
             series: dict, figure_files: list[str], status: str) -> dict:
    return {
        "schema": SCHEMA,
        "experiment": cfg.kind,
        "config": cfg.raw,
        "results": results,
        "units": units,
        "series": series,
        "figures": sorted(figure_files),
        "status": status,
    }


def _make_surface_from_cfg(metric_cfg: dict):
    family = metric_cfg.get("family", "zero")
    params = dict(metric_cfg.get("params", {}))
    surface = make_surface(family, **params)
    scale = metric_cfg.get("scale")
    if scale is not None:
        surface = surface.scaled(float(scale))
    return surface


def _stepper_from_cfg(cfg: ExperimentConfig) -> StepperConfig:
    return StepperConfig(dt=cfg.dt(),
                         solver_tol=float(cfg.stepper.get("solver_tol", 1e-10)),
                         max_iter=int(cfg.stepper.get("max_iter", 2000)))


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------

def _run_distance(cfg: ExperimentConfig, out: Path):
    spec = cfg.covering()
    rows = []
    results = []
    for entry in cfg.points:
        p1 = SheetPoint(*entry["p1"]["xy"], int(entry["p1"].get("sheet", 0)))
        p2 = SheetPoint(*entry["p2"]["xy"], int(entry["p2"].get("sheet", 0)))
        dist, route, direct_ok = geodesic_distance_detailed(p1, p2, spec)
        results.append({"p1": [p1.x, p1.y, p1.sheet],
                        "p2": [p2.x, p2.y, p2.sheet],
                        "distance": dist, "route": route,
                        "direct_admissible": direct_ok})
        rows.append([p1.x, p1.y, p1.sheet, p2.x, p2.y, p2.sheet, dist, route])
    _write_csv(out / "distances.csv",
               ["x1", "y1", "sheet1", "x2", "y2", "sheet2", "distance",
                "route"], rows)
    return ({"pairs": results},
            {"distance": "flat length on the covering"},
            {"distances": "distances.csv"}, [])


def _run_evolve(cfg: ExperimentConfig, out: Path):
    L, h = cfg.grid_params()
    grid = build_grid(cfg.covering(), L, h)
    spec = cfg.packet_spec()
    stepper = _stepper_from_cfg(cfg)
    T = float(cfg.stepper.get("T", 0.5))
    stride = int(cfg.stepper.get("stride", 0))
    metric_cfg = cfg.metric
    if metric_cfg:
        surface = _make_surface_from_cfg(metric_cfg)
        H = assemble_metric(grid, metric_coefficients(surface))
    else:
        H = assemble_euclidean(grid)
    w0 = lift_to_cover(packet_values(spec, grid.xs, grid.ys, 0.0), grid,
                       mode=cfg.transport.get("lift_mode", "cross"))
    from .scattering import _mass_observer, _series_from_rows
    res = evolve(H, w0, T, stepper, observers=(_mass_observer(
        float(cfg.transport.get("r_far", 4.0))),), stride=stride,
        boundary_threshold=float(cfg.transport.get("boundary_threshold", 1e-4)))
    series = _series_from_rows(res, grid.num_sheets)
    _mass_series_csv(out / "masses.csv", series)
    write_snapshot(out / "final_state.bwf", res.final)
    results = {
        "norm_drift": res.norm_drift,
        "max_boundary_mass": res.max_boundary_mass,
        "boundary_flag": bool(res.boundary_flag),
        "cg_iterations": res.cg_iterations,
        "final_sheet_masses": series.sheet_masses[-1].tolist(),
        "grid_nodes": grid.n_nodes,
        "lam_max": H.lam_max(),
    }
    units = {"norm_drift": "relative", "final_sheet_masses": "squared L2 mass",
             "max_boundary_mass": "mass fraction in outer margin"}
    return results, units, {"masses": "masses.csv",
                            "final_state": "final_state.bwf"}, [
        ("mass_series", series)]


def _run_transmit(cfg: ExperimentConfig, out: Path, *, same_sheet=False):
    L, h = cfg.grid_params()
    grid = build_grid(cfg.covering(), L, h)
    spec = cfg.packet_spec()
    stepper = _stepper_from_cfg(cfg)
    T = float(cfg.stepper.get("T", 0.6))
    tr = cfg.transport
    metric_cfg = cfg.metric
    H = None
    if metric_cfg:
        surface = _make_surface_from_cfg(metric_cfg)
        H = assemble_metric(grid, metric_coefficients(surface))
    rep = transmission_experiment(
        spec, grid, T, stepper,
        t0=cfg.stepper.get("t0"),
        n_samples=int(cfg.stepper.get("n_samples", 4)),
        r_far=float(tr.get("r_far", 4.0)),
        duhamel_steps=int(tr.get("duhamel_steps", 64)),
        pad=float(tr.get("pad", 4.0)),
        boundary_threshold=float(tr.get("boundary_threshold", 5e-3)),
        lift_mode="embed" if same_sheet else "cross",
        H=H, backward=bool(tr.get("backward", True)))
    _mass_series_csv(out / "masses_forward.csv", rep.forward_series)
    if rep.backward_series is not None:
        _mass_series_csv(out / "masses_backward.csv", rep.backward_series)
    _write_csv(out / "residuals.csv", ["t", "residual_fwd", "residual_bwd"],
               [[t, rf, rb] for t, rf, rb in zip(
                   rep.t_samples, rep.residuals_forward,
                   rep.residuals_backward if rep.residuals_backward.size
                   else [float("nan")] * len(rep.t_samples))])
    results = {
        "norm_w0": rep.norm_w0,
        "truncation_defect": rep.truncation_defect,
        "residuals_forward": rep.residuals_forward.tolist(),
        "residuals_backward": rep.residuals_backward.tolist(),
        "max_forward_residual": rep.max_forward_residual,
        "far_field_fraction_forward": rep.far_field_fraction_forward,
        "far_field_fraction_backward": rep.far_field_fraction_backward,
        "projection_fractions": {
            key: {str(k): v for k, v in val.items()}
            for key, val in rep.projection_fractions.items()},
        "boundary_flag": bool(rep.boundary_flag),
        "norm_drift": rep.norm_drift,
        "t_samples": rep.t_samples.tolist(),
        "eps": spec.eps,
    }
    units = {"residuals_forward": "L2 residual / ||w0||",
             "far_field_fraction_forward": "mass fraction outside r_far",
             "projection_fractions": "sheet norm fraction at +-T"}
    series = {"masses_forward": "masses_forward.csv",
              "residuals": "residuals.csv"}
    return results, units, series, [("transmission", rep)]


def _run_smatrix(cfg: ExperimentConfig, out: Path):
    L, h = cfg.grid_params()
    grid = build_grid(cfg.covering(), L, h)
    spec = cfg.packet_spec()
    stepper = _stepper_from_cfg(cfg)
    T = float(cfg.stepper.get("T", 0.6))
    tr = cfg.transport
    pairs = tr.get("pairs", [[1, 0]])
    entries = {}
    for i, j in pairs:
        val = s_entry_estimate(int(i), int(j), spec, grid, T, stepper,
                               pad=float(tr.get("pad", 4.0)),
                               duhamel_steps=int(tr.get("duhamel_steps", 64)),
                               boundary_threshold=float(
                                   tr.get("boundary_threshold", 5e-3)))
        entries[f"S_{i}{j}"] = {"re": val.real, "im": val.imag,
                                "abs": abs(val),
                                "defect_from_one": abs(val - 1.0)}
    _write_csv(out / "smatrix.csv",
               ["entry", "re", "im", "abs", "defect_from_one"],
               [[k, v["re"], v["im"], v["abs"], v["defect_from_one"]]
                for k, v in sorted(entries.items())])
    results = {"entries": entries, "T": T, "eps": spec.eps,
               "bound_3eps": 3.0 * spec.eps}
    units = {"entries": "overlap <S v0, v0> with normalized v0"}
    return results, units, {"smatrix": "smatrix.csv"}, []


def _run_multi_sheet(cfg: ExperimentConfig, out: Path):
    L, h = cfg.grid_params()
    grid = build_grid(cfg.covering(), L, h)
    spec = cfg.packet_spec()
    stepper = _stepper_from_cfg(cfg)
    T = float(cfg.stepper.get("T", 0.6))
    tr = cfg.transport
    survey = multi_sheet_survey(
        spec, grid, T, stepper, r_far=float(tr.get("r_far", 4.0)),
        pad=float(tr.get("pad", 4.0)),
        boundary_threshold=float(tr.get("boundary_threshold", 5e-3)),
        launch_sheets=tr.get("launch_sheets"))
    rows = [[ell, *vals] for ell, vals in sorted(survey["far_matrix"].items())]
    n = survey["num_sheets"]
    _write_csv(out / "far_matrix.csv",
               ["launch_sheet"] + [f"far_sheet{k}" for k in range(n)], rows)
    units = {"far_matrix": "far-field mass fraction per sheet"}
    return survey, units, {"far_matrix": "far_matrix.csv"}, [
        ("survey", survey)]


def _run_metric_report(cfg: ExperimentConfig, out: Path):
    m = cfg.metric
    surface = _make_surface_from_cfg(m)
    rho = float(m.get("rho", 0.25))
    gamma = float(m.get("gamma", 1.0))
    eps = float(m.get("eps", 1.0))
    rep = membership(surface, rho, gamma, eps,
                     R=float(m.get("R", 24.0)),
                     inner_delta=float(m.get("inner_delta", 0.05)))
    results = rep.to_dict()
    samples = []
    for x, y in [(0.0, 0.0), (0.5, 0.5), (2.0, 1.0), (0.0, 2.0)]:
        samples.append({"xy": [x, y],
                        "kappa": gauss_curvature(surface, (x, y)),
                        "dtilde": float(np.abs(
                            math.sqrt(1 + float(surface.grad_sq(x, y)))
                            - 1 / math.sqrt(1 + float(surface.grad_sq(x, y)))))})
    results["samples"] = samples
    units = {"d_1": "integral of dtilde r0^-4 over truncated domain",
             "curvature_bound": "sup |kappa|"}
    _write_csv(out / "metric_report.csv",
               ["quantity", "value"],
               [[k, v] for k, v in results.items()
                if isinstance(v, (int, float))])
    return results, units, {"metric_report": "metric_report.csv"}, []


def _run_inj_bounds(cfg: ExperimentConfig, out: Path):
    m = cfg.metric
    surface = _make_surface_from_cfg(m)
    rows = []
    for eta in (0.25, 0.5, 1.0):
        for K in (0.5, 1.0, 2.0):
            rows.append(["comparison", eta, K, 1.0,
                         inj_bound_comparison(eta, K, 1.0)])
    for beta in (0.0, 0.5, 1.0):
        for gamma in (0.5, 1.0, 2.0):
            rows.append(["global", beta, gamma, float("nan"),
                         inj_bound_global(beta, gamma)])
    pts = m.get("points", [[0.0, 2.0], [0.5, 0.0], [1.5, 0.0]])
    grid_rows = []
    for x, y in pts:
        local = inj_bound_local(surface, (x, y))
        cover = inj_bound_covering(surface, (x, y))
        r = math.hypot(x, y)
        punct = (inj_bound_punctured(surface, (x, y))
                 if 0 < r <= 1.0 else float("nan"))
        grid_rows.append({"xy": [x, y], "local": local, "punctured": punct,
                          "covering": cover})
    _write_csv(out / "inj_bounds.csv",
               ["kind", "p1", "p2", "p3", "value"], rows)
    results = {"formula_table": rows, "pointwise": grid_rows}
    units = {"value": "lower bound on injectivity radius"}
    return results, units, {"inj_bounds": "inj_bounds.csv"}, []


def _run_spectrum(cfg: ExperimentConfig, out: Path):
    sc = cfg.spectrum
    h = float(sc.get("h", 1 / 64))
    count = int(sc.get("count", 12))
    n_distinct = int(sc.get("n_distinct", 5))
    vals = branched_disc_eigenvalues(h, count)
    means, mults = cluster_eigenvalues(vals)
    oracle = disc_oracle_spectrum(n_distinct)
    rows = []
    rels = []
    for i in range(min(n_distinct, len(means))):
        lam_o, mult_o = oracle[i]
        rel = abs(means[i] - lam_o) / lam_o
        rels.append(rel)
        rows.append([i, means[i], mults[i], lam_o, mult_o, rel])
    _write_csv(out / "spectrum.csv",
               ["index", "computed", "multiplicity", "oracle",
                "oracle_multiplicity", "rel_error"], rows)
    results = {"h": h, "computed": means[:n_distinct],
               "multiplicities": mults[:n_distinct],
               "oracle": [o[0] for o in oracle],
               "oracle_multiplicities": [o[1] for o in oracle],
               "rel_errors": rels, "max_rel_error": max(rels)}
    units = {"computed": "Dirichlet eigenvalues of the branched unit disc"}
    return results, units, {"spectrum": "spectrum.csv"}, [
        ("spectrum", results)]


def _run_phase_decay(cfg: ExperimentConfig, out: Path):
    d = cfg.decay
    variant = d.get("variant", "tail_mass")
    spec = cfg.packet_spec()
    if variant == "pointwise":
        times = d.get("times") or np.geomspace(1.0, 30.0, 10).tolist()
        fit = stationary_phase_pointwise(spec.a, times,
                                         speed_factor=float(
                                             d.get("speed_factor", 4.0)))
        _write_csv(out / "pointwise_decay.csv", ["scale", "value"],
                   list(zip(fit.scales.tolist(), fit.values.tolist())))
        results = {"slope": fit.slope, "decades": fit.decades,
                   "values": fit.values.tolist()}
        units = {"slope": "d log10 |Psi| / d log10 (1 + |x| + t)"}
        return results, units, {"pointwise_decay": "pointwise_decay.csv"}, [
            ("decay_fit", fit)]
    if variant == "tail_mass":
        times = d.get("times") or np.geomspace(0.5, 26.0, 9).tolist()
        res = tail_mass_decay(spec, times)
        _write_csv(out / "tail_mass.csv",
                   ["t", "scale", "tail_mass", "grad_tail_mass"],
                   [[t, s, m, gmv] for t, s, m, gmv in zip(
                       res.times, res.fit.scales, res.tail_mass,
                       res.grad_tail_mass)])
        results = {"slope": res.fit.slope, "grad_slope": res.grad_fit.slope,
                   "decades": res.fit.decades,
                   "hypothesis_ok": bool(res.hypothesis_ok)}
        units = {"slope": "d log10 tail mass / d log10 (1 + s t)"}
        return results, units, {"tail_mass": "tail_mass.csv"}, [
            ("tail_decay", res)]
    if variant == "localization":
        s_values = d.get("s_values", [4.0, 8.0, 16.0])
        res = localization_error_decay(spec.a, s_values, eps=spec.eps)
        _write_csv(out / "localization_error.csv",
                   ["s", "integral", "tail_exponent", "hypothesis_ok"],
                   [[s, v, e, int(okf)] for s, v, e, okf in zip(
                       res.s_values, res.integrals, res.tail_exponents,
                       res.hypothesis_ok)])
        results = {"s_values": res.s_values.tolist(),
                   "integrals": res.integrals.tolist(),
                   "strictly_decreasing": res.strictly_decreasing(),
                   "eps_prime": spec.eps_prime,
                   "below_eps_prime": bool(res.integrals[-1] < spec.eps_prime)}
        units = {"integrals": "time integral of the source L2 norm"}
        return results, units, {
            "localization_error": "localization_error.csv"}, [
            ("localization", res)]
    raise ValidationError(f"unknown phase_decay variant {variant!r}")


def _run_convergence(cfg: ExperimentConfig, out: Path):
    target = cfg.sweep.get("target", "cayley_order")
    if target == "cayley_order":
        L, h = cfg.grid_params()
        grid = build_grid(cfg.covering(), L, h)
        spec = cfg.packet_spec()
        H = assemble_euclidean(grid)
        w0 = lift_to_cover(packet_values(spec, grid.xs, grid.ys, 0.0), grid)
        T = float(cfg.stepper.get("T", 0.05))
        dts = cfg.sweep.get("values") or [cfg.dt(), cfg.dt() / 2, cfg.dt() / 4]
        finals = []
        for dt in dts:
            scfg = StepperConfig(dt=float(dt), solver_tol=1e-12)
            finals.append(evolve(H, w0, T, scfg).final.values)
        errs = [float(np.linalg.norm(finals[i] - finals[-1])
                      * math.sqrt(grid.cell_measure))
                for i in range(len(finals) - 1)]
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        rows = [[dts[i], errs[i]] for i in range(len(errs))]
        _write_csv(out / "cayley_order.csv", ["dt", "error_vs_finest"], rows)
        results = {"dts": [float(x) for x in dts], "errors": errs,
                   "ratios": ratios}
        units = {"errors": "L2 distance to the finest-dt run"}
        return results, units, {"cayley_order": "cayley_order.csv"}, []
    if target == "eigenvalue_h":
        hs = cfg.sweep.get("values") or [1 / 16, 1 / 32, 1 / 64]
        n_distinct = int(cfg.spectrum.get("n_distinct", 5))
        oracle = disc_oracle_spectrum(n_distinct)
        table = []
        for h in hs:
            vals = branched_disc_eigenvalues(float(h),
                                             int(cfg.spectrum.get("count", 12)))
            means, _ = cluster_eigenvalues(vals)
            errs = [abs(m - o[0]) / o[0]
                    for m, o in zip(means[:n_distinct], oracle)]
            table.append([float(h), max(errs)])
        _write_csv(out / "eigenvalue_h.csv", ["h", "max_rel_error"], table)
        decreasing = all(table[i][1] > table[i + 1][1]
                         for i in range(len(table) - 1))
        results = {"table": table, "decreasing": decreasing}
        units = {"table": "(h, max relative eigenvalue error)"}
        return results, units, {"eigenvalue_h": "eigenvalue_h.csv"}, []
    raise ValidationError(f"unknown convergence target {target!r}")


_RUNNERS = {
    "distance": _run_distance,
    "evolve": _run_evolve,
    "transmit": _run_transmit,
    "same_sheet": lambda cfg, out: _run_transmit(cfg, out, same_sheet=True),
    "smatrix": _run_smatrix,
    "multi_sheet": _run_multi_sheet,
    "metric_report": _run_metric_report,
    "inj_bounds": _run_inj_bounds,
    "spectrum": _run_spectrum,
    "phase_decay": _run_phase_decay,
    "convergence_sweep": _run_convergence,
}


def run_experiment(cfg: ExperimentConfig, out_dir, *, plots: bool = True,
                   quiet: bool = False) -> tuple[int, dict]:
    """Execute one experiment; returns (exit_code, summary dict).

    Exit codes: 0 success, 2 validation failure, 3 numerical contract
    failure.  Partial artifacts stay on disk either way.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()
    try:
        derived = cfg.validate()
    except ValidationError as exc:
        summary = _summary(cfg, {"error": type(exc).__name__,
                                 "message": str(exc)}, {}, {}, [],
                           "validation_failure")
        (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                     sort_keys=True))
        if not quiet:
            print(f"validation failure: {type(exc).__name__}: {exc}")
        return 2, summary

    try:
        results, units, series, figure_data = _RUNNERS[cfg.kind](cfg, out)
        status = "ok"
        code = 0
        if results.get("boundary_flag"):
            status = "contract_violation"
            code = 3
    except ValidationError as exc:
        summary = _summary(cfg, {"error": type(exc).__name__,
                                 "message": str(exc)}, {}, {}, [],
                           "validation_failure")
        (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                     sort_keys=True))
        if not quiet:
            print(f"validation failure: {type(exc).__name__}: {exc}")
        return 2, summary
    except NumericalContractError as exc:
        summary = _summary(cfg, {"error": type(exc).__name__,
                                 "message": str(exc)}, {}, {}, [],
                           "contract_violation")
        (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                     sort_keys=True))
        if not quiet:
            print(f"numerical contract failure: {exc}")
        return 3, summary

    figure_files: list[str] = []
    if plots:
        figure_files = figures.render(cfg.kind, figure_data, out)

    results["derived"] = derived
    results["elapsed_seconds"] = round(time.perf_counter() - t_start, 3)
    summary = _summary(cfg, results, units, series, figure_files, status)
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=float))
    if not quiet:
        print(f"{cfg.kind}: {status} ({results['elapsed_seconds']} s)"
              f" -> {out / 'summary.json'}")
    return code, summary


def run_sweep(cfg: ExperimentConfig, parameter: str, values, out_dir, *,
              plots: bool = False, quiet: bool = False) -> tuple[int, dict]:
    """Repeated runs over one dotted config parameter, with trend verdicts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = parameter.split(".")
    rows = []
    worst = 0
    metrics_per_value = []
    for idx, value in enumerate(values):
        data = json.loads(json.dumps(cfg.raw))
        node = data
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
        sub = ExperimentConfig.from_dict(data)
        code, summary = run_experiment(sub, out / f"run_{idx:02d}",
                                       plots=plots, quiet=quiet)
        worst = max(worst, code)
        metric = _headline_metric(sub.kind, summary)
        metrics_per_value.append(metric)
        rows.append([value, code, metric])
    _write_csv(out / "sweep.csv", [parameter, "exit_code", "headline_metric"],
               rows)
    vals = [m for m in metrics_per_value if m == m]
    trend = "decreasing" if all(vals[i] > vals[i + 1]
                                for i in range(len(vals) - 1)) else \
        ("increasing" if all(vals[i] < vals[i + 1]
                             for i in range(len(vals) - 1)) else "mixed")
    summary = {
        "schema": SCHEMA,
        "experiment": f"sweep:{cfg.kind}",
        "parameter": parameter,
        "values": list(values),
        "metrics": metrics_per_value,
        "trend": trend,
        "exit_code": worst,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                 sort_keys=True, default=float))
    if not quiet:
        print(f"sweep over {parameter}: trend {trend} -> {out/'summary.json'}")
    return worst, summary


def _headline_metric(kind: str, summary: dict) -> float:
    r = summary.get("results", {})
    try:
        if kind in ("transmit", "same_sheet"):
            return float(r["max_forward_residual"])
        if kind == "spectrum":
            return float(r["max_rel_error"])
        if kind == "phase_decay":
            if "integrals" in r:
                return float(r["integrals"][-1])
            return float(r["slope"])
        if kind == "evolve":
            return float(r["norm_drift"])
        if kind == "smatrix":
            vals = [v["defect_from_one"] for v in r["entries"].values()]
            return float(max(vals))
    except (KeyError, TypeError, ValueError):
        pass
    return float("nan")
