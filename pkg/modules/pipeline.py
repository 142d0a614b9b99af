"""
pipeline.py — Subcommand Orchestration
Each cmd_* function backs one CLI subcommand: it loads inputs, calls the
library, writes JSON artifacts and returns a Report (or the written paths).
"""

import logging
import time
from pathlib import Path

import config
from modules import core_numeric as cn
from modules import acceptance, correspond, gtensor, persistence, reconstruct, scene, twist
from modules import visualization as viz
from modules.errors import ConvergenceError
from modules.report import Report

logger = logging.getLogger(__name__)


def _out(exp, name):
    return Path(exp.out_dir) / name


def _save_charts(exp, charts, tables=None):
    """HTML charts and CSV tables under exp.plots, when set."""
    if not exp.plots:
        return
    for fig in charts:
        viz.write_html(fig, exp.plots)
    Path(exp.plots).mkdir(parents=True, exist_ok=True)
    for name, df in (tables or {}).items():
        path = Path(exp.plots) / f"{name}.csv"
        df.to_csv(path, index=False)
        logger.info("wrote table %s", path)


#  Generate

def cmd_generate(exp):
    """Seeded cameras, their tensor and a correspondence set.

    Returns:
        dict: artifact name -> written path.
    """
    profile = exp.profile
    cfg = scene.random_config(exp.n, exp.m, exp.seed)
    A = gtensor.compute_tensor(cfg, profile)
    cs = correspond.sample_correspondences(cfg, profile, exp.correspondence_count(), exp.seed)
    if exp.sigma > 0:
        cs = correspond.add_noise_to_set(cs, exp.sigma, exp.seed + 1)
    logger.info("generated n=%d m=%s: %d tensor entries, %d correspondences", exp.n, exp.m, profile.size, len(cs))
    return {
        "config": persistence.save_config(_out(exp, "config.json"), cfg),
        "tensor": persistence.save_tensor(_out(exp, "tensor.json"), A),
        "correspondences": persistence.save_correspondences(_out(exp, "correspondences.json"), cs),
    }


def cmd_tensor(config_path, alpha, out_path):
    cfg = persistence.load_config(config_path)
    profile = gtensor.Profile(alpha=tuple(alpha), n=cfg.n, m=cfg.m)
    return persistence.save_tensor(out_path, gtensor.compute_tensor(cfg, profile))


#  Estimate & Reconstruct

def cmd_estimate(exp, correspondences_path=None, points_path=None, out_path=None):
    """Estimate a tensor from a correspondence file or a points file."""
    report = Report("estimate", exp.as_dict())
    start = time.perf_counter()
    if points_path:
        n, m, points = persistence.load_points(points_path)
        profile = gtensor.Profile(alpha=exp.alpha, n=n, m=m)
        cs = correspond.expand_point_tuples(points, profile, config.POINT_EXPANSION, exp.seed)
    else:
        cs = persistence.load_correspondences(correspondences_path)

    A, diag = correspond.estimate_tensor(cs, min_count=exp.min_count)
    persistence.save_tensor(out_path or _out(exp, "estimated_tensor.json"), A)
    report.add("corank_one", diag["corank"] == 1, diag["sigma_second_last"], time.perf_counter() - start,
               detail={"count": diag["count"], "sigma_last": diag["sigma_last"]})
    _save_charts(exp, [viz.spectrum_chart(diag["spectrum"])])
    return report


def cmd_reconstruct(exp, tensor_path=None, points_path=None, out_path=None):
    """Cameras from a tensor file (LM restarts) or a points file (factorization)."""
    report = Report("reconstruct", exp.as_dict())
    start = time.perf_counter()
    out_path = out_path or _out(exp, "result.json")
    if points_path:
        n, m, points = persistence.load_points(points_path)
        profile = exp.profile if (exp.n, exp.m) == (n, m) else None
        fit = reconstruct.reconstruct_from_points(points, n, m, profile)
        persistence.save_config(out_path, fit.config)
        report.add("factorization_converged", fit.converged and not fit.degenerate, fit.residual,
                   time.perf_counter() - start, detail={"iterations": fit.iterations})
        return report

    A = persistence.load_tensor(tensor_path)
    results = reconstruct.reconstruct_from_tensor(
        A, restarts=exp.restarts, seed=exp.seed, accept_residual=exp.accept_residual, pgl_tol=exp.pgl_tol,
    )
    persistence.save_results(out_path, results, A.profile)
    report.add("converged", True, results[0].residual, time.perf_counter() - start,
               detail={"orbits": len(results), "labels": [r.orbit_label for r in results]})
    report.insights.append(f"orbits_found: {len(results)}")
    _save_charts(exp, [viz.restart_chart(acceptance.restart_table(results, exp.accept_residual))])
    return report


#  Twist

def cmd_twist(exp, config_path, out_path, verify=False):
    """Write the dual configuration; optionally run the twisted-geometry checks."""
    cfg = persistence.load_config(config_path)
    dual = twist.dual_config(cfg)
    persistence.save_config(out_path, dual.config)
    report = Report("twist", exp.as_dict())
    if verify:
        report.extend(acceptance.hypersurface_equality(cfg, exp.samples, exp.seed))
        report.extend(acceptance.twisted_pair(cfg, exp.restarts, exp.seed, exp.accept_residual, exp.pgl_tol))
        report.extend(acceptance.cremona_structure(cfg, min(exp.samples, 100), exp.seed))
    return report


#  Verify & Pipeline

def cmd_verify(exp, shapes=None):
    """The acceptance suite over the acceptance shapes.

    With exp.seeds > 1 each shape also runs a seed battery from exp.seed.
    """
    report = Report("verify", exp.as_dict())
    charts, tables = [], {}
    for n, m, alpha in shapes or config.ACCEPTANCE_SHAPES:
        result = acceptance.run_shape(n, m, alpha, exp.seed, exp.restarts, exp.samples,
                                      accept_residual=exp.accept_residual, pgl_tol=exp.pgl_tol)
        report.extend(result)
        charts.extend(result["charts"])
        if exp.seeds > 1:
            battery = acceptance.seed_battery(n, m, alpha, exp.seeds, exp.seed, exp.restarts, exp.samples,
                                              exp.accept_residual, exp.pgl_tol)
            report.extend(battery)
            charts.extend(battery["charts"])
            tables[f"battery_n{n}_m{''.join(map(str, m))}"] = battery["table"]
    _save_charts(exp, charts, tables)
    return report


def cmd_pipeline(exp):
    """generate → estimate → reconstruct → twist, all checks in one Report."""
    report = Report("pipeline", exp.as_dict())
    profile = exp.profile
    noisy = exp.sigma > 0
    paths = cmd_generate(exp)
    cfg = persistence.load_config(paths["config"])
    truth = gtensor.compute_tensor(cfg, profile)

    with report.timed("estimation_error", noise_exempt=noisy) as entry:
        cs = persistence.load_correspondences(paths["correspondences"])
        A, diag = correspond.estimate_tensor(cs, min_count=exp.min_count)
        persistence.save_tensor(_out(exp, "estimated_tensor.json"), A)
        entry["margin"] = distance = cn.proj_distance(A.entries, truth.entries)
        entry["passed"] = distance <= 1e-8
        entry["detail"] = {"corank": diag["corank"]}

    charts = [viz.spectrum_chart(diag["spectrum"])]
    results = []
    with report.timed("pgl_round_trip", noise_exempt=noisy) as entry:
        try:
            results = reconstruct.reconstruct_from_tensor(
                A, restarts=exp.restarts, seed=exp.seed, accept_residual=exp.accept_residual, pgl_tol=exp.pgl_tol,
            )
        except ConvergenceError as exc:
            entry["margin"] = exc.best_residual
        else:
            matches = [reconstruct.pgl_equivalent(r.config, cfg, exp.pgl_tol) is not None for r in results]
            entry["passed"] = any(matches)
            entry["margin"] = results[0].residual
            entry["detail"] = {"orbits": len(results)}
        persistence.save_results(_out(exp, "result.json"), results, profile)
    report.insights.append(f"orbits_found: {len(results)}")
    table = acceptance.restart_table(results, exp.accept_residual)
    charts.append(viz.restart_chart(table))

    if exp.twisted_shape:
        dual = twist.dual_config(cfg)
        persistence.save_config(_out(exp, "dual_config.json"), dual.config)
        report.add("orbits_found", len(results) == 2, float(len(results)), noise_exempt=noisy)
        report.extend(acceptance.hypersurface_equality(cfg, exp.samples, exp.seed))
        report.extend(acceptance.cremona_structure(cfg, min(exp.samples, 100), exp.seed))
    else:
        report.add("single_orbit", len(results) == 1, float(len(results)), noise_exempt=noisy)

    sweep = acceptance.noise_degradation(cfg, profile, exp.seed, exp.sweep)
    report.extend(sweep)
    charts.extend(sweep["charts"])
    _save_charts(exp, charts, {"noise_sweep": sweep["sweep"], "restarts": table})
    return report
