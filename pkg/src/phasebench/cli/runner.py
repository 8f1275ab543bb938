"""Pipelines behind each experiment kind, result files and plot-data tables."""
import csv
import json
import logging
import math
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..errors import CapExceededError, InvariantError
from ..extrapolation import (
    AccuracyCurve, advantage_report, bootstrap_surface, fit_finite_size, forward_validation,
)
from ..fq import SimulationBudget, estimate_vm, fit_vm, predict_accuracy, simulate_protocol
from ..mf.experiments import accuracy_replicates
from ..noise import NoiseChannelSpec
from ..phase_states import concept_for_rule
from ..rng import RandomSource
from ..shadows import surrogate_vs_truth_report
from .config import ExperimentConfig, config_hash

__all__ = ["run_experiment", "emit_plot_data", "read_curves_csv", "PLOT_COLUMNS"]

log = logging.getLogger("phasebench")

KIND_CODES = {"fq-accuracy": 1, "mf-run": 2, "shadow-validate": 3, "extrapolate": 4, "advantage-report": 5}
CURVE_COLUMNS = ["config_hash", "method", "channel", "eps_p", "alpha_rule", "n_q", "replicate", "k", "accuracy"]
FQ_COLUMNS = ["config_hash", "device", "channel", "eps_p", "alpha_rule", "n_q", "alpha_weight",
              "accuracy", "stderr", "predicted_without_vm"]
FIT_COLUMNS = ["config_hash", "method", "channel", "eps_p", "T", "C", "beta", "cov_CC", "cov_Cbeta",
               "cov_betabeta", "n_points"]
PLOT_COLUMNS = {
    "fig2": ["config_hash", "device", "channel", "eps_p", "alpha_rule", "n_q", "accuracy", "observed_or_extrapolated"],
    "fig3": ["config_hash", "method", "channel", "eps_p", "n_q", "k", "accuracy"],
    "fig5": ["config_hash", "method", "channel", "eps_p", "n_q", "T_eta", "log2_nc", "ci68_lo", "ci68_hi",
             "runtime_s", "trusted", "observed_or_extrapolated"],
}


class _CsvSink:
    """Append rows and flush each one so partial results survive a crash."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = columns
        self._fh = open(self.path, "w", newline="")
        self._w = csv.DictWriter(self._fh, fieldnames=columns)
        self._w.writeheader()
        self._fh.flush()

    def write(self, row):
        self._w.writerow({c: _fmt(row.get(c, "")) for c in self.columns})
        self._fh.flush()

    def close(self):
        self._fh.close()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _provenance() -> str:
    from .. import __version__

    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             timeout=5, cwd=Path(__file__).parent).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"phasebench {__version__}" + (f" @ {rev}" if rev else "")


def _settings(cfg: ExperimentConfig):
    out = []
    for ci, ch in enumerate(cfg.channels):
        for ei, eps in enumerate(ch.eps_p):
            out.append((ci, ei, NoiseChannelSpec(ch.kind, eps)))
    return out


def _concept(cfg, n_q):
    rule, w = cfg.alpha_spec()
    return concept_for_rule(n_q, rule, w)


def _check_caps(cfg, sizes):
    big = [n for n in sizes if n > cfg.max_qubits]
    if big:
        raise CapExceededError(f"n_q={max(big)} exceeds max_qubits={cfg.max_qubits}")


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_fq(cfg, out, h, threads=1):
    _check_caps(cfg, cfg.n_q)
    device = cfg.device_model()
    dev_arg = None if device.noiseless else device
    budget = SimulationBudget(cfg.budgets.n_functions, cfg.budgets.n_trajectories, cfg.budgets.n_shots)
    sink = _CsvSink(out / "fq_accuracy.csv", FQ_COLUMNS)
    rows = []
    tasks = [(n, s) for n in cfg.n_q for s in _settings(cfg)]

    def one(task):
        n, (ci, ei, prep) = task
        alpha = _concept(cfg, n)
        src = RandomSource(cfg.seed, (KIND_CODES["fq-accuracy"], n, ci, ei))
        res = simulate_protocol(cfg.budgets.n_functions, alpha, prep, dev_arg, budget, src,
                                routing_trials=cfg.budgets.routing_trials, max_qubits=cfg.max_qubits)
        return {
            "config_hash": h, "device": cfg.device_name(), "channel": prep.kind, "eps_p": prep.epsilon_p,
            "alpha_rule": cfg.alpha_label(), "n_q": n, "alpha_weight": alpha.weight,
            "accuracy": res.accuracy, "stderr": res.stderr,
            "predicted_without_vm": predict_accuracy(n, alpha.weight, prep, dev_arg, None),
        }

    for row in _pmap(one, tasks, threads):
        sink.write(row)
        rows.append(row)
    sink.close()
    return {"fq": rows}


def run_mf(cfg, out, h, threads=1):
    sizes = cfg.n_q
    ks = cfg.k_values()
    sink = _CsvSink(out / "mf_curves.csv", CURVE_COLUMNS)
    tasks = [(m, s, n) for m in cfg.methods for s in _settings(cfg) for n in sizes]
    opts = {"ml_samples": cfg.budgets.ml_samples, "inner_functions": cfg.budgets.inner_functions}

    def one(task):
        method, (ci, ei, prep), n = task
        mi = cfg.methods.index(method)
        src = RandomSource(cfg.seed, (KIND_CODES["mf-run"], mi, ci, ei, n))
        t0 = time.perf_counter()
        reps = accuracy_replicates(method, n, _concept(cfg, n), prep, ks, cfg.budgets.replicates, src, **opts)
        log.info("mf %s %s eps=%g n_q=%d done in %.1fs", method, prep.kind, prep.epsilon_p, n,
                 time.perf_counter() - t0)
        return method, prep, n, reps

    rows = []
    for method, prep, n, reps in _pmap(one, tasks, threads):
        for r in range(reps.shape[0]):
            for j, k in enumerate(ks):
                row = {"config_hash": h, "method": method, "channel": prep.kind, "eps_p": prep.epsilon_p,
                       "alpha_rule": cfg.alpha_label(), "n_q": n, "replicate": r, "k": k,
                       "accuracy": float(reps[r, j])}
                sink.write(row)
                rows.append(row)
    sink.close()
    return {"curves": rows}


def read_curves_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["eps_p"] = float(r["eps_p"])
        r["n_q"] = int(r["n_q"])
        r["replicate"] = int(r["replicate"])
        r["k"] = float(r["k"])
        r["accuracy"] = float(r["accuracy"])
    return rows


def curves_from_rows(rows) -> dict:
    """{(method, channel, eps_p): [AccuracyCurve per n_q]} from long-format rows."""
    groups = {}
    for r in rows:
        groups.setdefault((r["method"], r["channel"], float(r["eps_p"])), {}).setdefault(int(r["n_q"]), []).append(r)
    out = {}
    for key, by_n in groups.items():
        curves = []
        for n, rs in sorted(by_n.items()):
            ks = sorted({float(r["k"]) for r in rs})
            reps = sorted({int(r["replicate"]) for r in rs})
            mat = np.full((len(reps), len(ks)), np.nan)
            for r in rs:
                mat[reps.index(int(r["replicate"])), ks.index(float(r["k"]))] = float(r["accuracy"])
            if np.isnan(mat).any():
                raise InvariantError(f"incomplete replicate grid for {key} n_q={n}")
            curves.append(AccuracyCurve.from_replicates(ks, mat, n, {"method": key[0], "channel": key[1],
                                                                      "eps_p": key[2]}))
        out[key] = curves
    return out


def _extrapolate(cfg, curve_rows, h):
    fits, vals, fit_rows = {}, {}, []
    for key, curves in sorted(curves_from_rows(curve_rows).items()):
        km = (KIND_CODES["extrapolate"], cfg.methods.index(key[0]) if key[0] in cfg.methods else 99)
        surf = bootstrap_surface(curves, n_boot=cfg.budgets.bootstrap,
                                 rng=RandomSource(cfg.seed, km + (int(round(key[2] * 1e6)),)))
        try:
            fit = fit_finite_size(surf)
        except ValueError:
            log.warning("no fittable slice for %s", key)
            continue
        fits[key] = fit
        vals[key] = forward_validation(surf)
        for s in fit.slices:
            fit_rows.append({"config_hash": h, "method": key[0], "channel": key[1], "eps_p": key[2], "T": s.T,
                             "C": s.C, "beta": s.beta, "cov_CC": s.cov[0, 0], "cov_Cbeta": s.cov[0, 1],
                             "cov_betabeta": s.cov[1, 1], "n_points": len(s.n_q)})
    return fits, vals, fit_rows


def _validation_doc(vals):
    return {
        f"{m}|{c}|{e}": {"trusted": v.trusted, "reasons": v.reasons, "n_hor": v.n_hor,
                         "rmse_pooled": v.rmse_pooled, "rmse_max": v.rmse_max,
                         "sigma_cv_obs": v.sigma_cv_obs, "sigma_cv_extrap": v.sigma_cv_extrap,
                         "boundary_sigma_log2": v.boundary_sigma_log2, "slices": [float(s) for s in v.slices]}
        for (m, c, e), v in vals.items()
    }


def _curve_rows(cfg, out, h, threads):
    if cfg.input_curves:
        return read_curves_csv(cfg.input_curves)
    return run_mf(cfg, out, h, threads)["curves"]


def run_extrapolate(cfg, out, h, threads=1):
    rows = _curve_rows(cfg, out, h, threads)
    fits, vals, fit_rows = _extrapolate(cfg, rows, h)
    _write_rows(out / "fits.csv", FIT_COLUMNS, fit_rows)
    (out / "validation.json").write_text(json.dumps({"config_hash": h, "cases": _validation_doc(vals)},
                                                    indent=2, sort_keys=True))
    return {"curves": rows, "fits": fit_rows}


def _write_rows(path, columns, rows):
    sink = _CsvSink(path, columns)
    for r in rows:
        sink.write(r)
    sink.close()


def fit_device_vm(cfg, device, sizes):
    """Circuit visibility fit on the full-weight concepts for the given register sizes."""
    ws, vs = [], []
    for n in sizes:
        v, _, w = estimate_vm(device, n, "full", None, cfg.budgets.vm_functions, cfg.budgets.vm_shots,
                              RandomSource(cfg.seed, (KIND_CODES["advantage-report"], 7, n)),
                              cfg.budgets.routing_trials)
        ws.append(w)
        vs.append(v)
    if device.noiseless or np.ptp(vs) == 0:
        return None
    return fit_vm(ws, vs, device.name)


def run_advantage(cfg, out, h, threads=1):
    device = cfg.device_model()
    dev_arg = None if device.noiseless else device
    rows = _curve_rows(cfg, out, h, threads)
    fits, vals, fit_rows = _extrapolate(cfg, rows, h)
    _write_rows(out / "fits.csv", FIT_COLUMNS, fit_rows)
    vm_sizes = cfg.vm_n_q or [n for n in range(3, 13)]
    _check_caps(cfg, vm_sizes + (cfg.fq_n_q or []))
    vm = fit_device_vm(cfg, device, vm_sizes) if dev_arg is not None else None
    report_sizes = cfg.report_n_q or sorted(set(cfg.n_q))
    n_obs = max(cfg.n_q)
    fq_sizes = cfg.fq_n_q or []
    budget = SimulationBudget(cfg.budgets.n_functions, cfg.budgets.n_trajectories, cfg.budgets.n_shots)

    fig2, report_rows, reports = [], [], []
    for ci, ei, prep in _settings(cfg):
        def a_q(n, prep=prep):
            return predict_accuracy(n, _concept(cfg, n).weight, prep, dev_arg, vm)

        for n in fq_sizes:
            res = simulate_protocol(cfg.budgets.n_functions, _concept(cfg, n), prep, dev_arg, budget,
                                    RandomSource(cfg.seed, (KIND_CODES["advantage-report"], 8, ci, ei, n)),
                                    routing_trials=cfg.budgets.routing_trials, max_qubits=cfg.max_qubits)
            fig2.append({"config_hash": h, "device": cfg.device_name(), "channel": prep.kind,
                         "eps_p": prep.epsilon_p, "alpha_rule": cfg.alpha_label(), "n_q": n,
                         "accuracy": res.accuracy, "observed_or_extrapolated": "observed"})
        for n in report_sizes:
            fig2.append({"config_hash": h, "device": cfg.device_name(), "channel": prep.kind,
                         "eps_p": prep.epsilon_p, "alpha_rule": cfg.alpha_label(), "n_q": n,
                         "accuracy": a_q(n), "observed_or_extrapolated": "model"})
        mf_fits = {m: f for (m, c, e), f in fits.items() if c == prep.kind and math.isclose(e, prep.epsilon_p)}
        mf_vals = {m: v for (m, c, e), v in vals.items() if c == prep.kind and math.isclose(e, prep.epsilon_p)}
        if not mf_fits:
            log.warning("no MF fits for %s eps=%g", prep.kind, prep.epsilon_p)
            continue
        meta = {"channel": prep.kind, "eps_p": prep.epsilon_p, "eps_r": device.eps_r,
                "alpha_rule": cfg.alpha_label(), "device": cfg.device_name(),
                "vm": None if vm is None else {"c": vm.c, "beta": vm.beta}}
        rep = advantage_report(mf_fits, a_q, report_sizes, cfg.eta, cfg.cycle_time_s, mf_vals, meta)
        reports.append(rep)
        for p, row in zip(rep.points, rep.rows()):
            row["config_hash"] = h
            row["observed_or_extrapolated"] = "observed" if p.n_q <= n_obs else "extrapolated"
            report_rows.append(row)

    from ..extrapolation.report import REPORT_COLUMNS, SCHEMA_VERSION

    _write_rows(out / "advantage.csv", REPORT_COLUMNS + ["observed_or_extrapolated", "config_hash"], report_rows)
    doc = {"schema_version": SCHEMA_VERSION, "config_hash": h,
           "reports": [json.loads(r.to_json()) for r in reports],
           "validation": _validation_doc(vals)}
    (out / "advantage.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    results = {"curves": rows, "fq_plot": fig2, "report": report_rows, "fits": fit_rows}
    for kind in ("fig2", "fig3", "fig5"):
        emit_plot_data(results, kind, out / f"plot_{kind}.csv", h)
    return results


def run_shadow(cfg, out, h, threads=1):
    rows = []
    sink = _CsvSink(out / "shadow_validation.csv",
                    ["config_hash", "n_q", "n_c", "channel", "eps_p", "td_explicit", "td_surrogate",
                     "td_explicit_sd", "td_surrogate_sd"])
    for n in cfg.n_q:
        grid = sorted({max(1, int(round(2.0 ** (k * n)))) for k in cfg.k_values()})
        for ci, ei, prep in _settings(cfg):
            for r in surrogate_vs_truth_report(n, grid, prep, cfg.budgets.shadow_repetitions,
                                               RandomSource(cfg.seed, (KIND_CODES["shadow-validate"], n, ci, ei))):
                r["config_hash"] = h
                sink.write(r)
                rows.append(r)
    sink.close()
    return {"shadow": rows}


def emit_plot_data(results: dict, kind: str, path, h: str = "") -> Path:
    """Long-format CSV with one row per plotted point."""
    if kind not in PLOT_COLUMNS:
        raise ValueError(f"unknown figure kind {kind!r}")
    if kind == "fig2":
        src = results.get("fq_plot")
    elif kind == "fig3":
        src = results.get("curves")
    else:
        src = results.get("report")
    if not src:
        raise ValueError(f"no results available for {kind}")
    rows = []
    if kind == "fig3":
        agg = {}
        for r in src:
            key = (r["method"], r["channel"], float(r["eps_p"]), int(r["n_q"]), float(r["k"]))
            agg.setdefault(key, []).append(float(r["accuracy"]))
        for (m, c, e, n, k), accs in sorted(agg.items()):
            rows.append({"config_hash": h or src[0].get("config_hash", ""), "method": m, "channel": c,
                         "eps_p": e, "n_q": n, "k": k, "accuracy": float(np.mean(accs))})
    else:
        rows = [dict(r, config_hash=h or r.get("config_hash", "")) for r in src]
    _write_rows(path, PLOT_COLUMNS[kind], rows)
    return Path(path)


PIPELINES = {
    "fq-accuracy": run_fq, "mf-run": run_mf, "shadow-validate": run_shadow,
    "extrapolate": run_extrapolate, "advantage-report": run_advantage,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> dict:
    out = Path(out_dir or os.environ.get("PHASEBENCH_OUT") or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = config_hash(cfg)
    started = time.time()
    (out / "config.json").write_text(cfg.model_dump_json(indent=2))
    results = PIPELINES[cfg.kind](cfg, out, h, threads)
    manifest = {
        "config_hash": h, "kind": cfg.kind, "provenance": _provenance(),
        "started_unix": started, "finished_unix": time.time(),
        "files": sorted(p.name for p in out.iterdir() if p.is_file()),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return results
