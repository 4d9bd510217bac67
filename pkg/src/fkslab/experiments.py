"""Experiment driver: run chains, pool estimates, evaluate check verdicts,
emit CSV reports.

Inequality checks on jointly sampled quantities use the per-sample
difference stream for their error bars (the sides are strongly correlated,
so independent-error combination would be dishonestly wide).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import config as config_mod
from . import exact, lattice, observables, sampler, stats


@dataclass(frozen=True)
class VerdictRow:
    beta: float
    check: str
    lhs_name: str
    lhs: float
    rhs_name: str
    rhs: float
    margin_sigmas: float
    verdict: str


@dataclass(frozen=True)
class ExperimentResult:
    config: object
    estimates: dict          # (beta, observable) -> Estimate
    verdicts: list
    data_path: str | None
    verdict_path: str | None

    @property
    def exit_code(self):
        return 1 if any(v.verdict == stats.VIOLATED for v in self.verdicts) else 0


def _chain_worker(graph_spec, model_spec, beta, schedule_spec, seed,
                  with_plus_span=True):
    """One chain on a freshly built graph; returns numeric observable columns."""
    g = graph_spec.build()
    params = model_spec.params(beta)
    schedule = sampler.Schedule(burn_in=schedule_spec.burn_in,
                                sweeps=schedule_spec.sweeps,
                                thin=schedule_spec.thin, seed=seed)
    table = sampler.run_chain_table(g, params, schedule,
                                    with_plus_span=with_plus_span)
    out = {name: table[name] for name in observables.names_for(g)
           if name != "e_class" and name in table}
    if "column_sign" in out:
        out["e_plus"] = (out["column_sign"] > 0).astype(np.int8)
        out["e_minus"] = (out["column_sign"] < 0).astype(np.int8)
    return out


def run_chains(graph_spec, model_spec, beta, schedule_spec, with_plus_span=True):
    """Fan out schedule.chains chains with seeds base_seed + i."""
    seeds = [schedule_spec.base_seed + i for i in range(schedule_spec.chains)]
    if schedule_spec.workers > 1 and schedule_spec.chains > 1:
        workers = min(schedule_spec.workers, schedule_spec.chains)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(
                _chain_worker,
                [graph_spec] * len(seeds), [model_spec] * len(seeds),
                [beta] * len(seeds), [schedule_spec] * len(seeds), seeds,
                [with_plus_span] * len(seeds)))
    else:
        tables = [_chain_worker(graph_spec, model_spec, beta, schedule_spec, s,
                                with_plus_span)
                  for s in seeds]
    return seeds, tables


def pooled_estimate(tables, seeds, column, batch_size=stats.DEFAULT_BATCH_SIZE):
    return stats.merge_all([
        stats.accumulate(t[column], batch_size=batch_size, seed=s)
        for t, s in zip(tables, seeds)])


def paired_difference(tables, seeds, rhs_column, lhs_column,
                      batch_size=stats.DEFAULT_BATCH_SIZE):
    """Estimate of E[rhs - lhs] from the per-sample differences."""
    return stats.merge_all([
        stats.accumulate(t[rhs_column].astype(np.float64)
                         - t[lhs_column].astype(np.float64),
                         batch_size=batch_size, seed=s)
        for t, s in zip(tables, seeds)])


def _sigmas(diff):
    return diff.mean / diff.stderr if diff.stderr > 0 else math.inf * np.sign(diff.mean)


# ---------------------------------------------------------------------------
# Monte Carlo checks

def _check_thm31(ctx, beta):
    diff = paired_difference(ctx["tables"], ctx["seeds"], "plus_span", "m_origin")
    verdict = stats.inequality_verdict(ctx["est"][("m_origin")], ctx["est"]["plus_span"],
                                       paired_diff=diff)
    return VerdictRow(beta, "thm31", "M_hat", ctx["est"]["m_origin"].mean,
                      "R_hat", ctx["est"]["plus_span"].mean,
                      _sigmas(diff), verdict)


def _check_thm32i(ctx, beta):
    cfg = ctx["config"]
    diff = paired_difference(ctx["tables"], ctx["seeds"], "plus_span", "m_origin")
    m_hat = ctx["est"]["m_origin"].mean
    p = sampler.p_from_beta(beta, cfg.model.j_horizontal)
    bound = exact.theorem_gap_bound(cfg.graph.d, p, min(abs(m_hat), 1.0))
    gap = diff.mean - bound
    if diff.stderr == 0:
        verdict = stats.HOLDS if gap > 0 else stats.VIOLATED
    elif gap > stats.DEFAULT_K_SIGMA * diff.stderr:
        verdict = stats.HOLDS
    elif -gap > stats.DEFAULT_K_SIGMA * diff.stderr:
        verdict = stats.VIOLATED
    else:
        verdict = stats.INCONCLUSIVE
    return VerdictRow(beta, "thm32i", "M_hat+bound", m_hat + bound,
                      "R_hat", ctx["est"]["plus_span"].mean,
                      gap / diff.stderr if diff.stderr > 0 else math.inf, verdict)


def _check_onsager(ctx, beta):
    est = ctx["est"]["m_origin"]
    target = exact.onsager_magnetization(beta)
    tol = max(0.02, stats.DEFAULT_K_SIGMA * est.stderr)
    dev = abs(est.mean - target)
    verdict = stats.HOLDS if dev <= tol else stats.VIOLATED
    return VerdictRow(beta, "onsager", "M_hat", est.mean, "M_onsager", target,
                      dev / est.stderr if est.stderr > 0 else math.inf, verdict)


def _check_lowtemp(ctx, beta):
    cfg = ctx["config"]
    g = ctx["graph"]
    x = math.exp(-2.0 * beta * cfg.model.j_horizontal)
    pred = exact.low_temp_predictions(x, degree=g.degree(g.origin))
    one_minus_m = 1.0 - ctx["est"]["m_origin"].mean
    one_minus_r = 1.0 - ctx["est"]["plus_span"].mean
    factor = 1.5
    ok_m = pred.one_minus_m / factor <= one_minus_m <= pred.one_minus_m * factor
    ok_r = pred.one_minus_r / factor <= one_minus_r <= pred.one_minus_r * factor
    verdict = stats.HOLDS if (ok_m and ok_r) else stats.VIOLATED
    return VerdictRow(beta, "lowtemp", "1-M_hat", one_minus_m,
                      "2x^n", pred.one_minus_m,
                      one_minus_m / pred.one_minus_m, verdict)


def _check_thm51(ctx, beta):
    # column_sign is the exact two-layer magnetization estimator
    # (E+ minus E- indicator); pairing against column_span resolves the
    # x^8-scale gap that independent errors cannot.
    diff = paired_difference(ctx["tables"], ctx["seeds"], "column_span", "column_sign")
    verdict = stats.inequality_verdict(ctx["est"]["column_sign"],
                                       ctx["est"]["column_span"],
                                       paired_diff=diff)
    return VerdictRow(beta, "thm51", "M_hat", ctx["est"]["column_sign"].mean,
                      "Rc_hat", ctx["est"]["column_span"].mean,
                      _sigmas(diff), verdict)


def _check_prop43(ctx, beta):
    tables, seeds = ctx["tables"], ctx["seeds"]
    diff = stats.merge_all([
        stats.accumulate(t["e_plus"].astype(np.float64)
                         - t["e_minus"].astype(np.float64)
                         - t["event_a"].astype(np.float64), seed=s)
        for t, s in zip(tables, seeds)])
    lhs = ctx["est"]["event_a"]
    rhs_val = ctx["est"]["e_plus"].mean - ctx["est"]["e_minus"].mean
    verdict = stats.inequality_verdict(lhs, ctx["est"]["e_plus"], paired_diff=diff)
    return VerdictRow(beta, "prop43", "phi_A_hat", lhs.mean,
                      "E+_minus_E-_hat", rhs_val, _sigmas(diff), verdict)


_MC_CHECK_FNS = {
    "thm31": _check_thm31,
    "thm32i": _check_thm32i,
    "onsager": _check_onsager,
    "lowtemp": _check_lowtemp,
    "thm51": _check_thm51,
    "prop43": _check_prop43,
}


# ---------------------------------------------------------------------------
# exact checks

def _canonical_impl_npiani_graph(cfg):
    """Smallest faithful region containing Y u dY for Y = {origin column}:
    the interior 3x3 column box when it fits the state budget, else the
    plus-shaped region itself."""
    n = cfg.graph.n_layers
    if 9 * n <= exact.MAX_FREE:
        g = lattice.build_slab(n, 3, periodic_vertical=cfg.graph.periodic)
    else:
        plus_shape = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        g = lattice.build_slab_region(n, plus_shape,
                                      periodic_vertical=cfg.graph.periodic)
    return g


def _check_prop21(cfg, beta):
    g = cfg.graph.build()
    params = cfg.model.params(beta)
    census = _PROP21_CENSUS.setdefault(cfg.graph, exact.fk_census(g))
    report = exact.verify_coupling_identities(g, params, census=census)
    return VerdictRow(beta, "prop21", "M_exact", report.magnetization_exact,
                      "phi_span_exact", report.fk_span_exact,
                      report.abs_difference,
                      stats.HOLDS if report.passed else stats.VIOLATED)


_PROP21_CENSUS = {}


def _check_eq4(cfg, beta):
    g = cfg.graph.build()
    report = exact.verify_eq4_conditionals(g, cfg.model.params(beta))
    return VerdictRow(beta, "eq4", "max_deviation", report.max_deviation,
                      "tolerance", report.tolerance, report.max_deviation,
                      stats.HOLDS if report.passed else stats.VIOLATED)


def _check_impl_npiani(cfg, beta):
    g = _canonical_impl_npiani_graph(cfg)
    report = exact.verify_impl_npiani(g, [g.origin_column], cfg.model.params(beta))
    return VerdictRow(beta, "impl_npiani", "mu_plus_CY", report.mu_plus,
                      "mu_minus_CY", report.mu_minus, report.margin,
                      stats.HOLDS if report.passed else stats.VIOLATED)


def _check_rotation(cfg, beta):
    g = lattice.build_slab(3, 2, periodic_vertical=True)
    report = exact.verify_rotation_invariance(g, cfg.model.params(beta))
    return VerdictRow(beta, "rotation", "max_dev_rotation",
                      report.max_dev_rotation, "tolerance", report.tolerance,
                      report.max_dev_rotation,
                      stats.HOLDS if report.rotation_invariant else stats.VIOLATED)


EXACT_CHECK_FNS = {
    "prop21": _check_prop21,
    "eq4": _check_eq4,
    "impl_npiani": _check_impl_npiani,
    "rotation": _check_rotation,
}


# ---------------------------------------------------------------------------
# driver

def _data_columns(g):
    cols = [n for n in observables.names_for(g) if n != "e_class"]
    if g.columns is not None:
        cols += ["e_plus", "e_minus"]
    return cols


def run_experiment(cfg, out_dir=None, deterministic_headers=True):
    """Run every beta of the grid, write data and verdict CSVs, and return
    the pooled estimates plus verdicts.  Exit code 1 iff a check reports
    "violated"."""
    out_dir = out_dir or cfg.out_dir
    g = cfg.graph.build()
    columns = _data_columns(g)
    estimates = {}
    verdicts = []
    mc_checks = [c for c in cfg.checks if c in _MC_CHECK_FNS]
    exact_checks = [c for c in cfg.checks if c in EXACT_CHECK_FNS]

    for beta in cfg.model.betas:
        seeds, tables = run_chains(cfg.graph, cfg.model, beta, cfg.schedule)
        est = {name: pooled_estimate(tables, seeds, name) for name in columns}
        for name in columns:
            estimates[(beta, name)] = est[name]
        ctx = {"config": cfg, "graph": g, "tables": tables, "seeds": seeds,
               "est": est}
        for check in mc_checks:
            verdicts.append(_MC_CHECK_FNS[check](ctx, beta))
        del tables, ctx

    for beta in cfg.model.betas:
        for check in exact_checks:
            verdicts.append(EXACT_CHECK_FNS[check](cfg, beta))

    data_path = verdict_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        meta = _metadata_lines(cfg, deterministic_headers)
        data_path = os.path.join(out_dir, "data.csv")
        with open(data_path, "w", encoding="utf-8") as fh:
            fh.write("".join(meta))
            fh.write("beta,observable,mean,stderr,n_samples,n_batches\n")
            for beta in cfg.model.betas:
                for name in columns:
                    e = estimates[(beta, name)]
                    fh.write(f"{beta!r},{name},{e.mean!r},{e.stderr!r},"
                             f"{e.n_samples},{e.n_batches}\n")
        verdict_path = os.path.join(out_dir, "verdicts.csv")
        with open(verdict_path, "w", encoding="utf-8") as fh:
            fh.write("".join(meta))
            fh.write("beta,check,lhs_name,lhs,rhs_name,rhs,margin_sigmas,verdict\n")
            for v in verdicts:
                fh.write(f"{v.beta!r},{v.check},{v.lhs_name},{v.lhs!r},"
                         f"{v.rhs_name},{v.rhs!r},{v.margin_sigmas!r},{v.verdict}\n")

    return ExperimentResult(config=cfg, estimates=estimates, verdicts=verdicts,
                            data_path=data_path, verdict_path=verdict_path)


def _enumerable(cfg, need_spins=False, need_bonds=False):
    """Can the configured graph be enumerated within the state budget?"""
    try:
        g = cfg.graph.build()
    except lattice.GraphTooLargeError:
        return False
    shell = g.boundary_mask[g.edges_u] & g.boundary_mask[g.edges_v]
    free_edges = int(np.sum(~shell))
    if need_spins and g.interior.size > exact.MAX_FREE:
        return False
    if need_bonds and free_edges > exact.MAX_MATERIALIZED:
        return False
    if need_spins and free_edges > exact.MAX_FREE:
        return False
    return g.boundary.size > 0


def run_exact_checks(cfg):
    """The exact-enumeration side only: verdict rows for every listed exact
    check.  When the config names none, every check that is applicable to
    the graph kind and fits the enumeration budget is run."""
    checks = [c for c in cfg.checks if c in EXACT_CHECK_FNS]
    if not checks:
        for c in config_mod.EXACT_CHECKS:
            if cfg.graph.resolved_kind not in config_mod.CHECK_REQUIRES[c]:
                continue
            if c == "rotation" and cfg.graph.n_layers != 3:
                continue
            if c == "prop21" and not _enumerable(cfg, need_spins=True):
                continue
            if c == "eq4" and not _enumerable(cfg, need_bonds=True):
                continue
            checks.append(c)
    verdicts = []
    for beta in cfg.model.betas:
        for check in checks:
            verdicts.append(EXACT_CHECK_FNS[check](cfg, beta))
    return verdicts


def _metadata_lines(cfg, deterministic_headers):
    lines = [
        "# fkslab report\n",
        f"# generator = {sampler.GENERATOR_NAME}\n",
        f"# base_seed = {cfg.schedule.base_seed}\n",
        f"# config_sha256 = {cfg.config_hash()}\n",
        f"# graph = {cfg.graph.resolved_kind} side={cfg.graph.side}"
        f" d={cfg.graph.d} N={cfg.graph.n_layers}\n",
        "# spanning_proxy = clusters touching the boundary shell\n",
    ]
    if not deterministic_headers:
        lines.append(f"# generated_at = {datetime.now(timezone.utc).isoformat()}\n")
    return lines
