"""Build :class:`ResultDocument` objects from library results."""

from __future__ import annotations

import math

import numpy as np

from . import papr_math as pm
from .estimator import MonteCarloResult, SizeResult, kde_with_theory
from .iq_io import ResultDocument
from .signal_gen import format_impairment
from .spectro import BandReport, Spectrogram, per_bin_papr


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def monte_carlo_document(result: MonteCarloResult, provenance: dict | None = None) -> ResultDocument:
    series = format_impairment(result.config.impairment)
    columns = ["series", "n", "trials", "mean_papr_db", "ci_low_db", "ci_high_db",
               "theory_db", "mean_of_db"]
    rows = [
        [series, r.n, r.trials, r.mean_papr_db, _finite(r.ci_low_db), r.ci_high_db,
         r.theory_papr_db, r.mean_of_db]
        for r in result.sizes
    ]
    payload = {
        "columns": columns,
        "rows": rows,
        "trial_paprs_db": {str(r.n): r.trial_paprs_db for r in result.sizes},
        "mean_of_db_ci": {str(r.n): list(r.mean_of_db_ci) for r in result.sizes},
    }
    prov = {"seed": result.config.master_seed, "config": result.config.to_dict()}
    prov.update(provenance or {})
    return ResultDocument("monte_carlo", payload, prov)


def kde_document(size: SizeResult, series: str = "none", provenance: dict | None = None) -> ResultDocument:
    k = kde_with_theory(size)
    payload = {
        "n": size.n,
        "series": series,
        "bandwidth_db": k["bandwidth_db"],
        "columns": ["papr_db", "kde_density", "theory_density"],
        "rows": np.column_stack([k["grid_db"], k["density"], k["theory_density"]]),
    }
    return ResultDocument("kde", payload, dict(provenance or {}))


STATS_COLUMNS = [
    "n", "harmonic", "theory_papr_db", "gumbel_mean_papr", "dunsmore_mean_papr",
    "keysight_mean_papr", "mean_cf_exact", "mean_cf_bound", "mean_cf_gumbel",
]
REL_ERR_COLUMNS = [
    "cf_gumbel_rel_err_pct", "cf_bound_rel_err_pct", "dunsmore_rel_err_pct",
    "keysight_rel_err_pct", "dunsmore_err_db", "keysight_err_db",
]


def stats_row(n: int, quantiles=(), rel_err: bool = False) -> list:
    h = pm.mean_papr(n)
    exact_cf = pm.mean_cf_integral(n)
    gumbel = pm.mean_papr_gumbel(n) if n >= 2 else None
    dunsmore = pm.prior_mean_papr_dunsmore(n) if n >= 2 else None
    keysight = pm.prior_mean_papr_keysight(n)
    cf_gumbel = pm.mean_cf_gumbel(n) if n >= 2 else None
    cf_bound = pm.mean_cf_bound(n)
    row = [n, h, pm.to_db(h), gumbel, dunsmore, keysight, exact_cf, cf_bound, cf_gumbel]
    for p in quantiles:
        row += [pm.papr_quantile(p, n), pm.cf_quantile(p, n)]
    if rel_err:
        def pct(approx, exact):
            return None if approx is None else 100.0 * (approx - exact) / exact

        def db_err(approx):
            return None if not approx else pm.to_db(approx / h)

        row += [pct(cf_gumbel, exact_cf), pct(cf_bound, exact_cf), pct(dunsmore, h),
                pct(keysight, h), db_err(dunsmore), db_err(keysight)]
    return row


def stats_table_document(ns, quantiles=(), rel_err: bool = False) -> ResultDocument:
    columns = list(STATS_COLUMNS)
    for p in quantiles:
        columns += [f"papr_q{p:g}", f"cf_q{p:g}"]
    if rel_err:
        columns += REL_ERR_COLUMNS
    rows = [stats_row(int(n), quantiles, rel_err) for n in ns]
    payload = {"columns": columns, "rows": rows}
    prov = {"config": {"n": [int(n) for n in ns], "quantiles": list(quantiles),
                       "rel_err": rel_err}}
    return ResultDocument("stats_table", payload, prov)


def spectrogram_document(s: Spectrogram, provenance: dict | None = None) -> ResultDocument:
    papr_db = per_bin_papr(s)
    mean_power = s.power.mean(axis=1)
    payload = {
        "freq_bins": s.freq_bins,
        "time_bins": s.time_bins,
        "theory_db": pm.to_db(pm.mean_papr(s.time_bins)),
        "columns": ["frequency_hz", "papr_db", "mean_power"],
        "rows": np.column_stack([s.freq_axis, papr_db, mean_power]),
    }
    prov = {"config": s.config.to_dict()}
    prov.update(provenance or {})
    return ResultDocument("spectrogram", payload, prov)


def band_report_document(r: BandReport, provenance: dict | None = None) -> ResultDocument:
    payload = {
        "f_low_hz": r.f_low,
        "f_high_hz": r.f_high,
        "bins": r.bins,
        "time_bins": r.time_bins,
        "band_mean_papr_db": r.band_mean_papr_db,
        "band_ci_db": [_finite(r.band_ci_db[0]), r.band_ci_db[1]],
        "mean_of_db": r.mean_of_db,
        "theory_db": r.theory_db,
        "excess_db": r.excess_db,
        "z_score": _finite(r.z_score),
        "verdict": r.verdict,
        "bin_frequency_hz": r.band_freqs,
        "bin_papr_db": r.papr_db,
        "note": "CI treats frequency bins as independent",
    }
    return ResultDocument("band_report", payload, dict(provenance or {}))
