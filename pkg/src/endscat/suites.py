"""Suite runners that turn a resolved config into tables, summaries and checks.

Each runner returns ``(tables, summary, checks)`` where ``tables`` maps a
table name to a list of row dicts and ``checks`` maps a check name to a
boolean.
"""

from __future__ import annotations

import logging

import numpy as np

from . import classical as cl
from .errors import ConfigError
from .fitting import fit_decay, geometric_grid
from .geometry import build_potential, build_warped, check_conditions, conformal_build, probe_grid
from .quantum.channel import build_channel
from .quantum.cook import cook_profile
from .quantum.packets import build_packet
from .quantum.waveop import borderline_demo, cook_bounds, wave_operator

logger = logging.getLogger(__name__)

ENERGY_DRIFT_TOL = 1e-8
SPEED_TOL = 0.02
W_SLACK = 0.1
CAUCHY_SLACK = 1.1
ENERGY_IDENTITY_TOL = 0.05


def metric_from_config(cfg):
    m = cfg["metric"]
    if m["family"] == "conformal":
        probe = probe_grid(**cfg["conditions"]["probe"])
        return conformal_build(tuple(m["params"]), probe).as_warped(m["d"])
    return build_warped(m["family"], tuple(m["params"]), m["d"], m["r_max"], m["pole_regular"])


def potential_from_config(cfg):
    p = cfg["potential"]
    return build_potential(p["kind"], tuple(p["params"]))


def packet_from_config(cfg):
    p = cfg["packet"]
    return build_packet(p["family"], **p["params"], support=tuple(p["support"]), k=p["k"])


def times_from_config(grid):
    if grid["kind"] == "uniform":
        return np.linspace(grid["t0"], grid["t1"], grid["points"])
    return geometric_grid(grid["t0"], grid["t1"], grid["points"])


def _probe(cfg, metric):
    pr = cfg["conditions"]["probe"]
    return probe_grid(pr["r_min"], min(pr["r_max"], metric.r_max), pr["points"])


def run_conditions(cfg, strict=False):
    metric = metric_from_config(cfg)
    rep = check_conditions(metric, potential_from_config(cfg), _probe(cfg, metric),
                           tuple(cfg["conditions"]["requested"]))
    return {"": rep.rows()}, rep.summary(), dict(rep.passed)


def run_classical(cfg, strict=False):
    metric = metric_from_config(cfg)
    c = cfg["classical"]
    t_grid = times_from_config(c["t_grid"])
    delta_star = check_conditions(metric, None, _probe(cfg, metric)).delta_star
    starts = cl.sample_initial_states(c["n_initial"], cfg["seed"], tuple(c["r_range"]),
                                      tuple(c["xi_range"]), tuple(c["ell_range"]))
    rows, fits = [], []
    ok_energy = ok_w = ok_speed = True
    for k, s0 in enumerate(starts):
        traj = cl.geodesic_integrate(metric, s0, t_grid, method=c["method"])
        w = traj.w()
        ratio = traj.d2r2_ratio()
        for j in range(traj.t_grid.size):
            rows.append({"traj": k, "t": traj.t_grid[j], "r": traj.r[j], "xi_r": traj.xi_r[j],
                         "theta": traj.theta[j], "h0": traj.h0[j], "w": w[j], "d2r2_ratio": ratio[j]})
        fit_row = {"traj": k, "status": traj.status, "h0": traj.energy, "energy_drift": traj.energy_drift,
                   "w_exponent": float("nan"), "w_residual": float("nan"), "speed_ratio": float("nan"),
                   "gap_exponent": float("nan")}
        ok_energy &= traj.energy_drift <= ENERGY_DRIFT_TOL * traj.energy
        if traj.escaping:
            wf = fit_decay(traj.t_grid[: w.size], w)
            ap = cl.asymptotic_point(traj)
            fit_row.update(w_exponent=wf.exponent, w_residual=wf.residual, speed_ratio=ap.speed_ratio,
                           gap_exponent=float("nan") if ap.gap_fit is None else ap.gap_fit.exponent)
            ok_w &= wf.exponent >= 1.0 + delta_star - W_SLACK
            ok_speed &= abs(ap.speed_ratio - 1.0) <= SPEED_TOL
        fits.append(fit_row)
    summary = {"delta_star": delta_star, "n_trajectories": len(starts),
               "n_escaping": sum(f["status"] == "escaping" for f in fits),
               "min_w_exponent": min((f["w_exponent"] for f in fits if f["status"] == "escaping"), default=None)}
    return ({"trajectories": rows, "fits": fits}, summary,
            {"energy_drift": ok_energy, "w_decay": ok_w, "asymptotic_speed": ok_speed})


def _verdict_ok(verdict, strict):
    return verdict == "integrable" if strict else verdict != "divergent"


def run_cook(cfg, strict=False):
    chan = build_channel(metric_from_config(cfg), potential_from_config(cfg), cfg["ell"])
    c = cfg["cook"]
    prof = cook_profile(chan, packet_from_config(cfg), times_from_config(c["t_grid"]), c["modified"], c["c"])
    summary = {"exponent": prof.fit.exponent, "residual": prof.fit.residual, "verdict": prof.verdict,
               "modified": prof.modified, "c": prof.c, "tail_coefficient": chan.tail_coefficient}
    return {"": prof.rows()}, summary, {"verdict": _verdict_ok(prof.verdict, strict)}


def run_wave(cfg, strict=False):
    chan = build_channel(metric_from_config(cfg), potential_from_config(cfg), cfg["ell"])
    packet = packet_from_config(cfg)
    w = cfg["wave"]
    g = w["grid"]
    T_list = [float(T) for T in w["T_list"]]
    dx = g["dx"]
    grid = None
    if "r_max" in g:
        grid = {"r_min": g["r_min"], "r_max": g["r_max"]}
        if "n" in g:
            grid["n"] = g["n"]
    elif "n" in g:
        raise ConfigError("wave grid: n needs r_max")
    est = wave_operator(chan, packet, T_list, w["spec_kind"], w["c"], grid, g["dt"], dx)
    bounds = cook_bounds(chan, packet, T_list, w["cook_nodes"], w["spec_kind"] == "dollard", w["c"])
    rows = est.rows()
    for k, row in enumerate(rows):
        row["cook_bound"] = bounds[k - 1] if k else float("nan")
    cauchy_ok = bool(np.all(est.cauchy_gaps <= CAUCHY_SLACK * bounds)) if bounds.size else True
    summary = {"T_list": T_list, "cauchy_gaps": est.cauchy_gaps, "cook_bounds": bounds,
               "energy_pairing": est.energy_pairing, "target_energy": est.target_energy,
               "energy_error": est.energy_error(),
               "sampling_error": {repr(h): v for h, v in est.sampling_error.items()}}
    return {"": rows}, summary, {"cauchy": cauchy_ok, "energy_identity": est.energy_error() <= ENERGY_IDENTITY_TOL}


def run_borderline(cfg, strict=False):
    b = cfg["borderline"]
    rep = borderline_demo(b["case"], b["c"], packet_from_config(cfg), times_from_config(b["t_grid"]),
                          cfg["metric"]["d"])
    rows = [{"t": t, "I_unmodified": a, "I_modified": m}
            for t, a, m in zip(rep.unmodified.t_grid, rep.unmodified.integrand, rep.modified.integrand)]
    witness = [{"t1": t1, "t2": 10.0 * t1, "drift": v} for t1, v in rep.witness.items()]
    return ({"profiles": rows, "witness": witness}, rep.summary(),
            {"dichotomy": rep.passed})


RUNNERS = {
    "conditions": run_conditions,
    "classical": run_classical,
    "cook": run_cook,
    "wave": run_wave,
    "borderline": run_borderline,
}
