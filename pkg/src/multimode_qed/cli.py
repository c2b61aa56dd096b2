"""Command-line front door: CSV tables for every subsystem plus the named
figure-reproduction recipes.

All outputs are manifest-stamped CSVs (see csvio); numerical presets for
the `reproduce` recipes live in data files under presets/ so the chosen
parameter values can be audited without reading code.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import RunManifest, write_csv
from .errors import ConfigError, MultimodeQedError, NumericsError
from .greens import build_kernels, green_direct
from .linear import (decay_rate_sweep, find_hybridized_poles,
                     hybridization_coefficients, linear_time_solution,
                     residues_at_poles)
from .modes import mode_table_rows, quasibound_frequencies
from .mspt import HALF_EXCITED, mspt_expectation_trace, spectrum
from .output import field_response, output_spectrum
from .params import (CircuitParams, DerivedParams, derive_params, load_config,
                     params_from_chi_s)
from .toy import ToyParams, toy_pole_sweep
from .volterra import SolverConfig, compare_traces, integrate_reduced

FIGURE_IDS = ("fig2", "fig3", "fig3a", "fig3b", "fig3c", "fig3d", "fig4",
              "fig5", "fig6", "fig7", "fig8", "fig9", "fig9a", "fig9b",
              "fig9c", "fig9d", "fig10", "fig11")


# ---------------------------------------------------------------------------
# preset and parameter plumbing
# ---------------------------------------------------------------------------

def read_preset(name: str) -> dict:
    ref = resources.files("multimode_qed").joinpath(f"presets/{name}.cfg")
    if not ref.is_file():
        raise ConfigError(f"no preset named '{name}'")
    values = {}
    for raw in ref.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values


def pf(preset, key):
    try:
        return float(preset[key])
    except KeyError:
        raise ConfigError(f"preset missing key '{key}'") from None


def plist(preset, key):
    return [float(v) for v in preset[key].split(",")]


def bare_first_mode(chi_r, chi_l, x0):
    """nu_1 of the resonator without the scatterer (chi_s = 0)."""
    p = CircuitParams(chi_r=chi_r, chi_l=chi_l, chi_j=0.05, chi_g=0.0,
                      x0=x0, ec=0.25, ej=12.5)
    return quasibound_frequencies(derive_params(p), p, 1)[0].nu


def detuned_system(chi_r, chi_l, chi_j, chi_g, x0, ej_over_ec, detuning,
                   n_modes):
    """Circuit pinned so the bare oscillator sits just below mode one.

    The reference frequency is the first mode of the empty resonator
    (coupling changes the scatterer strength, the junction does not move),
    and ec is solved from omega_j = sqrt(8 ec ej) at the given energy
    ratio.
    """
    nu1 = bare_first_mode(chi_r, chi_l, x0)
    wj = nu1 * (1.0 - detuning)
    ec = wj / math.sqrt(8.0 * ej_over_ec)
    p = CircuitParams(chi_r=chi_r, chi_l=chi_l, chi_j=chi_j, chi_g=chi_g,
                      x0=x0, ec=ec, ej=ej_over_ec * ec)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, n_modes) if dp.chi_s > 0 or True else []
    kern = build_kernels(modes, dp)
    return p, dp, modes, kern


def _params_dict(p: CircuitParams):
    return {k: getattr(p, k) for k in
            ("chi_r", "chi_l", "chi_j", "chi_g", "x0", "ec", "ej")}


def _out(args, name):
    return str(Path(args.out_dir) / name)


def _maybe_parallel(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# plain subcommands
# ---------------------------------------------------------------------------

def cmd_modes(args):
    p = load_config(args.config)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, args.modes)
    man = RunManifest("modes", {**_params_dict(p), "n_modes": args.modes})
    cols = ["n", "nu_n", "kappa_n", "phi_abs_x0", "delta_x0",
            "theta_n", "a_n", "m_n"]
    rows = mode_table_rows(modes)
    path = write_csv(_out(args, "modes.csv"), man, cols, rows)
    print(path)
    if args.json:
        import json

        payload = {"command": "modes", "manifest": man.content_hash,
                   "params": man.params,
                   "modes": [dict(zip(cols, row)) for row in rows]}
        jpath = Path(_out(args, "modes.json"))
        jpath.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        print(jpath)


def cmd_toy_poles(args):
    nu_c = args.nu_c
    kappa_c = args.kappa_ratio * nu_c
    omega_c = math.hypot(nu_c, kappa_c)
    omega_j = nu_c * (1.0 - args.detuning)
    tp = ToyParams(omega_j, omega_c, kappa_c, 0.0)
    g_grid = np.arange(0.0, args.g_max * omega_j + 1e-15,
                       args.g_step * omega_j)
    pairs = toy_pole_sweep(tp, g_grid)
    rows = []
    n = len(g_grid)
    for i, q in enumerate(pairs):
        g = g_grid[i % n]
        rows.append((g, q.p_j.s.real, q.p_j.s.imag, q.p_c.s.real,
                     q.p_c.s.imag, int(q.rw_flag)))
    man = RunManifest("toy-poles", {"nu_c": nu_c, "kappa_c": kappa_c,
                                    "omega_j": omega_j, "g_max": args.g_max,
                                    "g_step": args.g_step})
    path = write_csv(_out(args, "toy_poles.csv"), man,
                     ["g", "re_pj", "im_pj", "re_pc", "im_pc", "rw"], rows)
    print(path)


def _system_from_config(args):
    p = load_config(args.config)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, args.modes)
    kern = build_kernels(modes, dp)
    return p, dp, modes, kern


def cmd_dj_poles(args):
    p, dp, modes, kern = _system_from_config(args)
    poles = find_hybridized_poles(kern, dp, n_track=args.track)
    man = RunManifest("dj-poles", {**_params_dict(p), "n_modes": args.modes,
                                   "n_track": args.track or kern.n_modes})
    rows = [(hp.label, hp.p.s.real, hp.p.s.imag, hp.alpha, hp.beta)
            for hp in poles]
    path = write_csv(_out(args, "dj_poles.csv"), man,
                     ["label", "re_s", "im_s", "alpha", "beta"], rows)
    print(path)


def cmd_residues(args):
    p, dp, modes, kern = _system_from_config(args)
    poles = residues_at_poles(find_hybridized_poles(kern, dp, n_track=args.track),
                              kern, dp)
    man = RunManifest("residues", {**_params_dict(p), "n_modes": args.modes,
                                   "n_track": args.track or kern.n_modes})
    rows = [(hp.label, hp.p.s.real, hp.p.s.imag, hp.a_x.real, hp.a_x.imag,
             hp.a_y.real, hp.a_y.imag, abs(hp.a_x), abs(hp.a_y))
            for hp in poles]
    path = write_csv(_out(args, "residues.csv"), man,
                     ["label", "re_s", "im_s", "re_ax", "im_ax", "re_ay",
                      "im_ay", "abs_ax", "abs_ay"], rows)
    print(path)


def cmd_decay_sweep(args):
    p, dp, modes, kern = _system_from_config(args)
    grid = np.linspace(args.wj_min, args.wj_max, args.wj_points)
    rows = decay_rate_sweep(grid, kern, dp)
    man = RunManifest("decay-sweep", {**_params_dict(p), "n_modes": args.modes,
                                      "wj_min": args.wj_min,
                                      "wj_max": args.wj_max,
                                      "wj_points": args.wj_points})
    path = write_csv(_out(args, "decay_sweep.csv"), man,
                     ["omega_j", "alpha_j", "beta_j"], rows)
    print(path)


def cmd_kernels(args):
    p, dp, modes, kern = _system_from_config(args)
    man = RunManifest("kernels", {**_params_dict(p), "n_modes": args.modes})
    rows = [(i + 1, kern.a[i], kern.nu[i], kern.kappa[i], kern.theta[i],
             kern.delta[i], kern.m[i]) for i in range(kern.n_modes)]
    path = write_csv(_out(args, "kernels.csv"), man,
                     ["n", "a_n", "nu_n", "kappa_n", "theta_n", "delta_x0",
                      "m_n"],
                     rows,
                     extra_comments=[f"ik1_0 = {kern.ik1_0:.12g}",
                                     f"m_dc = {kern.m_dc:.12g}",
                                     f"r_damp = {kern.r_damp:.12g}"])
    print(path)
    if args.omega_points > 0:
        grid = np.linspace(args.omega_min, args.omega_max, args.omega_points)
        rows = []
        for w in grid:
            g = green_direct(p.x0, p.x0, w, p, dp)
            rows.append((w, g.real, g.imag))
        path2 = write_csv(_out(args, "greens_grid.csv"), man,
                          ["omega", "re_g", "im_g"], rows)
        print(path2)


def _linear_assets(args):
    p, dp, modes, kern = _system_from_config(args)
    poles = residues_at_poles(find_hybridized_poles(kern, dp), kern, dp)
    t = np.arange(0.0, args.horizon + args.dt / 2, args.dt)
    return p, dp, modes, kern, poles, t


def cmd_linear_evolve(args):
    p, dp, modes, kern, poles, t = _linear_assets(args)
    trace = linear_time_solution(poles, t)
    man = RunManifest("linear-evolve", {**_params_dict(p),
                                        "n_modes": args.modes,
                                        "horizon": args.horizon, "dt": args.dt})
    path = write_csv(_out(args, "linear_trace.csv"), man,
                     ["t", "x_linear"], list(zip(t, trace)))
    print(path)


def cmd_mspt_evolve(args):
    p, dp, modes, kern, poles, t = _linear_assets(args)
    basis = hybridization_coefficients(dp, modes, kern.n_modes, poles=poles,
                                       kern=kern)
    lin = linear_time_solution(poles, t)
    ms = mspt_expectation_trace(poles, basis, dp, HALF_EXCITED, t)
    man = RunManifest("mspt-evolve", {**_params_dict(p), "n_modes": args.modes,
                                      "horizon": args.horizon, "dt": args.dt})
    path = write_csv(_out(args, "mspt_trace.csv"), man,
                     ["t", "x_linear", "x_mspt"], list(zip(t, lin, ms)))
    print(path)


def cmd_volterra_evolve(args):
    p, dp, modes, kern = _system_from_config(args)
    cfg = SolverConfig(dim=args.levels, h=args.dt, horizon=args.horizon)
    res = integrate_reduced(cfg, kern, dp)
    poles = residues_at_poles(find_hybridized_poles(kern, dp), kern, dp)
    basis = hybridization_coefficients(dp, modes, kern.n_modes, poles=poles,
                                       kern=kern)
    lin = linear_time_solution(poles, res.t)
    ms = mspt_expectation_trace(poles, basis, dp, HALF_EXCITED, res.t)
    man = RunManifest("volterra-evolve", {**_params_dict(p),
                                          "n_modes": args.modes,
                                          "levels": args.levels,
                                          "horizon": args.horizon,
                                          "dt": args.dt})
    path = write_csv(_out(args, "volterra_trace.csv"), man,
                     ["t", "x_numeric", "x_mspt", "x_linear"],
                     list(zip(res.t, res.trace, ms, lin)))
    rep = compare_traces(lin, ms, res.trace, res.t)
    meta = Path(_out(args, "volterra_trace.meta"))
    meta.write_text("\n".join(man.header() + [
        f"# rms_linear = {rep.rms_linear:.6g}",
        f"# rms_mspt = {rep.rms_mspt:.6g}",
        f"# max_linear = {rep.max_linear:.6g}",
        f"# max_mspt = {rep.max_mspt:.6g}",
    ]) + "\n")
    print(path)
    print(meta)


def cmd_output_field(args):
    p, dp, modes, kern, poles, t = _linear_assets(args)
    trace = linear_time_solution(poles, t)
    pos = args.position if args.position in ("0-", "1+") else float(args.position)
    ft = field_response(pos, trace, dp, modes, t)
    man = RunManifest("output-field", {**_params_dict(p),
                                       "n_modes": args.modes,
                                       "horizon": args.horizon, "dt": args.dt,
                                       "position": args.position})
    path = write_csv(_out(args, "field_trace.csv"), man,
                     ["t", "field"], list(zip(t, ft.values)))
    om, mag = output_spectrum(ft)
    path2 = write_csv(_out(args, "field_spectrum.csv"), man,
                      ["omega", "magnitude"], list(zip(om, mag)))
    print(path)
    print(path2)


# ---------------------------------------------------------------------------
# figure reproduction recipes
# ---------------------------------------------------------------------------

def reproduce_fig2(args):
    pre = read_preset("fig2")
    nu_c = pf(pre, "nu_c")
    kappa_c = pf(pre, "kappa_c_over_nu_c") * nu_c
    omega_c = math.hypot(nu_c, kappa_c)
    omega_j = nu_c * (1.0 - pf(pre, "detuning"))
    tp = ToyParams(omega_j, omega_c, kappa_c, 0.0)
    g_grid = np.arange(0.0, pf(pre, "g_max_over_omega_j") * omega_j + 1e-15,
                       pf(pre, "g_step_over_omega_j") * omega_j)
    pairs = toy_pole_sweep(tp, g_grid)
    man = RunManifest("reproduce:fig2", pre)
    rows = []
    n = len(g_grid)
    for i, q in enumerate(pairs):
        rows.append((g_grid[i % n] / omega_j, q.p_j.s.real, q.p_j.s.imag,
                     q.p_c.s.real, q.p_c.s.imag, int(q.rw_flag)))
    return [write_csv(_out(args, "fig2_toy_poles.csv"), man,
                      ["g_over_omega_j", "re_pj", "im_pj", "re_pc", "im_pc",
                       "rw"], rows)]


def _fig3_panel(task):
    panel, chi, chi_s_values, chi_j, x0, n_modes = task
    rows = []
    for chi_s in chi_s_values:
        p = params_from_chi_s(chi_s, chi_j=chi_j, chi_r=chi, chi_l=chi, x0=x0)
        dp = derive_params(p)
        modes = quasibound_frequencies(dp, p, n_modes)
        for m in modes:
            rows.append((chi_s, m.index, m.nu, m.kappa))
    return panel, chi, rows


def reproduce_fig3(args, panels=("a", "b", "c", "d")):
    pre = read_preset("fig3")
    chi_s_values = plist(pre, "chi_s_values")
    tasks = [(panel, pf(pre, f"panel_{panel}_chi"), chi_s_values,
              pf(pre, "chi_j"), pf(pre, "x0"), int(pf(pre, "n_modes")))
             for panel in panels]
    results = _maybe_parallel(_fig3_panel, tasks, args.threads)
    paths = []
    for panel, chi, rows in results:
        man = RunManifest(f"reproduce:fig3{panel}",
                          {**pre, "chi_r": chi, "chi_l": chi})
        paths.append(write_csv(_out(args, f"fig3{panel}_modes.csv"), man,
                               ["chi_s", "n", "nu_n", "kappa_n"], rows))
    return paths


def _pole_sweep_rows(pre, track_counts, args):
    chi_r, chi_l = pf(pre, "chi_r"), pf(pre, "chi_l")
    chi_j, x0 = pf(pre, "chi_j"), pf(pre, "x0")
    n_modes = int(pf(pre, "n_modes"))
    chi_gs = np.arange(0.0, pf(pre, "chi_g_max") + 1e-15, pf(pre, "chi_g_step"))
    rows = []
    seeds = {n: None for n in track_counts}
    for chi_g in chi_gs:
        p, dp, modes, kern = detuned_system(chi_r, chi_l, chi_j, max(chi_g, 0.0),
                                            x0, pf(pre, "ej_over_ec"),
                                            pf(pre, "detuning"), n_modes)
        for n_track in track_counts:
            poles = find_hybridized_poles(kern, dp, n_track=n_track,
                                          seeds=seeds[n_track])
            seeds[n_track] = [hp.p.s for hp in poles]
            for hp in poles:
                rows.append((n_track, chi_g, hp.label, hp.p.s.real, hp.p.s.imag))
    return rows


def reproduce_fig4(args):
    pre = read_preset("fig4")
    rows = _pole_sweep_rows(pre, [int(pf(pre, "n_track"))], args)
    keep = int(pf(pre, "n_track"))
    man = RunManifest("reproduce:fig4", pre)
    return [write_csv(_out(args, "fig4_poles.csv"), man,
                      ["n_track", "chi_g", "label", "re_s", "im_s"],
                      [r for r in rows if r[0] == keep])]


def reproduce_fig5(args):
    pre = read_preset("fig5")
    counts = [int(v) for v in plist(pre, "track_counts")]
    rows = _pole_sweep_rows(pre, counts, args)
    man = RunManifest("reproduce:fig5", pre)
    return [write_csv(_out(args, "fig5_poles.csv"), man,
                      ["n_track", "chi_g", "label", "re_s", "im_s"], rows)]


def _fig6_sweep(task):
    chi_g, pre_d = task
    p = CircuitParams(chi_r=pre_d["chi_r"], chi_l=pre_d["chi_l"],
                      chi_j=pre_d["chi_j"], chi_g=chi_g, x0=pre_d["x0"],
                      ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, int(pre_d["n_modes"]))
    kern = build_kernels(modes, dp)
    grid = np.linspace(pre_d["omega_min"], pre_d["omega_max"],
                       int(pre_d["omega_points"]))
    rows = decay_rate_sweep(grid, kern, dp)
    return [(chi_g, wj, alpha, beta) for wj, alpha, beta in rows]


def reproduce_fig6(args):
    pre = read_preset("fig6")
    pre_d = {k: pf(pre, k) for k in ("chi_r", "chi_l", "chi_j", "x0",
                                     "omega_min", "omega_max", "omega_points",
                                     "n_modes")}
    tasks = [(chi_g, pre_d) for chi_g in plist(pre, "chi_g_values")]
    results = _maybe_parallel(_fig6_sweep, tasks, args.threads)
    rows = [r for chunk in results for r in chunk]
    man = RunManifest("reproduce:fig6", pre)
    return [write_csv(_out(args, "fig6_decay.csv"), man,
                      ["chi_g", "omega_j", "alpha_j", "beta_j"], rows)]


def _spectra_column(task):
    chi_g, pre, which = task
    p, dp, modes, kern = detuned_system(pf(pre, "chi_r"), pf(pre, "chi_l"),
                                        pf(pre, "chi_j"), chi_g, pf(pre, "x0"),
                                        pf(pre, "ej_over_ec"),
                                        pf(pre, "detuning"),
                                        int(pf(pre, "n_modes")))
    poles = residues_at_poles(find_hybridized_poles(kern, dp), kern, dp)
    basis = hybridization_coefficients(dp, modes, kern.n_modes, poles=poles,
                                       kern=kern)
    t = np.arange(0.0, pf(pre, "horizon"), pf(pre, "dt"))
    lin = linear_time_solution(poles, t)
    ms = mspt_expectation_trace(poles, basis, dp, HALF_EXCITED, t)
    if which == "field":
        pos = pre.get("position", "1+")
        pos = pos if pos in ("0-", "1+") else float(pos)
        lin = field_response(pos, lin, dp, modes, t).values
        ms = field_response(pos, ms, dp, modes, t).values
    om, mag_lin = spectrum(lin, t)
    _, mag_ms = spectrum(ms, t)
    cut = om <= 2.5 * dp.omega_j
    return [(chi_g, w, a, b) for w, a, b in
            zip(om[cut], mag_lin[cut], mag_ms[cut])]


def _reproduce_spectra(args, preset_name, out_name, which):
    pre = read_preset(preset_name)
    chi_gs = np.arange(0.0, pf(pre, "chi_g_max") + 1e-15, pf(pre, "chi_g_step"))
    tasks = [(chi_g, pre, which) for chi_g in chi_gs]
    results = _maybe_parallel(_spectra_column, tasks, args.threads)
    rows = [r for chunk in results for r in chunk]
    man = RunManifest(f"reproduce:{preset_name}", pre)
    return [write_csv(_out(args, out_name), man,
                      ["chi_g", "omega", "mag_linear", "mag_mspt"], rows)]


def reproduce_fig7(args):
    return _reproduce_spectra(args, "fig7", "fig7_spectra.csv", "qubit")


def reproduce_fig10(args):
    return _reproduce_spectra(args, "fig10", "fig10_spectra.csv", "field")


def reproduce_fig11(args):
    return _reproduce_spectra(args, "fig11", "fig11_spectra.csv", "field")


def reproduce_fig8(args):
    pre = read_preset("fig8")
    chi_gs = np.arange(0.0, pf(pre, "chi_g_max") + 1e-15, pf(pre, "chi_g_step"))
    n_report = int(pf(pre, "n_report"))
    rows = []
    for chi_g in chi_gs:
        p, dp, modes, kern = detuned_system(pf(pre, "chi_r"), pf(pre, "chi_l"),
                                            pf(pre, "chi_j"), chi_g,
                                            pf(pre, "x0"),
                                            pf(pre, "ej_over_ec"),
                                            pf(pre, "detuning"),
                                            int(pf(pre, "n_modes")))
        poles = residues_at_poles(find_hybridized_poles(kern, dp), kern, dp)
        basis = hybridization_coefficients(dp, modes, kern.n_modes,
                                           poles=poles, kern=kern)
        u_of = dict(zip(basis.labels, basis.u))
        for hp in poles[: n_report + 1]:
            rows.append((chi_g, hp.label, abs(hp.a_x), abs(hp.a_y),
                         u_of.get(hp.label, 0.0)))
    man = RunManifest("reproduce:fig8", pre)
    return [write_csv(_out(args, "fig8_residues.csv"), man,
                      ["chi_g", "label", "abs_ax", "abs_ay", "u"], rows)]


def reproduce_fig9(args, panels=("a", "b", "c", "d")):
    pre = read_preset("fig9")
    chi_gs = plist(pre, "chi_g_values")
    names = {"a": 0, "b": 1, "c": 2, "d": 3}
    paths = []
    for panel in panels:
        chi_g = chi_gs[names[panel]]
        p, dp, modes, kern = detuned_system(pf(pre, "chi_r"), pf(pre, "chi_l"),
                                            pf(pre, "chi_j"), chi_g,
                                            pf(pre, "x0"),
                                            pf(pre, "ej_over_ec"),
                                            pf(pre, "detuning"),
                                            int(pf(pre, "n_modes")))
        cfg = SolverConfig(dim=int(pf(pre, "levels")), h=pf(pre, "dt"),
                           horizon=pf(pre, "horizon"))
        res = integrate_reduced(cfg, kern, dp)
        poles = residues_at_poles(find_hybridized_poles(kern, dp), kern, dp)
        basis = hybridization_coefficients(dp, modes, kern.n_modes,
                                           poles=poles, kern=kern)
        lin = linear_time_solution(poles, res.t)
        ms = mspt_expectation_trace(poles, basis, dp, HALF_EXCITED, res.t)
        rep = compare_traces(lin, ms, res.trace, res.t)
        pj = next(q for q in poles if q.label == "j")
        q_factor = pj.beta / pj.alpha if pj.alpha > 0 else float("inf")
        man = RunManifest(f"reproduce:fig9{panel}", {**pre, "chi_g": chi_g})
        stride = max(1, int(round(0.01 / pf(pre, "dt"))))
        sel = slice(None, None, stride)
        paths.append(write_csv(
            _out(args, f"fig9{panel}_traces.csv"), man,
            ["t", "x_numeric", "x_mspt", "x_linear"],
            list(zip(res.t[sel], res.trace[sel], ms[sel], lin[sel])),
            extra_comments=[f"rms_linear = {rep.rms_linear:.6g}",
                            f"rms_mspt = {rep.rms_mspt:.6g}",
                            f"q_factor_j = {q_factor:.6g}"]))
    return paths


REPRODUCERS = {
    "fig2": reproduce_fig2,
    "fig3": reproduce_fig3,
    "fig3a": lambda a: reproduce_fig3(a, panels=("a",)),
    "fig3b": lambda a: reproduce_fig3(a, panels=("b",)),
    "fig3c": lambda a: reproduce_fig3(a, panels=("c",)),
    "fig3d": lambda a: reproduce_fig3(a, panels=("d",)),
    "fig4": reproduce_fig4,
    "fig5": reproduce_fig5,
    "fig6": reproduce_fig6,
    "fig7": reproduce_fig7,
    "fig8": reproduce_fig8,
    "fig9": reproduce_fig9,
    "fig9a": lambda a: reproduce_fig9(a, panels=("a",)),
    "fig9b": lambda a: reproduce_fig9(a, panels=("b",)),
    "fig9c": lambda a: reproduce_fig9(a, panels=("c",)),
    "fig9d": lambda a: reproduce_fig9(a, panels=("d",)),
    "fig10": reproduce_fig10,
    "fig11": reproduce_fig11,
}


def cmd_reproduce(args):
    if args.figure not in REPRODUCERS:
        raise ConfigError(f"unknown figure id '{args.figure}'; "
                          f"choose from {', '.join(sorted(REPRODUCERS))}")
    for path in REPRODUCERS[args.figure](args):
        print(path)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="mmqed",
        description="Non-Markovian dynamics of a weakly nonlinear oscillator "
                    "in an open multimode resonator")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        sp.add_argument("--out-dir", default=".", help="output directory")
        sp.add_argument("--threads", type=int, default=1)
        if config:
            sp.add_argument("--config", required=True,
                            help="key=value circuit parameter file")
            sp.add_argument("--modes", type=int, default=40,
                            help="number of resonator modes")

    sp = sub.add_parser("modes", help="quasi-bound mode table")
    common(sp)
    sp.add_argument("--json", action="store_true",
                    help="also write the mode table as JSON")
    sp.set_defaults(fn=cmd_modes)

    sp = sub.add_parser("toy-poles", help="single-mode toy model pole sweep")
    common(sp, config=False)
    sp.add_argument("--nu-c", type=float, default=1.0)
    sp.add_argument("--kappa-ratio", type=float, default=0.1)
    sp.add_argument("--detuning", type=float, default=1e-6)
    sp.add_argument("--g-max", type=float, default=0.5)
    sp.add_argument("--g-step", type=float, default=0.005)
    sp.set_defaults(fn=cmd_toy_poles)

    sp = sub.add_parser("dj-poles", help="hybridized poles of the coupled system")
    common(sp)
    sp.add_argument("--track", type=int, default=None)
    sp.set_defaults(fn=cmd_dj_poles)

    sp = sub.add_parser("residues", help="poles with their residues")
    common(sp)
    sp.add_argument("--track", type=int, default=None)
    sp.set_defaults(fn=cmd_residues)

    sp = sub.add_parser("decay-sweep", help="oscillator decay versus frequency")
    common(sp)
    sp.add_argument("--wj-min", type=float, default=1.0)
    sp.add_argument("--wj-max", type=float, default=10.0)
    sp.add_argument("--wj-points", type=int, default=200)
    sp.set_defaults(fn=cmd_decay_sweep)

    sp = sub.add_parser("kernels", help="memory-kernel term table")
    common(sp)
    sp.add_argument("--omega-min", type=float, default=0.1)
    sp.add_argument("--omega-max", type=float, default=12.0)
    sp.add_argument("--omega-points", type=int, default=0,
                    help="also dump the frequency-domain Green's function")
    sp.set_defaults(fn=cmd_kernels)

    for name, fn in (("linear-evolve", cmd_linear_evolve),
                     ("mspt-evolve", cmd_mspt_evolve)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--horizon", type=float, default=20.0)
        sp.add_argument("--dt", type=float, default=0.01)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("volterra-evolve", help="reduced operator integration")
    common(sp)
    sp.add_argument("--horizon", type=float, default=20.0)
    sp.add_argument("--dt", type=float, default=5e-4)
    sp.add_argument("--levels", type=int, default=15)
    sp.set_defaults(fn=cmd_volterra_evolve)

    sp = sub.add_parser("output-field", help="field response outside the resonator")
    common(sp)
    sp.add_argument("--horizon", type=float, default=60.0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--position", default="1+")
    sp.set_defaults(fn=cmd_output_field)

    sp = sub.add_parser("reproduce", help="run a named figure recipe")
    common(sp, config=False)
    sp.add_argument("figure", help=f"one of {', '.join(FIGURE_IDS)}")
    sp.set_defaults(fn=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MultimodeQedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
