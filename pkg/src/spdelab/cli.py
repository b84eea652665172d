"""Command-line orchestration.

Commands: kernels verify, besov estimate, model build|norms|verify-limit,
reconstruct run, renorm compute|fit, pam solve|converge, rerun.

Every run resolves its configuration to a flat dictionary, executes, and
writes reports (JSON + CSV where tabular), rendered figures (PNG), and a
manifest into the output directory.  Reports carry no wall-clock data;
``rerun --manifest`` reproduces them byte for byte.  SPDE_THREADS caps the
Monte Carlo thread pools.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import besov as besov_mod
from . import reconstruct as rec_mod
from .errors import ConfigError, SpdelabError
from .fields import (Field2, Grid2, Grid3, read_fld1_field, write_fld1,
                     write_fld1_raw, write_nse1)
from .kernels import (Coefficient, PamProvider, verify_gtype,
                      verify_regularizing)
from .model import build_model, model_norm, verify_model_limit
from .noise import Mollifier, get_profile, sample_white_noise, derive_seed
from .pam import (Nonlinearity, PamProblem, convergence_study,
                  holder_initial_condition, initial_lift_check, solve_pam)
from .renorm import compute_renorm, log_divergence_fit
from .reporting import Manifest, line_figure, save_figure, write_csv, write_json


def parse_config_file(path) -> dict:
    """Flat key=value lines; '#' comments; sections are key prefixes."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def _typed(raw: dict, schema: dict, defaults: dict) -> dict:
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    cfg = dict(defaults)
    for key, val in raw.items():
        kind = schema[key]
        if kind is bool:
            cfg[key] = str(val).lower() in ("1", "true", "yes", "on")
        else:
            cfg[key] = kind(val)
    return cfg


PAM_SCHEMA = {
    "grid.n": int, "time.dt": float, "time.T": float, "time.t_cut": float,
    "time.record_every": int, "coef.profile": str, "coef.contrast": float,
    "c": float, "eps": float, "theta": float, "b.kind": str,
    "noise.seed": int, "noise.profile": str, "n.min": int, "n.max": int,
    "n.level": int, "renormalize": bool, "renorm.stride": int,
}
PAM_DEFAULTS = {
    "grid.n": 64, "time.dt": 1e-3, "time.T": 0.125, "time.t_cut": 0.025,
    "time.record_every": 0, "coef.profile": "cosine", "coef.contrast": 0.2,
    "c": 1.0, "eps": 0.05, "theta": 0.5, "b.kind": "cos",
    "noise.seed": 2026, "noise.profile": "bump", "n.min": 3, "n.max": 5,
    "n.level": 4, "renormalize": True, "renorm.stride": 0,
}


def _coefficient(cfg) -> Coefficient:
    grid = Grid2.square(cfg["grid.n"])
    if cfg["coef.profile"] == "constant":
        return Coefficient.constant(grid, 1.0, cfg["c"])
    if cfg["coef.profile"] == "cosine":
        return Coefficient.cosine_profile(grid, cfg["coef.contrast"], 1.0, cfg["c"])
    raise ConfigError(f"unknown coefficient profile {cfg['coef.profile']!r}")


def _problem(cfg, n: int, renormalize: bool) -> PamProblem:
    coef = _coefficient(cfg)
    u0 = holder_initial_condition(coef.a.grid, cfg["theta"])
    return PamProblem(coef, Nonlinearity.builtin(cfg["b.kind"]), u0,
                      cfg["theta"], cfg["time.T"], cfg["time.dt"], n,
                      renormalize, cfg["noise.seed"], cfg["eps"],
                      cfg["noise.profile"])


def _cn_map(cfg, ns) -> dict:
    coef = _coefficient(cfg)
    prof = get_profile(cfg["noise.profile"])
    stride = cfg["renorm.stride"] or None
    return {n: compute_renorm(coef, Mollifier(prof, n), stride=stride) for n in ns}


# ---------------------------------------------------------------------------
# runners (manifest-replayable)


def run_pam_converge(cfg: dict, out: str) -> int:
    ns = list(range(cfg["n.min"], cfg["n.max"] + 1))
    cn_map = _cn_map(cfg, ns)
    rec = cfg["time.record_every"] or None
    base = _problem(cfg, ns[0], True)
    study = convergence_study(base, ns, True, cfg["time.t_cut"], cn_map, rec)
    twin = convergence_study(_problem(cfg, ns[0], False), ns, False,
                             cfg["time.t_cut"], None, rec)
    rows = []
    for i, n in enumerate(ns[:-1]):
        rows.append((n, study.d_n[i],
                     study.ratios[i - 1] if i > 0 else float("nan"),
                     study.holder_diffs[i]))
    write_csv(os.path.join(out, "data.csv"),
              ("n", "d_n", "ratio", "holder_diff"), rows)
    report = {
        "renormalized": study.as_dict(),
        "unrenormalized_twin": twin.as_dict(),
        "passed": bool(study.verdict and twin.verdict and not study.inconclusive),
    }
    if cfg.get("_dt_check"):
        half = dict(cfg)
        half["time.dt"] = cfg["time.dt"] / 2.0
        study_half = convergence_study(_problem_from(half, ns[0], True), ns, True,
                                       cfg["time.t_cut"], cn_map, rec)
        rel = [abs(a / b - 1.0) if b else float("inf")
               for a, b in zip(study_half.d_n, study.d_n)]
        report["dt_half"] = {"d_n": study_half.d_n, "rel_change": rel,
                             "within_10pct": bool(max(rel[-3:]) <= 0.10)}
        report["passed"] = report["passed"] and report["dt_half"]["within_10pct"]
    write_json(os.path.join(out, "report.json"), report)
    fig = line_figure(ns[:-1], {"d_n": study.d_n, "holder": study.holder_diffs,
                                "d_n (no renorm)": twin.d_n},
                      "level n", "difference norm", "coupled-level convergence")
    fig.axes[0].set_yscale("log")
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0 if report["passed"] else 1


def _problem_from(cfg, n, renorm):
    return _problem(cfg, n, renorm)


def run_pam_solve(cfg: dict, out: str) -> int:
    n = cfg["n.level"]
    prob = _problem(cfg, n, cfg["renormalize"])
    cn = _cn_map(cfg, [n])[n] if cfg["renormalize"] else None
    rec = cfg["time.record_every"] or None
    sol = solve_pam(prob, cn, record_every=rec)
    lift = initial_lift_check(prob.u0, prob.theta, 1 + 2 * prob.eps, prob.coef,
                              t_window=min(0.5, prob.T), eps=prob.eps)
    report = {
        "n": n,
        "renormalize": cfg["renormalize"],
        "sup_final": float(sol.sup_history[-1]),
        "sup_max": float(sol.sup_history.max()),
        "rejections": sol.rejections,
        "noise_hash": sol.noise_hash,
        "cn_hash": sol.cn_hash,
        "snapshots": len(sol.times),
        "initial_lift_diagnostic": lift,
    }
    write_json(os.path.join(out, "report.json"), report)
    if cfg.get("_dump"):
        write_fld1_raw(os.path.join(out, "trajectory.fld"), sol.values,
                       (float(sol.times[-1]), 1.0, 1.0))
    fig = line_figure(list(range(len(sol.sup_history))),
                      {"sup |u|": sol.sup_history.tolist()},
                      "step", "sup norm", f"solve at level n={n}")
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0


RENORM_SCHEMA = {"grid.n": int, "coef.profile": str, "coef.contrast": float,
                 "c": float, "noise.profile": str, "n.level": int,
                 "n.min": int, "n.max": int, "method": str, "renorm.stride": int,
                 "mc.samples": int, "noise.seed": int}
RENORM_DEFAULTS = {"grid.n": 64, "coef.profile": "constant", "coef.contrast": 0.2,
                   "c": 1.0, "noise.profile": "bump", "n.level": 4,
                   "n.min": 2, "n.max": 6, "method": "det", "renorm.stride": 0,
                   "mc.samples": 2000, "noise.seed": 0}


def run_renorm_compute(cfg: dict, out: str) -> int:
    coef = _coefficient(cfg)
    m = Mollifier(get_profile(cfg["noise.profile"]), cfg["n.level"])
    method = {"det": "deterministic", "mc": "monte_carlo"}.get(cfg["method"], cfg["method"])
    rn = compute_renorm(coef, m, method, stride=cfg["renorm.stride"] or None,
                        mc_samples=cfg["mc.samples"], seed=cfg["noise.seed"])
    write_fld1(os.path.join(out, "cn.fld"), Field2(coef.a.grid, rn.values))
    write_json(os.path.join(out, "report.json"), {
        "n": rn.n, "method": rn.method, "finite_part_tag": rn.finite_part_tag,
        "stride": rn.stride, "interp_error": rn.interp_error,
        "mean": float(rn.values.mean()), "min": float(rn.values.min()),
        "max": float(rn.values.max()),
        "stderr_median": float(np.median(rn.stderr)) if rn.stderr is not None else None,
    })
    return 0


def run_renorm_fit(cfg: dict, out: str) -> int:
    coef = _coefficient(cfg)
    prof = get_profile(cfg["noise.profile"])
    ns = list(range(cfg["n.min"], cfg["n.max"] + 1))
    cns = [compute_renorm(coef, Mollifier(prof, n),
                          stride=cfg["renorm.stride"] or None) for n in ns]
    rep = log_divergence_fit(cns, coef)
    write_json(os.path.join(out, "report.json"), rep)
    write_csv(os.path.join(out, "data.csv"), ("n", "delta_mean"),
              list(zip(ns[:-1], rep["delta_means"])))
    fig = line_figure(ns[:-1], {"Delta_n mean": rep["delta_means"],
                                "target": [rep["target_constant"] /
                                           float(coef.a.values.mean())] * (len(ns) - 1)},
                      "level n", "increment", "renormalization increments")
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0 if rep["passed"] else 1


KERNELS_SCHEMA = {"mode": str, "coef.contrast": float, "c": float, "grid.n": int,
                  "reg.n": int}
KERNELS_DEFAULTS = {"mode": "pam_constant_a", "coef.contrast": 0.2, "c": 1.0,
                    "grid.n": 32, "reg.n": 256}


def run_kernels_verify(cfg: dict, out: str) -> int:
    grid = Grid2.square(cfg["grid.n"])
    if cfg["mode"] == "pam_constant_a":
        coef = Coefficient.constant(grid, 1.0, cfg["c"])
    elif cfg["mode"] == "pam_variable_a":
        coef = Coefficient.cosine_profile(grid, cfg["coef.contrast"], 1.0, cfg["c"])
    else:
        raise ConfigError("kernels verify supports the two pam modes")
    prov = PamProvider(coef)
    rep = verify_gtype(prov)
    checks = list(rep["checks"])
    if coef.is_constant and abs(coef.abar - 1.0) < 1e-12:
        for k_idx in ((0, 0, 0), (0, 1, 0)):
            reg = verify_regularizing(prov, k_idx, spatial_n=cfg["reg.n"])
            checks.append({"name": f"regularizing_exponent_k={list(k_idx)}",
                           "statistic": reg["exponent"] - reg["target"],
                           "pass": reg["passed"]})
    report = {"mode": rep["mode"], "contrast": rep["contrast"], "checks": checks,
              "passed": all(c["pass"] for c in checks)}
    write_json(os.path.join(out, "report.json"), report)
    fig = line_figure(rep["t_sweep"], {"C1(t)": rep["C1"], "C2(t)": rep["C2"]},
                      "t", "envelope constant", "G-type envelope sweep", loglog=True)
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0 if report["passed"] else 1


BESOV_SCHEMA = {"input": str, "mode": str, "c": float, "t.min": float,
                "t.max": float, "drop.head": int, "drop.tail": int}
BESOV_DEFAULTS = {"input": "", "mode": "neg", "c": 1.0,
                  "t.min": 2.0 ** -34, "t.max": 2.0 ** -20,
                  "drop.head": 2, "drop.tail": 2}


def run_besov_estimate(cfg: dict, out: str) -> int:
    if not cfg["input"]:
        raise ConfigError("besov estimate needs input=<fld path>")
    f = read_fld1_field(cfg["input"])
    grid2 = f.grid if isinstance(f, Field2) else f.grid.spatial
    coef = Coefficient.constant(grid2, 1.0, cfg["c"])
    prov = PamProvider(coef, None if isinstance(f, Field2) else f.grid)
    est_fn = (besov_mod.estimate_regularity_neg if cfg["mode"] == "neg"
              else besov_mod.estimate_regularity_pos)
    est = est_fn(f, prov, (cfg["t.min"], cfg["t.max"]),
                 cfg["drop.head"], cfg["drop.tail"])
    write_csv(os.path.join(out, "data.csv"), ("t", "norm"),
              list(zip(est.t_levels, est.norms)))
    write_json(os.path.join(out, "report.json"), est.as_dict())
    fig = line_figure(list(est.t_levels), {"norm": list(est.norms)},
                      "t", "norm", f"regularity sweep ({cfg['mode']})", loglog=True)
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0


MODEL_SCHEMA = {"grid.n": int, "noise.seed": int, "noise.profile": str,
                "n.level": int, "eps": float, "c": float, "coef.profile": str,
                "coef.contrast": float, "gamma": float,
                "limit.seeds": int, "n.min": int, "n.max": int, "t.level": float}
MODEL_DEFAULTS = {"grid.n": 64, "noise.seed": 2026, "noise.profile": "bump",
                  "n.level": 4, "eps": 0.05, "c": 1.0, "coef.profile": "constant",
                  "coef.contrast": 0.2, "gamma": 1.1,
                  "limit.seeds": 120, "n.min": 3, "n.max": 6, "t.level": 2.0 ** -6}


def _build_model_from_cfg(cfg):
    coef = _coefficient(cfg)
    prov = PamProvider(coef)
    m = Mollifier(get_profile(cfg["noise.profile"]), cfg["n.level"])
    noise = sample_white_noise(coef.a.grid, cfg["noise.seed"])
    cn = compute_renorm(coef, m)
    return build_model(noise, m, cn, prov, cfg["eps"]), noise, cn


def run_model_build(cfg: dict, out: str) -> int:
    model, noise, cn = _build_model_from_cfg(cfg)
    grid = model.grid
    names = {}
    for name in ("XI", "KXI", "DKXI_2", "DKXI_3", "PROD"):
        path = os.path.join(out, f"{name.lower()}.fld")
        write_fld1(path, Field2(grid, model.blocks[name]))
        names[name] = path
    write_fld1(os.path.join(out, "cn.fld"), Field2(grid, model.cn))
    write_nse1(os.path.join(out, "noise.nse"), noise.spectrum)
    from .reporting import sha256_file
    write_json(os.path.join(out, "model.json"), {
        "n": model.n, "seed": model.seed, "eps": model.structure.eps,
        "c": model.provider.c, "finite_part_tag": model.finite_part_tag,
        "coefficient_hash": sha256_file(names["XI"])[:16],
        "cn_hash": sha256_file(os.path.join(out, "cn.fld"))[:16],
        "blocks": sorted(names),
    })
    return 0


def run_model_norms(cfg: dict, out: str) -> int:
    model, _, _ = _build_model_from_cfg(cfg)
    rep = model_norm(model, cfg["gamma"])
    write_json(os.path.join(out, "report.json"), rep)
    rows = [(sym, model.structure.homogeneity(sym), val)
            for sym, val in rep["pi_norms"].items()]
    write_csv(os.path.join(out, "data.csv"), ("symbol", "homogeneity", "norm"), rows)
    fig = line_figure([r[1] for r in rows], {"norm": [r[2] for r in rows]},
                      "homogeneity", "model norm", "per-symbol model norms")
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0


def run_model_verify_limit(cfg: dict, out: str) -> int:
    coef = _coefficient(cfg)
    prov = PamProvider(coef)
    seeds = [derive_seed(cfg["noise.seed"], i) for i in range(cfg["limit.seeds"])]
    rep = verify_model_limit(seeds, range(cfg["n.min"], cfg["n.max"] + 1),
                             [cfg["t.level"]], prov,
                             get_profile(cfg["noise.profile"]), eps=cfg["eps"])
    write_json(os.path.join(out, "report.json"), rep)
    ns = rep["n_range"]
    fig = line_figure(ns, {
        "renormalized": [row[0] for row in rep["renormalized"]["means"]],
        "unrenormalized": [row[0] for row in rep["unrenormalized"]["means"]],
    }, "level n", "mean pairing", "second-order model limit")
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0 if rep["passed"] else 1


RECON_SCHEMA = {"germ": str, "t": float, "levels": int, "grid.n": int,
                "noise.seed": int, "holder.g": float, "holder.w": float, "c": float}
RECON_DEFAULTS = {"germ": "young", "t": 2.0 ** -10, "levels": 14, "grid.n": 4096,
                  "noise.seed": 11, "holder.g": 0.9, "holder.w": -0.2, "c": 1.0}


def _pam_germ(cfg):
    """Product germ b(U) Xi of a short renormalized solve on a small window."""
    from .model import build_model
    from .pam import holder_initial_condition, solve_pam
    from .reconstruct import pam_forcing_germ

    grid = Grid2.square(32)
    coef = Coefficient.cosine_profile(grid, 0.2, 1.0, cfg["c"])
    grid3 = Grid3(256, 2.0, grid)
    dt = grid3.time_step / 4.0
    nlevel = 3
    b = Nonlinearity.builtin("cos")
    X2, X3 = grid.coords()
    u0 = Field2(grid, 0.5 * np.cos(2 * np.pi * X2) * np.cos(2 * np.pi * X3))
    prob = PamProblem(coef, b, u0, 0.5, 16 * grid3.time_step, dt, nlevel,
                      True, cfg["noise.seed"])
    m = Mollifier(get_profile("bump"), nlevel)
    cn = compute_renorm(coef, m, stride=2)
    noise = sample_white_noise(grid, cfg["noise.seed"])
    sol = solve_pam(prob, cn, noise=noise, record_every=4)
    prov = PamProvider(coef)
    model = build_model(noise, m, cn, prov)
    return pam_forcing_germ(model, grid3, sol.times, list(sol.values), b)


def run_reconstruct(cfg: dict, out: str) -> int:
    t = cfg["t"]
    s_min = t * 2.0 ** (-cfg["levels"])
    if cfg["germ"] == "young":
        germ = rec_mod.young_germ(cfg["grid.n"], cfg["holder.g"], cfg["holder.w"],
                                  seed=cfg["noise.seed"], c=cfg["c"])
    elif cfg["germ"] == "coherent":
        x = np.arange(cfg["grid.n"]) / cfg["grid.n"]
        germ = rec_mod.coherent_function_germ(np.sin(2 * np.pi * x)
                                              + 0.3 * np.cos(4 * np.pi * x), cfg["c"])
    elif cfg["germ"] == "pam":
        germ = _pam_germ(cfg)
        t = min(t, 2.0 ** -8)
        s_min = t * 2.0 ** (-min(cfg["levels"], 10))
    else:
        raise ConfigError("reconstruct run supports germ in {young, coherent, pam}")
    run = rec_mod.reconstruct(germ, t, s_min)
    rec_mod.crosscheck_pointwise(germ, run)
    ell = germ.provider.scaling.ell
    if cfg["germ"] == "coherent":
        passed = max(run.diffs) < 1e-8
    else:
        passed = (not run.diverged) and run.fitted_rate >= germ.gamma / ell - 0.05
    write_csv(os.path.join(out, "data.csv"), ("s", "diff"),
              list(zip(run.s_levels[1:], run.diffs)))
    payload = run.as_dict()
    payload["gamma"] = germ.gamma
    payload["pass"] = bool(passed)
    write_json(os.path.join(out, "report.json"), payload)
    fig = line_figure(run.s_levels[1:], {"diff": [max(d, 1e-300) for d in run.diffs]},
                      "s", "weighted difference", "reconstruction ladder", loglog=True)
    save_figure(fig, os.path.join(out, "figure.png"))
    return 0 if passed else 1


RUNNERS = {
    "pam converge": (run_pam_converge, PAM_SCHEMA, PAM_DEFAULTS),
    "pam solve": (run_pam_solve, PAM_SCHEMA, PAM_DEFAULTS),
    "renorm compute": (run_renorm_compute, RENORM_SCHEMA, RENORM_DEFAULTS),
    "renorm fit": (run_renorm_fit, RENORM_SCHEMA, RENORM_DEFAULTS),
    "kernels verify": (run_kernels_verify, KERNELS_SCHEMA, KERNELS_DEFAULTS),
    "besov estimate": (run_besov_estimate, BESOV_SCHEMA, BESOV_DEFAULTS),
    "model build": (run_model_build, MODEL_SCHEMA, MODEL_DEFAULTS),
    "model norms": (run_model_norms, MODEL_SCHEMA, MODEL_DEFAULTS),
    "model verify-limit": (run_model_verify_limit, MODEL_SCHEMA, MODEL_DEFAULTS),
    "reconstruct run": (run_reconstruct, RECON_SCHEMA, RECON_DEFAULTS),
}


def _dispatch(command: str, raw_cfg: dict, out: str, extra_flags: dict) -> int:
    if command not in RUNNERS:
        raise ConfigError(f"unknown command {command!r}")
    runner, schema, defaults = RUNNERS[command]
    cfg = _typed(raw_cfg, schema, defaults)
    cfg.update({k: v for k, v in extra_flags.items() if k.startswith("_")})
    os.makedirs(out, exist_ok=True)
    manifest = Manifest(command, {k: v for k, v in cfg.items()},
                        seeds=[cfg[k] for k in cfg if k.endswith("seed")])
    status = runner(cfg, out)
    for name in sorted(os.listdir(out)):
        if name != "manifest.json" and os.path.isfile(os.path.join(out, name)):
            manifest.record_output(name, os.path.join(out, name))
    manifest.save(os.path.join(out, "manifest.json"))
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spdelab",
        description="numerical laboratory for the renormalized 2D "
                    "multiplicative-noise heat equation and its kernels")
    parser.add_argument("group", help="command group (kernels, besov, model, "
                                      "reconstruct, renorm, pam, rerun)")
    parser.add_argument("action", nargs="?", default=None)
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--manifest", default=None, help="manifest to replay (rerun)")
    parser.add_argument("--dump", action="store_true", help="dump trajectory fields")
    parser.add_argument("--dt-check", action="store_true",
                        help="repeat the study at dt/2 and compare")
    parser.add_argument("--input", default=None, help="input field (besov estimate)")
    args = parser.parse_args(argv)

    try:
        if args.group == "rerun":
            if not args.manifest:
                raise ConfigError("rerun needs --manifest")
            import json
            with open(args.manifest) as fh:
                saved = json.load(fh)
            command = saved["command"]
            runner, schema, defaults = RUNNERS[command]
            cfg = saved["config"]
            os.makedirs(args.out, exist_ok=True)
            status = runner(cfg, args.out)
            manifest = Manifest(command, cfg)
            for name in sorted(os.listdir(args.out)):
                if name != "manifest.json" and os.path.isfile(os.path.join(args.out, name)):
                    manifest.record_output(name, os.path.join(args.out, name))
            manifest.save(os.path.join(args.out, "manifest.json"))
            return status
        if args.action is None:
            raise ConfigError(f"missing action for group {args.group!r}")
        command = f"{args.group} {args.action}"
        raw = parse_config_file(args.config) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            raw[k.strip()] = v.strip()
        if args.input:
            raw["input"] = args.input
        extra = {"_dump": args.dump, "_dt_check": args.dt_check}
        return _dispatch(command, raw, args.out, extra)
    except SpdelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
