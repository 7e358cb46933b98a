"""Command line front end: ``polar``, ``solve``, ``verify`` and ``sweep``.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 violated physical precondition, 4 numerical divergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .driver import Solution, _jsonable, bump_y_norm, error_record, run, upstream_z_norm, x_norm
from .elliptic.comparison import random_comparison_suite
from .elliptic.grid import Tag
from .elliptic.mms import mms_study
from .errors import ConfigError, EmptySweep, TransonicError
from .gas import FlowState, GasModel, bernoulli_B, horizontal_state, mach
from .shock_polar import polar_curve, polar_summary

log = logging.getLogger("transonic_wedge")

POLAR_COLUMNS = ["p", "rho", "u1", "u2", "wedge_angle_deg", "shock_slope_s", "mach_down", "Cp", "arc"]
EULERIAN_COLUMNS = ["z1", "z2", "x1", "x2", "u1", "u2", "p", "rho", "tag"]
SHOCK_COLUMNS = ["z2", "x1", "x2", "slope", "u1_up", "u2_up", "p_up", "rho_up", "u1", "u2", "p", "rho"]
SWEEP_COLUMNS = ["amplitude", "converged", "outer_iterations", "sup_v", "x_diff", "data_diff", "ratio",
                 "state_exponent", "slope_exponent", "g_tilde", "rh_residual_sup", "error"]

RH_TOL = 1e-6
SLIP_TOL = 1e-8
ENTROPY_TOL = 1e-10


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")
    os.replace(tmp, path)


def _write_csv(path: Path, columns, rows) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    os.replace(tmp, path)


def _read_csv(path: Path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    out = {}
    for k, col in zip(head, zip(*body)):
        try:
            out[k] = np.array([float(c) for c in col])
        except ValueError:
            out[k] = np.array(col)
    return out


# -- polar ------------------------------------------------------------------

def cmd_polar(cfg: RunConfig, out: Path) -> int:
    gas = GasModel(cfg.gas.gamma)
    up = horizontal_state(cfg.upstream.mach, gas, cfg.upstream.p, cfg.upstream.rho)
    summ = polar_summary(up, gas)
    pts = polar_curve(up, gas, cfg.polar.samples)
    rows = []
    for pt in pts:
        d = pt.downstream
        rows.append([d.p, d.rho, d.u1, d.u2, float(np.degrees(pt.wedge_angle)), pt.shock_slope_s,
                     float(mach(d, gas)), pt.Cp, pt.arc.value])
    _write_csv(out / "polar.csv", POLAR_COLUMNS, rows)
    _write_json(out / "summary.json", {
        "theta_sonic_deg": float(np.degrees(summ.theta_sonic)),
        "theta_critical_deg": float(np.degrees(summ.theta_critical)),
        "p_sonic": summ.p_sonic, "p_tangent": summ.p_tangent, "p_normal": summ.p_normal,
        "mach": cfg.upstream.mach, "gamma": cfg.gas.gamma})
    return 0


# -- solve -----------------------------------------------------------------

def _dump_solution(sol: Solution, eul, out: Path) -> None:
    s = eul.state
    used = eul.tag != Tag.UNUSED
    rows = zip(eul.z1[used], eul.z2[used], eul.x1[used], eul.x2[used], s.u1[used], s.u2[used],
               s.p[used], s.rho[used], (Tag(t).name for t in eul.tag[used]))
    _write_csv(out / "eulerian.csv", EULERIAN_COLUMNS, rows)
    js = np.concatenate([[0], sol.grid.operators().shock_j])
    up = sol.fld.state(eul.shock_z2)
    rows = zip(eul.shock_z2, eul.shock_sigma, eul.shock_x2, eul.shock_slope,
               np.broadcast_to(up.u1, js.shape), np.broadcast_to(up.u2, js.shape),
               np.broadcast_to(up.p, js.shape), np.broadcast_to(up.rho, js.shape),
               s.u1[0, js], s.u2[0, js], s.p[0, js], s.rho[0, js])
    _write_csv(out / "shock.csv", SHOCK_COLUMNS, rows)


def _summary(rep) -> dict:
    d = rep.decay if isinstance(rep.decay, dict) else {}
    sr = rep.shock_residuals or {}
    return {"converged": rep.converged, "outer_iterations": rep.outer_iterations,
            "g_tilde": sr.get("g_tilde"), "h_tilde": sr.get("h_tilde"), "phi_jump": sr.get("phi_jump"),
            "rh_residual_sup": rep.rh_residual_sup, "slip_residual": rep.slip_residual,
            "entropy_streamline": rep.entropy_streamline, "state_exponent": d.get("state_exponent"),
            "slope_exponent": d.get("slope_exponent")}


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    spec = cfg.problem()
    cfg.save(out / "config.yaml")
    jl = open(out / "iterations.jsonl", "w")

    def logger(rec):
        jl.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")

    try:
        sol, eul = run(spec, log=logger, decay=cfg.output.decay)
    except TransonicError as exc:
        _write_json(out / "report.json", {"converged": False, "error": error_record(exc)})
        raise
    finally:
        jl.close()
    rep = sol.report.to_dict()
    timings = rep.pop("timings", {})
    rep["summary"] = _summary(sol.report)
    _write_json(out / "report.json", rep)
    _write_json(out / "timings.json", timings)
    _dump_solution(sol, eul, out)
    log.info("solve: converged=%s outer=%d", sol.report.converged, sol.report.outer_iterations)
    return 0 if sol.report.converged else 4


# -- verify ----------------------------------------------------------------

def rh_suite(shock: dict, gamma: float) -> dict:
    """Relative Rankine-Hugoniot jumps recomputed from a shock dump (corner row skipped)."""
    gas = GasModel(gamma)
    sel = shock["z2"] > 0
    up = FlowState(*(shock[k + "_up"][sel] for k in ("u1", "u2", "p", "rho")))
    dn = FlowState(*(shock[k][sel] for k in ("u1", "u2", "p", "rho")))
    sl = shock["slope"][sel]
    nrm = np.hypot(1.0, sl)
    n1, n2 = 1.0 / nrm, -sl / nrm

    def fl(s):
        m = s.rho * (s.u1 * n1 + s.u2 * n2)
        return np.stack([m, m * s.u1 + s.p * n1, m * s.u2 + s.p * n2, bernoulli_B(s, gas)])

    fu, fd = fl(up), fl(dn)
    scale = np.stack([np.abs(fu[0]), np.abs(fu[1]) + up.p, np.abs(fu[2]) + up.p, np.abs(fu[3])])
    res = np.max(np.abs(fd - fu) / scale, axis=0)
    worst = int(np.argmax(res))
    return {"passed": bool(res.max() <= RH_TOL), "sup": float(res.max()), "tolerance": RH_TOL,
            "worst_node": {"index": int(np.flatnonzero(sel)[worst]), "z2": float(shock["z2"][sel][worst])}}


def slip_suite(eul: dict, cfg: RunConfig) -> dict:
    spec = cfg.problem()
    w = eul["tag"] == Tag.WEDGE.name
    res = np.abs(eul["u2"][w] / eul["u1"][w] - spec.wedge_slope(eul["x1"][w]))
    return {"passed": bool(res.max() <= SLIP_TOL), "sup": float(res.max()), "tolerance": SLIP_TOL}


def entropy_suite(eul: dict, gamma: float) -> dict:
    A = eul["p"] / eul["rho"] ** gamma
    spread = 0.0
    for z in np.unique(eul["z2"]):
        a = A[eul["z2"] == z]
        spread = max(spread, float((a.max() - a.min()) / a.mean()))
    return {"passed": bool(spread <= ENTROPY_TOL), "sup": spread, "tolerance": ENTROPY_TOL}


def comparison_suite(n_cases: int = 100) -> dict:
    res = random_comparison_suite(n_cases)
    worst = max(max(a.interior_sup - a.bound, b.interior_sup - b.bound) for a, b in res)
    return {"passed": all(a.holds and b.holds for a, b in res), "cases": n_cases, "worst_excess": worst}


def mms_suite() -> dict:
    st = mms_study()
    return {"passed": bool(st.min_order >= 1.9), **st.as_dict()}


def cmd_verify(cfg: RunConfig | None, out: Path, solution: Path | None) -> int:
    if solution is None:
        if cfg is None:
            raise ConfigError("verify needs --config or --solution")
        code = cmd_solve(cfg, out)
        if code != 0:
            return code
        solution = out
    cfg = load_config(solution / "config.yaml")
    shock = _read_csv(solution / "shock.csv")
    eul = _read_csv(solution / "eulerian.csv")
    suites = {"rh": rh_suite(shock, cfg.gas.gamma), "slip": slip_suite(eul, cfg),
              "entropy_streamline": entropy_suite(eul, cfg.gas.gamma),
              "comparison": comparison_suite(), "mms": mms_suite()}
    ok = all(s["passed"] for s in suites.values())
    _write_json(out / "verify.json", {"passed": ok, "suites": suites})
    for name, s in suites.items():
        print(f"{name:20s} {'PASS' if s['passed'] else 'FAIL'}")
    return 0 if ok else 1


# -- sweep -----------------------------------------------------------------

def _sweep_row(spec, decay: bool) -> dict:
    try:
        sol, _ = run(spec, decay=decay)
    except TransonicError as exc:
        return {"amplitude": spec.bump.amplitude, "converged": False, "error": error_record(exc)["type"]}
    g = sol.grid
    v = sol.field.values - sol.problem.phi_inf
    row = {"amplitude": spec.bump.amplitude, "sup_v": float(np.max(np.abs(v[g.active]))), "error": "",
           "A": sol.profile.A, "z2": sol.profile.z2}
    row.update(_summary(sol.report))
    return row


def cmd_sweep(cfg: RunConfig, out: Path, threads: int = 1) -> int:
    if cfg.sweep is None or not cfg.sweep.values:
        raise EmptySweep("sweep axis has no values")
    base_spec = cfg.problem()
    specs = [base_spec.with_amplitude(0.0)] + [base_spec.with_amplitude(float(a)) for a in cfg.sweep.values]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_sweep_row, specs, [cfg.output.decay] * len(specs)))
    else:
        results = [_sweep_row(s, cfg.output.decay) for s in specs]
    base, rows = results[0], results[1:]
    x = np.linspace(0.0, base_spec.grid.R, 4 * base_spec.grid.n1 + 1)
    ratios = []
    for spec, r in zip(specs[1:], rows):
        if "A" in r and "A" in base:
            dA = x_norm(r["A"] - base["A"], base["z2"], spec.beta)
            dY = abs(bump_y_norm(spec, x) - bump_y_norm(specs[0], x))
            dZ = abs(upstream_z_norm(spec, base["z2"]) - upstream_z_norm(specs[0], base["z2"]))
            r["x_diff"], r["data_diff"] = dA, dY + dZ
            r["ratio"] = dA / (dY + dZ) if dY + dZ > 0 else float("nan")
            ratios.append(r["ratio"])
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([r.get(c, "") for c in SWEEP_COLUMNS] for r in rows))
    rr = np.array([q for q in ratios if np.isfinite(q)])
    spread = float(rr.max() / rr.min()) if rr.size and rr.min() > 0 else None
    _write_json(out / "sweep_summary.json", {"rows": len(rows), "ratio_spread": spread,
                                              "collapsed": None if spread is None else bool(spread <= 2.0)})
    return 0 if all(r.get("converged") for r in rows) else 4


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="transonic-wedge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("polar", "solve", "verify", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "verify")
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--threads", type=int, default=1)
        if name == "verify":
            sp.add_argument("--solution", type=Path, default=None, help="directory written by 'solve'")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else None
        out = args.out or Path(cfg.output.directory if cfg else ".")
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "polar":
            return cmd_polar(cfg, out)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.solution)
        return cmd_sweep(cfg, out, max(1, args.threads))
    except TransonicError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
