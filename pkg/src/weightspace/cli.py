"""Command line entry point: ``weightspace <command> [options]``.

Every run resolves a RunConfig (defaults, then ``--config`` JSON, then
flags), validates it, computes, and only then writes artifacts.  Exit
codes: 0 pass, 2 condition failed, 3 inconclusive, 4 input error.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conjugates, entire, hfun, represent, sequences, weights
from .errors import InputError
from .reports import EXIT_CODES, EXIT_INPUT_ERROR, FAIL, INCONCLUSIVE, PASS, csv_text, dumps, worst, write_atomic

SEQUENCE_DEFAULTS = {"kind": "mstar", "rho": 1.0, "K": 2000, "lnM": None}
PSI_DEFAULTS = {"alpha": 2.0, "form": "power", "p": None, "xs": None, "vals": None, "A_psi": None}
GRID_DEFAULTS = {
    "r_max": 1e6, "n_r": 20000, "radii": None,
    "x_max": 50.0, "n_x": 10001, "Y": 100.0, "step": 1e-3,
    "s": [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0], "s_values": [1.5, 2.0, 3.0],
    "delta": [0.1, 0.5, 1.0], "eps": [0.25, 0.5, 1.0],
    "y_max": 1e5, "n_y": 60, "n_radii": 60, "n_theta": 64, "r_min": 0.1,
}
PARAM_DEFAULTS = {
    "m": [1], "A": [1.0], "s": [2.0], "delta": [0.1], "l_s": None, "C": 1.25, "eps": [0.5],
    "J": 500, "d": 0.5, "layout": "banded", "budget": 4.0,
    "target": "gaussian", "a": 1.0, "omega": None, "J_list": [10, 20, 40], "X": 5.0, "n": 2001,
    "ridge": "uniform", "k_max": 6, "m_max": 3,
}
EPS_RULES = {"inverse": lambda m: 1.0 / m, "inverse_square": lambda m: 1.0 / (m * m)}
VERIFY_IDS = ("prop1", "lemma1", "lemma2", "lemma3", "lemma4", "eq2", "eq3", "eq4", "eq5", "eq6", "eq7",
              "classV", "sandwich")
TOP_KEYS = {"sequence", "psi", "sigma", "eps_rule", "grids", "params", "out"}


@dataclass
class RunConfig:
    sequence: dict = field(default_factory=lambda: dict(SEQUENCE_DEFAULTS))
    psi: dict = field(default_factory=lambda: dict(PSI_DEFAULTS))
    sigma: float = 1.0
    eps_rule: str = "inverse"
    grids: dict = field(default_factory=lambda: copy.deepcopy(GRID_DEFAULTS))
    params: dict = field(default_factory=lambda: copy.deepcopy(PARAM_DEFAULTS))
    out: str = "out"

    def merge(self, data: dict) -> None:
        unknown = set(data) - TOP_KEYS
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        for section, defaults in (("sequence", SEQUENCE_DEFAULTS), ("psi", PSI_DEFAULTS),
                                  ("grids", GRID_DEFAULTS), ("params", PARAM_DEFAULTS)):
            if section in data:
                sub = data[section]
                if not isinstance(sub, dict):
                    raise InputError(f"config section {section!r} must be an object")
                bad = set(sub) - set(defaults)
                if bad:
                    raise InputError(f"unknown {section} keys: {sorted(bad)}")
                getattr(self, section).update(sub)
        for key in ("sigma", "eps_rule", "out"):
            if key in data:
                setattr(self, key, data[key])

    def validate(self) -> None:
        if not isinstance(self.sigma, (int, float)) or not self.sigma > 0:
            raise InputError("sigma must be a positive number")
        if self.eps_rule not in EPS_RULES:
            raise InputError(f"eps_rule must be one of {sorted(EPS_RULES)}")
        seq = self.sequence
        if seq["kind"] not in sequences.KINDS:
            raise InputError(f"unknown sequence kind {seq['kind']!r}")
        if self.params["layout"] not in entire.LAYOUTS:
            raise InputError(f"layout must be one of {entire.LAYOUTS}")
        if self.params["ridge"] not in ("uniform", "kweight"):
            raise InputError("ridge must be 'uniform' or 'kweight'")
        conjugates.PsiSpec.from_dict(self.psi)

    def to_dict(self) -> dict:
        return {"sequence": self.sequence, "psi": self.psi, "sigma": self.sigma, "eps_rule": self.eps_rule,
                "grids": self.grids, "params": self.params}


def check(id: str, status: str, value, witness=None, stabilized: bool = True, tolerance=None,
          detail=None) -> dict:
    return {"id": id, "status": status, "value": value, "witness": witness, "stabilized": bool(stabilized),
            "tolerance": tolerance, "detail": detail}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc


S = argparse.SUPPRESS


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=S, help="JSON RunConfig file")
    common.add_argument("--out", dest="out", default=S, help="output directory")
    common.add_argument("--kind", dest="sequence.kind", default=S, choices=sequences.KINDS)
    common.add_argument("--rho", dest="sequence.rho", type=float, default=S)
    common.add_argument("--K", dest="sequence.K", type=int, default=S)
    common.add_argument("--sigma", dest="sigma", type=float, default=S)
    common.add_argument("--eps-rule", dest="eps_rule", default=S, choices=sorted(EPS_RULES))
    common.add_argument("--alpha", dest="psi.alpha", type=float, default=S)

    p = _Parser(prog="weightspace", description="Weight sequences, associated weights and their checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("seq-check", parents=[common], help="class-M conditions i1-i4 and the ratio-root trend")
    c.add_argument("--s-values", dest="grids.s_values", type=_floats, default=S)
    c.add_argument("--deltas", dest="grids.delta", type=_floats, default=S)

    c = sub.add_parser("weight-eval", parents=[common], help="tabulate w(r) and n(r)")
    c.add_argument("--r", dest="grids.radii", type=_floats, default=S, help="explicit radii")
    c.add_argument("--rmax", dest="grids.r_max", type=float, default=S)
    c.add_argument("--n", dest="grids.n_r", type=int, default=S)

    c = sub.add_parser("conjugate", parents=[common], help="phi = psi* on [-x_max, x_max]")
    c.add_argument("--x-max", dest="grids.x_max", type=float, default=S)
    c.add_argument("--n", dest="grids.n_x", type=int, default=S)
    c.add_argument("--Y", dest="grids.Y", type=float, default=S)
    c.add_argument("--step", dest="grids.step", type=float, default=S)

    c = sub.add_parser("hfun", parents=[common], help="h(s) and l(s) proxies")
    c.add_argument("--s", dest="grids.s", type=_floats, default=S)

    c = sub.add_parser("verify", parents=[common], help="numeric checks of the auxiliary statements")
    c.add_argument("which", choices=VERIFY_IDS)
    c.add_argument("--m", dest="params.m", type=_ints, default=S)
    c.add_argument("--A", dest="params.A", type=_floats, default=S)
    c.add_argument("--s", dest="params.s", type=_floats, default=S)
    c.add_argument("--delta", dest="params.delta", type=_floats, default=S)
    c.add_argument("--ls", dest="params.l_s", type=float, default=S)
    c.add_argument("--C", dest="params.C", type=float, default=S)
    c.add_argument("--eps", dest="params.eps", type=_floats, default=S)
    c.add_argument("--rmax", dest="grids.r_max", type=float, default=S)
    c.add_argument("--n", dest="grids.n_r", type=int, default=S)
    c.add_argument("--s-grid", dest="grids.s", type=_floats, default=S)
    c.add_argument("--ymax", dest="grids.y_max", type=float, default=S)

    c = sub.add_parser("zeros", parents=[common], help="place the radial zero set")
    c.add_argument("--J", dest="params.J", type=int, default=S)
    c.add_argument("--layout", dest="params.layout", choices=entire.LAYOUTS, default=S)
    c.add_argument("--budget", dest="params.budget", type=float, default=S)
    c.add_argument("--d", dest="params.d", type=float, default=S)

    c = sub.add_parser("check8", parents=[common], help="fit the log-modulus residual bound")
    c.add_argument("--J", dest="params.J", type=int, default=S)
    c.add_argument("--layout", dest="params.layout", choices=entire.LAYOUTS, default=S)
    c.add_argument("--budget", dest="params.budget", type=float, default=S)
    c.add_argument("--d", dest="params.d", type=float, default=S)
    c.add_argument("--n-radii", dest="grids.n_radii", type=int, default=S)
    c.add_argument("--n-theta", dest="grids.n_theta", type=int, default=S)

    c = sub.add_parser("fit", parents=[common], help="fit exponential sums to a target")
    c.add_argument("--target", dest="params.target", choices=("gaussian", "cos"), default=S)
    c.add_argument("--a", dest="params.a", type=float, default=S)
    c.add_argument("--omega", dest="params.omega", type=float, default=S)
    c.add_argument("--J", dest="params.J_list", type=_ints, default=S)
    c.add_argument("--X", dest="params.X", type=float, default=S)
    c.add_argument("--n", dest="params.n", type=int, default=S)
    c.add_argument("--ridge", dest="params.ridge", choices=("uniform", "kweight"), default=S)
    c.add_argument("--m", dest="params.m", type=_ints, default=S)
    c.add_argument("--k-max", dest="params.k_max", type=int, default=S)
    return p


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    flags = dict(vars(ns))
    path = flags.pop("config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        cfg.merge(data)
    for key in ("command", "which"):
        flags.pop(key, None)
    for key, value in flags.items():
        if "." in key:
            section, name = key.split(".", 1)
            getattr(cfg, section)[name] = value
        else:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- builders

def _sequence(cfg: RunConfig, K: int | None = None) -> sequences.LogSequence:
    s = cfg.sequence
    return sequences.build_sequence(s["kind"], K=K or s["K"], rho=s["rho"], lnM=s["lnM"])


def _weight(cfg: RunConfig, r_needed: float | None = None) -> weights.WeightFunction:
    """Weight function whose table reaches ``r_needed`` (K doubles for built-ins)."""
    s = cfg.sequence
    if r_needed is None or s["kind"] == "table":
        wf = weights.WeightFunction.from_sequence(_sequence(cfg))
        if r_needed is not None and np.log(r_needed) > wf.t[-1]:
            raise InputError(f"table reaches r = {wf.r_max:.6g} only, {r_needed:.6g} needed")
        return wf
    return weights.weight_for_radius(s["kind"], r_needed, rho=s["rho"], K0=s["K"])


def _v(cfg: RunConfig):
    s = cfg.sequence
    if s["kind"] == "table":
        return sequences.to_vfun(_sequence(cfg))
    return sequences.analytic_v(s["kind"], s["rho"])


def _psi(cfg: RunConfig) -> conjugates.PsiSpec:
    return conjugates.PsiSpec.from_dict(cfg.psi)


def _family(cfg: RunConfig, wf) -> weights.WeightFamily:
    return weights.WeightFamily(wf, cfg.sigma, EPS_RULES[cfg.eps_rule])


# ---------------------------------------------------------------- commands

def cmd_seq_check(cfg: RunConfig):
    seq = _sequence(cfg)
    rep = sequences.class_m_report(seq, cfg.grids["s_values"], cfg.grids["delta"])
    checks = [
        check("i1", rep.i1.status, rep.i1.min_second_difference, rep.i1.witness, True, rep.i1.tolerance),
        check("i2", rep.i2.status, rep.i2.residual, rep.i2.witness, True, rep.i2.tolerance, rep.i2),
    ]
    for r in rep.i3:
        checks.append(check(f"i3[s={r.s:g}]", r.status, r.proxy, r.witness, True, r.threshold, r))
    for r in rep.i4:
        checks.append(check(f"i4[delta={r.delta:g}]", r.status, r.residual, r.unbounded_rows or None,
                            r.status != INCONCLUSIVE, r.tolerance, r))
    checks.append(check("eq1_trend", rep.eq1.status, rep.eq1.last, None, True, rep.eq1.tolerance, rep.eq1))
    return checks, {}


def cmd_weight_eval(cfg: RunConfig):
    g = cfg.grids
    r = np.asarray(g["radii"], dtype=float) if g["radii"] is not None else \
        np.concatenate([[0.0], np.geomspace(1e-2, g["r_max"], g["n_r"])])
    wf = _weight(cfg, float(r.max()) if r.max() > 0 else None)
    w, k = weights.eval_w(wf, r)
    aw = weights.linear_bound_Aw(wf, r)
    checks = [check("A_w", aw.status, aw.A_w, aw.maximizer, True, 1e-12, aw)]
    csv = csv_text(["r", "w", "n"], zip(r.tolist(), w.tolist(), k.tolist()))
    return checks, {"weight.csv": csv}


def cmd_conjugate(cfg: RunConfig):
    g = cfg.grids
    psi = _psi(cfg)
    phi = conjugates.conjugate_psi(psi, g["x_max"], g["n_x"], g["Y"], g["step"])
    checks = []
    if psi.form == "power":
        q = psi.p / (psi.p - 1.0)
        exact = np.abs(phi.xs) ** q / q
        err = np.abs(phi.vals - exact)
        i = int(np.argmax(err))
        checks.append(check("closed_form", PASS if err[i] <= 1e-5 else FAIL, float(err[i]), float(phi.xs[i]),
                            True, 1e-5))
    sample = psi.sample(g["Y"], g["step"])
    bc = conjugates.biconjugate_check(sample)
    checks.append(check("biconjugate", bc.status, bc.defect, bc.witness, True, bc.tolerance))
    pr = conjugates.validate_psi(psi, g["Y"])
    checks.append(check("psi_conditions", pr.status, pr.A_psi, list(pr.witness_pair), True, pr.tolerance, pr))
    csv = csv_text(["x", "phi"], zip(phi.xs.tolist(), phi.vals.tolist()))
    return checks, {"phi.csv": csv}


def cmd_hfun(cfg: RunConfig):
    seq = _sequence(cfg)
    rows, checks = [], []
    for s in cfg.grids["s"]:
        e = hfun.h_discrete(seq, s)
        rows.append((e.s, e.proxy, e.l, e.noise, e.trend_slope, e.window[0], e.window[1]))
        checks.append(check(f"h[s={s:g}]", PASS if np.isfinite(e.proxy) else FAIL, e.proxy, e.witness, True,
                            e.noise, e))
    csv = csv_text(["s", "h", "l", "noise", "trend_slope", "k_lo", "k_hi"], rows)
    return checks, {"h.csv": csv}


def _gap_check(id, rep):
    return check(id, rep.status, rep.Q, rep.maximizer, rep.stabilized, None, rep)


def _l_of_s(cfg: RunConfig, s: float) -> float:
    if cfg.params["l_s"] is not None:
        return float(cfg.params["l_s"])
    return hfun.h_discrete(_sequence(cfg), s).l


def cmd_verify(cfg: RunConfig, which: str):
    P, g = cfg.params, cfg.grids
    checks = []
    if which == "sandwich":
        if cfg.sequence["kind"] != "mstar":
            raise InputError("the sandwich bound is stated for the mstar family")
        rep = weights.check_sandwich_mstar(cfg.sequence["rho"], r_max=g["r_max"], n=500)
        checks.append(check("sandwich", rep.status, min(rep.min_lower_slack, rep.min_upper_slack), rep.witness,
                            True, rep.tolerance, rep))
    elif which == "lemma3":
        eps_next = min(EPS_RULES[cfg.eps_rule](m + 1) for m in P["m"])
        fam = _family(cfg, _weight(cfg, g["r_max"] / (cfg.sigma + eps_next)))
        for m in P["m"]:
            for A in P["A"]:
                rep = weights.lemma3_gap(fam, m, A, r_max=g["r_max"], n=g["n_r"])
                checks.append(_gap_check(f"lemma3[m={m},A={A:g}]", rep))
    elif which == "lemma4":
        for s in P["s"]:
            l_s = _l_of_s(cfg, s)
            for delta in P["delta"]:
                wf = _weight(cfg, g["r_max"] / min(1.0, l_s * (1 - delta)))
                rep = weights.lemma4_gap(wf, s, delta, l_s, r_max=g["r_max"], n=g["n_r"])
                checks.append(_gap_check(f"lemma4[s={s:g},delta={delta:g}]", rep))
    elif which == "lemma1":
        rep = hfun.lemma1_suite(_sequence(cfg), g["s"])
        for p in rep.properties:
            checks.append(check(f"lemma1.{p.name}", p.status, p.value, p.witness, True, p.tolerance))
        lrep = hfun.l_properties(_sequence(cfg), g["s"])
        for p in lrep.properties:
            checks.append(check(f"l.{p.name}", p.status, p.value, p.witness, True, p.tolerance))
    elif which == "lemma2":
        for r in hfun.lemma2_check(_sequence(cfg), P["s"]):
            checks.append(check(f"lemma2[s={r.s:g}]", r.status, r.difference, r.s, True, r.tolerance, r))
    elif which == "classV":
        rep = hfun.classV_check(_v(cfg), eps_grid=P["eps"])
        checks.append(check("V1", rep.v1.status, rep.v1.A_v, rep.v1.witness, True, rep.v1.slope_tol, rep.v1))
        for r in rep.v2:
            checks.append(check(f"V2[s={r.s:g}]", r.status, r.eta_s, r.witness, True, 0.0, r))
        for r in rep.v3:
            checks.append(check(f"V3[eps={r.eps:g}]", r.status, r.a_eps, r.witness_y, r.stabilized, None, r))
    elif which == "prop1":
        u = _v(cfg)
        for eps in P["eps"]:
            rep = hfun.prop1_check(u, P["C"], eps, y_max=g["y_max"], n_y=g["n_y"])
            checks.append(check(f"prop1[eps={eps:g}]", rep.status, rep.Q, rep.witness_y, rep.stabilized,
                                rep.tolerance, rep))
    else:
        v = _v(cfg)
        if which in ("eq2", "eq7"):
            for s in (P["s"] if which == "eq7" else [None]):
                rep = hfun.verify_inequality(which, v, {"s": s} if s is not None else {})
                tag = which if s is None else f"{which}[s={s:g}]"
                checks.append(check(tag, rep.status, rep.value, rep.witness, rep.stabilized, rep.tolerance, rep))
        else:
            cv = hfun.classV_check(v, eps_grid=P["eps"])
            for eps in P["eps"]:
                row = cv.v3_for(eps)
                for s in (P["s"] if which in ("eq5", "eq6") else [None]):
                    prm = {"eps": eps, "a_eps": row.a_eps, "b_eps": row.b_eps}
                    if s is not None:
                        prm["s"] = s
                    rep = hfun.verify_inequality(which, v, prm)
                    tag = f"{which}[eps={eps:g}" + (f",s={s:g}]" if s is not None else "]")
                    checks.append(check(tag, worst([rep.status, row.status]), rep.value, rep.witness,
                                        row.stabilized, rep.tolerance, rep))
    return checks, {}


def _zero_set(cfg: RunConfig, J: int | None = None):
    P = cfg.params
    J = J or P["J"]
    wf = _weight(cfg)
    if wf.K < 2 * J:
        wf = weights.WeightFunction.from_sequence(_sequence(cfg, K=max(2 * J, cfg.sequence["K"])))
    return wf, entire.place_zeros(wf, cfg.sigma, J, P["layout"], P["budget"], P["d"])


def cmd_zeros(cfg: RunConfig):
    wf, zs = _zero_set(cfg)
    gap = entire.min_gap(zs)
    r = np.concatenate([zs.radii[:-1] * 0.5 + zs.radii[1:] * 0.5])
    consistent = entire.count_consistent(zs, wf, r)
    checks = [
        check("simple", gap.status, gap.d_max, gap.witness, True, 0.0, gap),
        check("counting", PASS if consistent else FAIL, float(consistent), None, True, 0.0),
    ]
    csv = csv_text(["k", "radius"], ((k + 1, float(v)) for k, v in enumerate(zs.radii)))
    rings = csv_text(["ring", "radius", "multiplicity"],
                     ((i, float(r_), int(m)) for i, (r_, m) in enumerate(zs.rings)))
    return checks, {"zeros.csv": csv, "rings.csv": rings}


def cmd_check8(cfg: RunConfig):
    g = cfg.grids
    wf, zs = _zero_set(cfg)
    Z = entire.polar_grid(zs.admissible_radius(), g["n_radii"], g["n_theta"], g["r_min"])
    fit = entire.check_eq8(zs, wf, Z, cfg.params["d"])
    drift = entire.truncation_drift(wf, cfg.sigma, zs.J, Z, layout=zs.layout, budget=cfg.params["budget"])
    checks = [
        check("eq8_fit", fit.status, fit.A, fit.witness, True, fit.tolerance, fit),
        check("truncation_drift", drift.status, drift.max_change, drift.witness, True, drift.tolerance, drift),
    ]
    logN, ex, _ = entire.log_abs_N(Z, zs)
    w = weights.w_value(wf, np.abs(Z) / zs.sigma)
    rows = ((float(z.real), float(z.imag), float(a), float(b), float(abs(b - a)), int(e))
            for z, a, b, e in zip(Z, logN, w, ex))
    csv = csv_text(["re_z", "im_z", "log_abs_N", "w", "residual", "excluded"], rows)
    return checks, {"residual8.csv": csv}


def cmd_fit(cfg: RunConfig):
    P = cfg.params
    J_list = sorted(P["J_list"])
    wf = _weight(cfg)
    zs = entire.place_zeros(wf, cfg.sigma, max(J_list), P["layout"], P["budget"], P["d"])
    if P["target"] == "gaussian":
        target = represent.TargetFunction("gaussian", a=P["a"])
    else:
        omega = P["omega"] if P["omega"] is not None else float(zs.radii[0])
        target = represent.TargetFunction("cos", omega=omega)
    psi = _psi(cfg)
    fam = _family(cfg, wf)
    kw = weights.KWeight(psi, fam)
    coeff_rows, res_rows, proxies, resid, semis = [], [], [], [], []
    for J in J_list:
        model = represent.fit_dirichlet(target, zs, J, P["X"], P["n"], psi, P["ridge"], wf)
        cr = represent.coeff_decay_check(model, kw)
        proxies.append(cr.proxy)
        resid.append(model.weighted_residual)
        for row in cr.table:
            coeff_rows.append((J, row.j, row.nu, row.re, row.im, row.weighted))
        for m in P["m"]:
            sn = represent.residual_seminorm(model, target, m, P["k_max"], fam, psi)
            semis.append((J, m, sn))
            res_rows.append((J, m, P["k_max"], sn, model.weighted_residual, model.cond))
    stab = represent.proxy_stability(proxies)
    checks = [check("coeff_proxy", stab.status, stab.growth, None, True, stab.tolerance,
                    {"proxies": proxies})]
    ratio = resid[0] / resid[-1] if resid[-1] > 0 else float("inf")
    checks.append(check("residual_ratio", PASS, ratio, J_list[-1], True, None, {"weighted_residual": resid}))
    coeffs = csv_text(["J", "j", "nu", "re_c", "im_c", "abs_c_k"], coeff_rows)
    residuals = csv_text(["J", "m", "k_max", "seminorm", "weighted_residual", "cond"], res_rows)
    return checks, {"coeffs.csv": coeffs, "residuals.csv": residuals}


COMMANDS = {
    "seq-check": cmd_seq_check, "weight-eval": cmd_weight_eval, "conjugate": cmd_conjugate, "hfun": cmd_hfun,
    "zeros": cmd_zeros, "check8": cmd_check8, "fit": cmd_fit,
}


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    """Parse, compute and write; returns the exit code and the report."""
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
        with np.errstate(all="ignore"):
            if ns.command == "verify":
                checks, files = cmd_verify(cfg, ns.which)
                name = f"verify-{ns.which}"
            else:
                checks, files = COMMANDS[ns.command](cfg)
                name = ns.command
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR, {}
    status = worst(c["status"] for c in checks)
    report = {"command": name, "status": status, "config": cfg.to_dict(), "checks": checks}
    out = Path(cfg.out)
    write_atomic(out / f"{name}.json", dumps(report))
    for fname, text in files.items():
        write_atomic(out / fname, text)
    print(f"{name}: {status} ({out / (name + '.json')})")
    return EXIT_CODES[status], report


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
