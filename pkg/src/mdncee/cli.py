"""Batch front-end: scenario in, CSV/JSON results and plot-ready data out.

Subcommands:

* sweep        -- Pareto sweep of EE versus target outage (goa/brute/mc rows)
* energy-curve -- transmit-energy share versus achieved outage along the sweep
* relay-shift  -- EE versus relay displacement for a fixed relay subset
* verify       -- Monte Carlo check of the analytic outage/EE at one point

Exit codes: 0 success, 2 invalid scenario, 3 every requested target
infeasible, 4 verification failure. Output files start with a schema line;
numbers are written with 12 significant digits, so identical inputs and
seeds reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .model import ScenarioError, apply_relay_shift, build_link_coefficients, load_scenario, validate_scenario
from .optimizer import dinkelbach_fixed_schedule, dinkelbach_solve
from .outage import RelaySchedule
from .simulate import McConfig, brute_force_optimize, monte_carlo_outage

SWEEP_SCHEMA = "# mdncee-sweep-v1"
ENERGY_SCHEMA = "# mdncee-energy-curve-v1"
SHIFT_SCHEMA = "# mdncee-relay-shift-v1"
VERIFY_SCHEMA = "mdncee-verify-v1"

SWEEP_HEADER = ("target,scheme,mode,relays,count,p_users,p_relays,ee,pr_out_exact,"
                "pr_out_approx,pr_out_mc,mc_stderr,e_tot,e_data,q_star,dinkelbach_iters,"
                "goa_iters,cuts,newton_iters,status,reason")
ENERGY_HEADER = "target,scheme,achieved_pr_out,e_data,e_tot,relays,count,max_user_power,status,reason"
SHIFT_HEADER = "delta,target,relays,ee,pr_out_exact,status,reason"

DEFAULT_TARGETS = tuple(np.geomspace(1e-2, 5e-6, 14))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _fmt_list(values) -> str:
    if values is None:
        return ""
    return ";".join(_fmt(v) for v in np.atleast_1d(values))


def _scalar_outage(value) -> float | None:
    """Scalar outage for CSV cells: the network outage for MDNC, the user
    average for NoNC (so EE = M*alpha0*T*(1-value)/E_tot holds for both)."""
    if value is None:
        return None
    arr = np.atleast_1d(value)
    return float(np.mean(arr))


def _load(path):
    s = load_scenario(path)
    violations = validate_scenario(s)
    if violations:
        raise ScenarioError("invalid scenario:\n  " + "\n  ".join(violations))
    return s, build_link_coefficients(s)


def _parse_targets(spec_text: str | None):
    if not spec_text:
        return list(DEFAULT_TARGETS)
    if spec_text.startswith("logrange:"):
        start, stop, count = spec_text[len("logrange:"):].split(",")
        return [float(t) for t in np.geomspace(float(start), float(stop), int(count))]
    return [float(t) for t in spec_text.split(",")]


def _solve_row(args):
    """One sweep cell; top-level so process pools can dispatch it."""
    scenario_path, target, scheme, mode, samples, seed, include_user = args
    s, coeffs = _load(scenario_path)
    row = {
        "target": target, "scheme": scheme, "mode": mode, "status": "ok", "reason": "",
        "relays": None, "count": None, "p_users": None, "p_relays": None, "ee": None,
        "pr_out_exact": None, "pr_out_approx": None, "pr_out_mc": None, "mc_stderr": None,
        "e_tot": None, "e_data": None, "q_star": None, "dinkelbach_iters": None,
        "goa_iters": None, "cuts": None, "newton_iters": None,
    }
    solver = brute_force_optimize if mode == "brute" else dinkelbach_solve
    sol = solver(s, coeffs, target, scheme=scheme, include_user_energy=include_user)
    if not sol.feasible:
        row["status"] = "infeasible"
        row["reason"] = sol.reason or "infeasible"
        return row
    diag = sol.diagnostics
    row.update({
        "relays": sol.schedule.theta,
        "count": sol.schedule.count,
        "p_users": sol.powers.p,
        "p_relays": sol.powers.p_relay,
        "ee": sol.ee,
        "pr_out_exact": _scalar_outage(sol.pr_out_exact),
        "pr_out_approx": _scalar_outage(sol.pr_out_approx),
        "e_tot": sol.energy.e_tot,
        "e_data": sol.energy.e_data,
        "q_star": sol.q_star,
        "dinkelbach_iters": diag.get("dinkelbach_iterations"),
        "goa_iters": sum(i.get("goa_iterations", 0) for i in diag.get("inner", [])),
        "cuts": diag.get("cuts_total"),
        "newton_iters": diag.get("newton_total"),
    })
    if mode == "mc":
        mc = monte_carlo_outage(s, coeffs, sol.schedule, sol.powers,
                                McConfig(samples=samples, seed=seed), scheme=scheme)
        row["pr_out_mc"] = _scalar_outage(mc.outage)
        row["mc_stderr"] = _scalar_outage(mc.stderr)
        row["ee"] = mc.ee
    return row


def _write_lines(path, lines):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_plotdata(outdir, name, pairs):
    lines = [f"# mdncee-plotdata-v1 {name}"]
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in pairs]
    _write_lines(os.path.join(outdir, "plotdata", f"{name}.dat"), lines)


def _sweep_rows(scenario_path, targets, schemes, modes, samples, seed, include_user, jobs):
    tasks = [(scenario_path, t, sch, mode, samples, seed, include_user)
             for t in targets for sch in schemes for mode in modes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_solve_row, tasks))
    else:
        rows = [_solve_row(t) for t in tasks]
    rows.sort(key=lambda r: (-r["target"], r["scheme"], r["mode"]))
    return rows


def cmd_sweep(args) -> int:
    targets = _parse_targets(args.targets)
    schemes = ["mdnc", "nonc"] if args.scheme == "both" else [args.scheme]
    modes = args.mode.split(",")
    rows = _sweep_rows(args.scenario, targets, schemes, modes, args.samples, args.seed,
                       args.include_user_energy_in_budget, args.jobs)
    lines = [SWEEP_SCHEMA, SWEEP_HEADER]
    for r in rows:
        lines.append(",".join([
            _fmt(r["target"]), r["scheme"], r["mode"], _fmt_list(r["relays"]),
            _fmt(r["count"]), _fmt_list(r["p_users"]), _fmt_list(r["p_relays"]),
            _fmt(r["ee"]), _fmt(r["pr_out_exact"]), _fmt(r["pr_out_approx"]),
            _fmt(r["pr_out_mc"]), _fmt(r["mc_stderr"]), _fmt(r["e_tot"]), _fmt(r["e_data"]),
            _fmt(r["q_star"]), _fmt(r["dinkelbach_iters"]), _fmt(r["goa_iters"]),
            _fmt(r["cuts"]), _fmt(r["newton_iters"]), r["status"], r["reason"].replace(",", ";"),
        ]))
    _write_lines(os.path.join(args.out, "sweep.csv"), lines)
    for sch in schemes:
        for mode in modes:
            pairs = [(r["target"], r["ee"]) for r in rows
                     if r["scheme"] == sch and r["mode"] == mode and r["status"] == "ok"]
            if pairs:
                _write_plotdata(args.out, f"ee_vs_target_{sch}_{mode}", pairs)
    ok = [r for r in rows if r["status"] == "ok"]
    return 0 if ok else 3


def cmd_energy_curve(args) -> int:
    targets = _parse_targets(args.targets)
    rows = _sweep_rows(args.scenario, targets, [args.scheme], ["goa"], 0, 0,
                       args.include_user_energy_in_budget, args.jobs)
    lines = [ENERGY_SCHEMA, ENERGY_HEADER]
    pairs = []
    for r in rows:
        max_p = None if r["p_users"] is None else float(np.max(r["p_users"]))
        lines.append(",".join([
            _fmt(r["target"]), r["scheme"], _fmt(r["pr_out_exact"]), _fmt(r["e_data"]),
            _fmt(r["e_tot"]), _fmt_list(r["relays"]), _fmt(r["count"]), _fmt(max_p),
            r["status"], r["reason"].replace(",", ";"),
        ]))
        if r["status"] == "ok":
            pairs.append((r["pr_out_exact"], r["e_data"]))
    _write_lines(os.path.join(args.out, "energy_curve.csv"), lines)
    if pairs:
        _write_plotdata(args.out, f"edata_vs_outage_{args.scheme}", pairs)
    return 0 if pairs else 3


def relay_location_study(s, coeffs, target: float, deltas, subset=None,
                         include_user_energy: bool = False):
    """EE versus relay displacement for a fixed selection-plus-power design.

    The design (relay subset and transmit powers) is the optimizer's solution
    at delta = 0; each delta then shifts every relay that far from the users
    toward the BS and re-evaluates the exact outage at the unchanged powers.
    Row fields: delta, relays, ee, achieved exact outage, status, reason.
    """
    from .energy import total_energy
    from .outage import outage_exact

    if subset is None:
        base = dinkelbach_solve(s, coeffs, target, include_user_energy=include_user_energy)
        if not base.feasible:
            return [{"delta": d, "relays": None, "ee": None, "pr_out_exact": None,
                     "status": "infeasible", "reason": "no feasible base selection"}
                    for d in deltas]
        schedule, powers = base.schedule, base.powers
    else:
        schedule = RelaySchedule.from_indices(subset, s.N)
        fixed = dinkelbach_fixed_schedule(s, coeffs, schedule, target,
                                          include_user_energy=include_user_energy)
        if fixed is None:
            return [{"delta": d, "relays": schedule.theta, "ee": None, "pr_out_exact": None,
                     "status": "infeasible", "reason": "outage cap unreachable at delta 0"}
                    for d in deltas]
        powers = fixed.powers
    e = total_energy(s, schedule, powers)
    rows = []
    for delta in deltas:
        try:
            shifted = apply_relay_shift(s, delta)
        except ScenarioError as exc:
            rows.append({"delta": delta, "relays": schedule.theta, "ee": None,
                         "pr_out_exact": None, "status": "invalid", "reason": str(exc)})
            continue
        co = build_link_coefficients(shifted)
        pout = outage_exact(shifted, co, schedule, powers).total
        ee = s.M * s.alpha0 * s.T * (1.0 - pout) / e.e_tot
        rows.append({"delta": delta, "relays": schedule.theta, "ee": ee,
                     "pr_out_exact": pout, "status": "ok", "reason": ""})
    return rows


def cmd_relay_shift(args) -> int:
    s, coeffs = _load(args.scenario)
    targets = [float(t) for t in args.targets.split(",")] if args.targets else [1e-3]
    deltas = [float(d) for d in args.deltas.split(",")]
    subset = tuple(int(j) for j in args.relays.split(",")) if args.relays else None
    lines = [SHIFT_SCHEMA, SHIFT_HEADER]
    any_ok = False
    for target in targets:
        rows = relay_location_study(s, coeffs, target, deltas, subset=subset,
                                    include_user_energy=args.include_user_energy_in_budget)
        pairs = []
        for r in rows:
            lines.append(",".join([
                _fmt(r["delta"]), _fmt(target), _fmt_list(r["relays"]), _fmt(r["ee"]),
                _fmt(r["pr_out_exact"]), r["status"], r["reason"].replace(",", ";")]))
            if r["status"] == "ok":
                any_ok = True
                pairs.append((r["delta"], r["ee"]))
        if pairs:
            _write_plotdata(args.out, f"ee_vs_delta_target{target:g}", pairs)
    _write_lines(os.path.join(args.out, "relay_shift.csv"), lines)
    return 0 if any_ok else 3


def cmd_verify(args) -> int:
    s, coeffs = _load(args.scenario)
    if args.relays:
        schedule = RelaySchedule.from_indices(
            [int(j) for j in args.relays.split(",")], s.N)
        p = np.array([float(v) for v in args.user_powers.split(",")])
        pr = np.zeros(s.N)
        pr[list(schedule.theta)] = [float(v) for v in args.relay_powers.split(",")]
        from .outage import PowerAllocation
        powers = PowerAllocation(p=p, p_relay=pr)
    else:
        sol = dinkelbach_solve(s, coeffs, args.target, scheme=args.scheme)
        if not sol.feasible:
            print(json.dumps({"schema": VERIFY_SCHEMA, "status": "infeasible",
                              "reason": sol.reason}, indent=2))
            return 3
        schedule, powers = sol.schedule, sol.powers

    from .energy import energy_efficiency, nonc_energy, total_energy
    from .outage import nonc_outage, outage_exact
    if args.scheme == "mdnc":
        analytic = outage_exact(s, coeffs, schedule, powers).total
        e = total_energy(s, schedule, powers)
        analytic_ee = energy_efficiency(s, analytic, e)
    else:
        per_user = nonc_outage(coeffs, schedule, powers)
        analytic = float(np.mean(per_user))
        e = nonc_energy(s, schedule, powers)
        analytic_ee = s.alpha0 * s.T * float(np.sum(1.0 - per_user)) / e.e_tot

    mc = monte_carlo_outage(s, coeffs, schedule, powers,
                            McConfig(samples=args.samples, seed=args.seed), scheme=args.scheme)
    emp = _scalar_outage(mc.outage)
    sigma = math.sqrt(analytic * (1.0 - analytic) / args.samples)
    z = (emp - analytic) / sigma if sigma > 0 else 0.0
    passed = abs(z) <= 3.0
    report = {
        "schema": VERIFY_SCHEMA,
        "scheme": args.scheme,
        "relays": list(schedule.theta),
        "user_powers": powers.p.tolist(),
        "relay_powers": powers.p_relay.tolist(),
        "samples": args.samples,
        "seed": args.seed,
        "analytic": {"outage": analytic, "ee": analytic_ee},
        "empirical": {"outage": emp, "stderr": _scalar_outage(mc.stderr), "ee": mc.ee},
        "z_score": z,
        "pass": bool(passed),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        _write_lines(os.path.join(args.out, "verify.json"), [text])
    print(text)
    return 0 if passed else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdncee",
        description="Energy-efficiency optimization of network-coded relay networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file (key = value lines)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--include-user-energy-in-budget", action="store_true",
                       help="count user transmit energy against the E0 budget")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")

    p = sub.add_parser("sweep", help="Pareto sweep: EE versus target outage")
    common(p)
    p.add_argument("--scheme", choices=["mdnc", "nonc", "both"], default="mdnc")
    p.add_argument("--mode", default="goa",
                   help="comma list from goa,brute,mc (mc verifies the goa point)")
    p.add_argument("--targets", help="comma list or logrange:start,stop,count")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("energy-curve", help="transmit-energy share versus achieved outage")
    common(p)
    p.add_argument("--scheme", choices=["mdnc", "nonc"], default="mdnc")
    p.add_argument("--targets", help="comma list or logrange:start,stop,count")
    p.set_defaults(func=cmd_energy_curve)

    p = sub.add_parser("relay-shift", help="EE versus relay displacement, fixed subset")
    common(p)
    p.add_argument("--deltas", required=True,
                   help="comma list of shifts in meters (use --deltas=-150,... for negatives)")
    p.add_argument("--targets", help="comma list of target outages (default 1e-3)")
    p.add_argument("--relays", help="comma list of relay indices (default: optimizer pick at delta 0)")
    p.set_defaults(func=cmd_relay_shift)

    p = sub.add_parser("verify", help="Monte Carlo check at one operating point")
    common(p)
    p.add_argument("--scheme", choices=["mdnc", "nonc"], default="mdnc")
    p.add_argument("--relays", help="comma list of relay indices")
    p.add_argument("--user-powers", help="comma list, W")
    p.add_argument("--relay-powers", help="comma list for the selected relays, W")
    p.add_argument("--target", type=float, default=1e-3,
                   help="optimize at this target when no explicit point is given")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
