"""Command line: ``nakamoto-profit {compute,simulate,sweep,decide}``.

Exit codes: 0 success, 2 usage, 3 domain, 4 search bound, 5 computational
integrity.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict

from . import decision, model
from .errors import NakamotoProfitError
from .simulator import SimConfig, run_batch

SEED_ENV = "NAKAMOTO_PROFIT_SEED"

OUTPUT_COLUMNS = {
    "P": "P",
    "E_R": "E_R_over_b",
    "E_T": "E_T_over_tau0",
    "Gamma": "Gamma",
    "Gamma_H": "Gamma_H",
}

FIGURE_AS = (3, 5, 10)


def fmt(x):
    """Render a number for CSV output (12 significant digits)."""
    if isinstance(x, (bool,)):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


def _add_params(p, A_required=True):
    p.add_argument("--q", type=float, required=True, help="attacker relative hashrate, in (0, 1/2)")
    p.add_argument("--z", type=int, default=2, help="confirmations requested (default 2)")
    p.add_argument("--A", type=int, required=A_required, default=None, help="give-up lag threshold, A >= z")
    p.add_argument("--v", type=float, default=1.0, help="double-spend value in coinbase units (default 1)")
    p.add_argument("--b", type=float, default=model.BITCOIN_COINBASE, help="coinbase reward (display only)")
    p.add_argument("--tau0", type=float, default=model.BITCOIN_TAU0, help="inter-block time in seconds (display only)")


def _params(args, **override):
    kw = dict(q=args.q, z=args.z, A=args.A, v=args.v, b=args.b, tau0=args.tau0)
    kw.update(override)
    return model.AttackParams(**kw)


def _print_json(obj, out):
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_compute(args, out):
    params = _params(args)
    rep = model.report(params)
    payload = {"params": asdict(params), **asdict(rep)}
    if args.asymptotics:
        payload["asymptotics"] = {k: v._asdict() for k, v in model.asymptotics(params).items()}
    if args.format == "json":
        _print_json(payload, out)
        return
    width = max(len(k) for k in asdict(rep))
    for k, v in asdict(rep).items():
        out.write(f"{k:<{width}}  {fmt(v)}\n")
    if args.asymptotics:
        out.write("\nasymptotic            estimate            exact               rel_gap\n")
        for k, a in payload["asymptotics"].items():
            out.write(f"{k:<20}  {fmt(a['estimate']):<18}  {fmt(a['exact']):<18}  {a['rel_gap']:.3e}\n")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{SEED_ENV}={env!r} is not an integer")
    return 0


def cmd_simulate(args, out):
    params = _params(args)
    seed = _seed(args)
    res = run_batch(SimConfig(params, args.cycles, seed), workers=args.workers)
    rep = model.report(params)
    rows = [
        ("p_success", res.p_success, rep.p_success),
        ("e_revenue_b", res.revenue_b, rep.e_revenue_b),
        ("e_duration_tau0", res.duration_tau0, rep.e_duration_tau0),
    ]
    if args.format == "json":
        payload = {
            "params": asdict(params),
            "seed": seed,
            "n_cycles": res.n_cycles,
            "std_error_available": res.n_cycles >= 2,
            "estimates": {
                name: {
                    "estimate": est.mean,
                    "std_error": None if math.isnan(est.std_error) else est.std_error,
                    "exact": exact,
                    "z_score": None if math.isnan(est.z_score(exact)) else est.z_score(exact),
                }
                for name, est, exact in rows
            },
            "gamma_estimate": res.gamma_estimate,
            "gamma_exact": rep.gamma_attack,
        }
        _print_json(payload, out)
        return
    out.write(f"cycles={res.n_cycles} seed={seed}\n")
    if res.n_cycles < 2:
        out.write("note: a single cycle has no standard error\n")
    out.write(f"{'quantity':<16}{'estimate':>20}{'std_error':>20}{'exact':>20}{'z_score':>12}\n")
    for name, est, exact in rows:
        se = "n/a" if math.isnan(est.std_error) else fmt(est.std_error)
        zs = est.z_score(exact)
        zs = "n/a" if math.isnan(zs) else f"{zs:.3f}"
        out.write(f"{name:<16}{fmt(est.mean):>20}{se:>20}{fmt(exact):>20}{zs:>12}\n")
    out.write(f"{'gamma':<16}{fmt(res.gamma_estimate):>20}{'':>20}{fmt(rep.gamma_attack):>20}\n")


def _parse_range(text, integer):
    conv = int if integer else float
    if "," in text or ":" not in text:
        values = [conv(t) for t in text.split(",") if t.strip()]
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (conv(t) for t in parts)
        if not step > 0:
            raise argparse.ArgumentTypeError("range step must be > 0")
        if integer:
            values = list(range(start, stop + 1, step))
        else:
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(max(n, 0))]
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def _row(params, outputs):
    rep = model.report(params)
    values = {
        "P": rep.p_success,
        "E_R": rep.e_revenue_b,
        "E_T": rep.e_duration_tau0,
        "Gamma": rep.gamma_attack,
        "Gamma_H": rep.gamma_honest,
    }
    return [values[k] for k in outputs]


def _figure_rows(figure, args):
    qs = _parse_range(args.range or "0.01:0.49:0.01", integer=False)
    z = args.z
    v = args.v
    if figure == 1:
        header = ["q"] + [f"P_A{A}" for A in FIGURE_AS] + ["P_inf"]
    elif figure == 2:
        header = ["q"] + [f"E_R_over_b_A{A}" for A in FIGURE_AS]
    else:
        header = ["q"] + [f"Gamma_A{A}" for A in FIGURE_AS] + ["Gamma_H"]
    rows = []
    for q in qs:
        reps = [model.report(model.AttackParams(q, z, A, v=v, b=args.b, tau0=args.tau0)) for A in FIGURE_AS]
        if figure == 1:
            row = [r.p_success for r in reps] + [model.success_probability_inf(q, z)]
        elif figure == 2:
            row = [r.e_revenue_b for r in reps]
        else:
            row = [r.gamma_attack for r in reps] + [model.honest_revenue_ratio(q)]
        rows.append([q] + row)
    return header, rows


def cmd_sweep(args, out):
    if args.figure:
        header, rows = _figure_rows(args.figure, args)
    else:
        if not args.variable:
            raise argparse.ArgumentTypeError("sweep needs --figure or --variable with --range")
        if not args.range:
            raise argparse.ArgumentTypeError("--range is required with --variable")
        outputs = [o.strip() for o in args.outputs.split(",") if o.strip()]
        bad = [o for o in outputs if o not in OUTPUT_COLUMNS]
        if bad or not outputs:
            raise argparse.ArgumentTypeError(f"unknown outputs {bad}; choose from {list(OUTPUT_COLUMNS)}")
        values = _parse_range(args.range, integer=args.variable in ("A", "z"))
        fixed = {k: getattr(args, k) for k in ("q", "z", "A", "v")}
        missing = [k for k, val in fixed.items() if val is None and k != args.variable]
        if missing:
            raise argparse.ArgumentTypeError(f"missing fixed parameters: {missing}")
        header = [args.variable] + [OUTPUT_COLUMNS[o] for o in outputs]
        rows = []
        for x in values:
            kw = dict(fixed, b=args.b, tau0=args.tau0)
            kw[args.variable] = x
            rows.append([x] + _row(model.AttackParams(**kw), outputs))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])


def cmd_decide(args, out):
    if args.query == "min-value":
        asym = decision.min_profitable_value_asymptotic(args.q, args.z)
        best = decision.min_profitable_value_over_A(args.q, args.z, args.A_max)
        payload = {
            "q": args.q,
            "z": args.z,
            "v0_asymptotic_b": asym,
            "v_min_exact_b": best.v,
            "A_at_min": best.A,
            "relative_gap": abs(best.v - asym) / asym,
        }
    elif args.query == "min-confirmations":
        res = decision.min_safe_confirmations(decision.MerchantQuery(args.q, args.v, args.z_max))
        payload = {"q": args.q, "v_b": args.v, **res._asdict()}
    else:
        res = decision.optimal_threshold(decision.AttackerQuery(args.q, args.z, args.v, args.A_max))
        payload = {"q": args.q, "z": args.z, "v_b": args.v, **res._asdict(),
                   "gamma_honest": model.honest_revenue_ratio(args.q)}
    _print_json(payload, out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nakamoto-profit",
        description="Profitability of the (A,1)-Nakamoto double spend attack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="closed-form success probability, revenue, duration, ratio")
    _add_params(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--asymptotics", action="store_true", help="add asymptotic diagnostics")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("simulate", help="Monte Carlo estimate compared with the closed forms")
    _add_params(p)
    p.add_argument("--cycles", type=int, default=100_000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                   help=f"root seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="CSV sweep over one parameter or a figure preset")
    p.add_argument("--figure", type=int, choices=(1, 2, 3))
    p.add_argument("--variable", choices=("q", "A", "z", "v"))
    p.add_argument("--range", help="start:stop:step (inclusive) or a comma list")
    p.add_argument("--q", type=float)
    p.add_argument("--z", type=int, default=2)
    p.add_argument("--A", type=int, default=10)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--b", type=float, default=model.BITCOIN_COINBASE)
    p.add_argument("--tau0", type=float, default=model.BITCOIN_TAU0)
    p.add_argument("--outputs", default="P,E_R,E_T,Gamma,Gamma_H",
                   help="comma list from P,E_R,E_T,Gamma,Gamma_H")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decide", help="inverse and optimisation queries")
    dsub = p.add_subparsers(dest="query", required=True)
    d = dsub.add_parser("min-value", help="minimal profitable double-spend value")
    d.add_argument("--q", type=float, required=True)
    d.add_argument("--z", type=int, default=2)
    d.add_argument("--A-max", dest="A_max", type=int, default=None)
    d = dsub.add_parser("min-confirmations", help="minimal confirmations making the attack non-profitable")
    d.add_argument("--q", type=float, required=True)
    d.add_argument("--v", type=float, default=1.0)
    d.add_argument("--z-max", dest="z_max", type=int, default=100)
    d = dsub.add_parser("optimal-A", help="give-up threshold maximising the revenue ratio")
    d.add_argument("--q", type=float, required=True)
    d.add_argument("--z", type=int, default=2)
    d.add_argument("--v", type=float, default=1.0)
    d.add_argument("--A-max", dest="A_max", type=int, default=None)
    p.set_defaults(func=cmd_decide)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, out)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return 2
    except NakamotoProfitError as exc:
        sys.stderr.write(f"{parser.prog}: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
