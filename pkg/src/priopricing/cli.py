"""Command-line front end.

Subcommands: formulas | mechanism | equilibria | simulate | compare.
Every command is deterministic given its full configuration (seed
included). Output formats: human (6 significant digits), csv and json
(12 significant digits, identical numeric values in both).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .core import (QueueParams, mean_wait_ordinary, mean_wait_premium,
                   priority_value, value_bounds)
from .costs import QuadratureError, parse_distribution
from .game import (AllPay, Mixed, NonePay, find_threshold_equilibria,
                   flat_price_equilibria, iterated_elimination,
                   verify_unique_all_pay)
from .mechanisms import (AuctionHetero, AuctionHomogeneous, DiscreteOptimal,
                         Flat, HeteroSchedule, RandomOptimal,
                         auction_cdf_homogeneous, auction_mean_hetero,
                         auction_mean_homogeneous, auction_payment_hetero,
                         auction_support_homogeneous, discrete_grid,
                         discrete_mean, hetero_price, hetero_profit,
                         hetero_profit_bounds, parse_mechanism,
                         random_price_cdf, random_price_mean)
from .sim import (SimConfig, simulate_hetero_revenue, simulate_priority_queue,
                  simulate_revenue)

_DEFAULTS = {
    "format": "human",
    "grid": 21,
    "seed": 0,
    "replications": 1,
    "n": 10,
}

_COMMANDS = ("formulas", "mechanism", "equilibria", "simulate", "compare")


@dataclass
class Output:
    summary: dict
    columns: list[str]
    rows: list[list]


def _fmt_machine(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    if x is None:
        return ""
    return str(x)


def _fmt_human(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6g}"
    if x is None:
        return "-"
    return str(x)


def _json_value(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        return float(f"{x:.12g}")
    return x


def _render(out: Output, config: dict, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(out.columns)]
        lines.extend(",".join(_fmt_machine(c) for c in row) for row in out.rows)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = {
            "config": {k: _json_value(v) for k, v in config.items()},
            "results": {
                "summary": {k: _json_value(v) for k, v in out.summary.items()},
                "columns": out.columns,
                "rows": [[_json_value(c) for c in row] for row in out.rows],
            },
        }
        return json.dumps(payload, indent=2) + "\n"
    # human
    lines = [f"{k} = {_fmt_human(v)}" for k, v in out.summary.items()]
    if out.rows:
        cells = [[_fmt_human(c) for c in row] for row in out.rows]
        widths = [max(len(col), *(len(r[i]) for r in cells))
                  for i, col in enumerate(out.columns)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(out.columns, widths)))
        lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths))
                     for row in cells)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _queue_params(opts) -> QueueParams:
    if opts.get("lam") is None or opts.get("mu") is None:
        raise ValueError("--lambda and --mu are required")
    return QueueParams(opts["lam"], opts["mu"])


def cmd_formulas(opts) -> Output:
    params = _queue_params(opts)
    if opts.get("q") is not None:
        qs = [opts["q"]]
    else:
        k = opts["grid"]
        if k < 1:
            raise ValueError("formulas needs a grid of at least one point")
        qs = [0.0] if k == 1 else list(np.linspace(0.0, 1.0, k))
    rows = [[q, mean_wait_premium(params, q), mean_wait_ordinary(params, q),
             priority_value(params, q)] for q in map(float, qs)]
    return Output(
        summary={"lambda": params.lam, "mu": params.mu, "rho": params.rho},
        columns=["q", "w1", "w2", "f"],
        rows=rows,
    )


def cmd_mechanism(opts) -> Output:
    params = _queue_params(opts)
    spec = opts.get("mechanism")
    if not spec:
        raise ValueError("--mechanism is required")
    if spec.strip() == "discrete":
        spec = f"discrete {opts['n']}"
    cost_dist = (parse_distribution(opts["cost_dist"])
                 if opts.get("cost_dist") else None)
    mech = parse_mechanism(spec, params, cost_dist)
    k = max(2, opts["grid"])

    if isinstance(mech, Flat):
        return Output(
            summary={"kind": "flat", "mean_payment": mech.tau},
            columns=["price", "probability"],
            rows=[[mech.tau, 1.0]],
        )
    if isinstance(mech, RandomOptimal):
        f0, f1 = value_bounds(params)
        ps = np.linspace(f0, f1, k)
        return Output(
            summary={"kind": "random-optimal", "support_lo": f0,
                     "support_hi": f1,
                     "mean_payment": random_price_mean(params)},
            columns=["p", "cdf"],
            rows=[[float(p), float(random_price_cdf(params, p))] for p in ps],
        )
    if isinstance(mech, DiscreteOptimal):
        grid = discrete_grid(params, mech.n)
        return Output(
            summary={"kind": "discrete", "n": mech.n,
                     "mean_payment": discrete_mean(params, mech.n)},
            columns=["i", "price", "probability"],
            rows=[[i, pt.price, pt.probability] for i, pt in enumerate(grid)],
        )
    if isinstance(mech, AuctionHomogeneous):
        lo, hi = auction_support_homogeneous(params)
        mean = auction_mean_homogeneous(params)
        ys = np.linspace(lo, hi, k)
        return Output(
            summary={"kind": "auction", "support_lo": lo, "support_hi": hi,
                     "mean_payment": mean, "max_over_mean": hi / mean},
            columns=["y", "cdf"],
            rows=[[float(y), float(auction_cdf_homogeneous(params, y))]
                  for y in ys],
        )
    if isinstance(mech, HeteroSchedule):
        lo, hi = mech.cost_dist.truncated_support()
        cs = np.linspace(lo, hi, k)
        profit = hetero_profit(params, mech.cost_dist)
        b_lo, b_hi = hetero_profit_bounds(params, mech.cost_dist)
        return Output(
            summary={"kind": "hetero", "cost_dist": mech.cost_dist.spec(),
                     "profit": profit, "bound_lo": b_lo, "bound_hi": b_hi},
            columns=["c", "price"],
            rows=[[float(c), float(hetero_price(params, mech.cost_dist, c))]
                  for c in cs],
        )
    if isinstance(mech, AuctionHetero):
        lo, hi = mech.cost_dist.truncated_support()
        cs = np.linspace(lo, hi, k)
        return Output(
            summary={"kind": "auction-hetero",
                     "cost_dist": mech.cost_dist.spec(),
                     "mean_payment": auction_mean_hetero(params, mech.cost_dist)},
            columns=["c", "payment"],
            rows=[[float(c),
                   auction_payment_hetero(params, mech.cost_dist, float(c))]
                  for c in cs],
        )
    raise ValueError(f"unsupported mechanism spec {spec!r}")


_PROFILE_NAMES = {AllPay: "all_pay", NonePay: "none_pay", Mixed: "mixed"}


def cmd_equilibria(opts) -> Output:
    params = _queue_params(opts)
    tau = opts.get("tau")
    spec = opts.get("mechanism")
    if tau is None and not spec:
        raise ValueError("equilibria needs --tau or --mechanism")

    if spec and tau is None:
        if spec.strip() == "discrete":
            spec = f"discrete {opts['n']}"
        mech = parse_mechanism(spec, params,
                               parse_distribution(opts["cost_dist"])
                               if opts.get("cost_dist") else None)
        if isinstance(mech, Flat):
            tau = mech.tau
        elif isinstance(mech, RandomOptimal):
            grid = opts["grid"] if opts["grid"] > 2 else 10_000
            report = verify_unique_all_pay(
                params, lambda p: random_price_cdf(params, p), grid)
            thresholds = find_threshold_equilibria(
                params, lambda p: random_price_cdf(params, p), grid)
            unique = report.holds and len(thresholds) == 1
            return Output(
                summary={"mechanism": "random-optimal",
                         "unique_all_pay": unique,
                         "worst_gap": report.worst_gap,
                         "equality_residual": report.equality_residual,
                         "grid_size": report.grid_size},
                columns=["profile", "p_cut"],
                rows=[["threshold", t.p_cut] for t in thresholds],
            )
        elif isinstance(mech, DiscreteOptimal):
            grid = discrete_grid(params, mech.n)
            elim = iterated_elimination(params, grid)
            return Output(
                summary={"mechanism": f"discrete {mech.n}",
                         "all_pay": elim.all_pay, "rounds": elim.rounds},
                columns=["i", "price", "action"],
                rows=[[i, pt.price, elim.actions[i]]
                      for i, pt in enumerate(grid)],
            )
        else:
            raise ValueError(
                f"no equilibrium audit for mechanism spec {spec!r}")

    report = flat_price_equilibria(params, float(tau))
    f0, f1 = value_bounds(params)
    rows = []
    for profile, label in report.equilibria:
        name = _PROFILE_NAMES[type(profile)]
        q = {AllPay: 1.0, NonePay: 0.0}.get(type(profile),
                                            getattr(profile, "q", None))
        revenue = q * float(tau) if q is not None else None
        rows.append([name, q, label, revenue])
    return Output(
        summary={"tau": float(tau), "f0": f0, "f1": f1,
                 "unique": report.unique,
                 "worst_case_revenue": report.revenue_worst_case},
        columns=["profile", "q", "stability", "revenue"],
        rows=rows,
    )


def _z_score(emp, se, ref) -> float | None:
    if emp is None or se is None:
        return None
    if se == 0.0:
        return 0.0 if emp == ref else math.inf
    return abs(emp - ref) / se


def cmd_simulate(opts) -> Output:
    params = _queue_params(opts)
    if opts.get("customers") is None:
        raise ValueError("--customers is required")
    n = opts["customers"]
    seed = opts["seed"]
    spec = opts.get("mechanism")

    if spec:
        if spec.strip() == "discrete":
            spec = f"discrete {opts['n']}"
        cost_dist = (parse_distribution(opts["cost_dist"])
                     if opts.get("cost_dist") else None)
        mech = parse_mechanism(spec, params, cost_dist)
        if isinstance(mech, HeteroSchedule):
            res = simulate_hetero_revenue(params, mech.cost_dist, n, seed)
            analytic = hetero_profit(params, mech.cost_dist)
        else:
            res = simulate_revenue(params, mech, n, seed)
            if isinstance(mech, Flat):
                analytic = mech.tau
            elif isinstance(mech, RandomOptimal):
                analytic = random_price_mean(params)
            elif isinstance(mech, DiscreteOptimal):
                analytic = discrete_mean(params, mech.n)
            else:
                raise ValueError(f"mechanism {spec!r} cannot be simulated")
        emp = res.mean_revenue_per_customer
        se = res.se_revenue_per_customer
        return Output(
            summary={"mode": "revenue", "mechanism": spec, "customers": n,
                     "seed": res.seed, "backend": res.backend},
            columns=["metric", "empirical", "std_error", "analytic", "abs_z"],
            rows=[["revenue_per_customer", emp, se, analytic,
                   _z_score(emp, se, analytic)]],
        )

    if opts.get("q") is None:
        raise ValueError("queue simulation needs --q (or pass --mechanism)")
    cfg = SimConfig(params=params, q=opts["q"], num_customers=n,
                    warmup_customers=opts.get("warmup"), seed=seed,
                    replications=opts["replications"])
    res = simulate_priority_queue(cfg)
    w1 = mean_wait_premium(params, cfg.q)
    w2 = mean_wait_ordinary(params, cfg.q)
    f = priority_value(params, cfg.q)
    gap = gap_se = None
    if res.mean_sojourn_premium is not None and res.mean_sojourn_ordinary is not None:
        gap = res.mean_sojourn_ordinary - res.mean_sojourn_premium
        gap_se = math.hypot(res.se_sojourn_premium or 0.0,
                            res.se_sojourn_ordinary or 0.0)
    rows = [
        ["sojourn_premium", res.mean_sojourn_premium, res.se_sojourn_premium,
         w1, _z_score(res.mean_sojourn_premium, res.se_sojourn_premium, w1)],
        ["sojourn_ordinary", res.mean_sojourn_ordinary, res.se_sojourn_ordinary,
         w2, _z_score(res.mean_sojourn_ordinary, res.se_sojourn_ordinary, w2)],
        ["sojourn_gap", gap, gap_se, f, _z_score(gap, gap_se, f)],
    ]
    return Output(
        summary={"mode": "queue", "customers": n,
                 "warmup": cfg.resolved_warmup, "q": cfg.q,
                 "replications": cfg.replications, "seed": res.seed,
                 "backend": res.backend, "count_premium": res.count_premium,
                 "count_ordinary": res.count_ordinary,
                 "admitted": res.admitted, "departed": res.departed,
                 "in_system_at_end": res.in_system_at_end},
        columns=["metric", "empirical", "std_error", "analytic", "abs_z"],
        rows=rows,
    )


def cmd_compare(opts) -> Output:
    params = _queue_params(opts)
    f0, f1 = value_bounds(params)
    n = opts["n"]
    rows = [
        ["flat-best", f0, None, None],
        [f"discrete-{n}", discrete_mean(params, n), None, None],
        ["random-optimal", random_price_mean(params), None, None],
        ["auction", auction_mean_homogeneous(params), None, None],
    ]
    summary = {"lambda": params.lam, "mu": params.mu, "rho": params.rho}
    if opts.get("cost_dist"):
        dist = parse_distribution(opts["cost_dist"])
        profit = hetero_profit(params, dist)
        b_lo, b_hi = hetero_profit_bounds(params, dist)
        rows.append(["hetero", profit, b_lo, b_hi])
        summary["cost_dist"] = dist.spec()
    # provable revenue ordering among the homogeneous schemes
    ordering = "flat-best <= discrete-n <= random-optimal < auction"
    checks = (f0 <= rows[1][1] + 1e-12 <= rows[2][1] + 1e-12 < rows[3][1])
    summary["ordering"] = ordering
    summary["ordering_verified"] = bool(checks)
    return Output(
        summary=summary,
        columns=["mechanism", "revenue", "bound_lo", "bound_hi"],
        rows=rows,
    )


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="priopricing",
        description="Priority pricing in a two-class preemptive M/M/1 queue: "
                    "formulas, mechanisms, equilibria, simulation.")
    parser.add_argument("--config", help="JSON file with default option values "
                                         "(command-line flags win)")
    sub = parser.add_subparsers(dest="command")

    def common(sp, sim=False):
        sp.add_argument("--lambda", dest="lam", type=float, help="arrival rate")
        sp.add_argument("--mu", type=float, help="service rate")
        sp.add_argument("--format", choices=["human", "csv", "json"])
        sp.add_argument("--out", help="write output to this path")
        sp.add_argument("--grid", type=int, help="grid size for tables/audits")
        sp.add_argument("--n", type=int, help="discrete mechanism grid size")
        sp.add_argument("--mechanism", help="mechanism spec, e.g. 'flat 1.0', "
                                            "'random-optimal', 'discrete 8', "
                                            "'hetero', 'auction'")
        sp.add_argument("--cost-dist", dest="cost_dist",
                        help="cost distribution spec, e.g. 'uniform 0 2'")
        sp.add_argument("--tau", type=float, help="flat priority fee")
        sp.add_argument("--q", type=float, help="premium fraction")
        if sim:
            sp.add_argument("--customers", type=int, help="arrivals to simulate")
            sp.add_argument("--warmup", type=int,
                            help="arrivals discarded before statistics")
            sp.add_argument("--seed", type=int, help="simulation seed")
            sp.add_argument("--replications", type=int,
                            help="independent replications")

    common(sub.add_parser("formulas", help="tabulate W1, W2, f over q"))
    common(sub.add_parser("mechanism", help="dump a pricing mechanism"))
    common(sub.add_parser("equilibria", help="enumerate/audit equilibria"))
    common(sub.add_parser("simulate", help="run the simulator"), sim=True)
    common(sub.add_parser("compare", help="revenue comparison table"))
    return parser


_ALL_KEYS = ("lam", "mu", "format", "out", "grid", "n", "mechanism",
             "cost_dist", "tau", "q", "customers", "warmup", "seed",
             "replications")


def _merge_opts(ns: argparse.Namespace) -> dict:
    file_conf = {}
    if ns.config:
        with open(ns.config, encoding="utf-8") as fh:
            file_conf = json.load(fh)
        unknown = set(file_conf) - set(_ALL_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    opts = {}
    for key in _ALL_KEYS:
        flag = getattr(ns, key, None)
        if flag is not None:
            opts[key] = flag
        elif key in file_conf:
            opts[key] = file_conf[key]
        else:
            opts[key] = _DEFAULTS.get(key)
    return opts


_DISPATCH = {
    "formulas": cmd_formulas,
    "mechanism": cmd_mechanism,
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if not ns.command:
        parser.print_help()
        return 1
    try:
        opts = _merge_opts(ns)
        out = _DISPATCH[ns.command](opts)
    except QuadratureError as exc:
        print(f"error: {exc} (partial value {exc.partial.value:.12g}, "
              f"achieved tolerance {exc.partial.abs_error_estimate:.3g})",
              file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = {k: v for k, v in opts.items()
              if v is not None and k not in ("out", "format")}
    config["command"] = ns.command
    text = _render(out, config, opts["format"])
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def entrypoint() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
