"""Command-line front end.

Subcommands compute Fisher-information tables, both bound families, rate
profiles, the rate vs MSE-decay region, and the Monte Carlo study, writing
schema-stable CSV (or JSON) with 12-significant-digit numeric fields.
Everything is declarative: a JSON config selects the experiment, with only
`--out`, `--seed`, and `--workers` as command-line overrides.  `--plot`
additionally renders a figure next to the data file.

Examples:
    ratemse region --out region.csv --plot
    ratemse simulate --config sim.json --workers 4
    ratemse bounds --out bounds.csv

Exit status: 0 on success, 2 on a config violation (message names the field
path), 3 on a numeric failure (message names the module).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import analytic, bounds, fisher, montecarlo, region
from .errors import ConfigError, RateMseError
from .model import TwoBandModel
from .rate import two_band_rate

_DEFAULTS = {
    "model": {
        "family": "two_band_gaussian",
        "a": 3.0,
        "b": 3.0,
        "P": 2.0,
        "sigma2": 0.5,
        "modulation": "bpsk",
    },
    "sweep": {"t_min": 0.01, "t_max": 0.99, "steps": 101},
    "sim": {
        "n_list": [100, 1000, 10000, 100000],
        "trials": 20000,
        "seed": 12345,
        "estimator": "map",
        "fast_path": True,
        "t1": 0.0,
    },
    "fisher": {"s_min": 0.01, "s_max": 0.99, "steps": 99, "t1": 0.5},
    "output": {"format": "csv", "path": None},
}

_NUMBER = (int, float)


def _fail(path: str, why: str):
    raise ConfigError(f"{path}: {why}")


def _merge_strict(user: dict) -> dict:
    cfg = copy.deepcopy(_DEFAULTS)
    if not isinstance(user, dict):
        _fail("<root>", "config must be a JSON object")
    for section, body in user.items():
        if section not in cfg:
            _fail(section, "unknown field")
        if not isinstance(body, dict):
            _fail(section, "must be an object")
        for key, value in body.items():
            if key not in cfg[section]:
                _fail(f"{section}.{key}", "unknown field")
            cfg[section][key] = value
    return cfg


def _expect(cfg, section, key, kinds, why):
    v = cfg[section][key]
    if isinstance(v, bool) and kinds is not bool:
        _fail(f"{section}.{key}", why)
    if not isinstance(v, kinds):
        _fail(f"{section}.{key}", why)
    return v


def _validate(cfg: dict) -> dict:
    m = cfg["model"]
    if m["family"] != "two_band_gaussian":
        _fail("model.family", f"unsupported family {m['family']!r}")
    for key in ("a", "b", "P", "sigma2"):
        v = _expect(cfg, "model", key, _NUMBER, "must be a positive number")
        if v <= 0:
            _fail(f"model.{key}", "must be a positive number")
    if m["modulation"] not in ("bpsk", "4pam"):
        _fail("model.modulation", "must be 'bpsk' or '4pam'")

    sw = cfg["sweep"]
    for key in ("t_min", "t_max"):
        _expect(cfg, "sweep", key, _NUMBER, "must be a number in (0, 1)")
    if not 0.0 < sw["t_min"] < sw["t_max"] < 1.0:
        _fail("sweep.t_min", "sweep must satisfy 0 < t_min < t_max < 1")
    if _expect(cfg, "sweep", "steps", int, "must be an integer >= 2") < 2:
        _fail("sweep.steps", "must be an integer >= 2")

    sim = cfg["sim"]
    n_list = sim["n_list"]
    if (
        not isinstance(n_list, list)
        or not n_list
        or any(not isinstance(n, int) or isinstance(n, bool) or n < 1 for n in n_list)
    ):
        _fail("sim.n_list", "must be a nonempty list of integers >= 1")
    if _expect(cfg, "sim", "trials", int, "must be an integer >= 1") < 1:
        _fail("sim.trials", "must be an integer >= 1")
    _expect(cfg, "sim", "seed", int, "must be an integer")
    if sim["estimator"] not in ("ml", "map"):
        _fail("sim.estimator", "must be 'ml' or 'map'")
    _expect(cfg, "sim", "fast_path", bool, "must be a boolean")
    t1 = _expect(cfg, "sim", "t1", _NUMBER, "must be a number in [0, 1)")
    if not 0.0 <= t1 < 1.0:
        _fail("sim.t1", "must be a number in [0, 1)")

    fi = cfg["fisher"]
    for key in ("s_min", "s_max"):
        _expect(cfg, "fisher", key, _NUMBER, "must be a number in (0, 1)")
    if not 0.0 < fi["s_min"] < fi["s_max"] < 1.0:
        _fail("fisher.s_min", "fisher grid must satisfy 0 < s_min < s_max < 1")
    if _expect(cfg, "fisher", "steps", int, "must be an integer >= 1") < 1:
        _fail("fisher.steps", "must be an integer >= 1")
    ft1 = _expect(cfg, "fisher", "t1", _NUMBER, "must be a number in [0, 1]")
    if not 0.0 <= ft1 <= 1.0:
        _fail("fisher.t1", "must be a number in [0, 1]")

    out = cfg["output"]
    if out["format"] not in ("csv", "json"):
        _fail("output.format", "must be 'csv' or 'json'")
    if out["path"] is not None and not isinstance(out["path"], str):
        _fail("output.path", "must be a string path")
    return cfg


def load_config(path) -> dict:
    if path is None:
        user = {}
    else:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"<config file>: {exc}") from exc
    return _validate(_merge_strict(user))


def _build_model(cfg: dict) -> TwoBandModel:
    m = cfg["model"]
    return TwoBandModel.default(
        a=m["a"], b=m["b"], power=m["P"], sigma2=m["sigma2"], modulation=m["modulation"]
    )


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return ""
    return str(v)


def _write_rows(path: Path, header: list[str], rows: list[dict], fmt: str, metadata=None):
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        doc = {"metadata": metadata or {}, "rows": rows}
        path.write_text(json.dumps(doc, indent=2, default=float) + "\n")
        return
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in header])


def _label_str(x) -> str:
    if isinstance(x, tuple) and len(x) == 2:
        return f"{x[0]}{x[1]:+.6g}"
    return str(x)


# -- subcommand runners -------------------------------------------------------


def _run_fisher(cfg, out: Path, plot: bool) -> str:
    model = _build_model(cfg)
    fi = cfg["fisher"]
    design = model.design(float(fi["t1"]))
    prof = fisher.FisherProfile(model.channel, design, model.prior)
    labels = [_label_str(x) for x in design.labels]
    rows = []
    for s in np.linspace(fi["s_min"], fi["s_max"], fi["steps"]):
        row = {"s": float(s)}
        for x, name in zip(design.labels, labels):
            row[f"J_{name}"] = prof.per_symbol(x, float(s))
        row["mixture"] = prof.mixture(float(s))
        row["prior_term"] = prof.prior_term(float(s))
        rows.append(row)
    header = ["s"] + [f"J_{name}" for name in labels] + ["mixture", "prior_term"]
    _write_rows(out, header, rows, cfg["output"]["format"], metadata={"t1": fi["t1"]})
    if plot:
        from . import plotting

        plotting.save_fisher_figure(rows, labels, str(out.with_suffix(".png")))
    return f"fisher: wrote {len(rows)} states to {out} (design t1={fi['t1']:g})"


def _run_bounds(cfg, out: Path, plot: bool) -> str:
    model = _build_model(cfg)
    sim = cfg["sim"]
    design = model.design(float(sim["t1"]))
    channel, prior = model.channel, model.prior
    a_atb = bounds.alpha_atbcrb(channel, design, prior)
    a_b = bounds.alpha_bcrb(channel, design, prior)
    rows = []
    for n in sim["n_list"]:
        b = bounds.bcrb_finite(channel, design, prior, n)
        t = bounds.atbcrb_finite(channel, design, prior, n)
        rows.append(
            {
                "n": n,
                "bcrb": b,
                "atbcrb": t,
                "n_times_bcrb": n * b,
                "n_times_atbcrb": n * t,
                "alpha_bcrb": a_b,
                "alpha_atbcrb": a_atb,
            }
        )
    header = ["n", "bcrb", "atbcrb", "n_times_bcrb", "n_times_atbcrb", "alpha_bcrb", "alpha_atbcrb"]
    _write_rows(out, header, rows, cfg["output"]["format"])
    if plot:
        from . import plotting

        plotting.save_bounds_figure(rows, str(out.with_suffix(".png")))
    last = rows[-1]
    return (
        f"bounds: n={last['n']} gives n*ATBCRB={last['n_times_atbcrb']:.6g} "
        f"(alpha={a_atb:.6g}), n*BCRB={last['n_times_bcrb']:.6g} (alpha={a_b:.6g})"
    )


def _run_rate(cfg, out: Path, plot: bool) -> str:
    model = _build_model(cfg)
    sw = cfg["sweep"]
    rows = []
    for t1 in np.linspace(sw["t_min"], sw["t_max"], sw["steps"]):
        rb = two_band_rate(model, float(t1))
        rows.append(
            {"t1": rb.t1, "h2": rb.h2, "c1": rb.c1, "c2_worst": rb.c2_worst, "total": rb.total}
        )
    header = ["t1", "h2", "c1", "c2_worst", "total"]
    _write_rows(out, header, rows, cfg["output"]["format"])
    if plot:
        from . import plotting

        plotting.save_rate_figure(rows, str(out.with_suffix(".png")))
    best = max(rows, key=lambda r: r["total"])
    return f"rate: max {best['total']:.6g} bits/symbol at t1={best['t1']:.6g}"


def _run_region(cfg, out: Path, plot: bool) -> str:
    model = _build_model(cfg)
    sw = cfg["sweep"]
    curve = region.sweep_tradeoff(model, sw["t_min"], sw["t_max"], sw["steps"])
    comm, est = region.operating_points(curve)
    rows = []
    for p in curve.points:
        rows.append(
            {
                "t1": p.t1,
                "t2": p.t2,
                "rate_bits": p.rate_bits,
                "alpha_atbcrb": p.alpha_atbcrb,
                "alpha_bcrb": p.alpha_bcrb,
                "is_comm_optimal": p == comm,
                "is_est_optimal": p == est,
            }
        )
    header = [
        "t1",
        "t2",
        "rate_bits",
        "alpha_atbcrb",
        "alpha_bcrb",
        "is_comm_optimal",
        "is_est_optimal",
    ]
    _write_rows(out, header, rows, cfg["output"]["format"], metadata=curve.metadata)
    if plot:
        from . import plotting

        plotting.save_region_figure(curve, comm, est, str(out.with_suffix(".png")))
    return (
        f"region: comm-optimal t1={comm.t1:.6g} (rate={comm.rate_bits:.6g}, "
        f"alpha={comm.alpha_atbcrb:.6g}); est-optimal t1={est.t1:.6g} "
        f"(rate={est.rate_bits:.6g}, alpha={est.alpha_atbcrb:.6g})"
    )


def _run_simulate(cfg, out: Path, plot: bool, workers: int) -> str:
    model = _build_model(cfg)
    sim = cfg["sim"]
    config = montecarlo.SimConfig(
        model=model,
        t1=float(sim["t1"]),
        estimator=sim["estimator"],
        n_list=tuple(sim["n_list"]),
        trials=sim["trials"],
        seed=sim["seed"],
        fast_path=sim["fast_path"],
    )
    report = montecarlo.convergence_study(config, workers=workers)
    header = [
        "n",
        "trials",
        "mse",
        "n_mse",
        "stderr",
        "alpha_atbcrb",
        "alpha_bcrb",
        "n_atbcrb_finite",
        "n_bcrb_finite",
        "estimator",
        "fast_path",
    ]
    rows = [{k: getattr(r, k) for k in header} for r in report.rows]
    _write_rows(out, header, rows, cfg["output"]["format"])
    if plot:
        from . import plotting

        plotting.save_simulate_figure(report.rows, str(out.with_suffix(".png")))
    last = report.rows[-1]
    return (
        f"simulate: n={last.n} gives n*MSE={last.n_mse:.6g} "
        f"(alpha_atbcrb={last.alpha_atbcrb:.6g}, alpha_bcrb={last.alpha_bcrb:.6g})"
    )


_RUNNERS = {
    "fisher": _run_fisher,
    "bounds": _run_bounds,
    "rate": _run_rate,
    "region": _run_region,
    "simulate": _run_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratemse",
        description="rate vs MSE-decay tradeoff toolkit for joint communication and state estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("fisher", "per-symbol / mixture Fisher information and the prior term over a state grid"),
        ("bounds", "finite-n MSE lower bounds and their asymptotic constants"),
        ("rate", "time-sharing rate profile over the band fraction"),
        ("region", "rate vs MSE-decay region sweep with operating points"),
        ("simulate", "Monte Carlo n*MSE study with ML/MAP estimation"),
    ]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", metavar="PATH", default=None, help="JSON config file")
        p.add_argument("--out", metavar="PATH", default=None, help="output data file")
        p.add_argument("--seed", type=int, default=None, help="override sim.seed")
        p.add_argument("--plot", action="store_true", help="also render a PNG figure")
        if name == "simulate":
            p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["sim"]["seed"] = int(args.seed)
        if args.out is not None:
            cfg["output"]["path"] = args.out
        ext = "json" if cfg["output"]["format"] == "json" else "csv"
        out = Path(cfg["output"]["path"] or f"{args.command}.{ext}")
        if args.command == "simulate":
            summary = _run_simulate(cfg, out, args.plot, max(1, args.workers))
        else:
            summary = _RUNNERS[args.command](cfg, out, args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RateMseError as exc:
        print(f"error in module {exc.module}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
