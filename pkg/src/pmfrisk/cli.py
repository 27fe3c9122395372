"""Command-line interface.

Subcommands: generators, memm, bounds, sample, calibrate.  Parameters come
from an optional JSON config (--config) with explicit CLI flags taking
precedence.  Artifacts land under --out together with a manifest.json that
echoes the resolved configuration and the seed; nothing written contains a
timestamp, so reruns are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 arbitrage violation,
4 numeric failure.

All probabilities and amplitudes printed or serialized follow the market
convention: descending amplitudes with 1-based labels l = 1..L.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .calibration import annualize, calibrate_pentanomial, estimate_moments
from .entropy import EntropyBall, solve_memm
from .errors import (ArbitrageViolation, BracketNotFound, ConvergenceFailure,
                     DegeneratePolytope, PmfRiskError)
from .lattice import (AmplitudeGrid, LatticeSpec, build_lattice,
                      equivalent_filter, lattice_json_dict,
                      risk_neutral_generators)
from .pricing import (OptionSpec, analytical_bounds, no_arbitrage_envelope,
                      price_distribution, price_option)
from .sampler import sample_polytope

_CONFIG_KEYS = ("u", "d", "L", "R", "S0", "N", "probs", "strike", "kind",
                "style", "maturity", "samples", "seed", "epsilon",
                "entropy_order", "bins", "returns", "from_prices",
                "periods_per_year", "horizon", "out")


@dataclass
class RunConfig:
    """Resolved run parameters (config file merged with CLI overrides)."""

    u: Optional[float] = None
    d: Optional[float] = None
    L: Optional[int] = None
    R: Optional[float] = None
    S0: Optional[float] = None
    N: Optional[int] = None
    probs: Optional[list] = None
    strike: Optional[float] = None
    kind: str = "call"
    style: str = "european"
    maturity: Optional[int] = None
    samples: Optional[int] = None
    seed: int = 0
    epsilon: Optional[float] = None
    entropy_order: str = "center-first"
    bins: int = 50
    returns: Optional[str] = None
    from_prices: bool = False
    periods_per_year: int = 252
    horizon: Optional[int] = None
    out: Optional[str] = None
    artifacts: list = field(default_factory=list)

    @classmethod
    def load(cls, args: argparse.Namespace) -> "RunConfig":
        merged: dict = {}
        config_path = getattr(args, "config", None)
        if config_path:
            with open(config_path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            unknown = set(raw) - set(_CONFIG_KEYS)
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            merged.update(raw)
        for key in _CONFIG_KEYS:
            val = getattr(args, key, None)
            if val is not None:
                merged[key] = val
        if isinstance(merged.get("probs"), str):
            merged["probs"] = [float(x) for x in merged["probs"].split(",")]
        cfg = cls(**{k: v for k, v in merged.items() if k in _CONFIG_KEYS})
        if cfg.L is not None:
            cfg.L = int(cfg.L)
        if cfg.N is not None:
            cfg.N = int(cfg.N)
        return cfg

    def lattice_spec(self) -> LatticeSpec:
        missing = [k for k in ("u", "d", "L", "R", "S0", "N")
                   if getattr(self, k) is None]
        if missing:
            raise ValueError(f"missing lattice parameters: {missing}")
        return LatticeSpec(u=self.u, d=self.d, L=self.L, R=self.R,
                           S0=self.S0, N=self.N)

    def option_spec(self, spec: LatticeSpec) -> OptionSpec:
        if self.strike is None:
            raise ValueError("missing option strike")
        maturity = self.maturity if self.maturity is not None else spec.N
        return OptionSpec(kind=self.kind, strike=self.strike,
                          maturity=int(maturity), style=self.style)

    def prior_pmf(self, amps: AmplitudeGrid):
        if self.probs is None:
            raise ValueError("missing historical probabilities (descending)")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.size != amps.L:
            raise ValueError(f"expected {amps.L} probabilities, got {probs.size}")
        return amps.pmf_from_desc(probs)

    def echo(self) -> dict:
        out = {}
        for key in _CONFIG_KEYS:
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


def _fmt(x: float) -> str:
    return format(float(x), ".6f")


class _Artifacts:
    """Collects artifact files under the --out directory."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.names: list[str] = []
        self.root = Path(cfg.out) if cfg.out else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Optional[Path]:
        if self.root is None:
            return None
        self.names.append(name)
        return self.root / name

    def write_json(self, name: str, obj) -> None:
        p = self.path(name)
        if p is not None:
            p.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")

    def finish(self) -> None:
        if self.root is None:
            return
        manifest = {
            "command": self.command,
            "seed": self.cfg.seed,
            "config": self.cfg.echo(),
            "artifacts": sorted(self.names),
        }
        (self.root / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


def write_histogram_csv(path, values, bins: int) -> None:
    """Bin-table CSV (bin_left, bin_right, count); +inf values collect in a
    trailing sentinel row with 'inf' in both bin columns."""
    vals = np.asarray(values, dtype=np.float64)
    finite = vals[np.isfinite(vals)]
    lines = ["bin_left,bin_right,count"]
    if finite.size:
        counts, edges = np.histogram(finite, bins=bins)
        for i, c in enumerate(counts):
            lines.append(f"{format(edges[i], '.17g')},"
                         f"{format(edges[i + 1], '.17g')},{int(c)}")
    n_inf = int(vals.size - finite.size)
    if n_inf:
        lines.append(f"inf,inf,{n_inf}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_generators(cfg: RunConfig) -> int:
    spec = cfg.lattice_spec()
    amps, _ = build_lattice(spec)
    gens = risk_neutral_generators(amps, spec.gross)
    option = cfg.option_spec(spec) if cfg.strike is not None else None

    header = "pair\tq_l1\tq_l2"
    if option:
        header += "\tprice"
    print(header)
    rows = []
    for g in gens.generators:
        l1, l2 = amps.pair_to_desc(g.pair)
        desc = amps.probs_desc(g.pmf)
        row = [f"({l1},{l2})", _fmt(desc[l1 - 1]), _fmt(desc[l2 - 1])]
        if option:
            row.append(_fmt(price_option(g.pmf, spec, option).price))
        rows.append(row)
        print("\t".join(row))

    art = _Artifacts(cfg, "generators")
    art.write_json("lattice.json", lattice_json_dict(spec, amps, gens))
    p = art.path("generators.csv")
    if p is not None:
        cols = "l1,l2,q_l1,q_l2" + (",price" if option else "")
        body = [cols]
        for row in rows:
            pair = row[0].strip("()").split(",")
            body.append(",".join(pair + row[1:]))
        p.write_text("\n".join(body) + "\n", encoding="utf-8")
    art.finish()
    return 0


def cmd_memm(cfg: RunConfig) -> int:
    spec, amps, prior = _resolve_prior(cfg)
    sol = solve_memm(prior, spec.gross)
    q_desc = amps.probs_desc(sol.q_tilde)
    print("q_tilde\t" + "\t".join(_fmt(x) for x in q_desc))
    print(f"tau\t{sol.tau:.9f}")
    print(f"entropy\t{sol.entropy:.9f}")
    print(f"residual\t{sol.residual:.3e}")
    payload = {
        "q_tilde": [float(x) for x in q_desc],
        "tau": sol.tau,
        "entropy": sol.entropy,
        "residual": sol.residual,
        "prior": [float(x) for x in amps.probs_desc(prior)],
    }
    if cfg.strike is not None:
        option = cfg.option_spec(spec)
        quote = price_option(sol.q_tilde, spec, option, "memm")
        print(f"price\t{_fmt(quote.price)}")
        payload["price"] = quote.price
    art = _Artifacts(cfg, "memm")
    art.write_json("memm.json", payload)
    art.finish()
    return 0


def cmd_bounds(cfg: RunConfig) -> int:
    spec = cfg.lattice_spec()
    option = cfg.option_spec(spec)
    bounds = analytical_bounds(spec, option)
    print(f"lower\t{_fmt(bounds.lower.price)}\t{bounds.lower.label}")
    print(f"upper\t{_fmt(bounds.upper.price)}\t{bounds.upper.label}")
    payload = {
        "lower": bounds.lower.price, "lower_measure": bounds.lower.label,
        "upper": bounds.upper.price, "upper_measure": bounds.upper.label,
    }
    if option.kind == "call" and option.style == "european":
        env = no_arbitrage_envelope(spec, option)
        print(f"envelope\t{_fmt(env[0])}\t{_fmt(env[1])}")
        payload["envelope_lower"], payload["envelope_upper"] = env
    if cfg.probs is not None:
        amps = AmplitudeGrid.from_spec(spec)
        sol = solve_memm(cfg.prior_pmf(amps), spec.gross)
        quote = price_option(sol.q_tilde, spec, option, "memm")
        print(f"memm\t{_fmt(quote.price)}")
        payload["memm"] = quote.price
    art = _Artifacts(cfg, "bounds")
    art.write_json("bounds.json", payload)
    art.finish()
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    spec = cfg.lattice_spec()
    option = cfg.option_spec(spec)
    if cfg.samples is None:
        raise ValueError("missing sample count")
    amps, _ = build_lattice(spec)
    gens = risk_neutral_generators(amps, spec.gross)
    batch = sample_polytope(gens, int(cfg.samples), cfg.seed)
    if len(batch) == 0:
        print("warning: empty sample batch", file=sys.stderr)

    ball = None
    reference = None
    if cfg.probs is not None:
        prior = cfg.prior_pmf(amps)
        batch = equivalent_filter(batch, prior)
        reference = solve_memm(prior, spec.gross).q_tilde
        if cfg.epsilon is not None:
            ball = EntropyBall(reference, cfg.epsilon)
    report = price_distribution(batch, spec, option, ball=ball,
                                reference=reference, order=cfg.entropy_order)

    summary = report.summary()
    for key in ("count", "min", "max", "mean", "q05", "q50", "q95",
                "analytical_lower", "analytical_upper",
                "envelope_lower", "envelope_upper"):
        val = summary[key]
        txt = "" if val is None else (_fmt(val) if key != "count" else str(val))
        print(f"{key}\t{txt}")

    art = _Artifacts(cfg, "sample")
    p = art.path("samples.csv")
    if p is not None:
        stats = {"price": report.prices}
        if report.entropies is not None:
            stats["entropy"] = report.entropies
        batch.to_csv(p, stats=stats, descending=True)
    p = art.path("report.csv")
    if p is not None:
        report.write_csv(p)
    p = art.path("price_hist.csv")
    if p is not None:
        write_histogram_csv(p, report.prices, cfg.bins)
    if report.entropies is not None:
        p = art.path("entropy_hist.csv")
        if p is not None:
            write_histogram_csv(p, report.entropies, cfg.bins)
    art.write_json("summary.json", summary)
    art.finish()
    return 0


def cmd_calibrate(cfg: RunConfig) -> int:
    if cfg.returns is None:
        raise ValueError("missing returns file")
    series = _read_series(cfg.returns, cfg.from_prices)
    daily = estimate_moments(series, cfg.periods_per_year)
    horizon = cfg.horizon if cfg.horizon is not None else cfg.periods_per_year
    horizon_m = annualize(daily, int(horizon))
    calib = calibrate_pentanomial(horizon_m)

    print("amplitudes\t" + "\t".join(_fmt(a) for a in calib.amplitudes))
    print("probs\t" + "\t".join(_fmt(p) for p in calib.probs_desc))
    payload = {
        "periods_per_year": daily.periods_per_year,
        "horizon_periods": int(horizon),
        "period_moments": _moments_dict(daily),
        "horizon_moments": _moments_dict(horizon_m),
        "amplitudes": [float(a) for a in calib.amplitudes],
        "probs": [float(p) for p in calib.probs_desc],
        "location": calib.location,
        "spacing": calib.spacing,
    }
    art = _Artifacts(cfg, "calibrate")
    art.write_json("calibration.json", payload)
    art.finish()
    return 0


def _moments_dict(m) -> dict:
    return {"mean": m.mean, "variance": m.variance, "skewness": m.skewness,
            "excess_kurtosis": m.excess_kurtosis}


def _resolve_prior(cfg: RunConfig):
    """Lattice spec plus prior pmf, either direct probs or via calibration."""
    if cfg.probs is not None and cfg.returns is not None:
        raise ValueError("give either probs or a returns file, not both")
    if cfg.probs is not None:
        spec = cfg.lattice_spec()
        amps = AmplitudeGrid.from_spec(spec)
        return spec, amps, cfg.prior_pmf(amps)
    if cfg.returns is not None:
        if cfg.R is None or cfg.S0 is None or cfg.N is None:
            raise ValueError("calibrated run needs R, S0 and N")
        series = _read_series(cfg.returns, cfg.from_prices)
        daily = estimate_moments(series, cfg.periods_per_year)
        horizon = cfg.horizon if cfg.horizon is not None else cfg.periods_per_year
        calib = calibrate_pentanomial(annualize(daily, int(horizon)))
        spec = calib.to_lattice_spec(cfg.R, cfg.S0, int(cfg.N))
        amps = AmplitudeGrid.from_spec(spec)
        # the lattice rebuilds the amplitudes from u and d, which agrees with
        # the calibration grid only up to rounding; re-key the probabilities
        return spec, amps, amps.pmf_from_desc(calib.probs_desc)
    raise ValueError("need historical probs or a returns file")


def _read_series(path: str, from_prices: bool) -> np.ndarray:
    """Log returns from a CSV file.

    ``from_prices`` expects rows (date, adjusted_close) and differences the
    log closes; otherwise a single column of log returns.  A header row is
    skipped when its fields are not numeric.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(line.split(","))
    if not rows:
        raise ValueError(f"no data in {path}")

    def _numeric(row, col):
        try:
            float(row[col])
            return True
        except (ValueError, IndexError):
            return False

    col = 1 if from_prices else 0
    if not _numeric(rows[0], col):
        rows = rows[1:]
    if from_prices:
        closes = np.array([float(r[1]) for r in rows])
        if np.any(closes <= 0.0):
            raise ValueError("prices must be positive")
        return np.diff(np.log(closes))
    return np.array([float(r[0]) for r in rows])


_COMMANDS = {
    "generators": cmd_generators,
    "memm": cmd_memm,
    "bounds": cmd_bounds,
    "sample": cmd_sample,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmfrisk",
        description="Distribution model risk on multinomial lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="artifact output directory")

    lat = argparse.ArgumentParser(add_help=False)
    for flag, typ in (("--u", float), ("--d", float), ("--L", int),
                      ("--R", float), ("--S0", float), ("--N", int)):
        lat.add_argument(flag, type=typ)

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--strike", type=float)
    opt.add_argument("--kind", choices=("call", "put"))
    opt.add_argument("--style", choices=("european", "american"))
    opt.add_argument("--maturity", type=int)

    probs = argparse.ArgumentParser(add_help=False)
    probs.add_argument("--probs", help="descending step probabilities, comma separated")

    ret = argparse.ArgumentParser(add_help=False)
    ret.add_argument("--returns", help="CSV input file")
    ret.add_argument("--from-prices", dest="from_prices", action="store_true",
                     default=None, help="input rows are (date, adjusted_close)")
    ret.add_argument("--periods-per-year", dest="periods_per_year", type=int)
    ret.add_argument("--horizon", type=int,
                     help="aggregation horizon in periods (default: one year)")

    sub.add_parser("generators", parents=[common, lat, opt],
                   help="risk-neutral polytope generators and their prices")
    sub.add_parser("memm", parents=[common, lat, opt, probs, ret],
                   help="minimal-entropy martingale measure")
    sub.add_parser("bounds", parents=[common, lat, opt, probs],
                   help="analytical price bounds and envelope")
    smp = sub.add_parser("sample", parents=[common, lat, opt, probs],
                         help="sampled price and entropy distributions")
    smp.add_argument("--samples", type=int)
    smp.add_argument("--seed", type=int)
    smp.add_argument("--epsilon", type=float)
    smp.add_argument("--entropy-order", dest="entropy_order",
                     choices=("center-first", "sample-first"),
                     help="direction of the ball entropy (default center-first)")
    smp.add_argument("--bins", type=int)
    sub.add_parser("calibrate", parents=[common, ret],
                   help="pentanomial calibration from return moments")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args)
        return _COMMANDS[args.command](cfg)
    except ArbitrageViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (BracketNotFound, ConvergenceFailure, DegeneratePolytope) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (PmfRiskError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
