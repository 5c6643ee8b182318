"""Command-line front end.

    pslab count     --alpha 1.5 --d 3 [--k 3]
    pslab sweep     --alpha 1.5 --k 2 --d-range 200000:210000[:STRIDE]
    pslab triplets  --alpha 1.5 --x 400
    pslab equidist  --alpha 1.5 --r 1 --d 1000000 --window 0:1 --harmonics 1:0,0:1
    pslab verify    [--suite oracle --dmax 500]
    pslab constants --alpha 1.5

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 precision exhausted or degenerate window.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .certreal import AlphaContext, asymptotic_constant, zeta
from .counting import (
    ErrorTermConfig,
    default_constants,
    error_term_E1,
    error_term_E2,
    kap_counts,
    pair_count,
    sweep,
    tail_count_E0,
    triplet_count,
)
from .equidist import (
    ConvexRegion,
    WindowSpec,
    discrepancy_report,
    predicted_density,
    region_measure,
    short_interval_count,
    unit_box,
    weyl_sum,
    window_fractions,
)
from .errors import (
    DegenerateWindow,
    DomainError,
    PrecisionExhausted,
    ResourceLimit,
)
from .suites import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3
SWEEP_COLUMNS = ("d", "pair_count", "kap_k", "ratio", "e1", "e2")


class ConfigError(Exception):
    """Bad command-line configuration (exit 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: str | None = None
    k: int = 2
    d: int | None = None
    d_range: tuple | None = None
    x: int | None = None
    c1: str | None = None
    c2: str | None = None
    H: int = 20
    r: int = 1
    window: tuple = ("0", "1")
    harmonics: tuple = ((1, 0), (0, 1), (1, 1))
    epsilon: float = 0.0
    R: int | None = None
    error_terms: bool = False
    fmt: str = "csv"
    out: str | None = None
    workers: int = 1
    max_bits: int = 4096
    seed: int = 0
    suites: tuple = ()
    dmax: int = 500

    def hash(self) -> str:
        """Provenance hash over every field that can change the report."""
        payload = dataclasses.asdict(self)
        payload.pop("out")
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def context(self) -> AlphaContext:
        if self.alpha is None:
            raise ConfigError("--alpha is required")
        try:
            return AlphaContext.from_value(self.alpha, max_bits=self.max_bits)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def error_config(self, ctx) -> ErrorTermConfig:
        base = default_constants(ctx)
        if self.c1 is None and self.c2 is None:
            return base
        c1 = float(Fraction(self.c1)) if self.c1 is not None else base.c1
        c2 = float(Fraction(self.c2)) if self.c2 is not None else base.c2
        return ErrorTermConfig(c1, c2, "user-supplied")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _int_arg(name, text, lo=None):
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} expects an integer, got {text!r}") from None
    if lo is not None and v < lo:
        raise ConfigError(f"{name} must be >= {lo}, got {v}")
    return v


def _parse_range(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--d-range expects LO:HI[:STRIDE], got {text!r}")
    lo = _int_arg("--d-range LO", parts[0], 1)
    hi = _int_arg("--d-range HI", parts[1], 1)
    stride = _int_arg("--d-range STRIDE", parts[2], 1) if len(parts) == 3 else 1
    return lo, hi, stride


def _parse_harmonics(text):
    out = []
    for item in text.split(","):
        bits = item.strip().split(":")
        if len(bits) != 2:
            raise ConfigError(f"--harmonics expects H1:H2[,H1:H2...], got {text!r}")
        out.append((_int_arg("h1", bits[0]), _int_arg("h2", bits[1])))
    return tuple(out)


def _rational_text(name, text):
    try:
        Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{name} expects a decimal or p/q, got {text!r}") from None
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", help="exponent in (1,2) as a decimal or p/q")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"))
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--workers", default="1", help="worker threads (default 1)")
    common.add_argument("--max-bits", help="precision cap in bits (env PSLAB_MAX_BITS)")
    common.add_argument("--seed", default="0", help="seed for sampled probes")

    p = argparse.ArgumentParser(prog="pslab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"pslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", parents=[common], help="N_alpha(d) and N_alpha,k(d) for one d")
    c.add_argument("--d", required=True)
    c.add_argument("--k", default="2")
    c.add_argument("--R", help="also report solutions with step r > R")
    c.add_argument("--error-terms", action="store_true", help="fill e1/e2")
    c.add_argument("--c1")
    c.add_argument("--c2")

    s = sub.add_parser("sweep", parents=[common], help="stream counts over a range of d")
    s.add_argument("--d-range", required=True, metavar="LO:HI[:STRIDE]")
    s.add_argument("--k", default="2")
    s.add_argument("--error-terms", action="store_true", help="fill e1/e2 (slow)")
    s.add_argument("--c1")
    s.add_argument("--c2")

    t = sub.add_parser("triplets", parents=[common], help="triplet count T(x)")
    t.add_argument("--x", required=True)

    e = sub.add_parser("equidist", parents=[common], help="short-window equidistribution report")
    e.add_argument("--d", required=True)
    e.add_argument("--r", default="1")
    e.add_argument("--window", metavar="C1:C2")
    e.add_argument("--c1")
    e.add_argument("--c2")
    e.add_argument("--harmonics", default="1:0,0:1,1:1")
    e.add_argument("--H", default="20", help="ETK truncation order")
    e.add_argument("--k", default="2", help="k for the C_k regions")
    e.add_argument("--epsilon", default="0", help="epsilon for the C_k regions")

    v = sub.add_parser("verify", parents=[common], help="run self-check suites")
    v.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)} (repeatable)")
    v.add_argument("--dmax", default="500")

    k = sub.add_parser("constants", parents=[common], help="limit constants for alpha")
    k.add_argument("--k", default="3", help="largest k to tabulate")
    return p


def config_from_args(ns, environ=os.environ) -> RunConfig:
    cmd = ns.command
    default_fmt = "csv" if cmd in ("count", "sweep", "triplets") else "json"
    max_bits = ns.max_bits if ns.max_bits is not None else environ.get("PSLAB_MAX_BITS", "4096")
    kw = dict(
        command=cmd,
        alpha=_rational_text("--alpha", ns.alpha) if ns.alpha is not None else None,
        fmt=ns.fmt or default_fmt,
        out=ns.out,
        workers=_int_arg("--workers", ns.workers, 1),
        max_bits=_int_arg("--max-bits", max_bits, 64),
        seed=_int_arg("--seed", ns.seed),
    )
    if cmd in ("count", "sweep", "equidist", "constants"):
        kw["k"] = _int_arg("--k", ns.k, 2)
    if cmd in ("count", "equidist"):
        kw["d"] = _int_arg("--d", ns.d, 1)
    if cmd in ("count", "sweep"):
        kw["error_terms"] = ns.error_terms
    if cmd in ("count", "sweep", "equidist"):
        kw["c1"] = _rational_text("--c1", ns.c1) if ns.c1 is not None else None
        kw["c2"] = _rational_text("--c2", ns.c2) if ns.c2 is not None else None
    if cmd == "count" and ns.R is not None:
        kw["R"] = _int_arg("--R", ns.R, 0)
    if cmd == "sweep":
        kw["d_range"] = _parse_range(ns.d_range)
    if cmd == "triplets":
        kw["x"] = _int_arg("--x", ns.x, 1)
    if cmd == "equidist":
        kw["r"] = _int_arg("--r", ns.r, 1)
        kw["H"] = _int_arg("--H", ns.H, 1)
        kw["harmonics"] = _parse_harmonics(ns.harmonics)
        try:
            kw["epsilon"] = float(ns.epsilon)
        except ValueError:
            raise ConfigError(f"--epsilon expects a number, got {ns.epsilon!r}") from None
        if ns.window is not None:
            parts = ns.window.split(":")
            if len(parts) != 2:
                raise ConfigError(f"--window expects C1:C2, got {ns.window!r}")
            kw["window"] = (_rational_text("C1", parts[0]), _rational_text("C2", parts[1]))
        else:
            kw["window"] = (kw["c1"] or "0", kw["c2"] or "1")
        gap = Fraction(kw["window"][1]) - Fraction(kw["window"][0])
        if gap.denominator != 1 or gap < 1:
            raise ConfigError(f"c2 - c1 must be a positive integer, got {gap}")
    if cmd == "verify":
        kw["suites"] = tuple(ns.suite or ())
        kw["dmax"] = _int_arg("--dmax", ns.dmax, 1)
        unknown = [s for s in kw["suites"] if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s) {unknown}; choose from {', '.join(SUITES)}")
    cfg = RunConfig(**kw)
    if cmd != "verify":
        cfg.context()  # validate alpha before any work
    return cfg


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    """CSV cell: integers verbatim, reals as shortest round-trip decimal."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _metadata(cfg: RunConfig) -> dict:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = ""
    if epoch and epoch.isdigit():
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(int(epoch)))
    return {"alpha": cfg.alpha, "k": cfg.k, "timestamp": stamp,
            "version": __version__, "config_hash": cfg.hash()}


class _Sink:
    """Line-oriented writer to stdout or a file, flushed per line."""

    def __init__(self, path):
        self.path = path
        self.fh = open(path, "w", encoding="utf-8", newline="\n") if path else None

    def write(self, text):
        fh = self.fh or sys.stdout
        fh.write(text)
        fh.flush()

    def close(self):
        if self.fh:
            self.fh.close()


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _record_row(rec, k):
    return {"d": rec.d, "pair_count": rec.pair_count, "kap_k": rec.kap_counts.get(k),
            "ratio": rec.normalized_ratio, "e1": rec.e1, "e2": rec.e2}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_count(cfg: RunConfig, sink: _Sink) -> int:
    ctx = cfg.context()
    rec = pair_count(ctx, cfg.d)
    if cfg.k > 2:
        rec.kap_counts.update(kap_counts(ctx, cfg.d, cfg.k))
    rec.normalized_ratio = rec.kap_counts[cfg.k] / float(cfg.d) ** (ctx.beta - 1)
    if cfg.error_terms:
        ecfg = cfg.error_config(ctx)
        rec.e1 = error_term_E1(ctx, cfg.d, ecfg)
        rec.e2 = error_term_E2(ctx, cfg.d, ecfg)
    row = _record_row(rec, cfg.k)
    meta = _metadata(cfg)
    if cfg.R is not None:
        meta["R"] = cfg.R
        meta["tail_E0"] = tail_count_E0(ctx, cfg.d, cfg.R, rec)
    if cfg.fmt == "json":
        sink.write(_json_dump({**meta, "record": {
            **row, "kap_counts": {str(k): v for k, v in sorted(rec.kap_counts.items())},
            "r_histogram": {str(r): c for r, c in sorted(rec.r_histogram.items())}}}))
    else:
        sink.write(",".join(SWEEP_COLUMNS) + "\n")
        sink.write(",".join(_fmt(row[c]) for c in SWEEP_COLUMNS) + "\n")
        for key, val in meta.items():
            sink.write(f"# {key}={_fmt(val)}\n")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, sink: _Sink) -> int:
    ctx = cfg.context()
    lo, hi, stride = cfg.d_range
    ecfg = cfg.error_config(ctx) if cfg.error_terms else None
    csv = cfg.fmt == "csv"
    rows = []
    if csv:
        sink.write(",".join(SWEEP_COLUMNS) + "\n")

    def emit(rec):
        row = _record_row(rec, cfg.k)
        if csv:
            sink.write(",".join(_fmt(row[c]) for c in SWEEP_COLUMNS) + "\n")
        else:
            rows.append(row)

    try:
        rep = sweep(ctx, cfg.k, lo, hi, stride, workers=cfg.workers,
                    error_terms=ecfg, on_record=emit)
    except KeyboardInterrupt:
        if csv:
            sink.write("# truncated\n")
        else:
            sink.write(_json_dump({**_metadata(cfg), "records": rows, "truncated": True}))
        return 130
    summary = {"window_mean_ratio": rep.window_mean_ratio,
               "target_constant": rep.target_constant,
               "relative_gap": rep.relative_gap,
               "records": len(rep.records)}
    if csv:
        if rep.records:
            for key, val in {**summary, **_metadata(cfg)}.items():
                sink.write(f"# {key}={_fmt(val)}\n")
    else:
        sink.write(_json_dump({**_metadata(cfg), "d_range": [lo, hi], "stride": stride,
                               "summary": summary, "records": rows}))
    return EXIT_OK


def cmd_triplets(cfg: RunConfig, sink: _Sink) -> int:
    ctx = cfg.context()
    t = triplet_count(ctx, cfg.x)
    expo = ctx.alpha * (ctx.beta - 1) + 1
    target = asymptotic_constant(ctx, 2) / expo
    ratio = t / float(cfg.x) ** expo
    row = {"x": cfg.x, "triplet_count": t, "ratio": ratio, "target": target,
           "relative_gap": abs(ratio - target) / target}
    cols = tuple(row)
    if cfg.fmt == "json":
        sink.write(_json_dump({**_metadata(cfg), "exponent": expo, **row}))
    else:
        sink.write(",".join(cols) + "\n")
        sink.write(",".join(_fmt(row[c]) for c in cols) + "\n")
        for key, val in _metadata(cfg).items():
            sink.write(f"# {key}={_fmt(val)}\n")
    return EXIT_OK


def cmd_equidist(cfg: RunConfig, sink: _Sink) -> int:
    ctx = cfg.context()
    try:
        w = WindowSpec.build(ctx, cfg.r, cfg.d, cfg.window[0], cfg.window[1])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if w.N <= w.M:
        raise DegenerateWindow(f"empty window M={w.M}, N={w.N} for r={cfg.r}, d={cfg.d}")
    harm = [{"h1": h1, "h2": h2, "magnitude": weyl_sum(ctx, w, h1, h2)}
            for h1, h2 in cfg.harmonics]
    fx, fy, _ = window_fractions(ctx, w)
    disc = {}
    for name, pts in (("x", fx), ("y", fy)):
        rep = discrepancy_report(pts, cfg.H)
        disc[name] = {"exact": rep.exact_discrepancy, "etk_bound": rep.etk_bound,
                      "ratio": rep.ratio, "H": rep.H}
    regions = []
    cands = [("full_square", unit_box(0.0, 1.0, 0.0, 1.0), 1.0),
             ("quarter_box", unit_box(0.0, 0.5, 0.0, 0.5), 0.25)]
    for sign in ("minus", "plus"):
        reg = ConvexRegion(cfg.k, cfg.epsilon, sign)
        cands.append((f"C_{cfg.k}^{'-' if sign == 'minus' else '+'}({cfg.epsilon!r})",
                      reg, region_measure(reg)))
    for name, cset, mu in cands:
        res = short_interval_count(ctx, w, cset)
        pred = predicted_density(ctx, w, mu)
        regions.append({"region": name, "measure": mu, "count_min": res.count_min,
                        "count_max": res.count_max, "density": res.density,
                        "predicted_density": pred,
                        "relative_gap": abs(res.density - pred) / pred})
    report = {**_metadata(cfg),
              "window": {"r": w.r, "d": w.d, "c1": str(w.c1), "c2": str(w.c2),
                         "M": w.M, "N": w.N, "length": w.length},
              "harmonics": harm, "discrepancy": disc, "regions": regions}
    if cfg.fmt == "csv":
        cols = ("region", "measure", "count_min", "count_max", "density", "predicted_density",
                "relative_gap")
        sink.write(",".join(cols) + "\n")
        for row in regions:
            sink.write(",".join(_fmt(row[c]) for c in cols) + "\n")
        for h in harm:
            sink.write(f"# weyl_{h['h1']}_{h['h2']}={_fmt(h['magnitude'])}\n")
        for key, val in _metadata(cfg).items():
            sink.write(f"# {key}={_fmt(val)}\n")
    else:
        sink.write(_json_dump(report))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, sink: _Sink) -> int:
    alphas = [cfg.alpha] if cfg.alpha else None
    results = run_suites(cfg.suites or None, dmax=cfg.dmax, alphas=alphas, seed=cfg.seed)
    ok = all(r.passed for r in results)
    sink.write(_json_dump({**_metadata(cfg), "passed": ok,
                           "suites": [r.as_dict() for r in results]}))
    if not ok:
        first = next(r for r in results if not r.passed)
        print(f"verify: suite {first.name} failed: {first.failure}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_constants(cfg: RunConfig, sink: _Sink) -> int:
    ctx = cfg.context()
    ecfg = default_constants(ctx)
    expo = ctx.alpha * (ctx.beta - 1) + 1
    report = {**_metadata(cfg), **ctx.describe(),
              "zeta_beta": zeta(ctx.beta, 1e-15),
              "limit_constants": {str(k): asymptotic_constant(ctx, k) for k in range(2, cfg.k + 1)},
              "triplet_exponent": expo,
              "triplet_constant": asymptotic_constant(ctx, 2) / expo,
              "c1": ecfg.c1, "c2": ecfg.c2, "constant_source": ecfg.source}
    if cfg.fmt == "csv":
        sink.write("key,value\n")
        for key, val in report.items():
            if isinstance(val, dict):
                for k2, v2 in val.items():
                    sink.write(f"{key}.{k2},{_fmt(v2)}\n")
            else:
                sink.write(f"{key},{_fmt(val)}\n")
    else:
        sink.write(_json_dump(report))
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "sweep": cmd_sweep,
    "triplets": cmd_triplets,
    "equidist": cmd_equidist,
    "verify": cmd_verify,
    "constants": cmd_constants,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 2 for usage errors
        return EXIT_OK if not exc.code else EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
    except (ConfigError, DomainError) as exc:
        print(f"pslab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sink = _Sink(cfg.out)
    try:
        return COMMANDS[cfg.command](cfg, sink)
    except (ConfigError, DomainError, ResourceLimit) as exc:
        print(f"pslab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionExhausted as exc:
        if exc.d is None and cfg.d is not None:
            exc.d = cfg.d
        where = exc.where()
        print(f"pslab: precision exhausted: {exc}" + (f" ({where})" if where else ""),
              file=sys.stderr)
        return EXIT_PRECISION
    except DegenerateWindow as exc:
        print(f"pslab: degenerate window: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    finally:
        sink.close()


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
