"""Command-line front end: single queries, code construction and sweeps."""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import asymptotics as asym
from . import codes, guessing, oracle, spectrum
from .dist import GuardExceeded, Pmf
from .measures import (
    format_order,
    max_renyi,
    mode_entropy,
    parse_order,
    renyi_divergence,
    renyi_entropy,
    sum_renyi,
    tilted_cross_entropy,
)

EXIT_OK, EXIT_INPUT, EXIT_GUARD = 0, 2, 3
LN2 = math.log(2)


def load_pmf(spec):
    """Pmf from a JSON file path or an inline form: ``bern:0.1``, ``unif:4``, ``0.5,0.3,0.2``."""
    text = str(spec).strip()
    low = text.lower()
    if low.startswith("bern:"):
        return Pmf.bernoulli(float(text[5:]))
    if low.startswith("unif:"):
        return Pmf.uniform(int(text[5:]))
    if "," in text and not text.endswith(".json"):
        return Pmf.from_probs([float(x) for x in text.split(",")])
    try:
        return Pmf.load(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed pmf file {text}: {exc}")
    except OSError as exc:
        raise ValueError(f"cannot read pmf file {text}: {exc.strerror}")


def parse_values(text):
    """Sweep grid: comma-separated tokens or ``start:step:stop`` ranges."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise ValueError(f"range {part!r} must be start:step:stop")
            a, step, b = (float(parse_order(x)) for x in bits)
            if not step > 0:
                raise ValueError("sweep step must be positive")
            if b < a:
                raise ValueError(f"empty range {part!r}")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            out.extend(a + i * step for i in range(count))
        else:
            out.append(parse_order(part))
    if not out:
        raise ValueError("sweep range is empty")
    return out


def fmt(value):
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return f"{value:.10g}"


class Units:
    def __init__(self, name):
        self.scale = LN2 if name == "bits" else 1.0

    def __call__(self, value):
        return value / self.scale


def _add_common(p, *names):
    for name in names:
        if name == "p":
            p.add_argument("--p", required=True, help="pmf file or inline form (bern:0.1, unif:4, 0.5,0.5)")
        elif name == "q":
            p.add_argument("--q", required=True, help="target pmf")
        elif name == "alpha":
            p.add_argument("--alpha", required=True, help="order: decimal, 0, 1, inf or -inf")
        elif name == "dir":
            p.add_argument("--dir", default="pq", help="pq, qp or max")


def build_parser():
    parser = argparse.ArgumentParser(prog="renyisim", description=__doc__)
    parser.add_argument("--units", choices=("nats", "bits"), default="nats")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", help="Renyi, mode or tilted cross entropy")
    _add_common(s, "p")
    s.add_argument("--alpha", default="1")
    s.add_argument("--kind", choices=("renyi", "mode", "tilted-cross"), default="renyi")

    s = sub.add_parser("divergence", help="Renyi divergence")
    _add_common(s, "p", "q", "alpha")
    s.add_argument("--measure", choices=("pq", "qp", "max", "sum"), default="pq")

    s = sub.add_parser("asym", help="limit of the normalized divergence at rate R")
    _add_common(s, "p", "q", "alpha", "dir")
    s.add_argument("--R", type=float, required=True)

    s = sub.add_parser("rate", help="conversion rate")
    _add_common(s, "p", "q", "alpha", "dir")
    s.add_argument("--unnormalized-lb", action="store_true", help="lower bound for the unnormalized forward divergence")

    s = sub.add_parser("resolvability", help="resolvability, or its asymptotics with --rate")
    _add_common(s, "q", "alpha", "dir")
    s.add_argument("--rate", type=float)

    s = sub.add_parser("intrinsic", help="intrinsic randomness, or its asymptotics with --rate")
    _add_common(s, "p", "alpha", "dir")
    s.add_argument("--rate", type=float)

    s = sub.add_parser("spectrum", help="information-spectrum exponents")
    _add_common(s, "p")
    s.add_argument("--j", type=float)
    s.add_argument("--inverse", type=float, metavar="OMEGA")
    s.add_argument("--side", choices=("lower", "upper"), default="lower")
    s.add_argument("--alphas", help="tilt grid for the parametric curve")

    s = sub.add_parser("compare-exponents", help="exponent dominance report")
    _add_common(s, "p", "q")
    s.add_argument("--R", type=float, required=True)

    s = sub.add_parser("construct", help="build a simulation code and write it as JSON")
    s.add_argument(
        "--kind",
        required=True,
        choices=("inverse", "truncated", "three-region", "type-spreading", "partition", "quantizer", "intrinsic"),
    )
    s.add_argument("--p")
    s.add_argument("--q")
    s.add_argument("--k", type=int)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--M", type=int)
    s.add_argument("--delta", type=float, default=codes.DEFAULT_DELTA)
    s.add_argument("--alpha", default="1")
    s.add_argument("--variant", default="pq")
    s.add_argument("--out", help="output path (stdout if omitted)")

    s = sub.add_parser("evaluate", help="exact divergence of a stored code")
    s.add_argument("--code", required=True)
    _add_common(s, "alpha", "dir")
    s.add_argument("--naive", action="store_true", help="use full atom enumeration")

    s = sub.add_parser("guessing", help="guessing exponent or bounds")
    _add_common(s, "p")
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--R", type=float, default=0.0)
    s.add_argument("--key", help="key pmf; prints lower and upper bounds")

    s = sub.add_parser("oracle", help="brute-force reference reports as JSON lines")
    s.add_argument("check", choices=("map", "spectrum", "simplex"))
    s.add_argument("--p", required=True)
    s.add_argument("--q")
    s.add_argument("--alpha", default="inf")
    s.add_argument("--dir", default="pq")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--j", type=float)
    s.add_argument("--resolution", type=int, default=1000)
    s.add_argument("--tol", type=float, default=2e-3)

    s = sub.add_parser("sweep", help="evaluate a quantity over a grid and write CSV or JSON")
    s.add_argument("quantity", choices=tuple(SWEEPS))
    s.add_argument("--p")
    s.add_argument("--q")
    s.add_argument("--key")
    s.add_argument("--dir", default="pq")
    s.add_argument("--alpha", default="1")
    s.add_argument("--R", default=None)
    s.add_argument("--rate", default=None)
    s.add_argument("--rho", default="1")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.add_argument("--jobs", type=int, default=1)
    return parser


def _entropy(a, units):
    p = load_pmf(a.p)
    if a.kind == "mode":
        return units(mode_entropy(p))
    alpha = parse_order(a.alpha)
    if a.kind == "tilted-cross":
        return units(tilted_cross_entropy(p, alpha))
    return units(renyi_entropy(p, alpha))


def _divergence(a, units):
    p, q, alpha = load_pmf(a.p), load_pmf(a.q), parse_order(a.alpha)
    fn = {
        "pq": lambda: renyi_divergence(p, q, alpha),
        "qp": lambda: renyi_divergence(q, p, alpha),
        "max": lambda: max_renyi(p, q, alpha),
        "sum": lambda: sum_renyi(p, q, alpha),
    }[a.measure]
    return units(fn())


def _asym(a, units):
    query = asym.RateQuery(load_pmf(a.p), load_pmf(a.q), a.R, parse_order(a.alpha))
    return units(asym.asymptotic_divergence(query, a.dir))


def _rate(a, units):
    p, q, alpha = load_pmf(a.p), load_pmf(a.q), parse_order(a.alpha)
    if a.unnormalized_lb:
        return asym.conversion_rate_unnormalized_lb(p, q, alpha)
    return asym.conversion_rate(p, q, alpha, a.dir)


def _resolvability(a, units):
    q, alpha = load_pmf(a.q), parse_order(a.alpha)
    if a.rate is None:
        return units(asym.resolvability(q, alpha, a.dir))
    return units(asym.resolvability_asymptotics(q, a.rate, alpha, a.dir))


def _intrinsic(a, units):
    p, alpha = load_pmf(a.p), parse_order(a.alpha)
    if a.rate is None:
        return units(asym.intrinsic_randomness(p, alpha, a.dir))
    return units(asym.intrinsic_asymptotics(p, a.rate, alpha, a.dir))


def _spectrum(a, units):
    p = load_pmf(a.p)
    if a.alphas:
        pts = spectrum.parametric_spectrum(p, parse_values(a.alphas))
        return [{"j": units(j), "exponent": units(e)} for j, e in pts]
    if a.inverse is not None:
        fn = spectrum.exponent_inverse_lower if a.side == "lower" else spectrum.exponent_inverse_upper
        return units(fn(p, a.inverse))
    if a.j is None:
        raise ValueError("spectrum needs --j, --inverse or --alphas")
    pt = spectrum.spectrum_point(p, a.j)
    return {"j": a.j, "side": pt.side.value, "exponent": units(pt.exponent), "boundary": pt.boundary}


def _compare(a, units):
    rep = spectrum.compare_exponents(load_pmf(a.p), load_pmf(a.q), a.R)
    return {
        "R": rep.R,
        "ranges": list(spectrum.ORDER_RANGES),
        "thresholds": list(rep.thresholds),
        "dominance": list(rep.dominance),
        "min_gaps": list(rep.min_gaps),
        "agrees": list(rep.agrees()),
    }


def _need(a, *names):
    missing = [n for n in names if getattr(a, n) is None]
    if missing:
        raise ValueError(f"--kind {a.kind} needs " + ", ".join("--" + m for m in missing))


def _construct(a, units):
    kind = a.kind
    if kind in ("inverse", "truncated", "three-region", "type-spreading", "partition"):
        _need(a, "p", "q", "k")
        p, q = load_pmf(a.p), load_pmf(a.q)
        if kind == "inverse":
            code = codes.inverse_transform_code(p, q, a.k, a.n)
        elif kind == "truncated":
            code = codes.inverse_transform_code(p, q, a.k, a.n, a.delta)
        elif kind == "three-region":
            code = codes.three_region_code(p, q, a.k, a.n, a.delta)
        elif kind == "type-spreading":
            code = codes.type_spreading_code(p, q, a.k, a.n, parse_order(a.alpha))
        else:
            code = codes.partition_code(p, q, a.k, a.n, a.delta)
    elif kind == "quantizer":
        _need(a, "q", "M")
        code = codes.resolvability_quantizer(load_pmf(a.q), a.n, a.M, a.delta, a.variant)
    else:
        _need(a, "p", "M")
        code = codes.intrinsic_code(load_pmf(a.p), a.n, a.M, a.delta, a.variant)
    text = code.to_json()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text + "\n")
        return None
    return text


def _evaluate(a, units):
    code = codes.SimCode.load(a.code)
    alpha = parse_order(a.alpha)
    if a.naive:
        return units(oracle.naive_evaluate(code, alpha, a.dir))
    return units(codes.evaluate_code(code, alpha, a.dir))


def _guessing(a, units):
    p = load_pmf(a.p)
    if a.key:
        lo, hi = guessing.guessing_bounds(guessing.GuessQuery(p, load_pmf(a.key), a.rho, a.R))
        return {"lower": units(lo), "upper": units(hi)}
    return units(guessing.guessing_exponent(p, a.rho, a.R))


def _oracle(a, units):
    p = load_pmf(a.p)
    if a.check == "map":
        if a.q is None:
            raise ValueError("oracle map needs --q")
        q, alpha = load_pmf(a.q), parse_order(a.alpha)
        mapping, best = oracle.brute_force_optimal_map(p, q, alpha, a.dir)
        built = codes.inverse_transform_code(p, q, 1, 1).evaluate(alpha, a.dir)
        # the exhaustive optimum may not exceed any constructed map
        gap = max(0.0, best - built) if math.isfinite(best) else (0.0 if best == built else math.inf)
        rep = oracle.OracleReport("optimal_map_below_inverse_transform", best, built, gap, 1e-12, gap <= 1e-12, f"map={mapping}")
        return [rep.to_json()]
    if a.check == "spectrum":
        if a.j is None:
            raise ValueError("oracle spectrum needs --j")
        _, est = oracle.empirical_spectrum(p, a.n, a.j)
        rep = oracle.OracleReport.compare("spectrum_exponent", est, spectrum.exponent_lower(p, a.j), a.tol, f"n={a.n} j={a.j}")
        return [rep.to_json()]
    if a.j is None:
        raise ValueError("oracle simplex needs --j")
    out = []
    for side, fn in (("lower_exponent", spectrum.exponent_lower), ("upper_exponent", spectrum.exponent_upper)):
        grid = oracle.simplex_grid_opt(side, p, a.j, a.resolution)
        out.append(oracle.OracleReport.compare(side, grid, fn(p, a.j), a.tol, f"j={a.j}").to_json())
    return out


def _sweep_point(task):
    quantity, fixed, name, value = task
    args = dict(fixed)
    args[name] = value
    return SWEEPS[quantity][1](args)


def _pm(args, key):
    return load_pmf(args[key])


SWEEPS = {
    "rate": (
        ("alpha",),
        lambda g: asym.conversion_rate(_pm(g, "p"), _pm(g, "q"), g["alpha"], g["dir"]),
    ),
    "asym": (
        ("alpha", "R"),
        lambda g: asym.asymptotic_divergence(asym.RateQuery(_pm(g, "p"), _pm(g, "q"), g["R"], g["alpha"]), g["dir"]),
    ),
    "resolvability": (
        ("alpha", "rate"),
        lambda g: asym.resolvability(_pm(g, "q"), g["alpha"], g["dir"])
        if g.get("rate") is None
        else asym.resolvability_asymptotics(_pm(g, "q"), g["rate"], g["alpha"], g["dir"]),
    ),
    "intrinsic": (
        ("alpha", "rate"),
        lambda g: asym.intrinsic_randomness(_pm(g, "p"), g["alpha"], g["dir"])
        if g.get("rate") is None
        else asym.intrinsic_asymptotics(_pm(g, "p"), g["rate"], g["alpha"], g["dir"]),
    ),
    "entropy": (("alpha",), lambda g: renyi_entropy(_pm(g, "p"), g["alpha"])),
    "guessing": (
        ("rho", "R"),
        lambda g: guessing.guessing_exponent(_pm(g, "p"), g["rho"], g["R"])
        if g.get("key") is None
        else guessing.guessing_bounds(guessing.GuessQuery(_pm(g, "p"), _pm(g, "key"), g["rho"], g["R"] or 0.0))[0],
    ),
}

OUTPUT_NAMES = {
    "rate": "rate",
    "asym": "divergence",
    "resolvability": "resolvability",
    "intrinsic": "intrinsic",
    "entropy": "entropy",
    "guessing": "exponent",
}


def _sweep(a, units):
    swept_options, _ = SWEEPS[a.quantity]
    raw = {"alpha": a.alpha, "R": a.R, "rate": a.rate, "rho": a.rho}
    ranged = [k for k in swept_options if raw.get(k) is not None and (":" in str(raw[k]) or "," in str(raw[k]))]
    if len(ranged) != 1:
        raise ValueError(f"sweep {a.quantity} needs exactly one ranged option among " + ", ".join("--" + k for k in swept_options))
    name = ranged[0]
    grid = parse_values(raw[name])
    fixed = {"p": a.p, "q": a.q, "key": a.key, "dir": a.dir}
    for key in ("alpha", "R", "rate", "rho"):
        if key == name or raw[key] is None:
            fixed[key] = None
        else:
            fixed[key] = parse_order(raw[key]) if key == "alpha" else float(raw[key])
    tasks = [(a.quantity, fixed, name, v) for v in grid]
    if a.jobs > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as pool:
            values = list(pool.map(_sweep_point, tasks))
    else:
        values = [_sweep_point(t) for t in tasks]
    out_name = OUTPUT_NAMES[a.quantity]
    scaled = a.quantity != "rate"
    rows = [(g, units(v) if scaled else v) for g, v in zip(grid, values)]
    if a.format == "json":
        text = json.dumps(_clean([{name: g, out_name: v} for g, v in rows]))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([name, out_name])
        for g, v in rows:
            w.writerow([format_order(g) if name == "alpha" else repr(float(g)), repr_value(v)])
        text = buf.getvalue().rstrip("\n")
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text + "\n")
        return None
    return text


def repr_value(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


HANDLERS = {
    "entropy": _entropy,
    "divergence": _divergence,
    "asym": _asym,
    "rate": _rate,
    "resolvability": _resolvability,
    "intrinsic": _intrinsic,
    "spectrum": _spectrum,
    "compare-exponents": _compare,
    "construct": _construct,
    "evaluate": _evaluate,
    "guessing": _guessing,
    "oracle": _oracle,
    "sweep": _sweep,
}


def _emit(result, stream):
    if result is None:
        return
    if isinstance(result, float) or isinstance(result, int):
        print(fmt(float(result)), file=stream)
    elif isinstance(result, str):
        print(result, file=stream)
    elif isinstance(result, list) and result and isinstance(result[0], str):
        for line in result:
            print(line, file=stream)
    else:
        print(json.dumps(_clean(result)), file=stream)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    units = Units(args.units)
    try:
        result = HANDLERS[args.command](args, units)
    except (GuardExceeded, OverflowError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_GUARD
    except asym.KnifeEdgeError as exc:
        print(f"error: knife edge: {exc}", file=stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    _emit(result, stdout)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
