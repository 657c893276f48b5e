"""Command line: build, query, simulate, distinct.

Every command writes CSV whose leading ``#`` lines echo the full run
configuration. Identical arguments give byte-identical output. Exit codes
are 0 on success, 1 on bad input and 2 on an internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import TextIO

from .ads import Flavor, build_local_updates, build_pruned_dijkstra, read_snapshot, write_snapshot
from .distinct import BottomKHipCounter, HllHipCounter, hll_baseline_estimate
from .estimate import Kernel, estimate_centrality, estimate_neighborhood, hip_weights
from .graph import read_edge_list
from .rank import InvalidInput, InvalidParameter, RankScheme
from .sim import ESTIMATORS, SimConfig, simulate
from .weighted import hip_weighted_estimate, read_weights

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    k: int = 16
    flavor: str = "bottom-k"
    base: str = "full"
    epsilon: float = 0.0
    direction: str = "forward"
    undirected: bool = False
    input: str | None = None
    output: str | None = None
    weights: str | None = None
    query: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.k < 1:
            raise InvalidParameter(f"--k must be >= 1, got {self.k}")
        Flavor(self.flavor)
        parse_base(self.base)
        if self.epsilon < 0:
            raise InvalidParameter("--epsilon must be >= 0")
        if self.direction not in ("forward", "backward"):
            raise InvalidParameter(f"unknown direction {self.direction!r}")

    def header(self) -> list[str]:
        lines = []
        for key, value in asdict(self).items():
            if key == "query":
                lines += [f"# query.{q}={v}" for q, v in value.items()]
            else:
                lines.append(f"# {key}={value}")
        return lines


def parse_base(text: str) -> float | None:
    """``full`` or a rational base > 1 such as ``2`` or ``17/16``."""
    if text == "full":
        return None
    try:
        b = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InvalidParameter(f"base must be 'full' or a number, got {text!r}") from None
    if not b > 1:
        raise InvalidParameter(f"base must be > 1, got {text}")
    return b


def harmonic(n: int) -> float:
    return math.fsum(1.0 / i for i in range(1, n + 1))


def predicted_ads_size(n: int, k: int, flavor: Flavor) -> float:
    """Expected ADS size when all n nodes are reachable at distinct distances."""
    if flavor == Flavor.BOTTOM_K:
        return float(n) if n <= k else k + k * (harmonic(n) - harmonic(k))
    if flavor == Flavor.K_MINS:
        return k * harmonic(n)
    return k * harmonic(max(1, round(n / k)))


def _open_text(path: str | None) -> TextIO:
    if path in (None, "-"):
        return sys.stdin
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit(out: TextIO, cfg: RunConfig, columns: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    for line in cfg.header():
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    out.write(buf.getvalue())


def _load_weights(path: str | None):
    if path is None:
        return None
    with _open_text(path) as fh:
        return read_weights(fh)


def _read_filter(path: str) -> dict[int, float]:
    """Node filter file: ``node weight`` per line (weight >= 0)."""
    table = {}
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                node = int(parts[0])
                weight = float(parts[1]) if len(parts) > 1 else 1.0
            except (ValueError, IndexError):
                raise InvalidInput(f"{path} line {lineno}: expected 'node [weight]'") from None
            if len(parts) > 2 or not weight >= 0:
                raise InvalidInput(f"{path} line {lineno}: expected 'node [weight]' with weight >= 0")
            table[node] = weight
    return table


# -- build --------------------------------------------------------------------


def cmd_build(args, out: TextIO) -> int:
    cfg = RunConfig(
        "build", args.seed, args.k, args.flavor, args.base, args.epsilon, args.direction,
        args.undirected, args.input, args.output, args.weights, {"method": args.method},
    )
    cfg.validate()
    if not cfg.output:
        raise InvalidParameter("build needs --output")
    with _open_text(cfg.input) as fh:
        g = read_edge_list(fh, undirected=cfg.undirected, n=args.nodes)
    weights = _load_weights(cfg.weights)
    base = parse_base(cfg.base)
    if weights is not None and cfg.flavor != Flavor.BOTTOM_K.value:
        raise InvalidParameter("node weights are only supported for bottom-k")
    scheme = RankScheme(cfg.seed, base=base, weights=weights)
    use_local = args.method == "local" or cfg.epsilon > 0
    if use_local:
        ads = build_local_updates(g, cfg.k, cfg.flavor, epsilon=cfg.epsilon, direction=cfg.direction, scheme=scheme)
    else:
        ads = build_pruned_dijkstra(g, cfg.k, cfg.flavor, direction=cfg.direction, scheme=scheme)
    with open(cfg.output, "wb") as fh:
        write_snapshot(ads, fh)
    predicted = predicted_ads_size(g.n, cfg.k, Flavor(cfg.flavor))
    _emit(out, cfg, ["nodes", "edges", "mean_ads_size", "predicted_size"],
          [[g.n, g.m, _fmt(ads.mean_size()), _fmt(predicted)]])
    return EXIT_OK


# -- query --------------------------------------------------------------------


def cmd_query(args, out: TextIO) -> int:
    cfg = RunConfig(
        "query", k=0, input=args.snapshot, weights=args.weights,
        query={"nodes": args.nodes, "neighborhood": args.neighborhood, "kernel": args.kernel, "filter": args.filter},
    )
    weights = _load_weights(cfg.weights)
    try:
        with open(cfg.input, "rb") as fh:
            ads_set = read_snapshot(fh, weights)
    except OSError as exc:
        raise InvalidInput(f"cannot read {cfg.input}: {exc.strerror}") from None
    cfg.k, cfg.flavor, cfg.seed = ads_set.k, ads_set.flavor.value, ads_set.scheme.seed
    cfg.base = "full" if ads_set.scheme.base is None else repr(ads_set.scheme.base)
    cfg.direction = ads_set.direction.value
    kernels = [Kernel.parse(s) for s in args.kernel]
    table = _read_filter(args.filter) if args.filter else None
    if not args.neighborhood and not kernels:
        raise InvalidParameter("nothing to query; give --neighborhood and/or --kernel")
    if args.nodes == "all":
        nodes = list(range(len(ads_set)))
    else:
        try:
            nodes = [int(x) for x in args.nodes.split(",") if x.strip()]
        except ValueError:
            raise InvalidInput(f"--nodes must be 'all' or comma separated ids, got {args.nodes!r}") from None
    rows, failures = [], 0
    for v in sorted(set(nodes)):
        labels = [f"neighborhood:{d!r}" for d in args.neighborhood]
        labels += [f"centrality:{k.name}" + (f":{k.param!r}" if k.name in ("threshold", "exponential") else "")
                   + (":filtered" if table is not None else "") for k in kernels]
        if not 0 <= v < len(ads_set):
            failures += 1
            rows.extend([v, q, "error:unknown-node"] for q in labels)
            continue
        ads = ads_set[v]
        hw = hip_weights(ads)
        values = []
        for d in args.neighborhood:
            if weights is not None:
                values.append(hip_weighted_estimate(ads, weights, d))
            else:
                values.append(estimate_neighborhood(hw, d))
        for kern in kernels:
            if table is not None:
                values.append(estimate_centrality(hw, kern, table))
            elif weights is not None:
                values.append(estimate_centrality(hw, kern, ads.scheme.beta))
            else:
                values.append(estimate_centrality(hw, kern))
        rows.extend([v, q, _fmt(x)] for q, x in zip(labels, values))
    _emit(out, cfg, ["node", "query", "estimate"], rows)
    return EXIT_INPUT if nodes and failures == len(set(nodes)) else EXIT_OK


# -- simulate -----------------------------------------------------------------


def cmd_simulate(args, out: TextIO) -> int:
    estimators = tuple(e for e in args.estimators.split(",") if e)
    cfg = RunConfig("simulate", args.seed, args.k, base=args.base,
                    query={"n": args.n, "runs": args.runs, "estimators": ",".join(estimators),
                           "points": args.points, "hll_base_exp": args.base_exp})
    base = parse_base(cfg.base)
    extra = tuple(int(p) for p in args.points.split(",") if p) if args.points else ()
    sim = SimConfig(n=args.n, k=args.k, runs=args.runs, seed=args.seed, estimators=estimators, base=base,
                    hll_base_exp=args.base_exp, extra_points=extra, workers=args.workers)
    res = simulate(sim)
    rows = [[r.cardinality, r.estimator, _fmt(r.nrmse), _fmt(r.mre), r.runs] for r in res.rows]
    _emit(out, cfg, ["cardinality", "estimator", "nrmse", "mre", "runs"], rows)
    return EXIT_OK


# -- distinct -----------------------------------------------------------------


def token_id(token: str) -> int:
    """Stable 64-bit element id of a token."""
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


def cmd_distinct(args, out: TextIO) -> int:
    cfg = RunConfig("distinct", args.seed, args.k, input=args.input,
                    query={"algo": args.algo, "base_exp": args.base_exp, "report_every": args.report_every})
    cfg.validate()
    if args.report_every < 0:
        raise InvalidParameter("--report-every must be >= 0")
    if args.algo == "bottomk-hip":
        counter = BottomKHipCounter(args.k, args.seed)
    else:
        if args.algo == "hll" and args.base_exp != 1:
            raise InvalidParameter("the hll baseline needs --base-exp 1")
        counter = HllHipCounter(args.k, args.seed, base_exp=args.base_exp)

    def current() -> float:
        if args.algo == "hll":
            return hll_baseline_estimate(counter.registers)[1]
        return counter.estimate()

    rows = []
    seen = 0
    with _open_text(cfg.input) as fh:
        for line in fh:
            token = line.rstrip("\r\n")
            if not token:
                continue
            counter.offer(token_id(token))
            seen += 1
            if args.report_every and seen % args.report_every == 0:
                rows.append([seen, _fmt(current()), ""])
    if seen and (not rows or rows[-1][0] != seen):
        rows.append([seen, _fmt(current()), ""])
    if rows and getattr(counter, "saturated", False):
        rows[-1][2] = "saturated"
    _emit(out, cfg, ["items_seen", "distinct_estimate", "flag"], rows)
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hipads", description="All-distances sketches and HIP estimators.")
    sub = p.add_subparsers(dest="command", required=True)

    def shared(sp, k=16):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--k", type=int, default=k)
        sp.add_argument("--flavor", choices=[f.value for f in Flavor], default="bottom-k")
        sp.add_argument("--base", default="full", help="'full' or a rational base > 1, e.g. 2 or 17/16")
        sp.add_argument("--epsilon", type=float, default=0.0)
        sp.add_argument("--undirected", action="store_true")

    b = sub.add_parser("build", help="build an ADS snapshot from an edge list")
    shared(b)
    b.add_argument("--input", default="-", help="edge list 'u v [w]' ('-' for stdin)")
    b.add_argument("--output", required=True, help="snapshot path")
    b.add_argument("--direction", choices=["forward", "backward"], default="forward")
    b.add_argument("--method", choices=["pruned", "local"], default="pruned")
    b.add_argument("--nodes", type=int, default=None, help="node count (default: max id + 1)")
    b.add_argument("--weights", default=None, help="node weights file 'node beta'")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer neighborhood/centrality queries from a snapshot")
    q.add_argument("--snapshot", required=True)
    q.add_argument("--nodes", default="all")
    q.add_argument("--neighborhood", type=float, action="append", default=[], metavar="D")
    q.add_argument("--kernel", action="append", default=[],
                   help="threshold:D, exp:RATE, harmonic or reachability")
    q.add_argument("--filter", default=None, help="node filter file 'node [weight]'")
    q.add_argument("--weights", default=None, help="node weights the snapshot was built with")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("simulate", help="estimator accuracy on distinct-element streams")
    shared(s, k=10)
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--estimators", default=",".join(ESTIMATORS))
    s.add_argument("--points", default="", help="extra cardinalities, comma separated")
    s.add_argument("--base-exp", type=int, default=1, help="HLL registers use base 2**(1/i)")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("distinct", help="approximate distinct count of a token stream")
    shared(d, k=64)
    d.add_argument("--input", default="-", help="newline separated tokens ('-' for stdin)")
    d.add_argument("--algo", choices=["hip", "hll", "bottomk-hip"], default="hip")
    d.add_argument("--base-exp", type=int, default=1)
    d.add_argument("--report-every", type=int, default=0, metavar="N")
    d.set_defaults(func=cmd_distinct)
    return p


def main(argv: list[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args, out)
    except (InvalidInput, InvalidParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
