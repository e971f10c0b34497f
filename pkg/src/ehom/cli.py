"""Command-line front end.

Exit codes: 0 success, 2 usage/parse/domain, 3 capacity, 4 numeric validation.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import combinatorics, detector, engine, splitter, states
from .errors import CapacityError, DomainError, NumericValidationError
from .splitter import CONVENTIONS, DEFAULT_CONVENTION, DEFAULT_MAX_COUNT

OUTDIR_ENV = "EHOM_OUTDIR"
FORMATS = ("json", "csv", "text")
FIGURE1_EPSILON = 1e-10

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "convention": DEFAULT_CONVENTION,
    "theta": math.pi / 2,
    "epsilon": states.DEFAULT_EPSILON,
    "format": "json",
    "out": None,
    "max_count": DEFAULT_MAX_COUNT,
    "in1": None,
    "in2": None,
    "eta": None,
}


@dataclass
class RunConfig:
    convention: str = DEFAULT_CONVENTION
    theta: float = math.pi / 2
    epsilon: float = states.DEFAULT_EPSILON
    format: str = "json"
    out: str | None = None
    max_count: int = DEFAULT_MAX_COUNT
    in1: str | None = None
    in2: str | None = None
    eta: list[float] = field(default_factory=list)

    def validate(self) -> None:
        if self.convention not in CONVENTIONS:
            raise DomainError(f"unknown convention {self.convention!r}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.format not in FORMATS:
            raise DomainError(f"unknown format {self.format!r}")

    def matrix(self) -> splitter.ScatteringMatrix:
        return splitter.from_convention(self.convention, self.theta)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def read_config_file(path: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    casts = {"theta": float, "epsilon": float, "max_count": int, "eta": _float_list}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = casts.get(key, str)(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise DomainError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def resolve_config(args: argparse.Namespace, overrides: dict | None = None) -> RunConfig:
    """Flags beat the config file, which beats built-in defaults."""
    merged = dict(DEFAULTS)
    merged.update(overrides or {})
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    cfg = RunConfig(
        convention=merged["convention"],
        theta=float(merged["theta"]),
        epsilon=float(merged["epsilon"]),
        format=merged["format"],
        out=merged["out"],
        max_count=int(merged["max_count"]),
        in1=merged["in1"],
        in2=merged["in2"],
        eta=list(merged["eta"] or []),
    )
    cfg.validate()
    return cfg


def _resolve_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if not p.is_absolute() and base:
        p = Path(base) / p
    return p


def _write_sidecar(path: Path, argv: list[str] | None) -> None:
    meta = {
        "tool": "ehom",
        "version": __version__,
        "argv": argv,
        "created": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def emit(text: str, out: str | None, argv: list[str] | None, stdout) -> Path | None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None or out == "-":
        stdout.write(text)
        return None
    path = _resolve_path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    _write_sidecar(path, argv)
    return path


def build_input(cfg: RunConfig) -> states.BipartiteInput:
    if not cfg.in1:
        raise DomainError("--in1 is required")
    first = states.parse_state(cfg.in1, cfg.epsilon, cfg.max_count)
    if isinstance(first, states.PureBipartite):
        if cfg.in2:
            raise DomainError("pure-grid inputs describe both modes; drop --in2")
        return first
    second = states.parse_state(cfg.in2 or "fock:0", cfg.epsilon, cfg.max_count)
    if isinstance(second, states.PureBipartite):
        raise DomainError("pure-grid inputs must be given through --in1")
    return states.product(first, second)


def compute_distribution(cfg: RunConfig) -> engine.JointDistribution:
    return engine.output_distribution(cfg.matrix(), build_input(cfg), cfg.max_count)


def render_distribution(dist: engine.JointDistribution, fmt: str) -> str:
    if fmt == "json":
        return dist.to_json()
    if fmt == "csv":
        return dist.to_csv()
    metric = engine.cnl_metric(dist)
    lines = [
        f"input            {dist.input_label}",
        f"convention       {dist.convention}",
        f"cutoff           {dist.cutoff}",
        f"truncation_mass  {dist.truncation_mass:.3e}",
        f"cnl_ratio        {metric.ratio:.3e}" + ("  (central nodal line)" if metric.is_nodal else ""),
        f"{'ma':>5} {'mb':>5} {'probability':>24}",
    ]
    M = dist.cutoff
    for ma in range(M + 1):
        for mb in range(M + 1 - ma):
            lines.append(f"{ma:>5} {mb:>5} {dist.grid[ma, mb]:>24.17g}")
    return "\n".join(lines)


def cmd_dist(args, argv, stdout) -> int:
    cfg = resolve_config(args)
    dist = compute_distribution(cfg)
    emit(render_distribution(dist, cfg.format), cfg.out, argv, stdout)
    return EXIT_OK


def cmd_coincidence(args, argv, stdout) -> int:
    cfg = resolve_config(args)
    dist = compute_distribution(cfg)
    profile = engine.coincidence_profile(dist)
    metric = engine.cnl_metric(dist)
    if cfg.format == "json":
        text = json.dumps(
            {
                "input": dist.input_label,
                "convention": dist.convention,
                "cutoff": dist.cutoff,
                "profile": profile.tolist(),
                "max_diagonal": metric.max_diagonal,
                "max_cell": metric.max_cell,
                "ratio": metric.ratio,
                "central_nodal_line": metric.is_nodal,
            }
        )
    elif cfg.format == "csv":
        text = "m,probability\n" + "".join(f"{m},{p:.17g}\n" for m, p in enumerate(profile))
    else:
        text = "\n".join(
            [f"{'m':>5} {'P(m,m)':>24}"]
            + [f"{m:>5} {p:>24.17g}" for m, p in enumerate(profile)]
            + [
                f"max diagonal {metric.max_diagonal:.3e}  max cell {metric.max_cell:.3e}  "
                f"ratio {metric.ratio:.3e}  CNL: {'yes' if metric.is_nodal else 'no'}"
            ]
        )
    emit(text, cfg.out, argv, stdout)
    return EXIT_OK


def cmd_diagrams(args, argv, stdout) -> int:
    cfg = resolve_config(args, {"format": "text"})
    t, r = splitter.tr_amplitudes(cfg.theta)
    cert = combinatorics.cancellation_certificate(args.n, args.m, t, r)
    if cfg.format == "json":
        text = cert.to_json()
    elif cfg.format == "csv":
        buf = io.StringIO()
        buf.write("k,mirror,weight,re_k,im_k,re_mirror,im_mirror,residual\n")
        for p in cert.pairs:
            a, b = p.term.value, p.partner.value
            buf.write(
                f"{p.k},{p.mirror},{p.term.weight},{a.real:.17g},{a.imag:.17g},"
                f"{b.real:.17g},{b.imag:.17g},{p.residual:.17g}\n"
            )
        if cert.central_term is not None:
            c = cert.central_term
            buf.write(f"{c.k},,{c.weight},{c.value.real:.17g},{c.value.imag:.17g},,,\n")
        text = buf.getvalue()
    else:
        text = cert.to_text()
    emit(text, cfg.out, argv, stdout)
    return EXIT_OK


def sum_table_rows(max_n: int, max_m: int) -> list[tuple[int, int, int]]:
    rows = []
    for n in range(max_n + 1):
        for m in range(n, max_m + 1):
            if (n - m) % 2 == 0:
                rows.append((n, m, combinatorics.coincidence_sum(n, m)))
    return rows


def cmd_sum_table(args, argv, stdout) -> int:
    cfg = resolve_config(args, {"format": "csv"})
    if args.max_n < 0 or args.max_m < 0:
        raise DomainError("table bounds must be nonnegative")
    rows = sum_table_rows(args.max_n, args.max_m)
    if cfg.format == "json":
        # exact integers stay JSON integers of arbitrary size
        text = json.dumps([{"n": n, "m": m, "S": s} for n, m, s in rows])
    elif cfg.format == "csv":
        text = "n,m,S\n" + "".join(f"{n},{m},{s}\n" for n, m, s in rows)
    else:
        width = max(len(str(s)) for _, _, s in rows) if rows else 1
        text = "\n".join([f"{'n':>4} {'m':>4} {'S(n,m)':>{width}}"] + [f"{n:>4} {m:>4} {s:>{width}}" for n, m, s in rows])
    emit(text, cfg.out, argv, stdout)
    return EXIT_OK


def figure1_inputs(nbar: float, n: int, kind: str, epsilon: float, max_count: int) -> states.ProductInput:
    if kind == "coherent":
        partner = states.make_coherent(math.sqrt(nbar), epsilon, max_count)
    elif kind == "thermal":
        partner = states.make_thermal(nbar, epsilon, max_count)
    else:
        raise DomainError(f"unknown partner kind {kind!r}")
    return states.product(states.make_fock(n, max_count), partner)


def cmd_figure1(args, argv, stdout) -> int:
    cfg = resolve_config(args, {"epsilon": FIGURE1_EPSILON})
    if cfg.format == "text":
        raise DomainError("figure1 writes grid files; choose --format json or csv")
    outdir = _resolve_path(cfg.out) if cfg.out else Path(os.environ.get(OUTDIR_ENV, "."))
    outdir.mkdir(parents=True, exist_ok=True)
    matrix = cfg.matrix()
    for n in args.n:
        inp = figure1_inputs(args.nbar, n, args.kind, cfg.epsilon, cfg.max_count)
        dist = engine.output_distribution(matrix, inp, cfg.max_count)
        metric = engine.cnl_metric(dist)
        path = outdir / f"figure1_{args.kind}_n{n}.{cfg.format}"
        path.write_text(render_distribution(dist, cfg.format) + ("" if cfg.format == "csv" else "\n"))
        _write_sidecar(path, argv)
        verdict = "CNL" if metric.is_nodal else "no CNL"
        stdout.write(f"n={n} kind={args.kind} nbar={args.nbar:g} cutoff={dist.cutoff} ratio={metric.ratio:.3e} {verdict} -> {path}\n")
    return EXIT_OK


def cmd_efficiency(args, argv, stdout) -> int:
    cfg = resolve_config(args)
    if not cfg.eta:
        raise DomainError("--eta needs at least one value")
    dist = compute_distribution(cfg)
    rows = detector.coincidence_vs_eta(dist, cfg.eta, args.counts)
    if cfg.format == "json":
        text = detector.rows_to_json(rows)
    elif cfg.format == "csv":
        text = detector.rows_to_csv(rows)
    else:
        text = "\n".join([f"{'eta':>8} {'n':>3} {'P_eta(n,n)':>24}"] + [f"{r.eta:>8.4g} {r.n:>3} {r.prob:>24.17g}" for r in rows])
    emit(text, cfg.out, argv, stdout)
    return EXIT_OK


def convention_rows(n: int, m: int, p: int, q: int, theta: float, max_count: int = DEFAULT_MAX_COUNT):
    rows = []
    for conv in CONVENTIONS:
        amp = splitter.transition_amplitude(splitter.from_convention(conv, theta), n, m, p, q, max_count)
        rows.append((conv, amp))
    return rows


def cmd_conventions(args, argv, stdout) -> int:
    cfg = resolve_config(args, {"format": "text"})
    rows = convention_rows(args.n, args.m, args.p, args.q, cfg.theta, cfg.max_count)
    if cfg.format == "json":
        text = json.dumps([{"convention": c, "re": a.real, "im": a.imag, "abs": abs(a)} for c, a in rows])
    elif cfg.format == "csv":
        text = "convention,re,im,abs\n" + "".join(f"{c},{a.real:.17g},{a.imag:.17g},{abs(a):.17g}\n" for c, a in rows)
    else:
        text = "\n".join(
            [f"A({args.n},{args.m} -> {args.p},{args.q})  theta={cfg.theta:.17g}"]
            + [f"{c:>18}  {a.real:+.17e} {a.imag:+.17e}i  |A| = {abs(a):.17g}" for c, a in rows]
        )
    emit(text, cfg.out, argv, stdout)
    return EXIT_OK


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--convention", choices=CONVENTIONS, default=None)
    p.add_argument("--theta", type=float, default=None, help="splitter angle in radians, [0, pi]; pi/2 is 50:50")
    p.add_argument("--epsilon", type=float, default=None, help="tail-mass bound for automatic cutoffs")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--out", default=None, help=f"output path (relative paths resolve under ${OUTDIR_ENV})")
    p.add_argument("--max-count", dest="max_count", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value file; flags override it")


def _inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in1", default=None, help="mode-1 state: fock:N, coherent:BETA, thermal:NBAR, pure-grid:@FILE")
    p.add_argument("--in2", default=None, help="mode-2 state (default fock:0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehom", description="Photon-number statistics of a lossless beam splitter.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="joint output distribution P(ma, mb)")
    _inputs(p)
    _shared(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("coincidence", help="diagonal P(m, m) and central-nodal-line metric")
    _inputs(p)
    _shared(p)
    p.set_defaults(func=cmd_coincidence)

    p = sub.add_parser("diagrams", help="mirror-pair cancellation certificate for |n, m>")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    _shared(p)
    p.set_defaults(func=cmd_diagrams)

    p = sub.add_parser("sum-table", help="exact coincidence sums S(n, m)")
    p.add_argument("--max-n", dest="max_n", type=int, default=10)
    p.add_argument("--max-m", dest="max_m", type=int, default=10)
    _shared(p)
    p.set_defaults(func=cmd_sum_table)

    p = sub.add_parser("figure1", help="grids for |n> with a coherent or thermal partner")
    p.add_argument("--nbar", type=float, default=9.0)
    p.add_argument("--n", type=_int_list, default=[0, 1, 3], help="comma-separated Fock numbers")
    p.add_argument("--kind", choices=("coherent", "thermal"), default="coherent")
    _shared(p)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("efficiency", help="coincidence probability versus detector efficiency")
    _inputs(p)
    p.add_argument("--eta", type=_float_list, default=None, help="comma-separated efficiencies")
    p.add_argument("--counts", type=_int_list, default=[1, 2], help="coincidence numbers n")
    _shared(p)
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("conventions", help="compare A(n,m -> p,q) across matrix conventions")
    for name in ("n", "m", "p", "q"):
        p.add_argument(name, type=int)
    _shared(p)
    p.set_defaults(func=cmd_conventions)
    return parser


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv if argv is not None else sys.argv[1:], stdout)
    except CapacityError as exc:
        print(f"ehom: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericValidationError as exc:
        print(f"ehom: numeric validation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"ehom: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
