"""Command-line interface.

Subcommands: presets, validate, theory, simulate, urn, and verify.  Every
numeric option can also come from a JSON config file (--config); explicit
flags win over the file.  All randomness flows from one --seed.  Exit
codes: 0 success, 1 invalid input or configuration, 2 a verification
check failed, 3 I/O or capacity trouble.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import lattice, mc, theory, urn, walk
from .errors import CapacityError, DomainError, ErwError, ParseError
from .rng import replicate_seed
from .theory import Regime
from .walk import FirstStepMode

KERNEL_SAMPLE_PAIRS = ((0.5, 0.5), (0.5, 1.0), (1.0, 1.0))


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass(frozen=True)
class RunConfig:
    """Merged flag/config values for one invocation."""

    preset: str | None = None
    file: str | None = None
    walk_type: str | None = None
    p: float | None = None
    n: int | None = None
    N: int | None = None
    seed: int = 0
    replicates: int = 1
    color: int = 0
    m: int | None = None
    depth: int = 3
    banks: int = 2
    pairs: str = "0.5:1,1:1"
    mode: str = "deterministic"
    tol_cov: float = 0.10
    tol_super: float = 0.10
    regime_eps: float = 0.0
    threads: int | None = None
    out: str | None = None


def _merge_config(ns: argparse.Namespace) -> RunConfig:
    """Fill a RunConfig from flags, then the config file, then defaults."""
    file_values = {}
    config_path = getattr(ns, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as handle:
            file_values = json.load(handle)
        if not isinstance(file_values, dict):
            raise ParseError(f"config file {config_path!r} must hold a JSON object")
        unknown = set(file_values) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ParseError(
                f"config file {config_path!r} has unknown keys: {sorted(unknown)}"
            )
    values = {}
    for name, field_info in RunConfig.__dataclass_fields__.items():
        flag = getattr(ns, name, None)
        if flag is not None:
            values[name] = flag
        elif name in file_values:
            values[name] = file_values[name]
        else:
            values[name] = field_info.default
    return RunConfig(**values)


def _load_spec(cfg: RunConfig) -> lattice.LatticeSpec:
    if (cfg.preset is None) == (cfg.file is None):
        raise ParseError("exactly one of --preset and --file must be given")
    if cfg.preset is not None:
        spec = lattice.preset(cfg.preset)
    else:
        with open(cfg.file, "r", encoding="utf-8") as handle:
            spec = lattice.parse_spec(handle.read())
    if cfg.walk_type is not None and cfg.walk_type != spec.walk_type.value:
        document = lattice.to_document(spec)
        document["walk_type"] = cfg.walk_type
        spec = lattice.parse_spec(document)
    return spec


def _require_p(cfg: RunConfig, allow_one: bool) -> float:
    if cfg.p is None:
        raise ParseError("the memory parameter -p is required")
    p = float(cfg.p)
    top = 1.0 if allow_one else 1.0 - 1e-15
    if not 0.0 < p <= 1.0 or (not allow_one and p == 1.0):
        bound = "(0, 1]" if allow_one else "(0, 1)"
        raise ParseError(f"p must lie in {bound}, got {p!r}")
    return p


def _mode(cfg: RunConfig) -> FirstStepMode:
    try:
        return FirstStepMode(cfg.mode)
    except ValueError:
        raise ParseError(
            f"mode must be 'deterministic' or 'uniform', got {cfg.mode!r}"
        ) from None


def _parse_pairs(text: str):
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ParseError(f"pairs must look like 's:t', got {chunk!r}")
        try:
            s, t = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"pairs must be numeric, got {chunk!r}") from None
        pairs.append((s, t))
    if not pairs:
        raise ParseError(f"no (s, t) pairs found in {text!r}")
    return tuple(pairs)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _preset_entry(spec: lattice.LatticeSpec) -> dict:
    return {
        "name": spec.name,
        "walk_type": spec.walk_type.value,
        "dimension": spec.dimension,
        "m": spec.m,
        "m_prime": spec.m_prime,
        "i0": spec.i0,
        "j0": spec.j0,
        "pc_u": theory.critical_p(spec.m),
        "pc_w": theory.critical_p(spec.m_prime),
        "u": spec.u.vectors.tolist(),
        "w": spec.w.vectors.tolist(),
        "mean_u": lattice.mean_step(spec.u).tolist(),
        "mean_w": lattice.mean_step(spec.w).tolist(),
        "sigma_u": lattice.step_covariance(spec.u).tolist(),
        "sigma_w": lattice.step_covariance(spec.w).tolist(),
        "mean_drift": theory.lln_drift(spec).tolist(),
    }


def _cmd_presets(ns: argparse.Namespace) -> int:
    entries = [_preset_entry(lattice.preset(name)) for name in lattice.preset_names()]
    if ns.json:
        sys.stdout.write(mc.report_json({"presets": entries}))
        return 0
    mp = "m'"
    header = f"{'name':<12} {'type':<6} {'d':>2} {'m':>2} {mp:>3} {'pc_u':>8} {'pc_w':>8}"
    print(header)
    for e in entries:
        print(
            f"{e['name']:<12} {e['walk_type']:<6} {e['dimension']:>2} "
            f"{e['m']:>2} {e['m_prime']:>3} {e['pc_u']:>8.6g} {e['pc_w']:>8.6g}"
        )
    return 0


def _cmd_validate(ns: argparse.Namespace) -> int:
    cfg = _merge_config(ns)
    spec = _load_spec(cfg)
    report = lattice.validate(spec, cfg.depth)
    payload = {
        "name": spec.name,
        "walk_type": spec.walk_type.value,
        "ok": report.ok,
        "rank_ok": report.rank_ok,
        "bipartite_ok": report.bipartite_ok,
        "probe_depth": report.probe_depth,
        "singular_values": list(report.singular_values),
        "messages": list(report.messages),
    }
    _emit(mc.report_json(payload), cfg.out)
    return 0 if report.ok else 2


def _cmd_theory(ns: argparse.Namespace) -> int:
    cfg = _merge_config(ns)
    spec = _load_spec(cfg)
    p = _require_p(cfg, allow_one=False)
    report = theory.classify_regime(spec, p, eps=cfg.regime_eps)
    diffusive = report.regime is Regime.DIFFUSIVE
    payload = _preset_entry(spec)
    payload.update(
        {
            "p": p,
            "regime": report.regime.value,
            "dominant_side": report.dominant_side.value,
            "scaling": report.scaling,
            "a": report.exponent_u,
            "a_prime": report.exponent_w,
            "C_a": theory.amplification(spec.m, p) if report.exponent_u < 0.5 else None,
            "C_a_prime": (
                theory.amplification(spec.m_prime, p)
                if report.exponent_w < 0.5
                else None
            ),
            "kernel_samples": [],
        }
    )
    if diffusive:
        payload["kernel_samples"] = [
            {"s": s, "t": t, "matrix": theory.diffusive_kernel(spec, p, s, t).tolist()}
            for s, t in KERNEL_SAMPLE_PAIRS
        ]
    elif report.regime in (Regime.CRITICAL, Regime.CRITICAL_MIXED):
        payload["kernel_samples"] = [
            {
                "s": s,
                "t": t,
                "matrix": theory.critical_kernel(spec, p, s, eps=cfg.regime_eps).tolist(),
            }
            for s, t in KERNEL_SAMPLE_PAIRS
        ]
    elif report.regime is Regime.SUPERDIFFUSIVE:
        try:
            mean, second = theory.super_second_moment(spec, p)
            payload["super_moments"] = {
                "mean": mean.tolist(),
                "second_moment": second.tolist(),
            }
        except DomainError as err:
            payload["super_moments"] = {"unavailable": str(err)}
    _emit(mc.report_json(payload), cfg.out)
    return 0


def _cmd_simulate(ns: argparse.Namespace) -> int:
    cfg = _merge_config(ns)
    spec = _load_spec(cfg)
    p = _require_p(cfg, allow_one=True)
    if cfg.n is None or cfg.n < 0:
        raise ParseError(f"-n must be a nonnegative step count, got {cfg.n!r}")
    if cfg.replicates < 1:
        raise ParseError(f"--replicates must be positive, got {cfg.replicates!r}")
    mode = _mode(cfg)
    lines = ["run_id,step," + ",".join(f"x{i}" for i in range(spec.dimension))]
    for run in range(cfg.replicates):
        trajectory = walk.simulate(spec, p, cfg.n, replicate_seed(cfg.seed, run), mode)
        for step_index, row in enumerate(trajectory):
            lines.append(
                f"{run},{step_index}," + ",".join(_fmt(x) for x in row)
            )
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def _cmd_urn(ns: argparse.Namespace) -> int:
    cfg = _merge_config(ns)
    if cfg.m is None:
        raise ParseError("the color count -m is required")
    p = _require_p(cfg, allow_one=True)
    if cfg.n is None or cfg.n < 1:
        raise ParseError(f"-n must be a positive epoch count, got {cfg.n!r}")
    mode = _mode(cfg)
    path = urn.urn_path(cfg.m, p, cfg.n, cfg.seed, cfg.color, mode)
    lines = ["epoch," + ",".join(f"c{i}" for i in range(cfg.m))]
    for epoch, counts in enumerate(path, start=1):
        lines.append(f"{epoch}," + ",".join(str(int(c)) for c in counts))
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def _campaign_params(cfg: RunConfig, what: str, p: float, pairs) -> dict:
    return {
        "command": f"verify {what}",
        "preset": cfg.preset,
        "file": cfg.file,
        "p": p,
        "n": cfg.n,
        "N": cfg.N,
        "seed": cfg.seed,
        "depth": cfg.depth,
        "banks": cfg.banks,
        "mode": cfg.mode,
        "pairs": [list(pair) for pair in pairs],
        "tol_cov": cfg.tol_cov,
        "tol_super": cfg.tol_super,
        "regime_eps": cfg.regime_eps,
    }


def _cmd_verify(ns: argparse.Namespace) -> int:
    cfg = _merge_config(ns)
    what = ns.what
    spec = _load_spec(cfg)
    p = _require_p(cfg, allow_one=True)
    pairs = _parse_pairs(cfg.pairs)
    if what == "super" and ns.mode is None:
        mode = FirstStepMode.UNIFORM
    else:
        mode = _mode(cfg)
    n = cfg.n if cfg.n is not None else 2000
    N = cfg.N if cfg.N is not None else 2000
    cfg = RunConfig(**{**cfg.__dict__, "n": n, "N": N, "mode": mode.value})
    skipped = []
    if what == "lln":
        reports = [
            mc.check_lln(spec, p, n, N, cfg.seed, mode, cfg.banks, cfg.threads)
        ]
    elif what == "equiv":
        reports = [mc.check_equivalence(spec, p, cfg.depth, mode)]
    elif what in ("fclt", "critical"):
        regime = theory.classify_regime(spec, p, eps=cfg.regime_eps).regime
        wanted = (
            (Regime.DIFFUSIVE,)
            if what == "fclt"
            else (Regime.CRITICAL, Regime.CRITICAL_MIXED)
        )
        if regime not in wanted:
            raise DomainError(
                f"verify {what} needs regime in "
                f"{[r.value for r in wanted]}, but (spec, p) is {regime.value}"
            )
        reports = [
            mc.check_fclt_cov(
                spec, p, n, N, pairs, cfg.seed, cfg.tol_cov, mode, cfg.banks,
                cfg.threads, cfg.regime_eps,
            )
        ]
    elif what == "super":
        reports = [
            mc.check_super_moments(
                spec, p, n, N, cfg.seed, cfg.tol_super, mode, cfg.banks, cfg.threads
            )
        ]
    else:
        reports, skipped = mc.verify_all(
            spec, p, n, N, cfg.seed, depth=cfg.depth, pairs=pairs,
            tol_cov=cfg.tol_cov, tol_super=cfg.tol_super, banks=cfg.banks,
            mode=mode, threads=cfg.threads, regime_eps=cfg.regime_eps,
        )
    for report in reports:
        print(report.summary())
    for entry in skipped:
        print(f"SKIP {entry['check']} ({entry['reason']})")
    payload = mc.campaign_report(reports, skipped, _campaign_params(cfg, what, p, pairs))
    if cfg.out is not None:
        _emit(mc.report_json(payload), cfg.out)
    else:
        sys.stdout.write(mc.report_json(payload))
    return 0 if all(r.passed for r in reports) else 2


def _add_source_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", help="preset name (see `erw presets`)")
    sub.add_argument("--file", help="path to a JSON lattice document")
    sub.add_argument(
        "--walk-type", dest="walk_type", choices=("type1", "type2"),
        help="override the document's walk type (type1 requires U = W)",
    )
    sub.add_argument("--config", help="JSON file of option defaults; flags win")


def _add_common_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("-p", type=float, help="memory parameter, in (0, 1]")
    sub.add_argument("--seed", type=int, help="master seed, any 64-bit int (default 0)")
    sub.add_argument(
        "--mode", choices=("deterministic", "uniform"),
        help="first-step rule (default deterministic; verify super: uniform)",
    )
    sub.add_argument("-o", "--out", dest="out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="erw", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", metavar="command")

    sub = commands.add_parser("presets", parents=(), help="list built-in structures")
    sub.add_argument("--json", action="store_true", help="machine-readable output")
    sub.set_defaults(func=_cmd_presets)

    sub = commands.add_parser("validate", help="span and bipartite probing")
    _add_source_flags(sub)
    sub.add_argument(
        "--depth", type=int, help="bipartite probe depth, >= 1 (default 3)"
    )
    sub.add_argument("-o", "--out", dest="out", help="output path (default stdout)")
    sub.set_defaults(func=_cmd_validate)

    sub = commands.add_parser("theory", help="closed-form quantities as JSON")
    _add_source_flags(sub)
    sub.add_argument("-p", type=float, help="memory parameter, in (0, 1)")
    sub.add_argument(
        "--regime-eps", dest="regime_eps", type=float,
        help="half-width of the critical band around p_c (default 0)",
    )
    sub.add_argument("-o", "--out", dest="out", help="output path (default stdout)")
    sub.set_defaults(func=_cmd_theory)

    sub = commands.add_parser("simulate", help="write trajectories as CSV")
    _add_source_flags(sub)
    _add_common_run_flags(sub)
    sub.add_argument("-n", type=int, help="steps per trajectory, >= 0")
    sub.add_argument(
        "--replicates", type=int, help="independent trajectories, >= 1 (default 1)"
    )
    sub.set_defaults(func=_cmd_simulate)

    sub = commands.add_parser("urn", help="write one urn path as CSV")
    sub.add_argument("--config", help="JSON file of option defaults; flags win")
    sub.add_argument("-m", type=int, help="number of colors, >= 2")
    sub.add_argument("-p", type=float, help="reinforcement probability, in (0, 1]")
    sub.add_argument("-n", type=int, help="epochs, >= 1")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")
    sub.add_argument("--color", type=int, help="initial color, 0-based (default 0)")
    sub.add_argument(
        "--mode", choices=("deterministic", "uniform"),
        help="initial ball placement (default deterministic)",
    )
    sub.add_argument("-o", "--out", dest="out", help="output path (default stdout)")
    sub.set_defaults(func=_cmd_urn)

    sub = commands.add_parser("verify", help="statistical and exact checks")
    sub.add_argument(
        "what", choices=("lln", "fclt", "critical", "super", "equiv", "all"),
        help="which check to run",
    )
    _add_source_flags(sub)
    _add_common_run_flags(sub)
    sub.add_argument("-n", type=int, help="horizon in double steps (default 2000)")
    sub.add_argument(
        "-N", "--replicates", dest="N", type=int,
        help="total replicates, split over banks (default 2000)",
    )
    sub.add_argument("--depth", type=int, help="equivalence depth, 1..4 (default 3)")
    sub.add_argument(
        "--banks", type=int, help="disjoint seed banks, >= 1 (default 2)"
    )
    sub.add_argument(
        "--pairs",
        help="comma list of s:t grid pairs in (0, 1]; exponents in critical "
        "mode, which has no linear-time grid (default '0.5:1,1:1')",
    )
    sub.add_argument(
        "--tol-cov", dest="tol_cov", type=float,
        help="relative Frobenius tolerance for covariance checks (default 0.1)",
    )
    sub.add_argument(
        "--tol-super", dest="tol_super", type=float,
        help="relative Frobenius tolerance for the super check (default 0.1)",
    )
    sub.add_argument(
        "--regime-eps", dest="regime_eps", type=float,
        help="half-width of the critical band around p_c (default 0)",
    )
    sub.add_argument(
        "--threads", type=int,
        help="compiled-loop threads, >= 1; output is identical for every value",
    )
    sub.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)
    if not hasattr(ns, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return ns.func(ns)
    except (CapacityError, OSError) as err:
        print(f"erw: error: {err}", file=sys.stderr)
        return 3
    except (ErwError, ValueError) as err:
        print(f"erw: error: {err}", file=sys.stderr)
        return 1
