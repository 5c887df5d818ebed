"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 user/config error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, measures, protocol, states, verify
from .measurement import DEFAULT_ALPHA, DEFAULT_BETA, weakness_profile

log = logging.getLogger("weakdistill")

EXIT_OK, EXIT_VERIFY, EXIT_USER, EXIT_INTERNAL = 0, 1, 2, 3
FIG1_BETAS = (0.1, 0.2, 0.3, 0.4)
CONFIG_KEYS = {"state", "a", "b", "alpha", "beta", "x", "grid", "outcomes", "out", "points", "workers",
               "weighting", "tripartite_mode"}


class UserError(Exception):
    pass


def read_config(path: str) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UserError(f"cannot read config {path}: {exc}") from None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UserError(f"{path}:{n}: expected one of {sorted(CONFIG_KEYS)} as 'key = value'")
        out[key] = value.strip()
    return out


def _float(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise UserError(f"--{name} expects a number, got {value!r}") from None
    if math.isnan(v):
        raise UserError(f"--{name} is NaN")
    return v


def _float_list(name: str, value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [_float(name, v) for v in value]
    return [_float(name, v) for v in str(value).split(",") if v.strip()]


def resolve(args: argparse.Namespace) -> dict:
    """Merge config-file values under command-line flags; flags win."""
    opts = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    if getattr(args, "config", None):
        for key, value in read_config(args.config).items():
            if opts.get(key) is None:
                opts[key] = value
    return opts


def state_spec(opts: dict) -> states.StateSpec:
    name = opts.get("state")
    if name is None:
        raise UserError("no state given; use chi1, chi2 --a A or chi3 --b B")
    pname = states.PARAM_NAME.get(name)
    param = opts.get(pname) if pname else None
    try:
        return states.StateSpec(name, None if param is None else _float(pname, param))
    except states.StateError as exc:
        raise UserError(str(exc)) from None


def scenario_config(opts: dict, tripartite: bool) -> protocol.ScenarioConfig:
    spec = state_spec(opts)
    alpha = _float("alpha", opts["alpha"]) if opts.get("alpha") is not None else DEFAULT_ALPHA
    beta = _float("beta", opts["beta"]) if opts.get("beta") is not None else DEFAULT_BETA
    if opts.get("x") is not None:
        grid = tuple(_float_list("x", opts["x"]))
    else:
        points = int(opts["grid"]) if opts.get("grid") is not None else protocol.DEFAULT_X_POINTS
        try:
            grid = protocol.uniform_grid(points)
        except ValueError as exc:
            raise UserError(f"--grid: {exc}") from None
    try:
        return protocol.ScenarioConfig(
            spec,
            alpha=alpha,
            beta=beta,
            x_grid=grid,
            outcomes=opts.get("outcomes") or "all",
            weighting=opts.get("weighting") or "joint",
            tripartite_mode=opts.get("tripartite_mode") or "square_of_average",
            tripartite=tripartite,
        )
    except ValueError as exc:
        raise UserError(str(exc)) from None


def manifest(command: str, extra: dict, out: str | None) -> dict:
    m = {"command": command, "version": __version__}
    m.update(extra)
    m["output"] = out or "<stdout>"
    return m


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def cmd_state(opts: dict) -> int:
    spec = state_spec(opts)
    rho = spec.build()
    ev = rho.eigenvalues()
    neg = measures.negativity(rho, measures.CUT_AB)
    lines = [
        f"state: {spec.label}",
        f"classification: {spec.classification}" + (" (boundary value)" if spec.boundary else ""),
        f"trace: {rho.trace():.15g}",
        f"rank: {rho.rank()}",
        f"eigenvalue_min: {float(ev[0])!r}",
        f"eigenvalue_max: {float(ev[-1])!r}",
        f"negativity: {float(neg)!r}",
        f"ppt: {measures.is_ppt(rho, measures.CUT_AB)}",
        f"realignment_witness: {float(measures.realignment_witness(rho))!r}",
    ]
    emit("\n".join(lines) + "\n", opts.get("out"))
    return EXIT_OK


def cmd_weakness(opts: dict) -> int:
    betas = _float_list("beta", opts["beta"]) if opts.get("beta") is not None else list(FIG1_BETAS)
    points = int(opts["points"]) if opts.get("points") is not None else protocol.DEFAULT_X_POINTS
    try:
        grid = protocol.uniform_grid(points)
        profiles = [weakness_profile(b, grid) for b in betas]
    except ValueError as exc:
        raise UserError(str(exc)) from None
    cols = ["x"] + [f"zeta_beta_{b!r}" for b in betas]
    rows = [[x] + [p[k][1] for p in profiles] for k, x in enumerate(grid)]
    m = manifest("weakness", {"betas": ",".join(repr(b) for b in betas), "points": points}, opts.get("out"))
    emit(protocol.write_csv(cols, rows, manifest=m), opts.get("out"))
    return EXIT_OK


def _sweep_command(command: str, opts: dict, kind: str) -> int:
    cfg = scenario_config(opts, tripartite=(kind == "cost"))
    workers = int(opts.get("workers") or 1)
    result = protocol.sweep(cfg, workers=workers)
    for row in result.rows:
        total = sum(row.probabilities.values())
        if abs(total - 1.0) > measures.NORMALIZATION_TOL:
            raise protocol.InvariantViolation(f"probabilities sum to {total!r} at x={row.x}")
    m = manifest(command, cfg.manifest(), opts.get("out"))
    emit(result.to_csv(kind=kind, manifest=m), opts.get("out"))
    return EXIT_OK


def cmd_sweep(opts: dict) -> int:
    return _sweep_command("sweep", opts, "sweep")


def cmd_cost(opts: dict) -> int:
    return _sweep_command("cost", opts, "cost")


def cmd_verify(opts: dict) -> int:
    results = verify.run(include_acceptance=not opts.get("modules_only"))
    text = verify.format_table(results) + "\n"
    emit(text, opts.get("out"))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("FAILED: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakdistill", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_state=True):
        if with_state:
            sp.add_argument("state", nargs="?", choices=states.STATE_NAMES)
            sp.add_argument("--a", help="chi2 parameter in [0, 1]")
            sp.add_argument("--b", help="chi3 parameter in [2, 5]")
        sp.add_argument("--out", help="write to PATH instead of stdout")
        sp.add_argument("--config", help="key = value file; flags override it")

    sp = sub.add_parser("state", help="inspect an initial state")
    common(sp)
    sp.set_defaults(func=cmd_state)

    sp = sub.add_parser("weakness", help="zeta vs x table (one column per beta)")
    common(sp, with_state=False)
    sp.add_argument("--beta", help="comma-separated beta values (default 0.1,0.2,0.3,0.4)")
    sp.add_argument("--points", "--grid", dest="points", type=int, help="number of x points (default 201)")
    sp.set_defaults(func=cmd_weakness)

    for name, func, text in (
        ("sweep", cmd_sweep, "per-outcome probabilities and A|B negativities vs x"),
        ("cost", cmd_cost, "average negativity, measurement/entanglement cost and E_ABC vs x"),
    ):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--alpha", help="projector parameter in (0, 1) (default 1/sqrt(2))")
        sp.add_argument("--beta", help=f"epsilon split in (0, 1) (default {DEFAULT_BETA})")
        sp.add_argument("--x", help="comma-separated x values (overrides --grid)")
        sp.add_argument("--grid", type=int, help="uniform x points on [0, 1] (default 201)")
        sp.add_argument("--outcomes", help="all | diag | 'i,j;i,j' pairs (Bob i, Alice j)")
        sp.add_argument("--weighting", choices=("joint", "conditional"), help="Alice-round weights in M_cost")
        sp.add_argument("--tripartite-mode", dest="tripartite_mode", choices=measures.TRIPARTITE_MODES)
        sp.add_argument("--workers", type=int, help="threads for the x grid")
        sp.set_defaults(func=func)

    sp = sub.add_parser("verify", help="run the invariant and acceptance suite")
    sp.add_argument("--modules-only", action="store_true", help="skip the acceptance criteria")
    sp.add_argument("--out", help="write the report to PATH")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    del args.verbose
    try:
        opts = resolve(args)
        opts.pop("command", None)
        return args.func(opts)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except protocol.InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
