"""Command-line front end.

Subcommands:
  solve       optimal point at one target throughput
  curve       tradeoff curve over a grid lo:hi:step
  verify      oracle, structure, majorization and optional simulation checks
  inflection  convex/concave switch point of an alpha-fair curve
  simulate    slot-level simulation of a control

Exit codes: 0 ok, 2 domain or configuration error, 3 I/O error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from .alpha import (
    CSV_COLUMNS as ALPHA_COLUMNS,
    INFLECTION_FIELDS,
    AlwaysConcave,
    alpha_curve,
    alpha_optimal_point,
    alpha_optimal_point_inequality,
    inflection_threshold,
)
from .errors import AlohaTFError, DomainError
from .grid import Grid
from .io import read_csv, to_csv, to_json
from .jain import CSV_COLUMNS as JAIN_COLUMNS, jain_curve, jain_optimal_point
from .jain import jain_optimal_point_inequality
from .majorization import majorization_probe
from .model import (
    FairnessMeasure,
    Regime,
    check_n,
    check_theta,
    critical_throughput,
    rates_from_control,
    throughput,
)
from .oracle import MAX_N, oracle_gap_bound, oracle_optimum
from .simulator import check_simulation, simulate_saturated

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4
ROUND_TRIP_TOL = 1e-9


class VerificationFailed(AlohaTFError):
    """A check run by the CLI did not pass."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int | None = None
    alpha: float | None = None
    theta: float | None = None
    grid: Grid | None = None
    measure: str = "jain"
    constraint: str = "equality"
    out: str | None = None
    format: str | None = None
    quiet: bool = False
    seed: int = 0
    resolution: int | None = None
    band: float = 5e-3
    check: bool = False

    @property
    def fairness(self) -> FairnessMeasure:
        if self.measure == "jain":
            if self.alpha is not None:
                raise DomainError("--alpha applies only to --measure alpha")
            return FairnessMeasure.jain()
        if self.alpha is None:
            raise DomainError("--measure alpha requires --alpha")
        return FairnessMeasure.alpha_fair(self.alpha)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: csv; json for verify and inflection)")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress stdout output")
    return common


def _measure_args(p: argparse.ArgumentParser, n_required: bool = True) -> None:
    p.add_argument("--measure", choices=("jain", "alpha"), default="jain")
    p.add_argument("--alpha", type=float, help="alpha >= 1 for --measure alpha")
    p.add_argument("--n", type=int, required=n_required, help="number of users")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="aloha-tf",
        description="Throughput-fairness tradeoff of finite-user slotted Aloha.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="optimal point at one theta")
    _measure_args(solve)
    solve.add_argument("--theta", type=float, required=True)
    solve.add_argument("--constraint", choices=("equality", "inequality"), default="equality")

    curve = sub.add_parser("curve", parents=[common], help="tradeoff curve over a grid")
    _measure_args(curve)
    curve.add_argument("--grid", required=True, help="lo:hi:step")
    curve.add_argument("--constraint", choices=("equality", "inequality"), default="equality")
    curve.add_argument("--check", action="store_true",
                       help="re-read the output and confirm every row's control meets its theta")

    verify = sub.add_parser("verify", parents=[common], help="run verification suites")
    _measure_args(verify)
    verify.add_argument("--theta", type=float, required=True)
    verify.add_argument("--resolution", type=int, help="oracle grid resolution")
    verify.add_argument("--band", type=float, default=5e-3, help="oracle throughput band")
    verify.add_argument("--gap", type=float, help="tolerated |F* - oracle best_F|")
    verify.add_argument("--samples", type=int, default=100, help="majorization samples")
    verify.add_argument("--simulate", action="store_true")
    verify.add_argument("--slots", type=int, default=1_000_000)
    verify.add_argument("--seed", type=int, default=0)

    infl = sub.add_parser("inflection", parents=[common], help="inflection threshold")
    infl.add_argument("--alpha", type=float, required=True)
    infl.add_argument("--n", type=int, required=True)

    sim = sub.add_parser("simulate", parents=[common], help="simulate a control")
    sim.add_argument("--p", help="comma-separated control; otherwise the optimum is simulated")
    _measure_args(sim, n_required=False)
    sim.add_argument("--theta", type=float)
    sim.add_argument("--slots", type=int, default=1_000_000)
    sim.add_argument("--seed", type=int, default=0)
    return parser


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif not cfg.quiet:
        sys.stdout.write(text)


def _config(args: argparse.Namespace) -> RunConfig:
    grid = Grid.parse(args.grid) if getattr(args, "grid", None) else None
    return RunConfig(
        command=args.command, n=getattr(args, "n", None), alpha=getattr(args, "alpha", None),
        theta=getattr(args, "theta", None), grid=grid,
        measure=getattr(args, "measure", "jain"),
        constraint=getattr(args, "constraint", "equality"), out=args.out,
        format=args.format, quiet=args.quiet, seed=getattr(args, "seed", 0),
        resolution=getattr(args, "resolution", None), band=getattr(args, "band", 5e-3),
        check=getattr(args, "check", False),
    )


def _point(cfg: RunConfig, theta: float):
    measure = cfg.fairness
    if measure.alpha is None:
        solver = jain_optimal_point_inequality if cfg.constraint == "inequality" else jain_optimal_point
        return solver(theta, cfg.n)
    solver = (alpha_optimal_point_inequality if cfg.constraint == "inequality"
              else alpha_optimal_point)
    return solver(theta, measure.alpha, cfg.n)


def _point_dict(pt) -> dict:
    d = dict(pt.__dict__)
    d["n_prime"], d["k"] = pt.n_prime, pt.k
    d["control"] = pt.control.p.tolist()
    return d


def cmd_solve(cfg: RunConfig) -> int:
    pt = _point(cfg, check_theta(cfg.theta))
    if (cfg.format or "csv") == "json":
        _emit(cfg, to_json(_point_dict(pt)))
    else:
        columns = ALPHA_COLUMNS if cfg.measure == "alpha" else JAIN_COLUMNS
        _emit(cfg, to_csv([pt.row()], columns))
    return EXIT_OK


def _curve_rows(cfg: RunConfig):
    """Rows and column names for the requested curve, plus any inflection record."""
    measure = cfg.fairness
    n = check_n(cfg.n)
    if measure.alpha is None:
        curves = jain_curve(n, cfg.grid)
        rows = []
        for i in range(len(curves[2])):
            for m in range(2, n + 1):
                pt = curves[m].points[i]
                rows.append({"n": m, **pt.row()})
        return rows, ("n",) + JAIN_COLUMNS, None
    infl = inflection_threshold(measure.alpha, n)
    inject = () if isinstance(infl, AlwaysConcave) else (infl.theta_ring,)
    if cfg.constraint == "inequality":
        thetas = cfg.grid.points(inject=inject)
        pts = [alpha_optimal_point_inequality(th, measure.alpha, n) for th in thetas]
    else:
        pts = alpha_curve(measure.alpha, n, cfg.grid, inject=inject)
    return [pt.row() for pt in pts], ALPHA_COLUMNS, infl


def _row_control(row: dict, cfg: RunConfig) -> np.ndarray:
    p_s, p_l = float(row["p_s"]), float(row["p_l"])
    regime = row["regime"]
    if cfg.measure == "jain":
        n, n_prime, k = int(row["n"]), int(row["n_prime"]), int(row["k"])
        return np.array([0.0] * (n - n_prime) + [p_s] * k + [p_l] * (n_prime - k))
    if regime == Regime.EQUAL_RATE.value:
        return np.full(cfg.n, p_s)
    return np.array([p_s] * (cfg.n - 1) + [p_l])


def check_curve_text(text: str, cfg: RunConfig) -> int:
    """Number of rows whose control misses its stated throughput by more than 1e-9."""
    bad = 0
    theta_n = critical_throughput(cfg.n)
    for row in read_csv(text):
        theta = float(row["theta"])
        expected = theta
        if (cfg.measure == "alpha" and cfg.constraint == "inequality"
                and row["regime"] == Regime.EQUAL_RATE.value):
            expected = theta_n
        realized = throughput(rates_from_control(_row_control(row, cfg)))
        if not abs(realized - expected) <= ROUND_TRIP_TOL:
            bad += 1
    return bad


def cmd_curve(cfg: RunConfig) -> int:
    rows, columns, infl = _curve_rows(cfg)
    csv_text = to_csv(rows, columns)
    if (cfg.format or "csv") == "json":
        payload = {"columns": list(columns), "rows": rows}
        if cfg.measure == "alpha":
            payload["inflection"] = infl.to_dict()
        _emit(cfg, to_json(payload))
    else:
        _emit(cfg, csv_text)
        if cfg.out and infl is not None:
            with open(cfg.out + ".inflection.json", "w", encoding="utf-8") as fh:
                fh.write(to_json(infl.to_dict()))
    if cfg.check:
        bad = check_curve_text(csv_text, cfg)
        if bad:
            raise VerificationFailed(f"{bad} row(s) fail the throughput round trip")
    return EXIT_OK


def _structure_ok(pt, cfg: RunConfig) -> bool | None:
    if pt.regime is not Regime.TWO_VALUE:
        return None
    if cfg.measure == "jain":
        return pt.k == 1 and pt.n_prime == pt.t
    return pt.k == cfg.n - 1 and pt.n_prime == cfg.n


def cmd_verify(cfg: RunConfig, gap: float | None, samples: int, simulate: bool,
               slots: int) -> int:
    theta = check_theta(cfg.theta)
    n = check_n(cfg.n)
    if n > MAX_N:
        raise DomainError(f"oracle supports n ≤ {MAX_N}")
    measure = cfg.fairness
    pt = _point(cfg, theta)
    control = pt.control
    reference = control.p if control.is_efficient() else np.full(n, 1.0 / n)
    oracle = oracle_optimum(theta, n, measure, cfg.resolution, cfg.band, square=(n == 2),
                            reference=reference)
    bound = gap if gap is not None else oracle_gap_bound(n, oracle.resolution)
    scale = max(1.0, abs(pt.F_star)) if math.isfinite(pt.F_star) else 1.0

    checks: dict = {}
    checks["analytic_feasible"] = abs(throughput(rates_from_control(control))
                                      - getattr(pt, "realized_theta", theta)) <= 1e-10
    checks["oracle_sound"] = oracle.best_F <= pt.F_star + 1e-9 * scale
    checks["oracle_gap"] = abs(pt.F_star - oracle.best_F) <= bound
    checks["oracle_two_value"] = oracle.distinct_nonzero_values <= 2
    checks["analytic_in_oracle_top10"] = (None if n > 3 or oracle.reference_rank is None
                                          else oracle.reference_rank < 10)
    if oracle.square_best_F is not None:
        checks["square_not_better"] = oracle.square_best_F <= pt.F_star + 1e-9 * scale
    checks["optimizer_structure"] = _structure_ok(pt, cfg)

    report = {"command": "verify", "n": n, "theta": theta, "measure": str(measure),
              "analytic": _point_dict(pt), "gap": pt.F_star - oracle.best_F,
              "gap_bound": bound, "oracle": oracle.to_dict()}
    if theta > critical_throughput(n):
        probe = majorization_probe(n, theta, samples, seed=cfg.seed)
        report["majorization"] = probe.to_dict()
        checks.update({f"majorization_{k}": v for k, v in probe.checks.items()})
    if simulate:
        sim = simulate_saturated(control, slots, cfg.seed)
        sim_check = check_simulation(sim, getattr(pt, "realized_theta", theta))
        report["simulation"] = {**sim.to_dict(), **sim_check.to_dict()}
        checks["simulation"] = sim_check.passed()

    failures = [k for k, v in checks.items() if v is False]
    report["checks"] = checks
    report["failures"] = len(failures)
    report["passed"] = not failures
    if (cfg.format or "json") == "csv":
        _emit(cfg, to_csv([{"check": k, "passed": v} for k, v in checks.items()],
                          ("check", "passed")))
    else:
        _emit(cfg, to_json(report))
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_inflection(cfg: RunConfig) -> int:
    result = inflection_threshold(cfg.alpha, check_n(cfg.n))
    if (cfg.format or "json") == "csv":
        if isinstance(result, AlwaysConcave):
            _emit(cfg, "always-concave\n")
        else:
            _emit(cfg, to_csv([result.to_dict()], INFLECTION_FIELDS))
    else:
        _emit(cfg, to_json(result.to_dict()))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, p_text: str | None, slots: int) -> int:
    if p_text:
        try:
            p = [float(v) for v in p_text.split(",")]
        except ValueError:
            raise DomainError(f"--p must be comma-separated numbers, got {p_text!r}") from None
        target = None
    else:
        if cfg.n is None or cfg.theta is None:
            raise DomainError("simulate needs --p, or --n and --theta")
        pt = _point(cfg, check_theta(cfg.theta))
        p = pt.control.p
        target = getattr(pt, "realized_theta", pt.theta)
    sim = simulate_saturated(p, slots, cfg.seed)
    check = check_simulation(sim, target)
    if (cfg.format or "csv") == "json":
        _emit(cfg, to_json({**sim.to_dict(), **check.to_dict()}))
    else:
        x = rates_from_control(sim.p).x
        rows = [{"user": i, "p": sim.p[i], "success_count": sim.success_counts[i],
                 "empirical_rate": sim.empirical_rates[i], "expected_rate": float(x[i])}
                for i in range(len(sim.p))]
        _emit(cfg, to_csv(rows, ("user", "p", "success_count", "empirical_rate",
                                 "expected_rate")))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "curve":
            return cmd_curve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.gap, args.samples, args.simulate, args.slots)
        if args.command == "inflection":
            return cmd_inflection(cfg)
        return cmd_simulate(cfg, args.p, args.slots)
    except VerificationFailed as exc:
        print(f"aloha-tf: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (DomainError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"aloha-tf: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
