"""Command-line surface: allocate, axioms, fit, case-study.

Output goes to standard output as plain tables (four decimal places), or
as a single JSON document with `--json` (full precision, key-sorted, no
timestamps, so identical invocations are byte-identical).  Exit codes:
0 on success, 1 on parse or validation errors, 2 when a requested check
fails (an axiom violation, or a case-study reference outside tolerance).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence

from . import __version__
from .analysis import (
    Family,
    as_family,
    distance_at,
    fit_family,
    integrate_distance,
    legitimacy_bounds,
    nile_case_study,
)
from .axioms import Axiom, run_axiom_suite
from .core import (
    InflowProfile,
    ParameterError,
    RetentionShares,
    RiverShareError,
    RuleSpec,
    validate_allocation,
)
from .data_io import BasinDataset, builtin_nile, read_dataset

_RULE_GRAMMAR = "nt | eft | ept | shapley | compromise:<w> | partial:<w> | alpha:<a1,...>"


def parse_rule(text: str) -> RuleSpec:
    """Parse a rule spec string; errors name the offending token."""
    head, sep, tail = text.strip().partition(":")
    name = head.casefold()
    plain = {
        "nt": RuleSpec.no_transfer,
        "eft": RuleSpec.egalitarian_full_transfer,
        "ept": RuleSpec.egalitarian_partial_transfer,
        "shapley": RuleSpec.shapley,
    }
    if name in plain:
        if sep:
            raise ParameterError(f"rule {head!r} takes no parameter, got {tail!r}")
        return plain[name]()
    if name in ("compromise", "partial"):
        try:
            weight = float(tail)
        except ValueError:
            raise ParameterError(
                f"{head}: expected a weight in [0, 1] after the colon, got {tail!r}"
            ) from None
        if not 0.0 <= weight <= 1.0:
            raise ParameterError(f"{head}: weight must lie in [0, 1], got {tail}")
        if name == "compromise":
            return RuleSpec.compromise(weight)
        return RuleSpec.partial_compromise(weight)
    if name == "alpha":
        if not tail:
            raise ParameterError("alpha: expected comma-separated retention shares after the colon")
        shares = []
        for token in tail.split(","):
            try:
                value = float(token)
            except ValueError:
                raise ParameterError(f"alpha: {token!r} is not a number") from None
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"alpha: share {token} must lie in [0, 1]")
            shares.append(value)
        return RuleSpec.retention_rule(RetentionShares(tuple(shares)))
    raise ParameterError(f"unknown rule {head!r}, expected one of: {_RULE_GRAMMAR}")


def _parse_inflows(text: str) -> InflowProfile:
    values = []
    for token in text.split(","):
        try:
            values.append(float(token))
        except ValueError:
            raise ParameterError(f"--inflows: {token!r} is not a number") from None
    return InflowProfile(tuple(values))


def _resolve_dataset(name: str) -> BasinDataset:
    if name.strip().casefold() == "nile":
        return builtin_nile()
    return read_dataset(name)


def _load_profile(args) -> tuple[BasinDataset | None, InflowProfile, tuple[str, ...]]:
    if args.inflows is not None and args.dataset is not None:
        raise ParameterError("pass either --inflows or --dataset, not both")
    if args.inflows is not None:
        e = _parse_inflows(args.inflows)
        return None, e, tuple(f"agent {i}" for i in range(len(e)))
    if args.dataset is not None:
        dataset = _resolve_dataset(args.dataset)
        return dataset, dataset.inflows, dataset.names
    raise ParameterError("one of --inflows or --dataset is required")


@dataclass(frozen=True)
class RunRecord:
    """Everything needed to replay one invocation, JSON-serializable."""

    command: str
    inputs: dict
    outputs: dict
    version: str = __version__
    seed: int | None = None

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": self.version,
            "seed": self.seed,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def _emit(record: RunRecord, args, human_lines) -> None:
    if args.json:
        print(record.to_json())
    else:
        for line in human_lines:
            print(line)


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [len(h) for h in headers]
    for row in rows:
        for k, cell in enumerate(row):
            widths[k] = max(widths[k], len(cell))
    def render(cells):
        return "  ".join(cell.ljust(widths[k]) for k, cell in enumerate(cells)).rstrip()
    lines = [render(headers), render(["-" * w for w in widths])]
    lines.extend(render(row) for row in rows)
    return lines


# ---------------------------------------------------------------------------
# subcommands


def cmd_allocate(args) -> int:
    rule = parse_rule(args.rule)
    dataset, e, names = _load_profile(args)
    if rule.fixed_agent_count is not None and rule.fixed_agent_count != len(e):
        raise ParameterError(
            f"rule {rule.label()!r} is for {rule.fixed_agent_count} agents, dataset has {len(e)}"
        )
    allocation = rule.apply(e)
    verdict = validate_allocation(e, allocation, tol=args.tolerance)
    record = RunRecord(
        command="allocate",
        inputs={
            "rule": rule.label(),
            "inflows": list(e),
            "agents": list(names),
            "dataset": args.dataset,
            "tolerance": args.tolerance,
        },
        outputs={
            "allocation": list(allocation),
            "total": allocation.total,
            "valid": verdict.ok,
        },
    )
    rows = [
        [names[i], _fmt(e[i]), _fmt(allocation[i])]
        for i in range(len(e))
    ]
    rows.append(["total", _fmt(e.total), _fmt(allocation.total)])
    lines = [f"rule: {rule.label()}"]
    lines.extend(_table(["agent", "inflow", "allocation"], rows))
    _emit(record, args, lines)
    return 0


def _parse_axiom_list(text: str) -> tuple[Axiom, ...]:
    if text.strip().casefold() == "all":
        return tuple(Axiom)
    axioms = []
    for token in text.split(","):
        name = token.strip().casefold()
        try:
            axioms.append(Axiom(name))
        except ValueError:
            legal = ", ".join(a.value for a in Axiom)
            raise ParameterError(f"unknown axiom {token.strip()!r}, expected all or any of: {legal}") from None
    return tuple(axioms)


def cmd_axioms(args) -> int:
    rule = parse_rule(args.rule)
    axioms = _parse_axiom_list(args.axioms)
    if args.trials < 1:
        raise ParameterError(f"--trials must be at least 1, got {args.trials}")
    if not 2 <= args.min_agents <= args.max_agents:
        raise ParameterError(
            f"need 2 <= --min-agents <= --max-agents, got {args.min_agents}..{args.max_agents}"
        )
    reports = run_axiom_suite(
        rule,
        axioms=axioms,
        trials=args.trials,
        seed=args.seed,
        n_range=(args.min_agents, args.max_agents),
        strict_impartiality=args.strict_impartiality,
        tol=args.tolerance,
    )
    violations = sum(r.violations for r in reports)
    record = RunRecord(
        command="axioms",
        inputs={
            "rule": rule.label(),
            "axioms": [a.value for a in axioms],
            "trials": args.trials,
            "agents": [args.min_agents, args.max_agents],
            "strict_impartiality": args.strict_impartiality,
            "tolerance": args.tolerance,
        },
        outputs={
            "reports": [r.to_dict() for r in reports],
            "violations": violations,
            "passed": violations == 0,
        },
        seed=args.seed,
    )
    lines = [f"rule: {rule.label()}  trials: {args.trials}  seed: {args.seed}"]
    for report in reports:
        status = "pass" if report.passed else f"FAIL ({report.violations} violations)"
        lines.append(f"  {report.axiom.value}: {status}")
        if report.first_counterexample is not None:
            ce = report.first_counterexample
            for key, value in ce.inputs:
                lines.append(f"    {key}: {value}")
            for label, allocation in ce.allocations:
                lines.append(f"    {label}: {tuple(_fmt(v) for v in allocation)}")
            lines.append(f"    {ce.violation}")
    _emit(record, args, lines)
    return 0 if violations == 0 else 2


def _write_curve(path: str, e, z, family: Family, points: int) -> None:
    if points < 2:
        raise ParameterError(f"--curve-points must be at least 2, got {points}")
    lines = ["parameter,distance"]
    for k in range(points):
        t = k / (points - 1)
        lines.append(f"{t!r},{distance_at(e, z, family, t)!r}")
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ParameterError(f"cannot write curve to {path}: {exc}") from None


def cmd_fit(args) -> int:
    family = as_family(args.family)
    dataset = _resolve_dataset(args.dataset)
    if not dataset.has_withdrawals:
        raise ParameterError(f"dataset {args.dataset!r} has no withdrawal column to fit against")
    e = dataset.inflows
    z = dataset.normalized_withdrawals()
    fit = fit_family(e, z, family)
    integral = integrate_distance(e, z, family, nodes=args.nodes)
    legitimacy = legitimacy_bounds(e, z, family, names=dataset.names, tol=args.tolerance)
    if args.curve is not None:
        _write_curve(args.curve, e, z, family, args.curve_points)
    record = RunRecord(
        command="fit",
        inputs={
            "dataset": args.dataset,
            "family": family.value,
            "nodes": args.nodes,
            "tolerance": args.tolerance,
            "curve": args.curve,
            "curve_points": args.curve_points if args.curve is not None else None,
        },
        outputs={
            "fit": fit.to_dict(),
            "integral": integral,
            "legitimacy": legitimacy.to_dict(),
            "observed": list(z),
        },
    )
    lines = [
        f"family: {family.value}",
        f"parameter: {_fmt(fit.parameter_star)}"
        + (f" (clipped from {_fmt(fit.unconstrained_parameter)})" if fit.clipped else ""),
        f"residual distance: {_fmt(fit.residual_distance)}",
        f"distance integral: {_fmt(integral)}",
    ]
    if fit.degenerate:
        lines.append("family is degenerate: both endpoints coincide")
    rows = [
        [
            entry.agent,
            _fmt(entry.observed),
            _fmt(fit.fitted_allocation[entry.position]),
            _fmt(entry.lower),
            _fmt(entry.upper),
            entry.classification.value,
        ]
        for entry in legitimacy.entries
    ]
    lines.extend(_table(["agent", "observed", "fitted", "lower", "upper", "status"], rows))
    if args.curve is not None:
        lines.append(f"distance curve written to {args.curve}")
    _emit(record, args, lines)
    return 0


def cmd_case_study(args) -> int:
    decimals = None if args.full_precision else args.decimals
    result = nile_case_study(reporting_decimals=decimals, nodes=args.nodes)
    record = RunRecord(
        command="case-study",
        inputs={"reporting_decimals": decimals, "nodes": args.nodes},
        outputs=result.to_dict(),
    )
    lines = ["Nile basin allocation study", ""]
    headers = ["agent"] + [label for label, _ in result.table]
    rows = []
    for i, name in enumerate(result.names):
        rows.append([name] + [_fmt(column[i]) for _, column in result.table])
    lines.extend(_table(headers, rows))
    lines.append("")
    fit = result.compromise_fit
    lines.append(
        f"compromise fit: parameter {_fmt(fit.parameter_star)}, "
        f"allocation {tuple(_fmt(v) for v in fit.fitted_allocation)}"
    )
    pfit = result.partial_fit
    lines.append(
        f"partial fit: parameter {_fmt(pfit.parameter_star)}"
        + (f" (clipped from {_fmt(pfit.unconstrained_parameter)})" if pfit.clipped else "")
    )
    lines.append(
        f"distance integrals: compromise {_fmt(result.compromise_integral)}, "
        f"partial {_fmt(result.partial_integral)}"
    )
    for family, report in (
        ("compromise", result.compromise_legitimacy),
        ("partial", result.partial_legitimacy),
    ):
        verdicts = ", ".join(f"{e.agent}: {e.classification.value}" for e in report.entries)
        lines.append(f"legitimacy ({family}): {verdicts}")
    shares = ", ".join(
        f"{name} {100 * share:.1f}%" for name, share in zip(result.names, result.observed_shares)
    )
    lines.append(f"observed shares: {shares}")
    lines.append("")
    if result.all_ok:
        lines.append(f"all {len(result.checks)} reference checks passed")
    else:
        for check in result.failures:
            lines.append(
                f"REFERENCE CHECK FAILED {check.name}: expected {check.expected}"
                + (f" within {check.tolerance}" if check.tolerance is not None else "")
                + f", got {check.actual}"
            )
    _emit(record, args, lines)
    return 0 if result.all_ok else 2


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rivershare",
        description="Fair allocation of river water along a line of agents.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("--json", action="store_true", help="emit a JSON run record instead of tables")
        sub.add_argument(
            "--tolerance",
            type=float,
            default=None,
            help="override the default comparison tolerance",
        )

    allocate = commands.add_parser("allocate", help="compute one rule's allocation")
    allocate.add_argument("--rule", required=True, help=f"rule spec: {_RULE_GRAMMAR}")
    allocate.add_argument("--inflows", help="comma-separated inflows, upstream first")
    allocate.add_argument("--dataset", help="'nile' or a path to a .csv/.json dataset")
    common(allocate)
    allocate.set_defaults(handler=cmd_allocate)

    axioms = commands.add_parser("axioms", help="randomized axiom verification for a rule")
    axioms.add_argument("--rule", required=True, help=f"rule spec: {_RULE_GRAMMAR}")
    axioms.add_argument(
        "--axioms",
        default="all",
        help="comma-separated axiom names, or 'all'",
    )
    axioms.add_argument("--trials", type=int, default=1000, help="random instances per axiom")
    axioms.add_argument("--seed", type=int, default=0, help="base seed for the trial generator")
    axioms.add_argument("--min-agents", type=int, default=2)
    axioms.add_argument("--max-agents", type=int, default=10)
    axioms.add_argument(
        "--strict-impartiality",
        action="store_true",
        help="require strict equality in the downstream impartiality check",
    )
    common(axioms)
    axioms.set_defaults(handler=cmd_axioms)

    fit = commands.add_parser("fit", help="fit a rule family to observed withdrawals")
    fit.add_argument("--dataset", required=True, help="'nile' or a path to a dataset with withdrawals")
    fit.add_argument("--family", required=True, help="compromise or partial")
    fit.add_argument("--nodes", type=int, default=64, help="quadrature nodes for the distance integral")
    fit.add_argument("--curve", help="write the distance profile to this CSV path")
    fit.add_argument("--curve-points", type=int, default=101, help="samples in the curve CSV")
    common(fit)
    fit.set_defaults(handler=cmd_fit)

    case = commands.add_parser("case-study", help="run the embedded Nile analysis end to end")
    case.add_argument("--decimals", type=int, default=1, help="reporting precision for the observed column")
    case.add_argument(
        "--full-precision",
        action="store_true",
        help="skip the reporting-precision rounding of the observed column",
    )
    case.add_argument("--nodes", type=int, default=64, help="quadrature nodes for the distance integrals")
    common(case)
    case.set_defaults(handler=cmd_case_study)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.handler(args)
    except RiverShareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
