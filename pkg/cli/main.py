#!/usr/bin/env python3
"""
Command line for the rcvf kernel.

Results go to stdout as text or JSON; logs go to stderr. Exit codes:
0 success, 1 internal error, 2 input error, 3 domain error, 4 oracle failure.
"""

import enum
import random
import time
from collections.abc import Callable
from pathlib import Path
from typing import Annotated

import orjson
import typer

import constants
from cli.oracle import random_kpoly, run_oracle
from models.results import (
    SIGN_MARKS,
    CaseTreeResult,
    DecideResult,
    GtfResult,
    IntervalPartitionModel,
    LinePieceModel,
    LineSetResult,
    MTableauResult,
    NewtonResult,
    OracleBatchResult,
    OracleReport,
    PieceModel,
    QeResult,
    ResultModel,
    RootCodeModel,
    SideModel,
    TableauResult,
    ValuationResult,
    VscTableauResult,
    dump_json,
    gamma_text,
    result_schemas,
)
from qe.case_tree import parametrized_tableau
from qe.elimination import decide, eliminate_all
from qe.formula import format_formula, to_json
from qe.line_set import decompose_line_set
from qe.parser import parse_formula, parse_kpolys, parse_polynomials
from rcvf.errors import FormulaSyntaxError, InputError, OracleMismatch
from rcvf.gtf import build_gtf, gtf_slopes, parse_pattern
from rcvf.line_decomposition import MVscTableau, m_complete_forms, rcvf3_tableau
from rcvf.newton import newton_polygon, root_valuations
from rcvf.ovf_core import KPoly
from rcvf.rcvf_algorithms import (
    IntervalPlv,
    VscTableau,
    cross_check_root_valuations,
    rcvf1_valuation,
    rcvf2_tableau,
)
from rcvf.tableau import SignTableau, parse_sigma, tableau_of, thom_code
from utils.error_classifier import (
    ErrorClassifier,
    classify_error,
    exit_code_for,
    get_exit_strategy,
)
from utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

app = typer.Typer(
    name="rcvf",
    help="Exact computation in the real closure of Q(t) with t a positive infinitesimal.",
    no_args_is_help=True,
    add_completion=False,
)


class OutputFormat(str, enum.Enum):
    TEXT = "text"
    JSON = "json"


FormatOption = Annotated[
    OutputFormat,
    typer.Option("--format", "-f", help="Output format", case_sensitive=False),
]
OracleOption = Annotated[
    bool, typer.Option("--oracle-check", help="Cross-check numerically; exit 4 on disagreement")
]
PolysArgument = Annotated[list[str], typer.Argument(help="Polynomials in one variable over Q(t)")]
MaxBranchesOption = Annotated[
    int, typer.Option("--max-branches", min=1, help="Case tree leaf guard")
]


@app.callback()
def main(
    log_level: Annotated[str, typer.Option("--log-level", help="Logging level")] = constants.LOG_LEVEL,
    log_format: Annotated[str, typer.Option("--log-format", help="text or json")] = constants.LOG_FORMAT,
) -> None:
    setup_logging(level=log_level, format_type=log_format)


def _parse(fn: Callable[[str], object], text: str) -> object:
    try:
        return fn(text)
    except ValueError as exc:
        raise FormulaSyntaxError(str(exc)) from None


def _run(command: str, fmt: OutputFormat, body: Callable[[], tuple[ResultModel, str]]) -> None:
    """Run a command body, print its result and turn errors into exit codes."""
    started = time.monotonic()
    logger.info("Command started", command=command)
    try:
        result, text = body()
    except Exception as exc:
        classification = classify_error(exc)
        strategy = get_exit_strategy(classification)
        if strategy["show_traceback"]:
            logger.exception("Command failed", command=command, classification=classification)
        else:
            logger.info("Command failed", command=command, classification=classification)
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(code=exit_code_for(exc)) from None
    typer.echo(dump_json(result) if fmt is OutputFormat.JSON else text)
    logger.info("Command completed", command=command, duration_seconds=round(time.monotonic() - started, 3))


def _check(report: OracleReport) -> None:
    if not report.passed:
        failed = ", ".join(c.quantity for c in report.failures)
        raise OracleMismatch(f"numeric cross-check failed: {failed}")


def _sigma_text(sigma: tuple[int, ...]) -> str:
    return "".join(SIGN_MARKS[s] for s in sigma)


def _one_poly(text: str) -> KPoly:
    return parse_kpolys([text])[0]


# Renderers


def _tableau_model(tableau: SignTableau) -> TableauResult:
    owners = tableau.matrix.owners
    return TableauResult(
        polys=[str(p) for p in tableau.polys],
        roots=[
            RootCodeModel(poly_index=owners[pid], polynomial=str(code.poly), sigma=_sigma_text(code.sigma))
            for pid, code in zip(tableau.matrix.order, tableau.roots)
        ],
        point_signs=[list(row) for row in tableau.point_signs],
        interval_signs=[list(row) for row in tableau.interval_signs],
    )


def _tableau_text(model: TableauResult) -> str:
    lines = [f"F{j} = {p}" for j, p in enumerate(model.polys)]
    for k, root in enumerate(model.roots):
        lines.append(f"x{k}: root of F{root.poly_index} with signs [{root.sigma}]")
    lines.append("points:    " + " | ".join(_column(model.point_signs, k) for k in range(len(model.roots))))
    lines.append(
        "intervals: "
        + " | ".join(_column(model.interval_signs, k) for k in range(len(model.roots) + 1))
    )
    return "\n".join(lines)


def _column(matrix: list[list[int]], k: int) -> str:
    return "".join(SIGN_MARKS[row[k]] for row in matrix)


def _plv_text(plv: IntervalPlv) -> str:
    pieces = []
    for offset, slope in plv.pieces:
        if slope == 0:
            pieces.append(str(offset))
        else:
            scale = plv.variable.value if slope == 1 else f"{slope}*{plv.variable.value}"
            pieces.append(f"{offset} + {scale}")
    return pieces[0] if len(pieces) == 1 else f"min({', '.join(pieces)})"


def _vsc_model(vsc: VscTableau) -> VscTableauResult:
    base = _tableau_model(vsc.base)
    return VscTableauResult(
        **base.model_dump(),
        root_vals=[[gamma_text(v) for v in row] for row in vsc.root_vals],
        gap_vals=[gamma_text(v) for v in vsc.gap_vals],
        interval_valuations=[[_plv_text(plv) for plv in row] for row in vsc.intervals],
        cross_check=cross_check_root_valuations(vsc),
    )


def _vsc_text(model: VscTableauResult) -> str:
    lines = [_tableau_text(model)]
    for j, row in enumerate(model.root_vals):
        lines.append(f"v(F{j}) at roots: " + ", ".join(row))
    lines.append("gaps: " + ", ".join(model.gap_vals))
    for j, row in enumerate(model.interval_valuations):
        lines.append(f"v(F{j}) on intervals: " + "; ".join(row))
    lines += [f"cross-check: {m}" for m in model.cross_check]
    return "\n".join(lines)


def _fraction_text(q: object) -> str | None:
    return None if q is None else str(q)


def _m_model(m: MVscTableau) -> MTableauResult:
    return MTableauResult(
        base=_vsc_model(m.base),
        forms=[list(f) for f in m.forms],
        point_form_signs=[list(row) for row in m.point_form_signs],
        intervals=[
            IntervalPartitionModel(
                index=part.index,
                sides=[
                    SideModel(
                        variable=side.variable.value,
                        cuts=[str(c) for c in side.cuts],
                        pieces=[
                            PieceModel(
                                low=_fraction_text(p.low),
                                high=_fraction_text(p.high),
                                form_signs=list(p.form_signs),
                            )
                            for p in side.pieces
                        ],
                    )
                    for side in part.sides
                ],
                middle=None if part.middle is None else list(part.middle),
            )
            for part in m.intervals
        ],
    )


def _m_text(model: MTableauResult) -> str:
    marks = {**SIGN_MARKS, None: "?"}
    lines = [_vsc_text(model.base), "forms: " + "; ".join(str(f) for f in model.forms)]
    for k, row in enumerate(model.point_form_signs):
        lines.append(f"x{k}: " + "".join(marks[s] for s in row))
    for part in model.intervals:
        for side in part.sides:
            cuts = ", ".join(side.cuts) or "none"
            signs = " ".join("".join(marks[s] for s in p.form_signs) for p in side.pieces)
            lines.append(f"interval {part.index} {side.variable}: cuts {cuts}; signs {signs}")
        if part.middle is not None:
            lines.append(f"interval {part.index} middle: " + "".join(marks[s] for s in part.middle))
    return "\n".join(lines)


# Commands


@app.command()
def newton(
    polynomial: Annotated[str, typer.Argument(help="Polynomial over Q(t)")],
    fmt: FormatOption = OutputFormat.TEXT,
    oracle_check: OracleOption = False,
) -> None:
    """Newton polygon and root valuations."""

    def body() -> tuple[ResultModel, str]:
        p = _one_poly(polynomial)
        polygon = newton_polygon(p)
        valuations = root_valuations(p)
        result = NewtonResult(
            polynomial=str(p),
            vertices=[(i, gamma_text(v)) for i, v in polygon.vertices],
            root_valuations=[(gamma_text(v), m) for v, m in valuations.entries],
        )
        if oracle_check:
            _check(run_oracle("newton", [p]))
        text = "\n".join(
            [
                "vertices: " + " ".join(f"({i}, {v})" for i, v in result.vertices),
                "root valuations: " + " ".join(f"{v} x{m}" for v, m in result.root_valuations),
            ]
        )
        return result, text

    _run("newton", fmt, body)


@app.command()
def gtf(
    degree: Annotated[int, typer.Argument(help="Degree d")],
    pattern: Annotated[str, typer.Argument(help="Signs of P^(1..d) as + and - characters")],
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Generalized Taylor formula for a sign pattern."""

    def body() -> tuple[ResultModel, str]:
        try:
            identity = build_gtf(degree, parse_pattern(pattern))
        except ValueError as exc:
            raise FormulaSyntaxError(str(exc)) from None
        result = GtfResult(
            degree=identity.degree,
            pattern=pattern,
            endpoints="".join(e.value for e in identity.endpoints),
            h=[(k, i, j, c) for k, form in enumerate(identity.h, 1) for i, j, c in form],
            slopes=list(gtf_slopes(identity)),
            identity=str(identity),
        )
        return result, result.identity

    _run("gtf", fmt, body)


@app.command()
def tableau(
    polys: PolysArgument,
    fmt: FormatOption = OutputFormat.TEXT,
    oracle_check: OracleOption = False,
) -> None:
    """Complete tableau of signs of the closed family."""

    def body() -> tuple[ResultModel, str]:
        ps = parse_kpolys(polys)
        model = _tableau_model(tableau_of(ps))
        if oracle_check:
            _check(run_oracle("tableau", ps))
        return model, _tableau_text(model)

    _run("tableau", fmt, body)


@app.command("val-of-root")
def val_of_root(
    polynomial: Annotated[str, typer.Argument(help="Polynomial of the root")],
    sigma: Annotated[str, typer.Argument(help="Signs of P', ..., P^(d-1) at the root")] = "",
    fmt: FormatOption = OutputFormat.TEXT,
    oracle_check: OracleOption = False,
) -> None:
    """Valuation of a Thom-coded root."""

    def body() -> tuple[ResultModel, str]:
        p = _one_poly(polynomial)
        code = thom_code(p, _parse(parse_sigma, sigma))
        value = rcvf1_valuation(code)
        if oracle_check:
            _check(run_oracle("val-of-root", code=code))
        result = ValuationResult(
            polynomial=str(code.poly),
            sigma=_sigma_text(code.sigma),
            n=value.n,
            a=str(value.a),
            value=gamma_text(value.value),
        )
        return result, f"v(x) = {result.value}  ({result.n} v(x) = v({result.a}))"

    _run("val-of-root", fmt, body)


@app.command("vsc-tableau")
def vsc_tableau(
    polys: PolysArgument,
    fmt: FormatOption = OutputFormat.TEXT,
    oracle_check: OracleOption = False,
) -> None:
    """Complete tableau of valued sign conditions."""

    def body() -> tuple[ResultModel, str]:
        ps = parse_kpolys(polys)
        vsc = rcvf2_tableau(ps)
        if oracle_check:
            _check(run_oracle("vsc-tableau", ps))
        model = _vsc_model(vsc)
        return model, _vsc_text(model)

    _run("vsc-tableau", fmt, body)


@app.command("m-tableau")
def m_tableau(
    polys: PolysArgument,
    forms: Annotated[
        str | None, typer.Option("--forms", help="JSON list of integer forms over the family")
    ] = None,
    complete: Annotated[
        int | None, typer.Option("--complete", min=0, help="Use every form with entries in [-M, M]")
    ] = None,
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Tableau refined by the signs of linear forms in the valuations."""

    def body() -> tuple[ResultModel, str]:
        ps = parse_kpolys(polys)
        if forms is not None and complete is not None:
            raise InputError("use either --forms or --complete")
        if complete is not None:
            width = len(tableau_of(ps).polys)
            chosen = m_complete_forms(width, complete)
        elif forms is not None:
            try:
                chosen = orjson.loads(forms)
            except orjson.JSONDecodeError as exc:
                raise FormulaSyntaxError(f"--forms is not valid JSON: {exc}") from None
            if not isinstance(chosen, list) or not all(
                isinstance(f, list) and all(isinstance(c, int) for c in f) for f in chosen
            ):
                raise FormulaSyntaxError("--forms must be a list of integer lists")
        else:
            chosen = []
        model = _m_model(rcvf3_tableau(ps, [tuple(f) for f in chosen]))
        return model, _m_text(model)

    _run("m-tableau", fmt, body)


@app.command("line-set")
def line_set(
    description: Annotated[str, typer.Argument(help="File holding the description, or the description itself")],
    variable: Annotated[str, typer.Option("--variable", help="Variable of the line")] = "x",
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Points and (<,⪯)-intervals of a one-variable description."""

    def body() -> tuple[ResultModel, str]:
        path = Path(description)
        text = path.read_text() if path.is_file() else description
        phi = parse_formula(text.strip(), parameters=[variable])
        found = decompose_line_set(phi, variable)
        result = LineSetResult(
            description=format_formula(phi),
            points=[str(p) for p in found.points],
            intervals=[str(i) for i in found.intervals],
            partition=[LinePieceModel(piece=str(p.interval), satisfied=p.satisfied) for p in found.partition],
        )
        pieces = result.points + result.intervals
        return result, "\n".join(pieces) if pieces else "empty"

    _run("line-set", fmt, body)


@app.command()
def qe(
    formula: Annotated[str, typer.Argument(help="Formula to eliminate quantifiers from")],
    strict_z_coefficients: Annotated[
        bool, typer.Option("--strict-z-coefficients", help="Reject t and division in coefficients")
    ] = constants.STRICT_Z_COEFFICIENTS,
    max_branches: MaxBranchesOption = constants.MAX_BRANCHES,
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Equivalent quantifier-free formula."""

    def body() -> tuple[ResultModel, str]:
        phi = parse_formula(formula, strict=strict_z_coefficients)
        out = eliminate_all(phi, max_branches=max_branches)
        result = QeResult(formula=format_formula(phi), result=format_formula(out), ast=to_json(out))
        return result, result.result

    _run("qe", fmt, body)


@app.command(name="decide")
def decide_command(
    formula: Annotated[str, typer.Argument(help="Closed formula")],
    strict_z_coefficients: Annotated[
        bool, typer.Option("--strict-z-coefficients", help="Reject t and division in coefficients")
    ] = constants.STRICT_Z_COEFFICIENTS,
    max_branches: MaxBranchesOption = constants.MAX_BRANCHES,
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Truth value of a closed formula."""

    def body() -> tuple[ResultModel, str]:
        phi = parse_formula(formula, parameters=[], strict=strict_z_coefficients)
        value = decide(phi, max_branches=max_branches)
        return DecideResult(formula=format_formula(phi), value=value), "true" if value else "false"

    _run("decide", fmt, body)


@app.command("case-tree")
def case_tree(
    polys: Annotated[list[str], typer.Argument(help="Polynomials in the variable and parameters")],
    variable: Annotated[str, typer.Option("--variable", help="Main variable")] = "x",
    max_branches: MaxBranchesOption = constants.MAX_BRANCHES,
    fmt: FormatOption = OutputFormat.JSON,
) -> None:
    """Case tree of parametrized tableaux."""

    def body() -> tuple[ResultModel, str]:
        _, ps = parse_polynomials(polys)
        tree = parametrized_tableau(ps, variable, max_branches=max_branches)
        result = CaseTreeResult(variable=variable, leaf_count=tree.leaf_count, tree=tree.to_json())
        return result, dump_json(result.tree)

    _run("case-tree", fmt, body)


@app.command()
def oracle(
    task: Annotated[str, typer.Argument(help="newton, val-of-root, tableau or vsc-tableau")],
    polys: Annotated[list[str] | None, typer.Argument(help="Polynomials to check")] = None,
    sigma: Annotated[str, typer.Option("--sigma", help="Thom code signs for val-of-root")] = "",
    sample: Annotated[
        int, typer.Option("--random", min=0, help="Check this many random inputs seeded by RCVF_SEED")
    ] = 0,
    fmt: FormatOption = OutputFormat.TEXT,
) -> None:
    """Numeric cross-check of a symbolic result."""

    def single() -> tuple[ResultModel, str]:
        ps = parse_kpolys(polys or [])
        code = thom_code(ps[0], _parse(parse_sigma, sigma)) if task == "val-of-root" else None
        report = run_oracle(task, ps, code=code)
        _check(report)
        return report, f"{task}: {len(report.checks)} checks passed"

    def batch() -> tuple[ResultModel, str]:
        rng = random.Random(constants.RCVF_SEED)
        classifier = ErrorClassifier()
        reports = []
        for _ in range(sample):
            ps = [random_kpoly(rng) for _ in range(1 if task == "newton" else rng.randint(1, 3))]
            try:
                reports.append(run_oracle(task, ps))
            except Exception as exc:
                classifier.classify_and_log(exc)
        result = OracleBatchResult(
            task=task,
            seed=constants.RCVF_SEED,
            reports=reports,
            error_stats=classifier.get_error_stats(),
            passed=all(r.passed for r in reports) and classifier.total_errors == 0,
        )
        if not result.passed:
            failed = sum(1 for r in reports if not r.passed)
            raise OracleMismatch(f"{failed} reports failed, {classifier.total_errors} errors")
        return result, f"{task}: {len(reports)} random inputs passed"

    _run("oracle", fmt, batch if sample else single)


@app.command()
def schemas() -> None:
    """JSON schema of every command result."""
    typer.echo(dump_json(result_schemas()))


if __name__ == "__main__":
    app()
