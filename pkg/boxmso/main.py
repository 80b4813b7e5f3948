"""Command-line entry point: solve, exact, check, encode, gen and suite."""

import functools
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
import orjson
from pydantic import BaseModel, ValidationError

from boxmso.core.config import Limits, settings
from boxmso.core.errors import BoxmsoError
from boxmso.core.events import TraceRecorder
from boxmso.encoders import load_instance
from boxmso.engine.expressions import parse as parse_expression
from boxmso.engine.expressions import serialize as serialize_expression
from boxmso.engine.extract import approximate_answer, exact_answer
from boxmso.engine.generators import (
    cograph_expression,
    cotree_graph,
    edgeless_expression,
    forest_expression,
    path_expression,
    path_graph,
    random_cotree,
    random_tree,
)
from boxmso.engine.graphs import parse_graph, serialize_graph
from boxmso.engine.oracle import validate_answer
from boxmso.engine.queries import format_rational, parse_query, serialize_query
from boxmso.engine.suite import generate_suite, run_suite
from boxmso.models.expression import CwExpression
from boxmso.models.formula import Query
from boxmso.models.graph import Graph
from boxmso.schemas import (
    AnswerDocument,
    ErrorDocument,
    ExactDocument,
    Mode,
    OutputFormat,
    RunConfig,
    SuiteDocument,
    VerdictDocument,
    dumps,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s:%(funcName)s:%(lineno)d - %(message)s"

EXIT_INVALID = 1
EXIT_ERROR = 2
EXIT_UNEXPECTED = 3


def configure_logging(level: str) -> None:
    """Logs go to stderr; stdout carries answers only."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


# ============================================================================
# OUTPUT
# ============================================================================


def _text_value(value: Any) -> str:
    if isinstance(value, dict):
        return " ".join(f"{k}={_text_value(v)}" for k, v in sorted(value.items()))
    if isinstance(value, list):
        return "{" + ",".join(_text_value(v) for v in value) + "}"
    return str(value)


def emit(document: BaseModel, output_format: OutputFormat) -> None:
    if output_format is OutputFormat.STRUCTURED:
        click.echo(dumps(document).decode())
        return
    for key, value in sorted(document.model_dump(mode="json", exclude_none=True).items()):
        click.echo(f"{key}: {_text_value(value)}")


def emit_trace(trace: TraceRecorder) -> None:
    for line in trace.lines():
        click.echo(line)


def guarded(command: Callable[..., int | None]) -> Callable[..., None]:
    """Turn engine errors into one stderr line and the documented exit status."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        output_format = OutputFormat(kwargs.get("output_format", OutputFormat.TEXT.value))
        try:
            status = command(*args, **kwargs) or 0
        except ValidationError as exc:
            raise click.UsageError(str(exc)) from exc
        except BoxmsoError as exc:
            logger.warning(f"run refused: {exc}")
            if output_format is OutputFormat.STRUCTURED:
                document = ErrorDocument(**exc.to_dict())
                payload = orjson.dumps(document.model_dump(), option=orjson.OPT_SORT_KEYS)
                click.echo(payload.decode(), err=True)
            else:
                click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_ERROR)
        except (click.ClickException, click.exceptions.Exit):
            raise
        except Exception:
            logger.exception("unexpected failure")
            sys.exit(EXIT_UNEXPECTED)
        sys.exit(status)

    return wrapper


# ============================================================================
# INPUTS
# ============================================================================


def _inputs(paths: tuple[str, ...], extra: int = 0) -> tuple[Path, Path | None, Path]:
    """``GRAPH [EXPRESSION] QUERY`` followed by ``extra`` trailing paths."""
    core = len(paths) - extra
    if core not in (2, 3):
        raise click.UsageError("expected GRAPH [EXPRESSION] QUERY")
    graph = Path(paths[0])
    expression = Path(paths[1]) if core == 3 else None
    return graph, expression, Path(paths[core - 1])


def _load(cfg: RunConfig) -> tuple[Graph, CwExpression | None, Query]:
    g = parse_graph(cfg.graph.read_text())
    e = parse_expression(cfg.expression.read_text()) if cfg.expression else None
    return g, e, parse_query(cfg.query.read_text())


def _limits(cfg: RunConfig) -> Limits:
    return Limits.from_settings(settings, cfg.budget)


def run_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every engine command."""
    options = [
        click.option("--format", "output_format", default=OutputFormat.TEXT.value,
                     type=click.Choice([f.value for f in OutputFormat]),
                     help="Plain key: value lines or sorted-key JSON."),
        click.option("--budget", type=int, default=None,
                     help="Enumeration budget (overrides BOXMSO_BUDGET)."),
        click.option("--no-balance", "no_balance", is_flag=True,
                     help="Keep the expression as given instead of rebalancing it."),
        click.option("--threads", type=int, default=settings.threads,
                     help="Worker threads for the two halves of an approximate answer."),
        click.option("--trace", is_flag=True, help="Print one line per expression node."),
        click.option("--log-level", default=settings.log_level, help="Logging level."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli() -> None:
    """Approximate and exact answers to boxed CMSO queries with weight comparisons."""


# ============================================================================
# COMMANDS
# ============================================================================


@cli.command()
@click.argument("paths", nargs=-1, required=True)
@click.option("--epsilon", default=settings.default_epsilon, help="Accuracy, e.g. 0.25 or 1/4.")
@click.option("--mode", default=Mode.APPROX.value,
              type=click.Choice([Mode.APPROX.value, Mode.EXACT.value]))
@run_options
@guarded
def solve(paths, epsilon, mode, output_format, budget, no_balance, threads, trace, log_level):
    """Answer the query in QUERY on GRAPH (with an optional EXPRESSION file)."""
    configure_logging(log_level)
    graph, expression, query = _inputs(paths)
    cfg = RunConfig(
        command="solve", graph=graph, expression=expression, query=query, epsilon=epsilon,
        mode=mode, output_format=output_format, budget=budget, balance=not no_balance,
        threads=threads, trace=trace,
    )
    if cfg.mode is Mode.EXACT:
        return _exact(cfg)
    g, e, q = _load(cfg)
    recorder = TraceRecorder(enabled=cfg.trace)
    answer = approximate_answer(
        g, e, q, cfg.epsilon, _limits(cfg), cfg.balance, cfg.threads, recorder
    )
    if answer.epsilon_used != cfg.epsilon:
        logger.info(f"epsilon {format_rational(cfg.epsilon)} snapped to "
                    f"{format_rational(answer.epsilon_used)}")
    emit(AnswerDocument.from_answer(answer, timed=cfg.trace), cfg.output_format)
    emit_trace(recorder)
    return 0


def _exact(cfg: RunConfig) -> int:
    g, e, q = _load(cfg)
    recorder = TraceRecorder(enabled=cfg.trace)
    answer = exact_answer(g, e, q, _limits(cfg), cfg.balance, recorder)
    emit(ExactDocument.from_answer(answer, timed=cfg.trace), cfg.output_format)
    emit_trace(recorder)
    return 0


@cli.command()
@click.argument("paths", nargs=-1, required=True)
@run_options
@guarded
def exact(paths, output_format, budget, no_balance, threads, trace, log_level):
    """Exact maximum of the query, or no-solution."""
    configure_logging(log_level)
    graph, expression, query = _inputs(paths)
    return _exact(RunConfig(
        command="exact", graph=graph, expression=expression, query=query, mode=Mode.EXACT,
        output_format=output_format, budget=budget, balance=not no_balance, threads=threads,
        trace=trace,
    ))


@cli.command()
@click.argument("paths", nargs=-1, required=True)
@run_options
@guarded
def check(paths, output_format, budget, no_balance, threads, trace, log_level):
    """Validate ANSWER (a structured solve output) against the brute-force oracle."""
    configure_logging(log_level)
    graph, expression, query = _inputs(paths, extra=1)
    cfg = RunConfig(
        command="check", graph=graph, expression=expression, query=query,
        answer=Path(paths[-1]), mode=Mode.CHECK, output_format=output_format, budget=budget,
    )
    g, _, q = _load(cfg)
    document = AnswerDocument.model_validate(orjson.loads(cfg.answer.read_bytes()))
    answer = document.to_answer(q.kinds)
    verdict = validate_answer(answer, g, q, answer.alpha, _limits(cfg).budget)
    emit(
        VerdictDocument(verdict="valid" if verdict.valid else "invalid", reasons=verdict.reasons),
        cfg.output_format,
    )
    return 0 if verdict.valid else EXIT_INVALID


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--expression", "expression_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Expression for the instance graph.")
@click.option("--out", "prefix", default=None,
              help="Write PREFIX.graph, PREFIX.cwe and PREFIX.query.")
@click.option("--solve", "run_solver", is_flag=True, help="Also solve and decode the witnesses.")
@click.option("--epsilon", default=settings.default_epsilon)
@run_options
@guarded
def encode(instance, expression_path, prefix, run_solver, epsilon, output_format, budget,
           no_balance, threads, trace, log_level):
    """Compile a problem INSTANCE file to graph, expression and query files."""
    configure_logging(log_level)
    cfg = RunConfig(
        command="encode", instance=instance, expression=expression_path, epsilon=epsilon,
        output_format=output_format, budget=budget, balance=not no_balance, threads=threads,
        trace=trace,
    )
    given = parse_expression(cfg.expression.read_text()) if cfg.expression else None
    encoded = load_instance(cfg.instance.read_text(), given)
    if prefix is not None:
        Path(f"{prefix}.graph").write_text(serialize_graph(encoded.graph))
        Path(f"{prefix}.cwe").write_text(serialize_expression(encoded.expression) + "\n")
        Path(f"{prefix}.query").write_text(serialize_query(encoded.query) + "\n")
        logger.info(f"wrote {prefix}.graph, {prefix}.cwe and {prefix}.query")
    if not run_solver:
        click.echo(f"{encoded.problem}: {encoded.note}")
        return 0
    recorder = TraceRecorder(enabled=cfg.trace)
    answer = approximate_answer(
        encoded.graph, encoded.expression, encoded.query, cfg.epsilon, _limits(cfg),
        cfg.balance, cfg.threads, recorder,
    )
    document = AnswerDocument.from_answer(answer, timed=cfg.trace)
    document.decoded_minus = encoded.decode(answer.witness_minus)
    document.decoded_plus = encoded.decode(answer.witness_plus, answer.epsilon_used)
    document.note = encoded.note
    emit(document, cfg.output_format)
    emit_trace(recorder)
    return 0


def _tree(n: int, seed: int) -> tuple[Graph, CwExpression]:
    tree = random_tree(n, seed)
    return tree, forest_expression(tree)


def _cograph(n: int, seed: int) -> tuple[Graph, CwExpression]:
    cotree = random_cotree(n, seed)
    return cotree_graph(cotree), cograph_expression(cotree)


GENERATED = {
    "cograph": _cograph,
    "edgeless": lambda n, seed: (Graph.build(n), edgeless_expression(n)),
    "path": lambda n, seed: (path_graph(n), path_expression(n)),
    "tree": _tree,
}


@cli.command()
@click.argument("kind", type=click.Choice(sorted(GENERATED)))
@click.argument("n", type=click.IntRange(min=1))
@click.option("--seed", default=0, help="Seed for random trees and cographs.")
@click.option("--out", "prefix", required=True, help="Write PREFIX.graph and PREFIX.cwe.")
@click.option("--log-level", default=settings.log_level)
@guarded
def gen(kind, n, seed, prefix, log_level):
    """Generate a graph of the given KIND on N vertices with its expression."""
    configure_logging(log_level)
    g, e = GENERATED[kind](n, seed)
    Path(f"{prefix}.graph").write_text(serialize_graph(g))
    Path(f"{prefix}.cwe").write_text(serialize_expression(e) + "\n")
    click.echo(f"{prefix}.graph {prefix}.cwe")
    return 0


@cli.command()
@click.option("--count", default=200, type=click.IntRange(min=1))
@click.option("--seed", default=0)
@click.option("--format", "output_format", default=OutputFormat.TEXT.value,
              type=click.Choice([f.value for f in OutputFormat]))
@click.option("--budget", type=int, default=None)
@click.option("--log-level", default=settings.log_level)
@guarded
def suite(count, seed, output_format, budget, log_level):
    """Run the randomized acceptance suite and report pass/fail counts."""
    configure_logging(log_level)
    cfg = RunConfig(command="suite", output_format=output_format, budget=budget, seed=seed)
    report = run_suite(generate_suite(count, cfg.seed), _limits(cfg))
    emit(SuiteDocument.model_validate(report.as_dict()), cfg.output_format)
    return 0 if report.failed == 0 else EXIT_INVALID


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
