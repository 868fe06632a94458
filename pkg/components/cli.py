import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from components import __version__
from components.counting import MAX_BACKTRACK_EDGES, MAX_ORIENTATION_EDGES, eul_backtrack, eul_exact, integral_from_count
from components.errors import ConsistencyError, EulCountError, GraphError, PreconditionError, UsageError
from components.estimator import (
    BAND,
    DEFAULT_SIGMA,
    band_summary,
    estimate_eul,
    failure_row,
    ratio_table,
    rows_to_table,
    table_records,
    table_to_csv,
)
from components.exact_algebra import MAX_TREE_ENUMERATION_ORDER, spanning_tree_count
from components.graph_core import (
    Graph,
    bowtie,
    complete_graph,
    cycle_graph,
    gen_even_graph,
    parse_graph,
    path_graph,
    serialize_graph,
    star_graph,
)
from components.lemma_lab import (
    LEVEL_SEED_FRACTION,
    LOG_DET_TRIALS,
    TAIL_DEGREE,
    CorpusEntry,
    build_corpus,
    run_suite,
    summarize,
)
from components.probe import (
    DEFAULT_EPSILON,
    DEFAULT_SAMPLES,
    MIN_SAMPLES,
    gaussian_half_width,
    gaussian_integrand,
    gaussian_reference,
    integrate_on_slice,
    mc_S0,
    s0_scale,
)
from components.spectral import laplacian_spectrum
from components.utils import colorize, json_ready, report_meta, use_color

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

FAMILIES = {
    "complete": complete_graph,
    "cycle": cycle_graph,
    "path": path_graph,
    "star": lambda n: star_graph(n - 1),
}

GEN_MIN_ORDER = {"random": 3, "complete": 1, "cycle": 3, "path": 1, "star": 2}


class Command(str, Enum):
    GEN = "gen"
    COUNT = "count"
    ESTIMATE = "estimate"
    SPECTRUM = "spectrum"
    PROBE = "probe"
    VERIFY = "verify"
    REPORT = "report"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


def default_guards() -> Dict[str, int]:
    return {
        "max_orientation_edges": MAX_ORIENTATION_EDGES,
        "max_backtrack_edges": MAX_BACKTRACK_EDGES,
        "max_tree_order": MAX_TREE_ENUMERATION_ORDER,
    }


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: the command plus every parameter it reads."""

    command: Command
    input_path: Optional[str] = None
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    samples: int = DEFAULT_SAMPLES
    output_format: OutputFormat = OutputFormat.JSON
    threads: int = 1
    guards: Dict[str, int] = field(default_factory=default_guards)
    options: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RunResult:
    status: int
    document: Optional[str] = None
    error: Optional[str] = None


def _meta(config: RunConfig, **extra: Any) -> Dict[str, Any]:
    return report_meta(seed=config.seed, guards=config.guards, command=config.command.value, **extra)


def _read_graph(config: RunConfig, source: Optional[str]) -> Graph:
    if source is None:
        if config.input_path in (None, "-"):
            source = sys.stdin.read()
        else:
            with open(config.input_path, encoding="utf-8") as handle:
                source = handle.read()
    return parse_graph(source)


def _csv_preamble(meta: Dict[str, Any]) -> str:
    return "# " + json.dumps(json_ready(meta), sort_keys=True) + "\n"


def _render_mapping(payload: Dict[str, Any], fmt: OutputFormat, color: bool = False) -> str:
    """Render a flat report as JSON, a two-column CSV or aligned text."""
    if fmt is OutputFormat.JSON:
        return json.dumps(json_ready(payload), indent=2) + "\n"
    flat = {k: v for k, v in payload.items() if k != "meta"}
    if fmt is OutputFormat.CSV:
        frame = pd.DataFrame({"key": list(flat), "value": [json.dumps(json_ready(v)) for v in flat.values()]})
        return _csv_preamble(payload.get("meta", {})) + frame.to_csv(index=False, lineterminator="\n")
    width = max((len(k) for k in flat), default=0)
    lines = []
    for key, value in flat.items():
        text = json.dumps(json_ready(value)) if isinstance(value, (list, dict)) else str(value)
        if isinstance(value, bool):
            text = colorize(text, "green" if value else "red", color)
        lines.append(f"{key.ljust(width)}  {text}")
    return "\n".join(lines) + "\n"


def _gen(config: RunConfig, source: Optional[str]) -> str:
    family = config.options.get("family", "random")
    n = config.options["n"]
    if family == "random":
        g = gen_even_graph(n, config.options.get("p", 0.5), config.seed)
    elif family == "bowtie":
        g = bowtie()
    else:
        g = FAMILIES[family](n)
    logger.info("generated %s graph: n=%d E=%d meta=%s", family, g.n, g.E, _meta(config))
    return serialize_graph(g)


def _count(config: RunConfig, source: Optional[str]) -> str:
    g = _read_graph(config, source)
    root = config.options.get("root", 0)
    if root >= g.n:
        raise UsageError(f"--root {root + 1} exceeds n={g.n}")
    result = eul_exact(
        g,
        root=root,
        threads=config.threads,
        max_edges=config.guards["max_orientation_edges"],
    )
    payload: Dict[str, Any] = {
        "n": g.n,
        "E": g.E,
        "eul": result.eul,
        "t": result.tree_count,
        "orientations": result.orientation_count,
        "method": result.method.value,
    }
    if config.options.get("oracle"):
        oracle = eul_backtrack(g, max_edges=config.guards["max_backtrack_edges"])
        payload["oracle_eul"] = oracle
        payload["oracle_agrees"] = oracle == result.eul
        if oracle != result.eul:
            raise ConsistencyError(f"BEST sum gives {result.eul} but trail search gives {oracle}")
    payload["meta"] = _meta(config)
    return _render_mapping(payload, config.output_format, use_color())


def _estimate(config: RunConfig, source: Optional[str]) -> str:
    g = _read_graph(config, source)
    exact = None
    if config.options.get("exact", True):
        if g.E <= config.guards["max_orientation_edges"]:
            exact = eul_exact(g, threads=config.threads, max_edges=config.guards["max_orientation_edges"]).eul
        else:
            logger.info("skipping exact count: E=%d exceeds the orientation guard", g.E)
    report = estimate_eul(g, exact=exact, sigma=config.options.get("sigma", DEFAULT_SIGMA))
    payload = {**report.to_dict(), "exact": exact, "meta": _meta(config, sigma=config.options.get("sigma", DEFAULT_SIGMA))}
    return _render_mapping(payload, config.output_format, use_color())


def _spectrum(config: RunConfig, source: Optional[str]) -> str:
    g = _read_graph(config, source)
    summary = laplacian_spectrum(g)
    payload = {
        "n": g.n,
        "E": g.E,
        "eigenvalues": list(summary.eigenvalues),
        "lambda1": summary.lambda1,
        "lambda_max": summary.lambda_max,
        "sigma_hat": summary.sigma_hat,
        "t": spanning_tree_count(g),
        "meta": _meta(config),
    }
    return _render_mapping(payload, config.output_format, use_color())


def _exact_integral(config: RunConfig, g: Graph) -> Optional[float]:
    if g.E > config.guards["max_orientation_edges"]:
        logger.info("no exact S: E=%d exceeds the orientation guard", g.E)
        return None
    eul = eul_exact(g, threads=config.threads, max_edges=config.guards["max_orientation_edges"]).eul
    return integral_from_count(g, eul)


def _probe(config: RunConfig, source: Optional[str]) -> str:
    g = _read_graph(config, source)
    integrand = config.options.get("integrand", "tree")
    payload: Dict[str, Any] = {"n": g.n, "E": g.E, "integrand": integrand}

    if integrand == "gaussian":
        a = config.options.get("a", 0.5)
        half_width = gaussian_half_width(g, a)
        result = integrate_on_slice(
            g.n, gaussian_integrand(g, a), half_width, config.samples, config.seed, config.threads
        )
        reference = gaussian_reference(g, a)
        payload.update(
            epsilon=None,
            samples=config.samples,
            seed=config.seed,
            mean_re=result.value.real,
            mean_im=result.value.imag,
            std_error=result.std_error,
            reference=reference,
            ratio=result.value.real / reference,
            half_width=half_width,
            a=a,
        )
    else:
        replacement = None
        if integrand == "constant":
            def replacement(thetas: np.ndarray) -> np.ndarray:
                return np.ones(thetas.shape[0], dtype=complex)

        estimate = mc_S0(g, config.epsilon, config.samples, config.seed, config.threads, replacement)
        payload.update(estimate.to_dict())
        if integrand == "tree":
            exact = _exact_integral(config, g)
            payload["S_exact"] = exact
            payload["ratio"] = estimate.mean.real / exact if exact else None
            payload["s0_scale"] = s0_scale(g)
        else:
            payload["expected"] = math.pi * math.sqrt(g.n) * estimate.region_volume
    payload["meta"] = _meta(config, epsilon=config.epsilon, samples=config.samples)
    return _render_mapping(payload, config.output_format, use_color())


def _verify(config: RunConfig, source: Optional[str]) -> str:
    sigma = config.options.get("sigma")
    if config.input_path is not None or source is not None:
        g = _read_graph(config, source)
        corpus = [CorpusEntry(graph_id=config.input_path or "input", graph=g, seed=config.seed, p=float("nan"))]
    else:
        corpus = build_corpus(count=config.options.get("count", 100), first_seed=config.options.get("first_seed", 1))
    verdicts = run_suite(
        corpus,
        sigma=sigma,
        a=config.options.get("a", LEVEL_SEED_FRACTION),
        tail_degree=config.options.get("tail_degree", TAIL_DEGREE),
        log_det_trials=config.options.get("trials", LOG_DET_TRIALS),
        seed=config.seed,
        threads=config.threads,
    )
    summary = summarize(verdicts)
    meta = _meta(config, sigma=sigma if sigma is not None else "sigma_hat", corpus=len(corpus))

    summary_path = config.options.get("summary_path")
    if summary_path:
        with open(summary_path, "w", encoding="utf-8") as handle:
            handle.write(_csv_preamble(meta) + summary.to_csv(index=False, lineterminator="\n"))

    if config.output_format is OutputFormat.JSON:
        lines = [json.dumps({"meta": json_ready(meta)})]
        lines.extend(json.dumps(json_ready(v.to_dict())) for v in verdicts)
        return "\n".join(lines) + "\n"
    if config.output_format is OutputFormat.CSV:
        return _csv_preamble(meta) + summary.to_csv(index=False, lineterminator="\n")
    return summary.to_string(index=False) + "\n"


def report_thirty_percent(
    n_range: Tuple[int, int],
    p: float,
    count: int,
    seed: int,
    threads: int = 1,
) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Generate even graphs, compare estimate with exact count, summarise the band rate.

    Instance i draws its order from a generator seeded with ``seed`` and its
    graph with seed + i, so the table is a deterministic function of the
    arguments.

    Args:
        n_range: Inclusive (min, max) order
        p: Edge probability
        count: Number of instances, at least 1
        seed: Base seed
        threads: Worker threads for the ratio table

    Returns:
        tuple: (ratio table, summary with instances, in_band and band)
    """
    if count < 1:
        raise PreconditionError("count must be at least 1")
    rng = np.random.default_rng(seed)
    orders = [int(rng.integers(n_range[0], n_range[1] + 1)) for _ in range(count)]

    graphs: List[Tuple[str, Graph]] = []
    failures: Dict[int, Dict[str, Any]] = {}
    for i, n in enumerate(orders):
        graph_id = f"r{seed + i}-n{n}"
        try:
            graphs.append((graph_id, gen_even_graph(n, p, seed + i)))
        except GraphError as exc:
            logger.warning("instance %s not generated: %s", graph_id, exc.one_line())
            failures[i] = failure_row(graph_id, n, None, exc.code)

    built = iter(table_records(ratio_table(graphs, threads=threads)))
    rows = [failures[i] if i in failures else next(built) for i in range(count)]
    table = rows_to_table(rows)
    summary = band_summary(table, *BAND)
    summary["in_hypothesis"] = band_summary(table, *BAND, min_sigma_hat=0.5)
    return table, summary


def _report(config: RunConfig, source: Optional[str]) -> str:
    n_range = (config.options.get("n_min", 6), config.options.get("n_max", 10))
    p = config.options.get("p", 0.8)
    table, summary = report_thirty_percent(n_range, p, config.options.get("count", 20), config.seed, config.threads)
    meta = _meta(
        config,
        n_range=list(n_range),
        p=p,
        count=config.options.get("count", 20),
        band_protocol="at least 90% of ratios in [0.70, 1.30] is a calibrated acceptance rule",
    )
    if config.output_format is OutputFormat.JSON:
        document = {"meta": meta, "rows": table_records(table), "summary": summary}
        return json.dumps(json_ready(document), indent=2) + "\n"
    if config.output_format is OutputFormat.CSV:
        return _csv_preamble(meta) + table_to_csv(table) + "# summary: " + json.dumps(json_ready(summary)) + "\n"
    fraction = f"{summary['in_band']}/{summary['instances']} in band {summary['band']}"
    return table.to_string(index=False) + "\n" + colorize(fraction, "bold", use_color()) + "\n"


HANDLERS: Dict[Command, Callable[[RunConfig, Optional[str]], str]] = {
    Command.GEN: _gen,
    Command.COUNT: _count,
    Command.ESTIMATE: _estimate,
    Command.SPECTRUM: _spectrum,
    Command.PROBE: _probe,
    Command.VERIFY: _verify,
    Command.REPORT: _report,
}


def run(config: RunConfig, source: Optional[str] = None) -> RunResult:
    """Execute one command.

    Args:
        config: Parsed invocation
        source: Edge-list text to use instead of reading ``config.input_path``

    Returns:
        RunResult: Exit status, the report document on success, or a
        one-line ``CODE: message`` error
    """
    try:
        document = HANDLERS[config.command](config, source)
    except UsageError as exc:
        return RunResult(EXIT_USAGE, error=exc.one_line())
    except EulCountError as exc:
        return RunResult(EXIT_DOMAIN, error=exc.one_line())
    except OSError as exc:
        return RunResult(EXIT_USAGE, error=f"IO_ERROR: {exc}")
    return RunResult(EXIT_OK, document=document)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Base seed (recorded in every report)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None, help="Output format")
    common.add_argument("--out", "-o", default=None, help="Write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="Worker threads; results do not depend on it")
    common.add_argument("--verbose", "-v", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--max-edges", type=int, default=MAX_ORIENTATION_EDGES, help="Orientation enumeration guard")
    common.add_argument("--max-backtrack-edges", type=int, default=MAX_BACKTRACK_EDGES, help="Trail search guard")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="eulcount", description="Count and estimate Eulerian circuits of even graphs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="Generate a connected even graph")
    gen.add_argument("--family", choices=["random", "complete", "cycle", "path", "star", "bowtie"], default="random")
    gen.add_argument("--n", type=int, default=None, help="Vertex count")
    gen.add_argument("--p", type=float, default=0.5, help="Edge probability for the random model")

    count = commands.add_parser("count", parents=[common], help="Exact Eulerian circuit count")
    count.add_argument("--in", dest="input_path", required=True, help="Edge-list file, '-' for stdin")
    count.add_argument("--root", type=int, default=1, help="1-indexed root for the arborescence counts")
    count.add_argument("--oracle", action="store_true", help="Also run the backtracking oracle")

    estimate = commands.add_parser("estimate", parents=[common], help="Closed-form estimate and ratio to exact")
    estimate.add_argument("--in", dest="input_path", required=True, help="Edge-list file, '-' for stdin")
    estimate.add_argument("--sigma", type=float, default=DEFAULT_SIGMA, help="Reporting threshold for lambda1 >= sigma n")
    estimate.add_argument("--no-exact", dest="exact", action="store_false", help="Skip the exact count")

    spectrum = commands.add_parser("spectrum", parents=[common], help="Laplacian spectrum")
    spectrum.add_argument("--in", dest="input_path", required=True, help="Edge-list file, '-' for stdin")

    probe = commands.add_parser("probe", parents=[common], help="Monte Carlo probe of the dominant integral")
    probe.add_argument("--in", dest="input_path", required=True, help="Edge-list file, '-' for stdin")
    probe.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="Region exponent")
    probe.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Monte Carlo draws")
    probe.add_argument("--integrand", choices=["tree", "constant", "gaussian"], default="tree")
    probe.add_argument("--a", type=float, default=0.5, help="Gaussian scale for --integrand gaussian")

    verify = commands.add_parser("verify", parents=[common], help="Check the Laplacian inequalities on a corpus")
    verify.add_argument("--in", dest="input_path", default=None, help="Single graph instead of the corpus")
    verify.add_argument("--count", type=int, default=100, help="Corpus size")
    verify.add_argument("--first-seed", type=int, default=1, help="Seed of the first corpus graph")
    verify.add_argument("--sigma", type=float, default=None, help="Hypothesis level (default: each graph's lambda1/n)")
    verify.add_argument("--a", type=float, default=LEVEL_SEED_FRACTION, help="Seed fraction for the level function")
    verify.add_argument("--tail-degree", type=int, default=TAIL_DEGREE, help="Degree threshold for the tree tail")
    verify.add_argument("--trials", type=int, default=LOG_DET_TRIALS, help="Random contractions")
    verify.add_argument("--summary", dest="summary_path", default=None, help="Also write the summary CSV here")

    report = commands.add_parser("report", parents=[common], help="Estimate-versus-exact acceptance table")
    report.add_argument("--n-min", type=int, default=6)
    report.add_argument("--n-max", type=int, default=10)
    report.add_argument("--p", type=float, default=0.8)
    report.add_argument("--count", type=int, default=20)
    return parser


DEFAULT_FORMATS = {Command.VERIFY: OutputFormat.JSON, Command.REPORT: OutputFormat.CSV}

OPTION_KEYS = {
    Command.GEN: ("family", "n", "p"),
    Command.COUNT: ("root", "oracle"),
    Command.ESTIMATE: ("sigma", "exact"),
    Command.SPECTRUM: (),
    Command.PROBE: ("integrand", "a"),
    Command.VERIFY: ("count", "first_seed", "sigma", "a", "tail_degree", "trials", "summary_path"),
    Command.REPORT: ("n_min", "n_max", "p", "count"),
}


def config_from_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments; usage problems exit through parser.error (status 2)."""
    command = Command(args.command)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    options = {key: getattr(args, key) for key in OPTION_KEYS[command]}

    if command is Command.GEN:
        if args.family == "bowtie":
            options["n"] = 5
        elif args.n is None:
            parser.error("gen needs --n")
        elif args.n < GEN_MIN_ORDER[args.family]:
            parser.error(f"--family {args.family} needs --n >= {GEN_MIN_ORDER[args.family]}")
    if command is Command.COUNT:
        if args.root < 1:
            parser.error("--root is 1-indexed")
        options["root"] = args.root - 1
    if command is Command.PROBE and args.samples < MIN_SAMPLES:
        parser.error(f"--samples must be at least {MIN_SAMPLES}")
    if command in (Command.VERIFY, Command.REPORT) and args.count < 1:
        parser.error("--count must be at least 1")
    if command is Command.REPORT and args.n_min > args.n_max:
        parser.error("--n-min exceeds --n-max")

    fmt = args.format or DEFAULT_FORMATS.get(command, OutputFormat.JSON)
    guards = default_guards()
    guards["max_orientation_edges"] = args.max_edges
    guards["max_backtrack_edges"] = args.max_backtrack_edges
    return RunConfig(
        command=command,
        input_path=getattr(args, "input_path", None),
        seed=args.seed,
        epsilon=getattr(args, "epsilon", DEFAULT_EPSILON),
        samples=getattr(args, "samples", DEFAULT_SAMPLES),
        output_format=OutputFormat(fmt),
        threads=args.threads,
        guards=guards,
        options=options,
    )


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    config = config_from_args(parser, args)
    result = run(config)
    if result.error is not None:
        sys.stderr.write(f"error: {result.error}\n")
        return result.status
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(result.document)
    else:
        sys.stdout.write(result.document)
    return result.status
