import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from components.counting import eul_exact
from components.errors import EulCountError, PreconditionError
from components.exact_algebra import spanning_tree_count
from components.graph_core import Graph, classify
from components.spectral import laplacian_spectrum
from components.utils import json_ready, log2_factorial, log2_int

logger = logging.getLogger(__name__)

DEFAULT_SIGMA = 0.5
BAND = (0.70, 1.30)
TABLE_COLUMNS = ["id", "n", "E", "lambda1", "sigma_hat", "exact", "estimate", "ratio", "status"]


@dataclass(frozen=True)
class EstimateReport:
    n: int
    E: int
    log2_estimate: float
    estimate: float
    exact_log2: Optional[float]
    ratio: Optional[float]
    lambda1: float
    sigma_hat: float
    in_hypothesis: bool
    dense_degree: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _linear(log2_value: float) -> float:
    # 2**1024 overflows a double
    if log2_value >= 1024:
        return math.inf
    return 2.0 ** log2_value


def log2_estimate_from(n: int, E: int, degrees: Sequence[int], trees: int) -> float:
    """log2 of 2^(E-(n-1)/2) pi^(-(n-1)/2) sqrt(t) prod_j (d_j/2 - 1)!."""
    half_rank = (n - 1) / 2.0
    return (
        (E - half_rank)
        - half_rank * math.log2(math.pi)
        + 0.5 * log2_int(trees)
        + sum(log2_factorial(d // 2 - 1) for d in degrees)
    )


def estimate_eul(g: Graph, exact: Optional[int] = None, sigma: float = DEFAULT_SIGMA) -> EstimateReport:
    """Closed-form estimate of Eul(G) from E, n, t(G) and the degrees.

    Args:
        g: Connected even graph, n >= 2
        exact: Exact Eul(G), when known, for the ratio
        sigma: Reporting threshold for the lambda1 >= sigma * n hypothesis

    Returns:
        EstimateReport: Estimate in log2 and linear space plus spectral context
    """
    if g.n < 2:
        raise PreconditionError("estimate needs at least two vertices")
    report = classify(g)
    if not report.all_even:
        raise PreconditionError("graph has odd-degree vertices", code="ODD_DEGREE")
    trees = spanning_tree_count(g)
    if trees == 0:
        raise PreconditionError("graph is disconnected, t(G) = 0", code="NOT_CONNECTED")

    log2_est = log2_estimate_from(g.n, g.E, g.degrees, trees)
    spectrum = laplacian_spectrum(g)

    exact_log2 = None
    ratio = None
    if exact is not None:
        exact_log2 = log2_int(exact)
        ratio = 2.0 ** (log2_est - exact_log2)

    return EstimateReport(
        n=g.n,
        E=g.E,
        log2_estimate=log2_est,
        estimate=_linear(log2_est),
        exact_log2=exact_log2,
        ratio=ratio,
        lambda1=spectrum.lambda1,
        sigma_hat=spectrum.sigma_hat,
        in_hypothesis=spectrum.sigma_hat >= sigma,
        dense_degree=min(g.degrees) > g.n / 2,
    )


def kn_asymptotic(n: int) -> float:
    """log2 of the leading term of the complete-graph asymptotic, n odd.

    2^((n-1)^2/2) pi^(-(n-1)/2) n^((n-2)/2) (((n-1)/2 - 1)!)^n
    """
    if n < 3 or n % 2 == 0:
        raise PreconditionError(f"complete-graph formula needs odd n >= 3, got {n}", code="EVEN_ORDER")
    return (
        (n - 1) ** 2 / 2.0
        - (n - 1) / 2.0 * math.log2(math.pi)
        + (n - 2) / 2.0 * math.log2(n)
        + n * log2_factorial((n - 1) // 2 - 1)
    )


GraphEntry = Union[Graph, Tuple[str, Graph]]


def failure_row(graph_id: str, n: Optional[int], E: Optional[int], code: str) -> Dict[str, Any]:
    """A table row for an instance that produced no numbers."""
    return {"id": graph_id, "n": n, "E": E, "lambda1": None, "sigma_hat": None,
            "exact": None, "estimate": None, "ratio": None, "status": code}


def _row(entry: Tuple[str, Graph], threads: int) -> Dict[str, Any]:
    graph_id, g = entry
    try:
        count = eul_exact(g, threads=threads)
        report = estimate_eul(g, exact=count.eul)
    except EulCountError as exc:
        logger.warning("ratio_table row %s failed: %s", graph_id, exc.one_line())
        return failure_row(graph_id, g.n, g.E, exc.code)
    return {
        "id": graph_id,
        "n": g.n,
        "E": g.E,
        "lambda1": report.lambda1,
        "sigma_hat": report.sigma_hat,
        "exact": count.eul,
        "estimate": report.estimate,
        "ratio": report.ratio,
        "status": "ok",
    }


def rows_to_table(rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """DataFrame with the fixed column order; exact stays a Python int."""
    table = pd.DataFrame(list(rows), columns=TABLE_COLUMNS)
    # exact counts can exceed int64
    table["exact"] = pd.Series([row["exact"] for row in rows], dtype=object, index=table.index)
    for column in ("n", "E"):
        table[column] = table[column].astype("Int64")
    return table


def ratio_table(gs: Sequence[GraphEntry], threads: int = 1) -> pd.DataFrame:
    """Exact-versus-estimate table, one row per input graph.

    Rows that fail keep their id, n and E and carry the error code in
    ``status``.

    Args:
        gs: Graphs, optionally paired with an id
        threads: Rows computed concurrently; row order follows the input

    Returns:
        pandas.DataFrame: Columns id, n, E, lambda1, sigma_hat, exact, estimate, ratio, status
    """
    entries = [item if isinstance(item, tuple) else (f"g{i}", item) for i, item in enumerate(gs)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda e: _row(e, 1), entries))
    else:
        rows = [_row(e, 1) for e in entries]
    return rows_to_table(rows)


def table_to_csv(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, columns=TABLE_COLUMNS, lineterminator="\n")


def table_records(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Rows as plain dicts with missing values as None and exact kept as an int."""
    records = []
    for row in table.to_dict(orient="records"):
        clean = {}
        for key in TABLE_COLUMNS:
            value = row.get(key)
            if value is pd.NA or (isinstance(value, float) and math.isnan(value)):
                value = None
            elif key in ("n", "E") and value is not None:
                value = int(value)
            clean[key] = value
        records.append(clean)
    return records


def table_to_json(table: pd.DataFrame) -> str:
    return json.dumps(json_ready(table_records(table)), indent=2)


def band_summary(
    table: pd.DataFrame,
    low: float = BAND[0],
    high: float = BAND[1],
    min_sigma_hat: Optional[float] = None,
) -> Dict[str, Any]:
    """Share of ratios that fall inside [low, high].

    Instances are the rows that produced a ratio; ``rows`` counts every row
    considered, failed ones included. With ``min_sigma_hat`` only rows with
    sigma_hat at or above it are considered.
    """
    rows = table
    if min_sigma_hat is not None:
        sigma_hat = pd.to_numeric(rows["sigma_hat"], errors="coerce")
        rows = rows[sigma_hat >= min_sigma_hat]
    ratios = pd.to_numeric(rows.loc[rows["status"] == "ok", "ratio"], errors="coerce").dropna()
    in_band = int(((ratios >= low) & (ratios <= high)).sum())
    instances = int(len(ratios))
    return {
        "rows": int(len(rows)),
        "instances": instances,
        "in_band": in_band,
        "band": [low, high],
        "fraction": in_band / instances if instances else 0.0,
    }
