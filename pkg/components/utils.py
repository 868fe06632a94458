import math
import os
import sys
from fractions import Fraction
from typing import Any, Dict, Optional, Union

from components import __version__

LN2 = math.log(2.0)

COUNTING_CONVENTION = (
    "Eulerian circuits are directed closed edge-sequences counted up to rotation; "
    "a circuit and its reversal are counted separately."
)

Number = Union[int, float, Fraction]


def log2_factorial(k: int) -> float:
    """Base-2 logarithm of k! via the log-gamma function.

    Args:
        k: Nonnegative integer

    Returns:
        float: log2(k!)
    """
    if k < 0:
        raise ValueError(f"factorial of negative number {k}")
    return math.lgamma(k + 1) / LN2


def log2_int(value: int) -> float:
    """Base-2 logarithm of an arbitrary-precision positive integer."""
    if value <= 0:
        return -math.inf
    # math.log2 accepts ints of any size without converting to float first
    return math.log2(value)


def to_float(value: Number) -> float:
    """Convert an exact value to float, saturating to +/-inf instead of raising."""
    try:
        return float(value)
    except OverflowError:
        return math.inf if value > 0 else -math.inf


def exact_ratio(num: int, den: int) -> float:
    if den == 0:
        return math.inf
    return to_float(Fraction(num, den))


def report_meta(seed: Optional[int] = None, guards: Optional[Dict[str, Any]] = None, **extra: Any) -> Dict[str, Any]:
    """Metadata block embedded in every report.

    Args:
        seed: Seed used by the run, if any
        guards: Size limits in force
        **extra: Additional fields (generator defaults, sigma, ...)

    Returns:
        dict: Metadata with tool version, seed, guards and the counting convention
    """
    meta = {
        "tool": "eulcount",
        "version": __version__,
        "seed": seed,
        "guards": dict(guards or {}),
        "convention": COUNTING_CONVENTION,
    }
    meta.update(extra)
    return meta


def use_color(stream=None) -> bool:
    """Decide whether text output may use ANSI colour.

    Controlled by the EULCOUNT_COLOR environment variable (always, never, auto).
    """
    mode = os.getenv("EULCOUNT_COLOR", "auto").strip().lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    stream = stream or sys.stdout
    return hasattr(stream, "isatty") and stream.isatty()


def colorize(text: str, color: str, enabled: bool) -> str:
    codes = {"green": "32", "red": "31", "yellow": "33", "bold": "1"}
    if not enabled or color not in codes:
        return text
    return f"\033[{codes[color]}m{text}\033[0m"


def json_ready(value: Any) -> Any:
    """Recursively convert a report payload into strict-JSON values.

    Non-finite floats become None; numpy scalars and arrays become Python
    numbers and lists. Python ints of any size pass through unchanged.
    """
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if hasattr(value, "tolist"):
        return json_ready(value.tolist())
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return {"re": json_ready(value.real), "im": json_ready(value.imag)}
    return value
