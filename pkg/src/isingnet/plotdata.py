"""Tidy CSV tables behind the figure families.

Each family has a fixed column schema. Rows are sorted on the schema's key
columns so output is deterministic.
"""

from __future__ import annotations

from .errors import UsageError
from .runner import write_csv

SCHEMAS = {
    "w1": ("tau", "B", "w1_mean", "w1_boot_lo", "w1_boot_hi", "process"),
    "bounds": ("tau", "B", "w1_pair", "w1_pair_se", "bound_one", "bound_two", "kl_functional",
               "tv_bound", "contraction"),
    "sk": ("tau", "mode", "B", "energy_error", "energy_error_se"),
    "ttt": ("frequency_hz", "mode", "B", "graph", "ttt_seconds_or_unreachable"),
    "ett": ("frequency_hz", "e_bit", "mode", "B", "ett_joules_or_unreachable"),
    "cut_error": ("frequency_hz", "mode", "B", "graph", "cut_error_mean"),
}
ALIASES = {"fig5": "w1", "fig6": "bounds", "fig7": "sk", "fig8": "ttt", "fig9": "ett"}
_SORT = {
    "w1": ("process", "B", "tau"),
    "bounds": ("B", "tau"),
    "sk": ("mode", "B", "tau"),
    "ttt": ("graph", "mode", "B", "frequency_hz"),
    "ett": ("mode", "B", "e_bit", "frequency_hz"),
    "cut_error": ("graph", "mode", "B", "frequency_hz"),
}


def schema(family: str) -> tuple[str, ...]:
    fam = ALIASES.get(family, family)
    if fam not in SCHEMAS:
        raise UsageError(f"unknown figure family {family!r}; known: {', '.join(sorted(SCHEMAS))}")
    return SCHEMAS[fam]


def _key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0.0, str(v))


def emit_plotdata(records: list[dict], family: str, path: str | None = None) -> str:
    """Write ``records`` as the CSV of ``family``; returns the CSV text.

    Raises:
        UsageError: if any record lacks a schema column.
    """
    fam = ALIASES.get(family, family)
    cols = schema(fam)
    missing = sorted({c for r in records for c in cols if c not in r})
    if missing:
        raise UsageError(f"records are missing metrics for {fam}: {', '.join(missing)}")
    rows = sorted(records, key=lambda r: tuple(_key(r[c]) for c in _SORT[fam]))
    return write_csv(path, cols, ([r[c] for c in cols] for r in rows))
