"""
Averaging of per-subset scores and the golden-table check.
"""

import json
import os
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Optional, Sequence

from speechlm_runtime.errors import DatasetError, InputError

GOLDEN_TABLES_PATH = os.path.join(os.path.dirname(__file__), "data", "golden_tables.json")


def mean_of_subsets(values: Sequence[float], round_dp: int = 2) -> float:
    """
    Unweighted mean rounded half away from zero.

    Values go through their decimal string form, so 38.835 rounds to 38.84
    instead of drifting with binary floating point.
    """
    if not values:
        raise InputError("mean_of_subsets needs at least one value")
    total = sum(Decimal(str(v)) for v in values)
    mean = total / Decimal(len(values))
    return float(mean.quantize(Decimal(1).scaleb(-round_dp), rounding=ROUND_HALF_UP))


@dataclass
class GoldenRow:
    table: str
    system: str
    values: List[float]
    reported: float
    derived: float

    @property
    def matches(self) -> bool:
        return self.derived == self.reported


def load_golden_tables(path: Optional[str] = None) -> List[Dict[str, object]]:
    path = path or GOLDEN_TABLES_PATH
    if not os.path.exists(path):
        raise DatasetError(f"golden table file not found: {path}")
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return data["tables"]


def derive_golden_rows(path: Optional[str] = None) -> List[GoldenRow]:
    """Recompute every reported average in the golden-table file."""
    rows = []
    for table in load_golden_tables(path):
        dp = int(table.get("round_dp", 2))
        for row in table["rows"]:
            if len(row["values"]) != len(table["columns"]):
                raise DatasetError(
                    f"{table['name']}/{row['system']}: {len(row['values'])} values for {len(table['columns'])} columns"
                )
            rows.append(
                GoldenRow(
                    table["name"],
                    row["system"],
                    list(row["values"]),
                    float(row["reported"]),
                    mean_of_subsets(row["values"], dp),
                )
            )
    return rows
