"""
Metric reports shared by the scoring and benchmark commands.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

NOT_APPLICABLE = "N/A"


@dataclass
class MetricReport:
    """
    A named metric value.

    A value of None means the metric is not applicable (zero denominator).
    Ratio metrics are percentages of numerator over denominator.
    """

    name: str
    value: Optional[float]
    numerator: Optional[int] = None
    denominator: Optional[int] = None
    breakdown: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def ratio(cls, name: str, numerator: int, denominator: int) -> "MetricReport":
        value = None if denominator == 0 else 100.0 * numerator / denominator
        return cls(name, value, numerator, denominator)

    @property
    def applicable(self) -> bool:
        return self.value is not None

    def formatted(self, dp: int = 2) -> str:
        return NOT_APPLICABLE if self.value is None else f"{self.value:.{dp}f}"

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {"name": self.name, "value": self.value}
        if self.numerator is not None:
            data["numerator"] = self.numerator
            data["denominator"] = self.denominator
        if self.breakdown:
            data["breakdown"] = dict(self.breakdown)
        return data
