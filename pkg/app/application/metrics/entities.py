"""Quality report for a compact dataset."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Field order of the key=value report and of the CSV row.
REPORT_KEYS: tuple[str, ...] = (
    "method",
    "frame_count",
    "frame_length",
    "metrics_level",
    "maer",
    "apr",
    "op",
    "ucl",
    "epsilon",
    "k_sigma",
    "within_ucl",
    "total",
    "note",
)

EMPTY_DATASET = "empty dataset"
NEGATIVE_REFERENCES = "negative references"


class QualityReport(BaseModel):
    """MAER / APR / OP plus the inputs that produced them.

    `apr` and `ucl` are None only for an empty dataset; `maer` is None when no
    references were supplied and `op` when no confusion summary was.
    """

    model_config = ConfigDict(frozen=True)

    # negative references can make MAER negative; they are flagged in `notes`
    maer: float | None = None
    apr: float | None = Field(default=None, ge=0.0, le=1.0)
    op: float | None = Field(default=None, ge=0.0, le=1.0)
    ucl: float | None = None
    epsilon: float = Field(gt=0.0)
    k_sigma: float = Field(gt=0.0)
    within_ucl: int = Field(default=0, ge=0)
    total: int = Field(default=0, ge=0)
    metrics_level: Literal["sample", "frame"] = "sample"
    method: str | None = None
    frame_count: int | None = Field(default=None, ge=0)
    frame_length: int | None = Field(default=None, ge=1)
    notes: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _counts_consistent(self) -> QualityReport:
        if self.within_ucl > self.total:
            raise ValueError("within_ucl cannot exceed total")
        return self

    @property
    def counts(self) -> tuple[int, int]:
        return self.within_ucl, self.total

    def as_row(self) -> dict[str, object]:
        """Report values keyed by REPORT_KEYS (None for absent values)."""
        values = self.model_dump()
        values["note"] = "; ".join(self.notes) or None
        return {key: values.get(key) for key in REPORT_KEYS}
