from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

Cell = Union[float, int, str]


class RatePoint(BaseModel):
    rate: float = Field(..., ge=0.0, description="Achievable rate in bits per symbol")
    std_error: float = Field(0.0, ge=0.0, description="Monte Carlo standard error in bits")
    m: int = Field(..., ge=2, description="Pilot period M")
    mu_idle: float = Field(..., ge=0.0, le=1.0)
    mu_busy: float = Field(..., ge=0.0, le=1.0)


@dataclass(frozen=True)
class RateSurface:
    """Rates on the (M, μ0, μ1) grid; ``rates[a, b, c]`` belongs to (m[a], mu0[b], mu1[c])."""

    m_values: np.ndarray
    mu0_values: np.ndarray
    mu1_values: np.ndarray
    rates: np.ndarray
    std_errors: np.ndarray

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.rates.shape  # type: ignore[return-value]

    def point(self, a: int, b: int, c: int) -> RatePoint:
        return RatePoint(
            rate=max(float(self.rates[a, b, c]), 0.0),
            std_error=float(self.std_errors[a, b, c]),
            m=int(self.m_values[a]),
            mu_idle=float(self.mu0_values[b]),
            mu_busy=float(self.mu1_values[c]),
        )

    def argmax(self) -> Tuple[int, int, int]:
        """First maximum in (M, μ0, μ1) order, so ties go to the smaller coordinates."""
        flat = int(np.argmax(self.rates))
        a, b, c = np.unravel_index(flat, self.rates.shape)
        return int(a), int(b), int(c)

    def points(self) -> List[RatePoint]:
        a_count, b_count, c_count = self.rates.shape
        return [
            self.point(a, b, c)
            for a in range(a_count)
            for b in range(b_count)
            for c in range(c_count)
        ]


@dataclass(frozen=True)
class Optimum:
    m_star: int
    mu0_star: float
    mu1_star: float
    rate: float
    std_error: float
    rate_surface: RateSurface = field(repr=False)


class ResultTable(BaseModel):
    """Rectangular table of sweep results; every row has one cell per column."""

    columns: List[str]
    rows: List[List[Cell]] = Field(default_factory=list)
    title: Optional[str] = None

    @model_validator(mode="after")
    def _rectangular(self) -> "ResultTable":
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {index} has {len(row)} cells, expected {width}")
        return self

    def column(self, name: str) -> List[Cell]:
        position = self.columns.index(name)
        return [row[position] for row in self.rows]

    def where(self, **matches: Cell) -> "ResultTable":
        """Rows whose named columns equal the given values."""
        positions = {self.columns.index(name): value for name, value in matches.items()}
        rows = [
            row for row in self.rows if all(row[i] == value for i, value in positions.items())
        ]
        return ResultTable(columns=list(self.columns), rows=rows, title=self.title)
