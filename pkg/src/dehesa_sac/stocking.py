"""Maps a covered-wooded-area percentage to the maximum admissible
livestock load per hectare, following the regulatory bracket table."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

DEFAULT_BRACKETS = (
    (10.0, 0.25),
    (15.0, 0.42),
    (20.0, 0.75),
    (30.0, 0.92),
    (35.0, 1.08),
    (float("inf"), 1.25),
)


@dataclass(frozen=True)
class StockingTable:
    """Ordered (sac upper bound %, animals/ha) brackets; the last bound
    is infinite and covers everything above the previous one."""

    brackets: tuple[tuple[float, float], ...] = DEFAULT_BRACKETS

    def __post_init__(self):
        bounds = [b for b, _ in self.brackets]
        loads = [l for _, l in self.brackets]
        if len(self.brackets) < 2:
            raise ValueError("need at least two brackets")
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ValueError("bracket bounds must be strictly increasing")
        if any(l2 < l1 for l1, l2 in zip(loads, loads[1:])):
            raise ValueError("loads must be non-decreasing")

    @classmethod
    def from_json(cls, path) -> "StockingTable":
        pairs = json.loads(Path(path).read_text())
        brackets = tuple(
            (float("inf") if b is None else float(b), float(l)) for b, l in pairs
        )
        return cls(brackets=brackets)

    def _check(self, sac_percent: float) -> None:
        if not 0 <= sac_percent <= 100:
            raise ValueError(f"SAC percentage must be in [0, 100], got {sac_percent}")

    def load_step(self, sac_percent: float) -> float:
        """Load of the smallest bracket whose upper bound covers the SAC."""
        self._check(sac_percent)
        for bound, load in self.brackets:
            if sac_percent <= bound:
                return load
        return self.brackets[-1][1]

    def load_interpolated(self, sac_percent: float) -> float:
        """Piecewise-linear load through the finite bracket bounds, clamped
        to the first load below the first bound and to the top load above
        the last finite bound."""
        self._check(sac_percent)
        knots = [(b, l) for b, l in self.brackets if b != float("inf")]
        if sac_percent <= knots[0][0]:
            return knots[0][1]
        if sac_percent >= knots[-1][0]:
            return self.brackets[-1][1] if sac_percent > knots[-1][0] else knots[-1][1]
        for (b1, l1), (b2, l2) in zip(knots, knots[1:]):
            if sac_percent <= b2:
                t = (sac_percent - b1) / (b2 - b1)
                return l1 + t * (l2 - l1)
        return knots[-1][1]


_DEFAULT_TABLE = StockingTable()


def load_step(sac_percent: float) -> float:
    return _DEFAULT_TABLE.load_step(sac_percent)


def load_interpolated(sac_percent: float) -> float:
    return _DEFAULT_TABLE.load_interpolated(sac_percent)
