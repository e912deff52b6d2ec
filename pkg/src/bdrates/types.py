"""Core domain types: rate pairs and discretely observed count paths.

All estimators in this package consume a :class:`Panel`, a collection of
independently observed trajectories of the same population process. Types
validate eagerly so numerical code can assume well-formed input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError, DomainError

__all__ = ["Rates", "Trajectory", "Panel"]


@dataclass(frozen=True)
class Rates:
    """Per-individual birth and death rates of the population process.

    Both rates are nonnegative and at least one is positive; a frozen
    process (both zero) is rejected.
    """

    lam: float
    mu: float

    def __post_init__(self):
        lam, mu = float(self.lam), float(self.mu)
        if not (math.isfinite(lam) and math.isfinite(mu)):
            raise DomainError(f"rates must be finite, got lam={self.lam}, mu={self.mu}")
        if lam < 0.0 or mu < 0.0:
            raise DomainError(f"rates must be nonnegative, got lam={lam}, mu={mu}")
        if lam + mu <= 0.0:
            raise DomainError("degenerate process: lam + mu must be positive")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def omega(self) -> float:
        """Net growth rate, birth minus death."""
        return self.lam - self.mu

    @property
    def xi(self) -> float:
        """Total event rate per individual, birth plus death."""
        return self.lam + self.mu


@dataclass(frozen=True)
class Trajectory:
    """One population path observed at finitely many time points.

    Invariants: at least two observations, strictly increasing times,
    nonnegative integer counts, a positive initial count, and absorption
    at zero (a zero count is never followed by a positive one).
    """

    times: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        counts = tuple(self.counts)
        if len(times) != len(counts):
            raise DataError(
                f"times and counts must have equal length, got {len(times)} and {len(counts)}"
            )
        if len(times) < 2:
            raise DataError("a trajectory needs at least two observations")
        for t in times:
            if not math.isfinite(t):
                raise DataError(f"non-finite observation time {t}")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise DataError(f"observation times must strictly increase ({a} then {b})")
        for k in counts:
            if not isinstance(k, (int,)) or isinstance(k, bool):
                raise DataError(f"counts must be integers, got {k!r}")
            if k < 0:
                raise DataError(f"counts must be nonnegative, got {k}")
        if counts[0] < 1:
            raise DataError("initial count must be positive")
        for prev, cur in zip(counts, counts[1:]):
            if prev == 0 and cur > 0:
                raise DataError("zero is absorbing: a zero count cannot be followed by a positive one")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_transitions(self) -> int:
        return len(self.times) - 1

    def gaps(self) -> tuple[float, ...]:
        """Inter-observation time gaps, all positive by construction."""
        return tuple(b - a for a, b in zip(self.times, self.times[1:]))


@dataclass(frozen=True)
class Panel:
    """A nonempty collection of independent trajectories."""

    trajectories: tuple[Trajectory, ...]

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        if len(trajs) < 1:
            raise DataError("a panel needs at least one trajectory")
        for tr in trajs:
            if not isinstance(tr, Trajectory):
                raise DataError(f"panel entries must be Trajectory, got {type(tr).__name__}")
        object.__setattr__(self, "trajectories", trajs)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, index):
        return self.trajectories[index]

    @property
    def n_transitions(self) -> int:
        return sum(tr.n_transitions for tr in self.trajectories)

    def all_gaps(self) -> list[float]:
        out: list[float] = []
        for tr in self.trajectories:
            out.extend(tr.gaps())
        return out

    def equal_spacing(self, tolerance: float = 1e-9) -> bool:
        """Whether all gaps, within and across trajectories, agree to the
        given relative tolerance."""
        gaps = self.all_gaps()
        lo, hi = min(gaps), max(gaps)
        mid = 0.5 * (lo + hi)
        return (hi - lo) <= tolerance * mid

    def common_gap(self, tolerance: float = 1e-9) -> float:
        """The shared inter-observation gap; raises if spacing is unequal."""
        if not self.equal_spacing(tolerance):
            gaps = self.all_gaps()
            raise DataError(
                f"panel is not equally spaced: gaps range [{min(gaps)}, {max(gaps)}]"
            )
        gaps = self.all_gaps()
        return sum(gaps) / len(gaps)
