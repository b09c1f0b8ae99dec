"""Path parameters, coding policies and the admissibility conditions on code rates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


class InfeasiblePolicy(ValueError):
    """No code rate on the chosen path can make the policy admissible."""


@dataclass(frozen=True)
class PathSpec:
    rate: float  # packets per second
    erasure: float = 0.0
    prop_delay: float = 0.0  # one-way, seconds

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"path rate must be positive, got {self.rate}")
        if not 0 <= self.erasure < 1:
            raise ValueError(f"erasure probability must be in [0, 1), got {self.erasure}")
        if not self.prop_delay >= 0:
            raise ValueError(f"propagation delay must be >= 0, got {self.prop_delay}")

    @property
    def packet_time(self) -> float:
        return 1.0 / self.rate

    @property
    def rtt(self) -> float:
        # Feedback packets are taken to have negligible transmission time.
        return self.packet_time + 2 * self.prop_delay


def rate_from_interval(l: int | None) -> float:
    """Code rate ``(l - 1) / l``; ``None`` (never code) is rate 1."""
    if l is None:
        return 1.0
    if l < 1:
        raise ValueError(f"coded interval must be >= 1, got {l}")
    return (l - 1) / l


def interval_from_rate(c: float) -> int | None:
    """Coded interval ``1 / (1 - c)``, rounded up to an integer when not integral.

    Returns ``None`` for ``c == 1`` (no coded packets at all).  Rounding up adds
    redundancy, so an admissible rate stays admissible.
    """
    if not 0 <= c <= 1:
        raise ValueError(f"code rate must be in [0, 1], got {c}")
    if c == 1:
        return None
    exact = 1.0 / (1.0 - c)
    nearest = round(exact)
    if math.isclose(exact, nearest, rel_tol=1e-9, abs_tol=1e-9):
        return int(nearest)
    return math.ceil(exact)


@dataclass(frozen=True)
class CodingPolicy:
    """Per-path coded intervals; ``None`` marks a path that carries no redundancy."""

    intervals: tuple[int | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        for l in self.intervals:
            if l is not None and (int(l) != l or l < 1):
                raise ValueError(f"coded interval must be an integer >= 1 or None, got {l!r}")

    @classmethod
    def from_rates(cls, rates: Sequence[float]) -> CodingPolicy:
        return cls(tuple(interval_from_rate(c) for c in rates))

    @classmethod
    def single_coded(cls, num_paths: int, coded_path: int, interval: int) -> CodingPolicy:
        intervals: list[int | None] = [None] * num_paths
        intervals[coded_path] = interval
        return cls(tuple(intervals))

    @property
    def code_rates(self) -> tuple[float, ...]:
        return tuple(rate_from_interval(l) for l in self.intervals)

    @property
    def coded_paths(self) -> tuple[int, ...]:
        return tuple(i for i, l in enumerate(self.intervals) if l is not None)

    @property
    def coded_path(self) -> int | None:
        """The redundancy-carrying path when there is exactly one."""
        coded = self.coded_paths
        return coded[0] if len(coded) == 1 else None


def admissibility_margin(code_rates: Sequence[float], paths: Sequence[PathSpec]) -> float:
    """Coded-packet arrival rate minus the rate needed to cover losses.

    Positive exactly when the aggregate rate condition on code rates holds;
    written as arrivals-minus-losses to keep the sign obvious.
    """
    if len(code_rates) != len(paths):
        raise ValueError(f"{len(code_rates)} code rates for {len(paths)} paths")
    supplied = sum((1 - p.erasure) * (1 - c) * p.rate for c, p in zip(code_rates, paths))
    needed = sum((1 - p.erasure) * p.erasure * p.rate for p in paths)
    return supplied - needed


def is_admissible(policy: CodingPolicy, paths: Sequence[PathSpec]) -> bool:
    rates = policy.code_rates
    if any(not 0 <= c <= 1 for c in rates):
        return False
    return admissibility_margin(rates, paths) > 0


def max_coded_path_rate(paths: Sequence[PathSpec], coded_path: int) -> float:
    """Supremum of admissible code rates when only ``coded_path`` carries redundancy.

    Raises :class:`InfeasiblePolicy` when the bound is not positive.
    """
    if not 0 <= coded_path < len(paths):
        raise IndexError(f"coded path {coded_path} out of range for {len(paths)} paths")
    p = paths[coded_path]
    losses = sum((1 - q.erasure) * q.erasure * q.rate for q in paths)
    bound = 1 - losses / ((1 - p.erasure) * p.rate)
    if bound <= 0:
        raise InfeasiblePolicy(
            f"path {coded_path} cannot carry enough redundancy: rate bound {bound:.6g} <= 0"
        )
    return bound


def check_policy(policy: CodingPolicy, paths: Sequence[PathSpec]) -> list[str]:
    """Human-readable reasons the policy is not admissible (empty when it is)."""
    problems = []
    if len(policy.intervals) != len(paths):
        return [f"policy has {len(policy.intervals)} intervals for {len(paths)} paths"]
    for i, c in enumerate(policy.code_rates):
        if not 0 <= c <= 1:
            problems.append(f"path {i}: code rate {c} outside [0, 1]")
    if all(l == 1 for l in policy.intervals):
        problems.append("no path carries info packets: every coded interval is 1")
    margin = admissibility_margin(policy.code_rates, paths)
    if margin <= 0:
        per_path = ", ".join(
            f"path {i}: coded {(1 - p.erasure) * (1 - c) * p.rate:.6g}/s vs lost "
            f"{(1 - p.erasure) * p.erasure * p.rate:.6g}/s"
            for i, (c, p) in enumerate(zip(policy.code_rates, paths))
        )
        problems.append(
            "aggregate rate condition violated: coded-packet arrival rate does not exceed "
            f"the loss rate (margin {margin:.6g}; {per_path})"
        )
    coded = policy.coded_path
    if coded is not None and not problems:
        try:
            bound = max_coded_path_rate(paths, coded)
        except InfeasiblePolicy as exc:
            problems.append(f"single-coded-path bound: {exc}")
        else:
            if policy.code_rates[coded] >= bound:
                problems.append(
                    f"single-coded-path bound: code rate {policy.code_rates[coded]:.6g} on "
                    f"path {coded} must be below {bound:.6g}"
                )
    return problems
