"""Closed-form in-order delivery delay under a Poisson loss approximation.

Time is measured in *coded slots* (one coded interval on the redundancy
path) for the renewal process, and the delay formulas return packet slots of
the coded path, i.e. units of ``1 / r_c`` seconds.  ``LossModel.slot_seconds``
converts.

Every coded slot sees ``Poisson(lam)`` losses and delivers one extra degree of
freedom, so the time ``X`` between decode events is a busy period of an M/D/1
queue; the pmf and moments of ``X`` below follow from the Borel-Tanner law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .policy import CodingPolicy, PathSpec, check_policy

TAIL_TOL = 1e-12


class AnalysisDomainError(ValueError):
    """Parameters outside the region where the delay analysis is finite."""


@dataclass(frozen=True)
class LossModel:
    lam: float
    alphas: tuple[float, ...]
    interval: int
    coded_path: int
    coded_rate: float
    coded_erasure: float

    @property
    def slot_seconds(self) -> float:
        """Duration of one packet slot on the coded path."""
        return 1.0 / self.coded_rate


@dataclass(frozen=True)
class RenewalMoments:
    mean: float
    second: float
    w_mean: float

    @property
    def variance(self) -> float:
        return self.second - self.mean**2


def build_loss_model(paths: Sequence[PathSpec], policy: CodingPolicy) -> LossModel:
    coded = policy.coded_path
    if coded is None:
        raise AnalysisDomainError(
            f"analysis needs exactly one redundancy path, policy codes on {policy.coded_paths}"
        )
    problems = check_policy(policy, paths)
    if problems:
        raise AnalysisDomainError("; ".join(problems))
    l_c = policy.intervals[coded]
    r_c = paths[coded].rate
    eps_c = paths[coded].erasure
    alphas = tuple((l_c - 1) * p.rate / r_c for p in paths)
    lam = eps_c + sum(a * p.erasure for a, p in zip(alphas, paths))
    if lam >= 1:
        raise AnalysisDomainError(f"expected losses per coded slot lam={lam:.6g} >= 1; delay diverges")
    return LossModel(lam, alphas, l_c, coded, r_c, eps_c)


def poisson_pmf(y: int, lam: float) -> float:
    if y < 0:
        return 0.0
    if lam == 0:
        return 1.0 if y == 0 else 0.0
    return math.exp(y * math.log(lam) - lam - math.lgamma(y + 1))


def borel_tanner_pmf(z: int, y: int, lam: float) -> float:
    """P(busy period serves ``z`` customers | it starts with ``y``), arrival rate ``lam``."""
    if y < 1:
        raise ValueError("Borel-Tanner needs at least one initial customer")
    if z < y:
        return 0.0
    n = z - y
    if lam == 0:
        return 1.0 if n == 0 else 0.0
    log_p = math.log(y) + (n - 1) * math.log(z) + n * math.log(lam) - z * lam - math.lgamma(n + 1)
    return math.exp(log_p)


def _check_lam(lam: float) -> None:
    if not 0 <= lam < 1:
        raise AnalysisDomainError(f"need 0 <= lam < 1, got {lam}")


def x_pmf(x: int, lam: float) -> float:
    """P(X = x): coded slots between consecutive decode events."""
    _check_lam(lam)
    if x == 0:
        return math.exp(-lam)
    if x == 1:
        return lam * math.exp(-lam)
    if x < 0 or lam == 0:
        return 0.0
    # (x-1)^(x-2) / (x (x-2)!) overflows doubles near x = 170; stay in logs.
    log_p = (x - 2) * math.log(x - 1) - math.log(x) - math.lgamma(x - 1) + x * (math.log(lam) - lam)
    return math.exp(log_p)


def w_pmf(w: int, lam: float) -> float:
    """P(W = w) for ``W = max(X, 1)``."""
    if w == 1:
        _check_lam(lam)
        return (lam + 1) * math.exp(-lam)
    if w < 1:
        return 0.0
    return x_pmf(w, lam)


def x_pmf_array(n: int, lam: float) -> np.ndarray:
    """``[x_pmf(0), ..., x_pmf(n - 1)]`` computed in one vectorized pass."""
    _check_lam(lam)
    out = np.zeros(n)
    if n > 0:
        out[0] = math.exp(-lam)
    if n > 1:
        out[1] = lam * math.exp(-lam)
    if n > 2 and lam > 0:
        x = np.arange(2, n, dtype=float)
        # log((x-2)!) for x = 2.. via a running sum of logs
        log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n - 2, dtype=float)))))
        log_p = (x - 2) * np.log(x - 1) - np.log(x) - log_fact + x * (math.log(lam) - lam)
        out[2:] = np.exp(log_p)
    return out


def tail_ratio(lam: float) -> float:
    """Geometric majorant of x_pmf(x + 1) / x_pmf(x) for x >= 2."""
    return lam * math.exp(1 - lam)


def truncation_point(lam: float, power: int = 0, tol: float = TAIL_TOL) -> int:
    """Smallest N (searched by doubling) with sum_{x > N} x**power * x_pmf(x) <= tol.

    Uses x_pmf(x + 1) <= tail_ratio * x_pmf(x) and ((x + 1) / x)**power <= (1 + 1/N)**power.
    """
    _check_lam(lam)
    if lam == 0:
        return 1
    rho = tail_ratio(lam)
    n = 64
    while True:
        pmf = x_pmf_array(n + 1, lam)
        r = rho * (1 + 1 / n) ** power
        if r < 1:
            bound = pmf[n] * n**power * r / (1 - r)
            if bound <= tol:
                return n
        n *= 2
        if n > 1 << 26:
            raise AnalysisDomainError(f"tail of x_pmf does not fall below {tol} for lam={lam}")


def truncated_sums(lam: float, tol: float = TAIL_TOL) -> tuple[float, float, float]:
    """(total mass, first moment, second moment) of X by direct summation."""
    n = truncation_point(lam, power=2, tol=tol)
    pmf = x_pmf_array(n + 1, lam)
    x = np.arange(n + 1, dtype=float)
    return math.fsum(pmf), math.fsum(x * pmf), math.fsum(x * x * pmf)


def x_moments(lam: float) -> RenewalMoments:
    """Closed-form E[X], E[X^2] and E[W] = E[X] / lam (E[W] = 1 in the lossless limit)."""
    if lam >= 1:
        raise AnalysisDomainError(f"moments of X diverge for lam={lam} >= 1")
    _check_lam(lam)
    mean = lam * math.exp(-lam) / (1 - lam)
    second = (1 - lam + lam * lam) / (1 - lam) ** 2 * mean
    w_mean = mean / lam if lam > 0 else 1.0
    return RenewalMoments(mean, second, w_mean)


def expected_delay_single(lam: float, interval: int) -> float:
    """Mean in-order delay of a single path, in packet slots."""
    if lam >= 1:
        raise AnalysisDomainError(f"delay diverges for lam={lam} >= 1")
    _check_lam(lam)
    return lam * (interval - 1) * (1 - lam + lam * lam) / (2 * (1 - lam) ** 2)


def expected_delay_multipath(model: LossModel, paths: Sequence[PathSpec]) -> float:
    """Mean in-order delay with redundancy on one path, in packet slots of that path."""
    lam = model.lam
    if lam >= 1:
        raise AnalysisDomainError(f"delay diverges for lam={lam} >= 1")
    r_c, l_c = model.coded_rate, model.interval
    total_rate = sum(p.rate for p in paths)
    g = 1 - lam + lam * lam
    inner = r_c**3 * (l_c - 1) * g
    for i, p in enumerate(paths):
        if i != model.coded_path:
            inner += l_c * p.rate**3 * g - p.rate**2 * r_c * (1 - lam) ** 2
    return lam / (2 * r_c**2 * (1 - lam) ** 2 * total_rate) * inner


def expected_delay_from_reward(
    model: LossModel, paths: Sequence[PathSpec], moments: RenewalMoments | None = None
) -> float:
    """Same delay assembled as E[R] / (l_c E[W]) from renewal moments.

    ``E[W]`` is taken as ``P(X = 0) + E[X]`` (folding the pmf of X at 1) rather
    than ``E[X] / lam``, so the two routes share no algebra past the moments.
    """
    m = moments if moments is not None else x_moments(model.lam)
    r_c, l_c = model.coded_rate, model.interval
    total_rate = sum(p.rate for p in paths)
    reward = l_c * r_c / 2 * (l_c - 1) * m.second
    for i, p in enumerate(paths):
        if i != model.coded_path:
            reward += l_c * p.rate**2 / (2 * r_c**2) * (l_c * p.rate * m.second - r_c * m.mean)
    reward /= total_rate
    w_mean = math.exp(-model.lam) + m.mean
    return reward / (l_c * w_mean)


@dataclass(frozen=True)
class OracleResult:
    samples: int
    mean: float
    second: float
    histogram: np.ndarray
    """``histogram[x]`` counts samples with X = x."""

    def frequency(self, x: int) -> float:
        return self.histogram[x] / self.samples if x < len(self.histogram) else 0.0


def renewal_oracle(lam: float, n_samples: int, seed: int, max_slots: int = 10**6) -> OracleResult:
    """Monte-Carlo draws of X by running the loss/dof backlog slot by slot.

    The first coded slot loses ``Y ~ Poisson(lam)`` packets.  ``Y = 0`` means the
    coded packet was useless (X = 0), ``Y = 1`` is repaired at once (X = 1);
    otherwise ``Y - 1`` packets remain outstanding and each further slot adds
    fresh Poisson losses and repairs one, until the backlog empties.
    """
    if not 0 < lam < 1:
        raise AnalysisDomainError(f"oracle needs 0 < lam < 1, got {lam}")
    rng = np.random.default_rng(seed)
    first = rng.poisson(lam, size=n_samples)
    x = np.minimum(first, 1).astype(np.int64)
    active = np.flatnonzero(first >= 2)
    backlog = first[active] - 1
    slots = 1
    while active.size:
        slots += 1
        if slots > max_slots:
            raise RuntimeError(
                f"{active.size} oracle samples still busy after {max_slots} slots (lam={lam})"
            )
        backlog += rng.poisson(lam, size=active.size) - 1
        done = backlog <= 0
        x[active[done]] = slots
        keep = ~done
        active = active[keep]
        backlog = backlog[keep]
    xf = x.astype(float)
    return OracleResult(n_samples, float(xf.mean()), float((xf * xf).mean()), np.bincount(x))
