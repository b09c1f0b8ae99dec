"""Event-driven simulation of one streaming session over parallel erasure paths.

Each path sends back-to-back packets of duration ``1 / rate``; a packet is
erased independently with the path's probability, otherwise it reaches the
client ``prop_delay`` seconds after its transmission ends.  The client reports
its ``seen`` index every ``feedback_period`` seconds over a lossless side
channel with the smallest propagation delay.

The clock is exact: all times are converted to integer ticks of a common
rational base, so runs are bit-for-bit reproducible.
"""
from __future__ import annotations

import heapq
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .analysis import AnalysisDomainError, build_loss_model, expected_delay_multipath
from .codec import CodedPacket, Decoder, Encoder, InfoPacket, index_payload
from .policy import CodingPolicy, PathSpec, check_policy

_FB_ARRIVE, _ARRIVE, _FB_SEND, _TX = range(4)


class InadmissibleConfig(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


def erasure_draw(erasure: float, rng: np.random.Generator) -> bool:
    """True when a packet is lost."""
    return bool(rng.random() < erasure)


class ErasureChannel:
    """I.i.d. erasures drawn in blocks; same law as repeated :func:`erasure_draw`."""

    def __init__(self, erasure: float, rng: np.random.Generator, block: int = 4096):
        self.erasure = erasure
        self.rng = rng
        self.block = block
        self._draws: list[bool] = []
        self._pos = 0

    def draw(self) -> bool:
        if self._pos == len(self._draws):
            self._draws = (self.rng.random(self.block) < self.erasure).tolist()
            self._pos = 0
        lost = self._draws[self._pos]
        self._pos += 1
        return lost


@dataclass(frozen=True)
class SimConfig:
    paths: tuple[PathSpec, ...]
    policy: CodingPolicy
    num_info: int
    seed: int = 0
    align_slow_path: bool = False
    feedback_period: float | None = None
    """Seconds between client reports; ``None`` means one coded interval of the coded path."""
    adaptive_redundancy: bool = False
    payload_len: int = 0
    coeff_order: int = 256
    exclude_tail: bool = False
    """Drop packets delivered after the last info packet was sent from the statistics."""
    max_tx_factor: int = 100

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ValueError("at least one path is required")
        if len(self.policy.intervals) != len(self.paths):
            raise ValueError(
                f"policy has {len(self.policy.intervals)} intervals for {len(self.paths)} paths"
            )
        if self.num_info < 1:
            raise ValueError("num_info must be >= 1")
        if self.feedback_period is not None and not self.feedback_period > 0:
            raise ValueError("feedback_period must be positive")
        if self.payload_len < 0:
            raise ValueError("payload_len must be >= 0")

    @property
    def reference_path(self) -> int:
        """Path whose packet slot is the delay unit: the (first) coded path, else path 0."""
        coded = self.policy.coded_paths
        return coded[0] if coded else 0

    def resolved_feedback_period(self) -> float:
        if self.feedback_period is not None:
            return self.feedback_period
        periods = [
            l / p.rate for l, p in zip(self.policy.intervals, self.paths) if l is not None
        ]
        return min(periods) if periods else 1 / max(p.rate for p in self.paths)


@dataclass
class SimResult:
    delays: np.ndarray
    """In-order delivery delay of packets 1..M in seconds (first transmission to release)."""
    excess: np.ndarray
    """Delay beyond the lossless figure for the packet's path (transmission + propagation + alignment)."""
    slot_seconds: float
    completion_time: float
    renewals: int
    transmitted: list[int]
    coded_sent: list[int]
    erased: list[int]
    idle_slots: list[int]
    received_innovative: int
    received_redundant: int
    in_flight: int
    included: np.ndarray = field(repr=False)
    """Mask of packets counted in the statistics."""

    @property
    def num_info(self) -> int:
        return len(self.delays)

    @property
    def mean_delay(self) -> float:
        return float(self.delays[self.included].mean())

    @property
    def std_delay(self) -> float:
        return float(self.delays[self.included].std())

    @property
    def mean_excess(self) -> float:
        return float(self.excess[self.included].mean())

    @property
    def std_excess(self) -> float:
        return float(self.excess[self.included].std())

    @property
    def mean_excess_slots(self) -> float:
        return self.mean_excess / self.slot_seconds

    @property
    def throughput(self) -> float:
        """Delivered info packets per second over the whole session."""
        return self.num_info / self.completion_time

    @property
    def losses(self) -> list[int]:
        return self.erased


def _ticks_base(values: Sequence[Fraction]) -> int:
    base = 1
    for v in values:
        base = math.lcm(base, v.denominator)
    return base


def _frac(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**6)


def run(config: SimConfig) -> SimResult:
    problems = check_policy(config.policy, config.paths)
    if problems:
        raise InadmissibleConfig("; ".join(problems))

    paths = config.paths
    n_paths = len(paths)
    M = config.num_info
    tx_time = [_frac(1 / p.rate) for p in paths]
    prop = [_frac(p.prop_delay) for p in paths]
    d_max = max(prop)
    extra = [d_max - d if config.align_slow_path else Fraction(0) for d in prop]
    period = _frac(config.resolved_feedback_period())
    fb_delay = min(prop)
    base = _ticks_base(tx_time + prop + extra + [period])
    tx_ticks = [int(t * base) for t in tx_time]
    flight_ticks = [int((t + d + e) * base) for t, d, e in zip(tx_time, prop, extra)]
    period_ticks = int(period * base)
    fb_ticks = int(fb_delay * base)

    seeds = np.random.SeedSequence(config.seed).spawn(n_paths + 1)
    channels = [
        ErasureChannel(p.erasure, np.random.default_rng(s)) for p, s in zip(paths, seeds[:n_paths])
    ]
    encoder = Encoder(
        config.policy.intervals,
        M,
        payload_len=config.payload_len,
        coeff_order=config.coeff_order,
        adaptive=config.adaptive_redundancy,
        rng=np.random.default_rng(seeds[n_paths]),
    )
    decoder = Decoder()

    start = np.zeros(M + 1, dtype=np.int64)
    sent_on = np.zeros(M + 1, dtype=np.int64)
    released = np.zeros(M + 1, dtype=np.int64)
    transmitted = [0] * n_paths
    coded_sent = [0] * n_paths
    erased = [0] * n_paths
    idle = [0] * n_paths
    renewals = 0
    in_flight = 0
    exhausted_at: int | None = None
    tx_cap = config.max_tx_factor * M
    total_tx = 0

    seq = itertools.count()
    events: list[tuple] = [(0, _TX, i, next(seq), None) for i in range(n_paths)]
    events.append((period_ticks, _FB_SEND, -1, next(seq), None))
    heapq.heapify(events)
    push, pop = heapq.heappush, heapq.heappop
    track_deficit = config.adaptive_redundancy
    verify = config.payload_len > 0

    while decoder.delivered < M:
        now, kind, path, _, item = pop(events)
        if kind == _ARRIVE:
            in_flight -= 1
            out = decoder.receive(item)
            if out:
                if type(item) is CodedPacket:
                    renewals += 1
                for p in out:
                    released[p.index] = now
                    if verify and p.payload != index_payload(p.index, config.payload_len):
                        raise SimulationError(f"packet {p.index} decoded with wrong payload")
        elif kind == _TX:
            pkt = encoder.next_packet(path)
            push(events, (now + tx_ticks[path], _TX, path, next(seq), None))
            if pkt is None:
                idle[path] += 1
                continue
            total_tx += 1
            if total_tx > tx_cap:
                raise SimulationError(
                    f"{total_tx} transmissions without delivering all {M} packets "
                    f"(delivered {decoder.delivered})"
                )
            transmitted[path] += 1
            if type(pkt) is InfoPacket:
                start[pkt.index] = now
                sent_on[pkt.index] = path
                if pkt.index == M:
                    exhausted_at = now
            else:
                coded_sent[path] += 1
            if channels[path].draw():
                erased[path] += 1
            else:
                in_flight += 1
                push(events, (now + flight_ticks[path], _ARRIVE, path, next(seq), pkt))
        elif kind == _FB_SEND:
            fb = decoder.feedback(track_deficit)
            push(events, (now + fb_ticks, _FB_ARRIVE, -1, next(seq), fb))
            push(events, (now + period_ticks, _FB_SEND, -1, next(seq), None))
        else:
            encoder.on_feedback(item)

    delays_ticks = released[1:] - start[1:]
    baseline = np.array(flight_ticks, dtype=np.int64)[sent_on[1:]]
    included = np.ones(M, dtype=bool)
    if config.exclude_tail and exhausted_at is not None:
        included = released[1:] <= exhausted_at
        if not included.any():
            included[:] = True
    ref = config.reference_path
    return SimResult(
        delays=delays_ticks / base,
        excess=(delays_ticks - baseline) / base,
        slot_seconds=1 / paths[ref].rate,
        completion_time=int(released[1:].max()) / base,
        renewals=renewals,
        transmitted=transmitted,
        coded_sent=coded_sent,
        erased=erased,
        idle_slots=idle,
        received_innovative=decoder.innovative,
        received_redundant=decoder.redundant,
        in_flight=in_flight,
        included=included,
    )


def vary(config: SimConfig, **params: Any) -> SimConfig:
    """Copy of ``config`` with sweep parameters applied.

    ``interval`` sets the coded interval of every coded path, ``erasure`` takes a
    scalar (all paths) or one value per path; other keys are SimConfig fields.
    """
    params = dict(params)
    paths = list(config.paths)
    policy = config.policy
    if "erasure" in params:
        eps = params.pop("erasure")
        eps = [eps] * len(paths) if np.isscalar(eps) else list(eps)
        if len(eps) != len(paths):
            raise ValueError(f"{len(eps)} erasure values for {len(paths)} paths")
        paths = [replace(p, erasure=float(e)) for p, e in zip(paths, eps)]
    if "interval" in params:
        l = int(params.pop("interval"))
        coded = policy.coded_paths or (0,)
        policy = CodingPolicy(
            tuple(l if i in coded else iv for i, iv in enumerate(policy.intervals))
        )
    return replace(config, paths=tuple(paths), policy=policy, **params)


@dataclass
class SweepRow:
    params: dict[str, Any]
    config: SimConfig
    result: SimResult | None = None
    lam: float | None = None
    analytic_slots: float | None = None
    error: str | None = None

    @property
    def analytic_seconds(self) -> float | None:
        if self.analytic_slots is None:
            return None
        return self.analytic_slots / self.config.paths[self.config.reference_path].rate


def grid_points(grid: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    if not grid:
        return []
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _run_point(row: SweepRow) -> SweepRow:
    try:
        row.result = run(row.config)
    except (InadmissibleConfig, SimulationError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def sweep(base: SimConfig, grid: Mapping[str, Sequence[Any]], workers: int = 1) -> list[SweepRow]:
    """Run every grid point; inadmissible points are flagged and skipped, never fatal."""
    rows = []
    for params in grid_points(grid):
        try:
            config = vary(base, **params)
        except (ValueError, TypeError) as exc:
            rows.append(SweepRow(params, base, error=f"{type(exc).__name__}: {exc}"))
            continue
        row = SweepRow(params, config)
        problems = check_policy(config.policy, config.paths)
        if problems:
            row.error = "inadmissible: " + "; ".join(problems)
        else:
            try:
                model = build_loss_model(config.paths, config.policy)
            except AnalysisDomainError:
                pass
            else:
                row.lam = model.lam
                row.analytic_slots = expected_delay_multipath(model, config.paths)
        rows.append(row)

    todo = [r for r in rows if r.error is None]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_run_point, todo))
    else:
        done = [_run_point(r) for r in todo]
    by_id = {id(r): d for r, d in zip(todo, done)}
    return [by_id.get(id(r), r) for r in rows]
