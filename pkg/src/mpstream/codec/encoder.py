from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..galois import GF, GF256
from .packets import CodedPacket, FeedbackMessage, InfoPacket, Packet


def index_payload(index: int, length: int) -> bytes:
    """Deterministic filler payload for packet ``index`` (lets receivers verify content)."""
    if length == 0:
        return b""
    seed = index.to_bytes(4, "little")
    reps = -(-length // 4)
    return bytes(b ^ (i & 0xFF) for i, b in enumerate((seed * reps)[:length]))


class Encoder:
    """Streaming multi-path systematic encoder with a feedback-driven code window.

    ``intervals[n]`` is the coded interval ``l_n`` of path ``n``: ``l_n - 1`` info
    packets followed by one coded packet.  ``None`` means the path never sends
    redundancy (code rate 1) while the stream lasts.

    The window is kept as an inclusive range ``[window_low, window_high]``.
    A feedback value ``seen = s`` moves ``window_low`` to ``s + 1``, so packets
    the client has already seen are never coded again.  Once all ``num_info``
    packets have been sent, every idle path sends coded packets over whatever
    is still outstanding.
    """

    def __init__(
        self,
        intervals: Sequence[int | None],
        num_info: int,
        *,
        payload_len: int = 0,
        payload_source: Callable[[int], bytes] | None = None,
        coeff_order: int = 256,
        adaptive: bool = False,
        rng: np.random.Generator | None = None,
        field: GF = GF256,
    ):
        if not intervals:
            raise ValueError("at least one path is required")
        for l in intervals:
            if l is not None and (not isinstance(l, (int, np.integer)) or l < 1):
                raise ValueError(f"coded interval must be an integer >= 1 or None, got {l!r}")
        if num_info < 1:
            raise ValueError("num_info must be >= 1")
        self.intervals = list(intervals)
        self.num_info = num_info
        self.payload_len = payload_len
        self._source = payload_source or (lambda i: index_payload(i, payload_len))
        self.field = field
        self._coeff_values = field.subfield(coeff_order)
        self.adaptive = adaptive
        self.rng = rng if rng is not None else np.random.default_rng()

        self.counters = [1] * len(intervals)
        self.next_index = 1
        self.window_low = 1
        self.window_high = 0
        self._buffer: dict[int, bytes] = {}
        self._credit = 0
        self.sent_info = 0
        self.sent_coded = 0

    @property
    def window(self) -> tuple[int, int]:
        return self.window_low, self.window_high

    @property
    def window_empty(self) -> bool:
        return self.window_high < self.window_low

    @property
    def exhausted(self) -> bool:
        return self.next_index > self.num_info

    @property
    def finished(self) -> bool:
        """Every packet sent and acknowledged as seen."""
        return self.exhausted and self.window_empty

    def buffered(self) -> list[int]:
        return sorted(self._buffer)

    def next_packet(self, path: int) -> Packet | None:
        """Packet for idle ``path``, or ``None`` when the path should stay idle this slot."""
        l = self.intervals[path]
        if self.adaptive and self._credit > 0 and not self.window_empty:
            self._credit -= 1
            self.counters[path] = 1
            return self._coded()
        if not self.exhausted and (l is None or self.counters[path] < l):
            if l is not None:
                self.counters[path] += 1
            return self._info()
        if not self.exhausted:
            self.counters[path] = 1
        if self.window_empty:
            return None
        return self._coded()

    def on_feedback(self, fb: FeedbackMessage) -> None:
        if self.adaptive:
            self._credit = fb.dof_deficit
        low = fb.seen_index + 1
        if low <= self.window_low:
            return
        if fb.seen_index > self.window_high:
            raise ValueError(
                f"client reports seen={fb.seen_index} beyond last sent packet {self.window_high}"
            )
        for i in range(self.window_low, low):
            self._buffer.pop(i, None)
        self.window_low = low

    def _info(self) -> InfoPacket:
        k = self.next_index
        payload = self._source(k)
        if len(payload) != self.payload_len:
            raise ValueError(f"payload for packet {k} has length {len(payload)}")
        self._buffer[k] = payload
        if k > self.window_high:
            self.window_high = k
        self.next_index += 1
        self.sent_info += 1
        return InfoPacket(k, payload)

    def _coded(self) -> CodedPacket:
        low, high = self.window_low, self.window_high
        width = high - low + 1
        values = self._coeff_values
        while True:
            coeffs = values[self.rng.integers(0, len(values), size=width)]
            if coeffs.any():
                break
        payload = b""
        if self.payload_len:
            block = np.frombuffer(
                b"".join(self._buffer[i] for i in range(low, high + 1)), dtype=np.uint8
            ).reshape(width, self.payload_len)
            payload = np.bitwise_xor.reduce(
                self.field.mul_table[coeffs[:, None], block], axis=0
            ).tobytes()
        self.sent_coded += 1
        return CodedPacket(low, high, coeffs.tobytes(), payload)
