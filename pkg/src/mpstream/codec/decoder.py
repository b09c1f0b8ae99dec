from __future__ import annotations

import numpy as np

from ..galois import GF, GF256
from .packets import CodedPacket, FeedbackMessage, InfoPacket, MalformedPacket, Packet


class _Row:
    """One equation ``sum(coeffs[j] * p[lo + j]) = payload`` with ``coeffs[0] == 1``."""

    __slots__ = ("lo", "coeffs", "payload")

    def __init__(self, lo: int, coeffs: np.ndarray, payload: np.ndarray):
        self.lo = lo
        self.coeffs = coeffs
        self.payload = payload

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1


class Decoder:
    """Sliding-window decoder that releases packets strictly in order.

    Undecoded equations are kept in reduced row-echelon form keyed by pivot
    index: a pivot column is zero in every other row, and columns of already
    decoded packets are eliminated everywhere.  Packet ``i`` is *seen* once it
    is decoded or is the pivot of a row; it is decoded exactly when its row
    has no other nonzero entry.

    Payloads of delivered packets are retained so that coded packets built
    from a stale window can still be reduced.
    """

    def __init__(self, field: GF = GF256):
        self.field = field
        self._mul = field.mul_table
        self.delivered = 0
        self.seen_index = 0
        self.highest_heard = 0
        self._rows: dict[int, _Row] = {}
        self._known: dict[int, np.ndarray] = {}
        self._store: dict[int, bytes] = {}
        self._payload_len: int | None = None
        self.received = 0
        self.innovative = 0
        self.redundant = 0
        self.decode_events = 0

    @property
    def rank_pending(self) -> int:
        """Rows held for packets that are seen but not yet decoded."""
        return len(self._rows)

    def pivots(self) -> list[int]:
        return sorted(self._rows)

    def is_seen(self, index: int) -> bool:
        return index <= self.delivered or index in self._known or index in self._rows

    def feedback(self, track_deficit: bool = False) -> FeedbackMessage:
        deficit = 0
        if track_deficit:
            deficit = self.highest_heard - self.delivered - len(self._known) - len(self._rows)
        return FeedbackMessage(self.seen_index, deficit)

    def receive(self, pkt: Packet) -> list[InfoPacket]:
        """Absorb one packet; return the packets it makes deliverable, in order."""
        if isinstance(pkt, InfoPacket):
            self._check_payload(pkt.payload)
            if pkt.index < 1:
                raise MalformedPacket("info packet index must be >= 1")
            self.received += 1
            return self._receive_info(pkt)
        if isinstance(pkt, CodedPacket):
            pkt.validate()
            self._check_payload(pkt.payload)
            self.received += 1
            out = self._receive_coded(pkt)
            if out:
                self.decode_events += 1
            return out
        raise TypeError(f"not a packet: {pkt!r}")

    def _check_payload(self, payload: bytes) -> None:
        if self._payload_len is None:
            self._payload_len = len(payload)
        elif len(payload) != self._payload_len:
            raise MalformedPacket(
                f"payload length {len(payload)} differs from session length {self._payload_len}"
            )

    def _payload(self, index: int) -> np.ndarray:
        known = self._known.get(index)
        if known is not None:
            return known
        return np.frombuffer(self._store[index], dtype=np.uint8)

    def _receive_info(self, pkt: InfoPacket) -> list[InfoPacket]:
        i = pkt.index
        if i <= self.delivered or i in self._known:
            self.redundant += 1
            return []
        self.innovative += 1
        if i > self.highest_heard:
            self.highest_heard = i
        if i == self.delivered + 1 and not self._rows and not self._known:
            self._store[i] = pkt.payload
            self.delivered = i
            if self.seen_index < i:
                self.seen_index = i
            return [pkt]

        mul = self._mul
        p = np.frombuffer(pkt.payload, dtype=np.uint8)
        row = self._rows.pop(i, None)
        self._known[i] = p
        if row is not None:
            # p_i + rest was held; subtracting p_i leaves an equation on later packets.
            rest = row.coeffs.copy()
            rest[0] = 0
            reduced = self._reduce(row.lo, rest, row.payload ^ p)
            if reduced is not None:
                self._add_pivot(reduced)
        else:
            for other in list(self._rows.values()):
                off = i - other.lo
                if 0 < off < len(other.coeffs) and other.coeffs[off]:
                    other.payload ^= mul[other.coeffs[off]][p]
                    other.coeffs[off] = 0
                    self._settle(other)
        return self._flush()

    def _receive_coded(self, pkt: CodedPacket) -> list[InfoPacket]:
        lo, hi = pkt.window_low, pkt.window_high
        if hi > self.highest_heard:
            self.highest_heard = hi
        if hi <= self.delivered:
            self.redundant += 1
            return []
        mul = self._mul
        coeffs = np.frombuffer(pkt.coefficients, dtype=np.uint8).copy()
        payload = np.frombuffer(pkt.payload, dtype=np.uint8).copy()
        if lo <= self.delivered:
            cut = self.delivered - lo + 1
            if len(payload):
                for j in np.flatnonzero(coeffs[:cut]).tolist():
                    payload ^= mul[coeffs[j]][self._payload(lo + j)]
            coeffs = coeffs[cut:]
            lo = self.delivered + 1
        row = self._reduce(lo, coeffs, payload)
        if row is None:
            self.redundant += 1
            return []
        self.innovative += 1
        self._add_pivot(row)
        return self._flush()

    def _reduce(self, lo: int, coeffs: np.ndarray, payload: np.ndarray) -> _Row | None:
        """Eliminate known and pivot columns; return the normalized row or None if dependent."""
        mul = self._mul
        known, rows = self._known, self._rows
        # Pivot rows are zero on every other pivot and known column, so subtracting
        # one never creates work at another such column: a single pass suffices.
        for pos in np.flatnonzero(coeffs).tolist():
            j = lo + pos
            if j in known:
                payload ^= mul[coeffs[pos]][known[j]]
                coeffs[pos] = 0
            elif j in rows:
                other = rows[j]
                c = coeffs[pos]
                end = pos + len(other.coeffs)
                if end > len(coeffs):
                    coeffs = np.concatenate((coeffs, np.zeros(end - len(coeffs), np.uint8)))
                coeffs[pos:end] ^= mul[c][other.coeffs]
                payload ^= mul[c][other.payload]
        nz = np.flatnonzero(coeffs)
        if not nz.size:
            return None
        lead = int(nz[0])
        inv = self.field.inv_table[coeffs[lead]]
        return _Row(lo + lead, mul[inv][coeffs[lead : int(nz[-1]) + 1]], mul[inv][payload])

    def _add_pivot(self, row: _Row) -> None:
        mul = self._mul
        col = row.lo
        for other in list(self._rows.values()):
            off = col - other.lo
            if 0 < off < len(other.coeffs) and other.coeffs[off]:
                c = other.coeffs[off]
                end = off + len(row.coeffs)
                if end > len(other.coeffs):
                    other.coeffs = np.concatenate(
                        (other.coeffs, np.zeros(end - len(other.coeffs), np.uint8))
                    )
                other.coeffs[off:end] ^= mul[c][row.coeffs]
                other.payload ^= mul[c][row.payload]
                self._settle(other)
        self._rows[col] = row
        self._settle(row)

    def _settle(self, row: _Row) -> None:
        """Promote a row whose only nonzero entry is its pivot to a decoded packet."""
        if np.count_nonzero(row.coeffs) == 1:
            del self._rows[row.lo]
            self._known[row.lo] = row.payload
        else:
            last = int(np.flatnonzero(row.coeffs)[-1])
            if last + 1 < len(row.coeffs):
                row.coeffs = row.coeffs[: last + 1]

    def _flush(self) -> list[InfoPacket]:
        out = []
        known = self._known
        while self.delivered + 1 in known:
            i = self.delivered + 1
            data = known.pop(i).tobytes()
            self._store[i] = data
            self.delivered = i
            out.append(InfoPacket(i, data))
        s = max(self.seen_index, self.delivered)
        while s + 1 in known or s + 1 in self._rows:
            s += 1
        self.seen_index = s
        return out
