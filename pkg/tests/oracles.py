"""Reference implementations used only by the tests."""
from __future__ import annotations

import numpy as np

from mpstream.codec import CodedPacket, InfoPacket


def log_antilog_tables(poly: int = 0x11D) -> tuple[list[int], list[int]]:
    """exp/log tables of GF(256) built by repeated multiplication by the generator 2."""
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= poly
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


def table_mul(a: int, b: int, exp: list[int], log: list[int]) -> int:
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


class DenseOracle:
    """Gauss-Jordan elimination over the full ``M``-column matrix of everything received.

    Rows are kept fully reduced over all columns ``1..M``; unlike the streaming
    decoder there is no windowing and no special handling of delivered packets.
    """

    def __init__(self, field, num_info: int):
        self.field = field
        self.m = num_info
        self.rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def add(self, pkt) -> None:
        f = self.field
        vec = np.zeros(self.m + 1, dtype=np.uint8)
        if isinstance(pkt, InfoPacket):
            vec[pkt.index] = 1
        else:
            assert isinstance(pkt, CodedPacket)
            vec[pkt.window_low : pkt.window_high + 1] = np.frombuffer(pkt.coefficients, np.uint8)
        pay = np.frombuffer(pkt.payload, dtype=np.uint8).copy()
        for col, (rv, rp) in self.rows.items():
            c = int(vec[col])
            if c:
                vec ^= f.mul_table[c][rv]
                pay ^= f.mul_table[c][rp]
        nz = np.flatnonzero(vec)
        if nz.size == 0:
            return
        pivot = int(nz[0])
        s = f.inv(int(vec[pivot]))
        vec = f.mul_table[s][vec]
        pay = f.mul_table[s][pay]
        for col, (rv, rp) in self.rows.items():
            c = int(rv[pivot])
            if c:
                rv ^= f.mul_table[c][vec]
                rp ^= f.mul_table[c][pay]
        self.rows[pivot] = (vec, pay)

    def state(self) -> tuple[int, int, dict[int, bytes]]:
        """(decodable prefix, seen prefix, payloads of the decodable prefix)."""
        seen = 0
        while seen + 1 in self.rows:
            seen += 1
        decoded = 0
        payloads = {}
        while decoded + 1 in self.rows:
            v, p = self.rows[decoded + 1]
            if np.count_nonzero(v) != 1:
                break
            decoded += 1
            payloads[decoded] = p.tobytes()
        return decoded, seen, payloads


def random_session(seed: int, num_info: int, coeff_order: int, field, check_every_packet=True):
    """Drive a random lossy session through encoder and decoder, checking each step.

    Returns the number of mismatches between the streaming decoder and the
    dense oracle (delivered prefix, seen prefix and payloads).
    """
    from mpstream.codec import Decoder, Encoder, index_payload

    rng = np.random.default_rng(seed)
    n_paths = int(rng.integers(1, 4))
    intervals = [int(rng.integers(1, 8)) if rng.random() < 0.8 else None for _ in range(n_paths)]
    if all(l is None for l in intervals):
        intervals[0] = int(rng.integers(1, 8))
    if all(l == 1 for l in intervals):
        intervals[0] = int(rng.integers(2, 8))
    erasures = rng.uniform(0, 0.3, size=n_paths)
    payload_len = int(rng.integers(0, 5))
    enc = Encoder(
        intervals,
        num_info,
        payload_len=payload_len,
        coeff_order=coeff_order,
        rng=np.random.default_rng(seed + 1),
        field=field,
    )
    dec = Decoder(field)
    oracle = DenseOracle(field, num_info)
    pending_fb = []
    mismatches = 0
    delivered: list[int] = []
    step = 0
    while dec.delivered < num_info:
        step += 1
        if step > 200 * num_info:
            raise AssertionError("session did not terminate")
        path = int(rng.integers(0, n_paths))
        pkt = enc.next_packet(path)
        if pkt is not None and rng.random() >= erasures[path]:
            out = dec.receive(pkt)
            delivered.extend(p.index for p in out)
            for p in out:
                if p.payload != index_payload(p.index, payload_len):
                    mismatches += 1
            oracle.add(pkt)
            if check_every_packet:
                decoded, seen, _ = oracle.state()
                if decoded != dec.delivered or seen != dec.seen_index:
                    mismatches += 1
        if rng.random() < 0.3:
            pending_fb.append(dec.feedback())
        if pending_fb and rng.random() < 0.5:
            enc.on_feedback(pending_fb.pop(0))
    if delivered != list(range(1, num_info + 1)):
        mismatches += 1
    return mismatches
