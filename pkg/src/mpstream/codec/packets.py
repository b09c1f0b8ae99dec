from __future__ import annotations

import struct
from dataclasses import dataclass

_U32 = struct.Struct("<I")
_WINDOW = struct.Struct("<II")


class MalformedPacket(ValueError):
    pass


@dataclass(frozen=True)
class InfoPacket:
    """An uncoded information packet ``p_index`` (indices start at 1)."""

    index: int
    payload: bytes = b""

    def to_bytes(self) -> bytes:
        return _U32.pack(self.index) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> InfoPacket:
        if len(data) < _U32.size:
            raise MalformedPacket("info packet shorter than its header")
        (index,) = _U32.unpack_from(data)
        if index < 1:
            raise MalformedPacket("info packet index must be >= 1")
        return cls(index, bytes(data[_U32.size:]))


@dataclass(frozen=True)
class CodedPacket:
    """A random linear combination of info packets ``window_low..window_high``.

    ``coefficients[j]`` multiplies packet ``window_low + j``.
    """

    window_low: int
    window_high: int
    coefficients: bytes
    payload: bytes = b""

    @property
    def width(self) -> int:
        return self.window_high - self.window_low + 1

    def validate(self) -> None:
        if self.window_low < 1 or self.window_high < self.window_low:
            raise MalformedPacket(f"bad window ({self.window_low}, {self.window_high})")
        if len(self.coefficients) != self.width:
            raise MalformedPacket(
                f"{len(self.coefficients)} coefficients for a window of {self.width} packets"
            )
        if not any(self.coefficients):
            raise MalformedPacket("all-zero coefficient vector")

    def to_bytes(self) -> bytes:
        return _WINDOW.pack(self.window_low, self.window_high) + self.coefficients + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> CodedPacket:
        if len(data) < _WINDOW.size:
            raise MalformedPacket("coded packet shorter than its header")
        low, high = _WINDOW.unpack_from(data)
        width = high - low + 1
        body = data[_WINDOW.size:]
        if width < 1 or len(body) < width:
            raise MalformedPacket(f"truncated coded packet for window ({low}, {high})")
        pkt = cls(low, high, bytes(body[:width]), bytes(body[width:]))
        pkt.validate()
        return pkt


Packet = InfoPacket | CodedPacket


@dataclass(frozen=True)
class FeedbackMessage:
    """What the client reports back: its ``seen`` index and optional dof deficit."""

    seen_index: int
    dof_deficit: int = 0
