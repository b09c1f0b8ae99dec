"""Streaming systematic code: packets, encoder, in-order decoder."""
from .decoder import Decoder
from .encoder import Encoder, index_payload
from .packets import CodedPacket, FeedbackMessage, InfoPacket, MalformedPacket, Packet

__all__ = [
    "CodedPacket",
    "Decoder",
    "Encoder",
    "FeedbackMessage",
    "InfoPacket",
    "MalformedPacket",
    "Packet",
    "index_payload",
]
