"""Portable binary encoding for structured result fields.

Implements the subset of RFC 8949 (CBOR) needed for result blobs: integers,
64-bit floats, byte strings, text strings, arrays, string-keyed maps, and
the simple values false/true/null.  Rows written here are readable by any
stock CBOR decoder, and vice versa for data limited to this subset.

Floats are always encoded as 8-byte doubles so bit patterns survive the
round trip exactly.  Language-native pickling is deliberately not used.
"""

from __future__ import annotations

import struct

__all__ = ["BlobDecodeError", "BlobEncodeError", "deserialize_blob", "serialize_blob"]

_U64_MAX = 2**64 - 1


class BlobEncodeError(ValueError):
    """Value shape not representable in the blob format."""


class BlobDecodeError(ValueError):
    """Byte sequence is not valid blob-encoded data."""


def _head(major: int, arg: int) -> bytes:
    if arg < 24:
        return bytes([(major << 5) | arg])
    if arg < 2**8:
        return bytes([(major << 5) | 24, arg])
    if arg < 2**16:
        return bytes([(major << 5) | 25]) + arg.to_bytes(2, "big")
    if arg < 2**32:
        return bytes([(major << 5) | 26]) + arg.to_bytes(4, "big")
    return bytes([(major << 5) | 27]) + arg.to_bytes(8, "big")


def _encode(value, out: bytearray) -> None:
    # bool before int: True would otherwise encode as 1
    if value is None:
        out += b"\xf6"
    elif value is True:
        out += b"\xf5"
    elif value is False:
        out += b"\xf4"
    elif isinstance(value, int):
        if 0 <= value <= _U64_MAX:
            out += _head(0, value)
        elif -(2**64) <= value < 0:
            out += _head(1, -1 - value)
        else:
            raise BlobEncodeError(f"integer {value} exceeds 64-bit range")
    elif isinstance(value, float):
        out += b"\xfb" + struct.pack(">d", value)
    elif isinstance(value, (bytes, bytearray, memoryview)):
        b = bytes(value)
        out += _head(2, len(b)) + b
    elif isinstance(value, str):
        b = value.encode("utf-8")
        out += _head(3, len(b)) + b
    elif isinstance(value, (list, tuple)):
        out += _head(4, len(value))
        for item in value:
            _encode(item, out)
    elif isinstance(value, dict):
        out += _head(5, len(value))
        for k, v in value.items():
            if not isinstance(k, str):
                raise BlobEncodeError(f"map keys must be strings, got {type(k).__name__}")
            _encode(k, out)
            _encode(v, out)
    else:
        raise BlobEncodeError(f"unsupported value type {type(value).__name__}")


def serialize_blob(value) -> bytes:
    """Encode a structure of scalars, bytes, lists and string-keyed maps."""
    out = bytearray()
    _encode(value, out)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise BlobDecodeError("truncated blob data")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def arg(self, info: int) -> int:
        if info < 24:
            return info
        if info == 24:
            return self.take(1)[0]
        if info == 25:
            return int.from_bytes(self.take(2), "big")
        if info == 26:
            return int.from_bytes(self.take(4), "big")
        if info == 27:
            return int.from_bytes(self.take(8), "big")
        raise BlobDecodeError(f"unsupported additional info {info} (indefinite lengths not allowed)")


def _decode(r: _Reader):
    initial = r.take(1)[0]
    major, info = initial >> 5, initial & 0x1F
    if major == 0:
        return r.arg(info)
    if major == 1:
        return -1 - r.arg(info)
    if major == 2:
        return r.take(r.arg(info))
    if major == 3:
        try:
            return r.take(r.arg(info)).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BlobDecodeError("invalid UTF-8 in text string") from exc
    if major == 4:
        return [_decode(r) for _ in range(r.arg(info))]
    if major == 5:
        out = {}
        for _ in range(r.arg(info)):
            k = _decode(r)
            if not isinstance(k, str):
                raise BlobDecodeError("map keys must be text strings")
            out[k] = _decode(r)
        return out
    if major == 7:
        if info == 20:
            return False
        if info == 21:
            return True
        if info == 22:
            return None
        if info == 25:  # half float, accepted for interop
            return _decode_half(int.from_bytes(r.take(2), "big"))
        if info == 26:
            return struct.unpack(">f", r.take(4))[0]
        if info == 27:
            return struct.unpack(">d", r.take(8))[0]
    raise BlobDecodeError(f"unsupported item header 0x{initial:02x}")


def _decode_half(h: int) -> float:
    sign = -1.0 if h & 0x8000 else 1.0
    exp = (h >> 10) & 0x1F
    frac = h & 0x3FF
    if exp == 0:
        return sign * frac * 2.0**-24
    if exp == 31:
        return sign * (float("inf") if frac == 0 else float("nan"))
    return sign * (1 + frac / 1024.0) * 2.0 ** (exp - 15)


def deserialize_blob(data: bytes):
    """Decode bytes produced by :func:`serialize_blob` (or any CBOR within the subset)."""
    r = _Reader(bytes(data))
    value = _decode(r)
    if r.pos != len(r.data):
        raise BlobDecodeError(f"{len(r.data) - r.pos} trailing bytes after blob value")
    return value
