"""WAV reading and writing.

Supports PCM 16/24-bit integer and IEEE 32-bit float, mono or
first-channel-of-stereo, sample rates in [22050, 96000] Hz.  The writer can
attach a free-text comment as a RIFF LIST/INFO ICMT chunk, which ``synth``
uses to echo the generating tone spec into the file.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from multiphon.errors import FormatError

MIN_RATE = 22050
MAX_RATE = 96000


@dataclass(frozen=True)
class WavData:
    samples: np.ndarray  # float64 in [-1, 1], mono
    sample_rate: int
    source_channels: int
    bits_per_sample: int
    comment: str | None = None


def _read_chunks(blob: bytes):
    pos = 0
    while pos + 8 <= len(blob):
        ckid, size = struct.unpack_from("<4sI", blob, pos)
        body = blob[pos + 8 : pos + 8 + size]
        yield ckid, body
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def read_wav(path) -> WavData:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    comment = None
    for ckid, body in _read_chunks(blob[12:]):
        if ckid == b"fmt ":
            fmt = body
        elif ckid == b"data":
            data = body
        elif ckid == b"LIST" and body[:4] == b"INFO":
            for sub_id, sub in _read_chunks(body[4:]):
                if sub_id == b"ICMT":
                    comment = sub.rstrip(b"\x00").decode("utf-8", "replace")
    if fmt is None or data is None:
        raise FormatError(f"{path}: missing fmt or data chunk")

    audio_format, channels, rate = struct.unpack_from("<HHI", fmt, 0)
    bits = struct.unpack_from("<H", fmt, 14)[0]
    if audio_format == 0xFFFE and len(fmt) >= 40:  # WAVE_FORMAT_EXTENSIBLE
        audio_format = struct.unpack_from("<H", fmt, 24)[0]
    if not (MIN_RATE <= rate <= MAX_RATE):
        raise FormatError(f"{path}: sample rate {rate} outside [{MIN_RATE}, {MAX_RATE}] Hz")
    if channels < 1:
        raise FormatError(f"{path}: no channels")

    frame_bytes = channels * bits // 8
    nframes = len(data) // frame_bytes
    data = data[: nframes * frame_bytes]

    if audio_format == 1 and bits == 16:
        x = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == 1 and bits == 24:
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        as32 = (
            raw[:, 0].astype(np.uint32)
            | (raw[:, 1].astype(np.uint32) << 8)
            | (raw[:, 2].astype(np.uint32) << 16)
        )
        signed = as32.astype(np.int32)
        signed[signed >= 1 << 23] -= 1 << 24
        x = signed.astype(np.float64) / float(1 << 23)
    elif audio_format == 3 and bits == 32:
        x = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise FormatError(
            f"{path}: unsupported format (format code {audio_format}, {bits}-bit); "
            "expected 16/24-bit PCM or 32-bit float"
        )

    x = x.reshape(nframes, channels)[:, 0]  # first channel only
    return WavData(x, int(rate), channels, bits, comment)


def write_wav(path, samples: np.ndarray, sample_rate: int, *,
              bits: int = 32, comment: str | None = None) -> None:
    """Write mono audio as 16-bit PCM (``bits=16``) or 32-bit float (``bits=32``)."""
    if not (MIN_RATE <= sample_rate <= MAX_RATE):
        raise FormatError(f"sample rate {sample_rate} outside [{MIN_RATE}, {MAX_RATE}] Hz")
    samples = np.asarray(samples, dtype=np.float64)

    if bits == 16:
        fmt_code, sample_bytes = 1, 2
        payload = np.clip(np.round(samples * 32767.0), -32768, 32767).astype("<i2").tobytes()
    elif bits == 32:
        fmt_code, sample_bytes = 3, 4
        payload = samples.astype("<f4").tobytes()
    else:
        raise FormatError(f"unsupported output depth {bits}; use 16 or 32")

    byte_rate = sample_rate * sample_bytes
    fmt = struct.pack("<HHIIHH", fmt_code, 1, sample_rate, byte_rate, sample_bytes, bits)

    chunks = [b"fmt " + struct.pack("<I", len(fmt)) + fmt,
              b"data" + struct.pack("<I", len(payload)) + payload]
    if len(payload) & 1:
        chunks[-1] += b"\x00"
    if comment is not None:
        text = comment.encode("utf-8") + b"\x00"
        if len(text) & 1:
            text += b"\x00"
        info = b"INFO" + b"ICMT" + struct.pack("<I", len(text)) + text
        chunks.append(b"LIST" + struct.pack("<I", len(info)) + info)

    body = b"WAVE" + b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)
