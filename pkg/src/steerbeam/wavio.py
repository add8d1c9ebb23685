"""Minimal RIFF/WAVE reader and writer.

Supports the two encodings the rest of the package produces and consumes,
16-bit PCM and 32-bit IEEE float, at any channel count and rate. Anything
else is rejected with the encoding spelled out, so a user pointing the CLI
at an 8-bit or mu-law file gets a usable message instead of garbage audio.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .dsp import MultichannelAudio
from .errors import WavFormatError

_FORMAT_NAMES = {
    0x0001: "PCM",
    0x0002: "ADPCM",
    0x0003: "IEEE float",
    0x0006: "A-law",
    0x0007: "mu-law",
    0x0011: "IMA ADPCM",
    0x0055: "MP3",
    0xFFFE: "extensible",
}

_PCM16_SCALE = 32768.0


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) < n:
        raise WavFormatError(f"truncated WAV file while reading {what}")
    return buf


def read_wav(path) -> MultichannelAudio:
    """Read a WAV file into float64 samples in [-1, 1), shape (channels, samples)."""
    path = Path(path)
    with open(path, "rb") as f:
        riff, _size, wave = struct.unpack("<4sI4s", _read_exact(f, 12, "RIFF header"))
        if riff != b"RIFF" or wave != b"WAVE":
            raise WavFormatError(f"{path} is not a RIFF/WAVE file")

        fmt = None
        data = None
        while True:
            head = f.read(8)
            if len(head) == 0:
                break
            if len(head) < 8:
                raise WavFormatError("truncated WAV file while reading chunk header")
            chunk_id, chunk_size = struct.unpack("<4sI", head)
            if chunk_id == b"fmt ":
                fmt = _read_exact(f, chunk_size, "fmt chunk")
            elif chunk_id == b"data":
                data = _read_exact(f, chunk_size, "data chunk")
            else:
                f.seek(chunk_size + (chunk_size & 1), 1)
                continue
            if chunk_size & 1:
                f.seek(1, 1)

    if fmt is None:
        raise WavFormatError("missing fmt chunk")
    if data is None:
        raise WavFormatError("missing data chunk")
    if len(fmt) < 16:
        raise WavFormatError("truncated fmt chunk")

    code, channels, rate, _byte_rate, _align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if code == 0xFFFE:
        # extensible: actual format code is the first two bytes of the GUID
        if len(fmt) < 26:
            raise WavFormatError("truncated extensible fmt chunk")
        code = struct.unpack("<H", fmt[24:26])[0]
    if channels < 1:
        raise WavFormatError("WAV file declares zero channels")

    if code == 0x0001 and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    elif code == 0x0003 and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        name = _FORMAT_NAMES.get(code, f"format 0x{code:04x}")
        raise WavFormatError(
            f"unsupported WAV encoding: {bits}-bit {name} "
            f"(only 16-bit PCM and 32-bit IEEE float are supported)"
        )

    frames = len(samples) // channels
    samples = samples[: frames * channels].reshape(frames, channels).T
    return MultichannelAudio(np.ascontiguousarray(samples), rate)


def write_wav(audio: MultichannelAudio, path, encoding: str = "float32") -> None:
    """Write audio as float32 (lossless) or pcm16 (clipped to [-1, 1])."""
    interleaved = np.ascontiguousarray(audio.data.T)
    if encoding == "float32":
        code, bits = 0x0003, 32
        payload = interleaved.astype("<f4").tobytes()
    elif encoding == "pcm16":
        code, bits = 0x0001, 16
        scaled = np.clip(np.round(interleaved * _PCM16_SCALE), -32768, 32767)
        payload = scaled.astype("<i2").tobytes()
    else:
        raise WavFormatError(f"unsupported output encoding: {encoding!r}")

    channels = audio.num_channels
    block_align = channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        code,
        channels,
        audio.sample_rate,
        audio.sample_rate * block_align,
        block_align,
        bits,
        b"data",
        len(payload),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
