"""File ingestion: raw bytes, '0'/'1' text, and 16-bit mono PCM WAV."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import FormatError, SymbolString

FORMATS = ("raw", "bits", "wav")
WAVE_FORMAT_PCM = 1


@dataclass(frozen=True)
class InputSource:
    path: str
    format: str
    decoded: SymbolString
    digest: str
    sample_rate: Optional[int] = None


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        return "wav"
    if suffix == ".bits":
        return "bits"
    return "raw"


def parse_bits_text(text: str) -> SymbolString:
    bits = "".join(text.split())
    bad = set(bits) - {"0", "1"}
    if bad:
        raise FormatError(f"bits file contains characters other than 0/1: {''.join(sorted(bad))!r}")
    return SymbolString.from_bits(bits)


def parse_wav(data: bytes) -> tuple[SymbolString, int]:
    """Decode a RIFF/WAVE file holding 16-bit mono PCM. Returns (samples, rate)."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("malformed header: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    pcm = None
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) != size:
            raise FormatError(f"malformed header: {chunk_id.decode('latin-1')!r} chunk truncated")
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError("malformed header: fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            pcm = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise FormatError("malformed header: missing fmt chunk")
    if pcm is None:
        raise FormatError("malformed header: missing data chunk")
    format_code, channels, rate, byte_rate, block_align, bits = fmt
    if format_code != WAVE_FORMAT_PCM:
        raise FormatError(f"format_code={format_code} unsupported (PCM=1 required)")
    if channels != 1:
        raise FormatError(f"channels={channels} unsupported")
    if bits != 16:
        raise FormatError(f"bits_per_sample={bits} unsupported")
    if block_align != 2 or byte_rate != 2 * rate:
        raise FormatError(f"malformed header: block_align={block_align} byte_rate={byte_rate}")
    if len(pcm) % 2:
        raise FormatError(f"data chunk size={len(pcm)} is not a whole number of samples")
    return SymbolString(pcm, 8 * len(pcm), "pcm16-mono"), rate


def wav_bytes(samples, rate: int) -> bytes:
    pcm = np.asarray(samples).astype("<i2").tobytes()
    header = struct.pack("<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(pcm), b"WAVE",
                         b"fmt ", 16, WAVE_FORMAT_PCM, 1, rate, 2 * rate, 2, 16,
                         b"data", len(pcm))
    return header + pcm


def encode_for_file(x: SymbolString, fmt: str, sample_rate: int = 48000) -> bytes:
    if fmt == "wav":
        return wav_bytes(x.samples(), sample_rate)
    if fmt == "bits":
        return (x.bits() + "\n").encode("ascii")
    return x.payload


def load_input(path, format: Optional[str] = None) -> InputSource:
    fmt = format or guess_format(path)
    if fmt not in FORMATS:
        raise FormatError(f"unknown input format {fmt!r}")
    data = Path(path).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    rate = None
    if fmt == "raw":
        decoded = SymbolString.from_bytes(data)
    elif fmt == "bits":
        try:
            decoded = parse_bits_text(data.decode("ascii"))
        except UnicodeDecodeError:
            raise FormatError("bits file is not ASCII text") from None
    else:
        decoded, rate = parse_wav(data)
    return InputSource(str(path), fmt, decoded, digest, rate)


def load_corpus(root, format: Optional[str] = None):
    """``root/<label>/<files>``; exemplar ids are ``label/filename``."""
    from .classifier import Corpus

    root = Path(root)
    if not root.is_dir():
        raise FormatError(f"corpus directory {root} does not exist")
    classes, manifest = {}, []
    for label_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        exemplars = []
        for f in sorted(p for p in label_dir.iterdir() if p.is_file()):
            src = load_input(f, format)
            ex_id = f"{label_dir.name}/{f.name}"
            exemplars.append((ex_id, src.decoded))
            manifest.append({"id": ex_id, "format": src.format, "sha256": src.digest})
        if exemplars:
            classes[label_dir.name] = exemplars
    return Corpus(classes, manifest)
