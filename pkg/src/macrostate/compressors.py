"""Code-length providers used as K estimators.

``lz78`` counts bits exactly under a fixed phrase cost model; ``ext:<cmd>``
pipes the data through an external filter and counts output bytes.
"""

from __future__ import annotations

import shlex
import subprocess

from .core import Compressor, ConfigurationError, MacrostateError

DEFAULT_OUTPUT_CAP = 64 * 1024 * 1024
DEFAULT_TIMEOUT_S = 120.0


class ExternalToolError(MacrostateError):
    def __init__(self, message, command=None, returncode=None, stderr=b""):
        super().__init__(message)
        self.command = command
        self.returncode = returncode
        self.stderr = stderr


def _index_bits(i: int) -> int:
    # ceil(log2(i)) for i >= 1
    return (i - 1).bit_length()


def lz78_parse(data: bytes) -> list[tuple[int, int | None]]:
    """Split ``data`` into LZ78 phrases.

    Each phrase is ``(prefix_index, byte)``; index 0 is the empty phrase.
    A final ``(index, None)`` marks a trailing phrase that is an exact
    dictionary match.
    """
    trie: dict[int, int] = {}
    node = 0
    next_index = 1
    phrases = []
    for byte in data:
        child = trie.get((node << 8) | byte)
        if child is None:
            phrases.append((node, byte))
            trie[(node << 8) | byte] = next_index
            next_index += 1
            node = 0
        else:
            node = child
    if node:
        phrases.append((node, None))
    return phrases


def lz78_length(data: bytes) -> int:
    """Exact LZ78 code length in bits.

    Phrase ``i`` costs ceil(log2 i) index bits plus 8 literal bits; a trailing
    exact match costs only its index, sized by the next free index.
    """
    trie: dict[int, int] = {}
    get = trie.get
    node = 0
    next_index = 1
    bits = 0
    for byte in data:
        key = (node << 8) | byte
        child = get(key)
        if child is None:
            bits += (next_index - 1).bit_length() + 8
            trie[key] = next_index
            next_index += 1
            node = 0
        else:
            node = child
    if node:
        bits += _index_bits(next_index)
    return bits


def lz78_cost_of_phrases(phrases) -> int:
    total = 0
    for i, (_, byte) in enumerate(phrases, start=1):
        total += _index_bits(i) + (8 if byte is not None else 0)
    return total


class Lz78Compressor(Compressor):
    name = "lz78"
    spec_text = "lz78"

    def code_length(self, data: bytes) -> int:
        return lz78_length(data)

    def __eq__(self, other):
        return isinstance(other, Lz78Compressor)

    def __hash__(self):
        return hash(self.name)


def external_length(data: bytes, command, *, output_cap: int = DEFAULT_OUTPUT_CAP,
                    timeout: float = DEFAULT_TIMEOUT_S) -> int:
    """8 x (bytes written to stdout by ``command`` fed ``data`` on stdin)."""
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    if not argv:
        raise ConfigurationError("external compressor command is empty")
    try:
        proc = subprocess.run(argv, input=data, stdout=subprocess.PIPE,
                              stderr=subprocess.PIPE, timeout=timeout, check=False)
    except (OSError, subprocess.SubprocessError) as exc:
        raise ExternalToolError(f"failed to run {argv[0]}: {exc}", command=argv) from exc
    if proc.returncode != 0:
        raise ExternalToolError(
            f"{argv[0]} exited with status {proc.returncode}: "
            f"{proc.stderr.decode(errors='replace').strip()}",
            command=argv, returncode=proc.returncode, stderr=proc.stderr)
    if len(proc.stdout) > output_cap:
        raise ExternalToolError(
            f"{argv[0]} output of {len(proc.stdout)} bytes exceeds cap {output_cap}",
            command=argv, returncode=0, stderr=proc.stderr)
    return 8 * len(proc.stdout)


class ExternalCompressor(Compressor):
    def __init__(self, command, output_cap: int = DEFAULT_OUTPUT_CAP,
                 timeout: float = DEFAULT_TIMEOUT_S):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ConfigurationError("external compressor command is empty")
        self.output_cap = output_cap
        self.timeout = timeout
        self.name = "ext:" + self.argv[0].rsplit("/", 1)[-1]
        self.spec_text = "ext:" + shlex.join(self.argv)

    def code_length(self, data: bytes) -> int:
        return external_length(data, self.argv, output_cap=self.output_cap,
                               timeout=self.timeout)


def parse_compressor(text: str) -> Compressor:
    """``lz78`` or ``ext:<command line>``."""
    text = text.strip()
    if text == "lz78":
        return Lz78Compressor()
    if text.startswith("ext:"):
        return ExternalCompressor(text[4:])
    raise ConfigurationError(f"unknown compressor {text!r} (expected lz78 or ext:<command>)")
