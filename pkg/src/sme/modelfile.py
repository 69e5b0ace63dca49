"""Versioned binary container for trained models.

Layout (all integers little-endian, all floats little-endian IEEE 754
doubles, arrays in row-major order):

    magic            4 bytes   b"SME1"
    form             u8        0 = linear, 1 = bilinear
    d, p, n_symbols  u32 each
    symbols          n_symbols x (u32 byte-length + UTF-8 bytes)
    relation bitmap  ceil(n_symbols / 8) bytes, little-endian bit order
    embeddings       n_symbols * d doubles
    parameter blocks linear:   w_l1, w_l2, w_r1, w_r2 (p*d each), b_l, b_r (p each)
                     bilinear: w_l, w_r (p*d*d each), b_l, b_r (p each)

Round-tripping reproduces every float bitwise.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import IntegrityError
from .model import (BILINEAR, LINEAR, BilinearParams, EmbeddingTable,
                    LinearParams, Model)

MAGIC = b"SME1"
_FORM_CODES = {LINEAR: 0, BILINEAR: 1}
_FORM_NAMES = {v: k for k, v in _FORM_CODES.items()}


def _pack_bitmap(flags: list[bool]) -> bytes:
    return bytes(np.packbits(np.array(flags, dtype=np.uint8), bitorder="little"))


def _unpack_bitmap(raw: bytes, n: int) -> list[bool]:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return [bool(b) for b in bits[:n]]


def save_model(model: Model, path) -> None:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<B", _FORM_CODES[model.form])
    n = len(model.symbols)
    out += struct.pack("<III", model.d, model.p, n)
    for s in model.symbols:
        raw = s.encode("utf-8")
        out += struct.pack("<I", len(raw)) + raw
    out += _pack_bitmap([i in model.relation_ids for i in range(n)])
    out += np.ascontiguousarray(model.emb.vectors, dtype="<f8").tobytes()
    for a in model.params.arrays():
        out += np.ascontiguousarray(a, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(out))


def load_model(path) -> Model:
    raw = Path(path).read_bytes()
    if len(raw) < 17 or raw[:4] != MAGIC:
        raise IntegrityError(f"{path}: not a recognized model file (bad magic/version)")
    off = 4
    (form_code,) = struct.unpack_from("<B", raw, off)
    off += 1
    if form_code not in _FORM_NAMES:
        raise IntegrityError(f"{path}: unknown form code {form_code}")
    form = _FORM_NAMES[form_code]
    d, p, n = struct.unpack_from("<III", raw, off)
    off += 12
    symbols = []
    for _ in range(n):
        (length,) = struct.unpack_from("<I", raw, off)
        off += 4
        symbols.append(raw[off:off + length].decode("utf-8"))
        off += length
    bitmap_len = (n + 7) // 8
    flags = _unpack_bitmap(raw[off:off + bitmap_len], n)
    off += bitmap_len
    relation_ids = frozenset(i for i, f in enumerate(flags) if f)

    def read_floats(count, shape):
        nonlocal off
        nbytes = count * 8
        if off + nbytes > len(raw):
            raise IntegrityError(f"{path}: truncated model file")
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        off += nbytes
        return arr.copy()

    emb = EmbeddingTable(read_floats(n * d, (n, d)), relation_ids)
    if form == LINEAR:
        params = LinearParams(
            read_floats(p * d, (p, d)), read_floats(p * d, (p, d)),
            read_floats(p * d, (p, d)), read_floats(p * d, (p, d)),
            read_floats(p, (p,)), read_floats(p, (p,)))
    else:
        params = BilinearParams(
            read_floats(p * d * d, (p, d, d)), read_floats(p * d * d, (p, d, d)),
            read_floats(p, (p,)), read_floats(p, (p,)))
    if off != len(raw):
        raise IntegrityError(f"{path}: trailing bytes in model file")
    return Model(form, symbols, relation_ids, emb, params)
