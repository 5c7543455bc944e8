"""Binary checkpoints of a :class:`~wavelab.waterwave.WaveState`.

Layout, all little-endian::

    b"WVL1"
    uint32 n      complex128[n]  Ŵ (mean of W at the zero mode)
    uint32 n      complex128[n]  Q̂
    float64 t, g, sigma, gamma, period
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from wavelab.errors import IoError
from wavelab.spectral import PeriodicGrid
from wavelab.waterwave import PhysParams, WaveState

logger = logging.getLogger(__name__)

MAGIC: bytes = b"WVL1"

_LEN = struct.Struct("<I")
_TAIL = struct.Struct("<5d")
_COEFF_DTYPE = np.dtype("<c16")


def encode_checkpoint(state: WaveState) -> bytes:
    w, q = state.coefficients()
    n = state.grid.n_points
    p = state.params
    return b"".join(
        [
            MAGIC,
            _LEN.pack(n),
            w.astype(_COEFF_DTYPE).tobytes(),
            _LEN.pack(n),
            q.astype(_COEFF_DTYPE).tobytes(),
            _TAIL.pack(state.t, p.g, p.sigma, p.gamma, state.grid.period),
        ]
    )


def _take_array(blob: bytes, offset: int) -> tuple[np.ndarray, int]:
    (n,) = _LEN.unpack_from(blob, offset)
    offset += _LEN.size
    size = n * _COEFF_DTYPE.itemsize
    if offset + size > len(blob):
        raise IoError(f"Checkpoint truncated: expected {n} coefficients at byte {offset}.")
    arr = np.frombuffer(blob, dtype=_COEFF_DTYPE, count=n, offset=offset).astype(complex)
    return arr, offset + size


def decode_checkpoint(blob: bytes) -> WaveState:
    """Inverse of :func:`encode_checkpoint`.

    Raises
    ------
    IoError
        On a wrong magic tag, mismatched lengths or truncated data.
    """
    if blob[: len(MAGIC)] != MAGIC:
        raise IoError(f"Not a wavelab checkpoint (magic {blob[:4]!r}).")
    try:
        w, offset = _take_array(blob, len(MAGIC))
        q, offset = _take_array(blob, offset)
        t, g, sigma, gamma, period = _TAIL.unpack_from(blob, offset)
    except struct.error as exc:
        raise IoError(f"Checkpoint truncated: {exc}") from exc
    if w.size != q.size:
        raise IoError(f"Checkpoint length mismatch: W has {w.size}, Q has {q.size} coefficients.")
    try:
        grid = PeriodicGrid(int(w.size), period)
        params = PhysParams(g, sigma, gamma)
    except ValueError as exc:
        raise IoError(f"Checkpoint holds an invalid grid or parameters: {exc}") from exc
    return WaveState.from_coefficients(grid, w, q, params, t)


def write_checkpoint(state: WaveState, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(state))
    except OSError as exc:
        raise IoError(f"Cannot write checkpoint {path}: {exc}") from exc
    logger.info("Checkpoint t=%.6f written to %s", state.t, path)
    return path


def read_checkpoint(path: Path) -> WaveState:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoError(f"Cannot read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(blob)
