"""4-bit IMA/DVI ADPCM codec.

Blocks are self-describing: each carries the predictor and step index the
decoder starts from, so any block decodes on its own. The encoder is free
to pick the first block's step index; it tries all 89 and keeps the one
that reconstructs that block best, which removes the slow ramp-up of a
fixed starting index. Later blocks carry the index on. Wire layout::

    [predictor i16 LE][step_index u8][reserved u8][nibbles...]

with the low nibble of each byte holding the earlier sample.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from earedge.audio.pcm import PcmBuffer
from earedge.errors import CorruptBlockError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

BLOCK_SAMPLES = 320
HEADER = struct.Struct("<hBB")
HEADER_BYTES = HEADER.size

INDEX_TABLE = np.array([-1, -1, -1, -1, 2, 4, 6, 8] * 2, dtype=np.int32)

STEP_TABLE = np.array([
    7, 8, 9, 10, 11, 12, 13, 14, 16, 17,
    19, 21, 23, 25, 28, 31, 34, 37, 41, 45,
    50, 55, 60, 66, 73, 80, 88, 97, 107, 118,
    130, 143, 157, 173, 190, 209, 230, 253, 279, 307,
    337, 371, 408, 449, 494, 544, 598, 658, 724, 796,
    876, 963, 1060, 1166, 1282, 1411, 1552, 1707, 1878, 2066,
    2272, 2499, 2749, 3024, 3327, 3660, 4026, 4428, 4871, 5358,
    5894, 6484, 7132, 7845, 8630, 9493, 10442, 11487, 12635, 13899,
    15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767,
], dtype=np.int32)


@dataclass(frozen=True)
class AdpcmBlock:
    predictor: int
    step_index: int
    nibbles: bytes
    sample_count: int

    def __post_init__(self):
        if not 0 <= self.step_index <= 88:
            raise CorruptBlockError(f"step_index {self.step_index} outside [0, 88]")
        if not -32768 <= self.predictor <= 32767:
            raise CorruptBlockError(f"predictor {self.predictor} outside int16")
        if len(self.nibbles) != (self.sample_count + 1) // 2:
            raise CorruptBlockError(
                f"{len(self.nibbles)} payload bytes cannot hold {self.sample_count} samples")

    def to_bytes(self) -> bytes:
        return HEADER.pack(self.predictor, self.step_index, 0) + self.nibbles

    @classmethod
    def from_bytes(cls, data: bytes, sample_count: int | None = None) -> AdpcmBlock:
        """Parse a wire block; ``sample_count`` defaults to two per payload byte."""
        if len(data) < HEADER_BYTES:
            raise CorruptBlockError("block shorter than its header")
        predictor, step_index, _ = HEADER.unpack_from(data)
        nibbles = bytes(data[HEADER_BYTES:])
        if sample_count is None:
            sample_count = 2 * len(nibbles)
        return cls(predictor, step_index, nibbles, sample_count)

    @property
    def wire_size(self) -> int:
        return HEADER_BYTES + len(self.nibbles)


@njit(cache=True)
def _encode_core(x, block, steps, index_adj, start_index):
    n = x.shape[0]
    n_blocks = (n + block - 1) // block
    preds = np.zeros(n_blocks, np.int32)
    idxs = np.zeros(n_blocks, np.int32)
    codes = np.zeros(n, np.uint8)
    index = start_index
    for b in range(n_blocks):
        start = b * block
        stop = min(n, start + block)
        pred = np.int64(x[start])
        preds[b] = pred
        idxs[b] = index
        for i in range(start, stop):
            step = steps[index]
            diff = np.int64(x[i]) - pred
            code = 0
            if diff < 0:
                code = 8
                diff = -diff
            vpdiff = step >> 3
            if diff >= step:
                code |= 4
                diff -= step
                vpdiff += step
            step >>= 1
            if diff >= step:
                code |= 2
                diff -= step
                vpdiff += step
            step >>= 1
            if diff >= step:
                code |= 1
                vpdiff += step
            if code & 8:
                pred -= vpdiff
            else:
                pred += vpdiff
            if pred > 32767:
                pred = 32767
            elif pred < -32768:
                pred = -32768
            index += index_adj[code]
            if index < 0:
                index = 0
            elif index > 88:
                index = 88
            codes[i] = code
    return preds, idxs, codes, index


@njit(cache=True)
def _best_start_index(x, steps, index_adj):
    """Step index in [0, 88] minimising squared error over ``x``; ties go low."""
    best_err = -1.0
    best = 0
    for start in range(89):
        pred = np.int64(x[0])
        index = start
        err = 0.0
        for i in range(x.shape[0]):
            step = steps[index]
            diff = np.int64(x[i]) - pred
            code = 0
            if diff < 0:
                code = 8
                diff = -diff
            vpdiff = step >> 3
            if diff >= step:
                code |= 4
                diff -= step
                vpdiff += step
            step >>= 1
            if diff >= step:
                code |= 2
                diff -= step
                vpdiff += step
            step >>= 1
            if diff >= step:
                code |= 1
                vpdiff += step
            if code & 8:
                pred -= vpdiff
            else:
                pred += vpdiff
            if pred > 32767:
                pred = 32767
            elif pred < -32768:
                pred = -32768
            index += index_adj[code]
            if index < 0:
                index = 0
            elif index > 88:
                index = 88
            e = float(np.int64(x[i]) - pred)
            err += e * e
        if best_err < 0 or err < best_err:
            best_err = err
            best = start
    return best


def start_index(x, block_samples: int = BLOCK_SAMPLES) -> int:
    """Starting step index chosen for a stream beginning with ``x``."""
    x = np.asarray(x)
    if len(x) == 0:
        return 0
    return int(_best_start_index(x[:block_samples], STEP_TABLE, INDEX_TABLE))


@njit(cache=True)
def _decode_core(codes, pred, index, steps, index_adj, out):
    for i in range(codes.shape[0]):
        code = codes[i]
        step = steps[index]
        vpdiff = step >> 3
        if code & 4:
            vpdiff += step
        if code & 2:
            vpdiff += step >> 1
        if code & 1:
            vpdiff += step >> 2
        if code & 8:
            pred -= vpdiff
        else:
            pred += vpdiff
        if pred > 32767:
            pred = 32767
        elif pred < -32768:
            pred = -32768
        index += index_adj[code]
        if index < 0:
            index = 0
        elif index > 88:
            index = 88
        out[i] = pred
    return pred, index


def pack_nibbles(codes: np.ndarray) -> bytes:
    codes = np.asarray(codes, dtype=np.uint8)
    if codes.size % 2:
        codes = np.append(codes, np.uint8(0))
    return (codes[0::2] | (codes[1::2] << 4)).astype(np.uint8).tobytes()


def unpack_nibbles(data: bytes, count: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    codes = np.empty(2 * raw.size, np.uint8)
    codes[0::2] = raw & 0x0F
    codes[1::2] = raw >> 4
    return codes[:count]


def adpcm_encode(pcm: PcmBuffer, block_samples: int = BLOCK_SAMPLES) -> list[AdpcmBlock]:
    """Encode mono PCM into blocks of ``block_samples`` (the last may be short)."""
    if pcm.channels != 1:
        raise ValueError("ADPCM encoder accepts mono PCM only")
    if block_samples <= 0:
        raise ValueError("block_samples must be positive")
    return _encode(pcm.samples, block_samples, start_index(pcm.samples, block_samples))[0]


def _encode(x, block_samples: int, start_index: int) -> tuple[list[AdpcmBlock], int]:
    if len(x) == 0:
        return [], start_index
    preds, idxs, codes, index = _encode_core(x, block_samples, STEP_TABLE, INDEX_TABLE,
                                             np.int64(start_index))
    blocks = []
    for b in range(len(preds)):
        seg = codes[b * block_samples:(b + 1) * block_samples]
        blocks.append(AdpcmBlock(int(preds[b]), int(idxs[b]), pack_nibbles(seg), len(seg)))
    return blocks, int(index)


class AdpcmEncoder:
    """Chunk-at-a-time encoder; the step index carries over between calls,
    so streaming a signal chunk by chunk yields the same blocks as encoding
    it in one go with ``block_samples`` equal to the chunk size."""

    def __init__(self):
        self.step_index: int | None = None

    def encode(self, pcm: PcmBuffer) -> AdpcmBlock:
        if pcm.channels != 1:
            raise ValueError("ADPCM encoder accepts mono PCM only")
        if len(pcm) == 0:
            raise ValueError("cannot encode an empty chunk")
        if self.step_index is None:
            self.step_index = start_index(pcm.samples, len(pcm))
        blocks, self.step_index = _encode(pcm.samples, len(pcm), self.step_index)
        return blocks[0]


def decode_block(block: AdpcmBlock) -> np.ndarray:
    if not 0 <= block.step_index <= 88:
        raise CorruptBlockError(f"step_index {block.step_index} outside [0, 88]")
    codes = unpack_nibbles(block.nibbles, block.sample_count)
    out = np.empty(block.sample_count, np.int16)
    _decode_core(codes, np.int64(block.predictor), np.int64(block.step_index),
                 STEP_TABLE, INDEX_TABLE, out)
    return out


def adpcm_decode(blocks, sample_rate_hz: int = 16000) -> PcmBuffer:
    parts = [decode_block(b) for b in blocks]
    if not parts:
        return PcmBuffer(np.zeros(0, np.int16), sample_rate_hz)
    return PcmBuffer(np.concatenate(parts), sample_rate_hz)


def payload_bytes(blocks) -> int:
    """Nibble payload only, headers excluded."""
    return sum(len(b.nibbles) for b in blocks)


# ---- ADPCM file container -------------------------------------------------

FILE_MAGIC = b"IMA4"
FILE_HEADER = struct.Struct("<4sIIH")  # magic, sample_rate, total samples, block samples


def write_adpcm_file(blocks, path, sample_rate_hz: int = 16000,
                     block_samples: int = BLOCK_SAMPLES) -> int:
    """Write blocks back to back after a small header; returns bytes written."""
    total = sum(b.sample_count for b in blocks)
    body = b"".join(b.to_bytes() for b in blocks)
    data = FILE_HEADER.pack(FILE_MAGIC, sample_rate_hz, total, block_samples) + body
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_adpcm_file(path) -> tuple[list[AdpcmBlock], int]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < FILE_HEADER.size:
        raise CorruptBlockError(f"{path}: truncated header")
    magic, rate, total, block_samples = FILE_HEADER.unpack_from(data)
    if magic != FILE_MAGIC:
        raise CorruptBlockError(f"{path}: bad magic {magic!r}")
    blocks, pos, remaining = [], FILE_HEADER.size, total
    while remaining > 0:
        count = min(block_samples, remaining)
        size = HEADER_BYTES + (count + 1) // 2
        if pos + size > len(data):
            raise CorruptBlockError(f"{path}: truncated block data")
        blocks.append(AdpcmBlock.from_bytes(data[pos:pos + size], count))
        pos += size
        remaining -= count
    return blocks, rate
