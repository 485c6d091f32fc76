"""Brute-force IMA/DVI ADPCM reference, written from the published algorithm.

Plain Python integers and lists only; nothing is shared with the package.
Block convention: each block starts with the predictor set to its first
input sample and the step index carried over from the previous block. The
first block's index is found by exhaustive search: every index 0..88 is
tried and the one with the smallest squared reconstruction error of that
block wins (lowest index on ties).
"""

STEPS = [
    7, 8, 9, 10, 11, 12, 13, 14, 16, 17, 19, 21, 23, 25, 28, 31, 34, 37, 41, 45,
    50, 55, 60, 66, 73, 80, 88, 97, 107, 118, 130, 143, 157, 173, 190, 209, 230, 253,
    279, 307, 337, 371, 408, 449, 494, 544, 598, 658, 724, 796, 876, 963, 1060, 1166,
    1282, 1411, 1552, 1707, 1878, 2066, 2272, 2499, 2749, 3024, 3327, 3660, 4026, 4428,
    4871, 5358, 5894, 6484, 7132, 7845, 8630, 9493, 10442, 11487, 12635, 13899, 15289,
    16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767,
]
INDEX_ADJUST = {0: -1, 1: -1, 2: -1, 3: -1, 4: 2, 5: 4, 6: 6, 7: 8}


def clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


def reconstruct(code, step):
    """Quantized difference for a 4-bit code: step * (magnitude + 0.5) / 4, in shifts."""
    diff = step >> 3
    for bit, shift in ((4, 0), (2, 1), (1, 2)):
        if code & bit:
            diff += step >> shift
    return -diff if code & 8 else diff


def quantize(delta, step):
    """4-bit code chosen by successive approximation against step, step/2, step/4."""
    code = 8 if delta < 0 else 0
    mag = abs(delta)
    for bit, shift in ((4, 0), (2, 1), (1, 2)):
        s = step >> shift
        if mag >= s:
            code |= bit
            mag -= s
    return code


def _encode_from(seg, index):
    pred = seg[0]
    codes, recon = [], []
    for s in seg:
        code = quantize(s - pred, STEPS[index])
        pred = clamp(pred + reconstruct(code, STEPS[index]), -32768, 32767)
        index = clamp(index + INDEX_ADJUST[code & 7], 0, 88)
        codes.append(code)
        recon.append(pred)
    return codes, recon, index


def search_start_index(seg):
    seg = [int(v) for v in seg]
    errors = []
    for index in range(89):
        _, recon, _ = _encode_from(seg, index)
        errors.append(sum((a - b) ** 2 for a, b in zip(seg, recon)))
    return errors.index(min(errors))


def encode(samples, block=320):
    """Return a list of (predictor, step_index, codes) triples."""
    out = []
    index = search_start_index(samples[:block]) if len(samples) else 0
    for start in range(0, len(samples), block):
        seg = [int(v) for v in samples[start:start + block]]
        first = index
        codes, _, index = _encode_from(seg, index)
        out.append((seg[0], first, codes))
    return out


def decode(blocks):
    out = []
    for pred, index, codes in blocks:
        for code in codes:
            pred = clamp(pred + reconstruct(code, STEPS[index]), -32768, 32767)
            index = clamp(index + INDEX_ADJUST[code & 7], 0, 88)
            out.append(pred)
    return out


def pack(codes):
    """Two codes per byte, earlier sample in the low nibble."""
    if len(codes) % 2:
        codes = codes + [0]
    return bytes(codes[i] | (codes[i + 1] << 4) for i in range(0, len(codes), 2))
