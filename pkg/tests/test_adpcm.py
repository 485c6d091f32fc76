import math

import numpy as np
import pytest
from helpers import golden_json, sine, snr_db
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import ima_adpcm as ref

from earedge.audio.adpcm import (
    BLOCK_SAMPLES,
    HEADER_BYTES,
    STEP_TABLE,
    AdpcmBlock,
    AdpcmEncoder,
    adpcm_decode,
    adpcm_encode,
    decode_block,
    payload_bytes,
    read_adpcm_file,
    write_adpcm_file,
)
from earedge.audio.pcm import PcmBuffer
from earedge.errors import CorruptBlockError

VECTORS = golden_json("adpcm_vectors.json")


@pytest.mark.parametrize("vec", VECTORS, ids=[v["name"] for v in VECTORS])
def test_encoder_matches_reference_vectors(vec):
    blocks = adpcm_encode(PcmBuffer(np.array(vec["input"], np.int16)))
    got = [{"predictor": b.predictor, "step_index": b.step_index,
            "sample_count": b.sample_count, "nibbles": b.nibbles.hex()} for b in blocks]
    assert got == vec["blocks"]


@pytest.mark.parametrize("vec", VECTORS, ids=[v["name"] for v in VECTORS])
def test_decoder_matches_reference_vectors(vec):
    blocks = [AdpcmBlock(b["predictor"], b["step_index"], bytes.fromhex(b["nibbles"]),
                         b["sample_count"]) for b in vec["blocks"]]
    assert adpcm_decode(blocks).samples.tolist() == vec["decoded"]


def test_reference_oracle_reproduces_committed_vectors():
    for vec in VECTORS:
        blocks = ref.encode(vec["input"])
        assert [ref.pack(c).hex() for _, _, c in blocks] == [b["nibbles"] for b in vec["blocks"]]


def test_full_scale_sine_round_trip_against_oracle():
    x = sine(440, 1.0, level=32767 / 32768)
    blocks = adpcm_encode(x)
    y = adpcm_decode(blocks)
    oracle = ref.decode(ref.encode(x.samples.tolist()))
    assert y.samples.tolist() == oracle
    assert snr_db(x.samples, y.samples) >= 30


def test_zero_input_payload_and_ratio():
    blocks = adpcm_encode(PcmBuffer(np.zeros(16000, np.int16)))
    assert payload_bytes(blocks) == 8000
    wire = sum(b.wire_size for b in blocks)
    assert wire == 8000 + HEADER_BYTES * math.ceil(16000 / BLOCK_SAMPLES)
    assert 3.9 < 32000 / wire <= 4.0


def test_empty_buffer():
    assert adpcm_encode(PcmBuffer(np.zeros(0, np.int16))) == []
    assert len(adpcm_decode([])) == 0


def test_non_mono_rejected():
    stereo = PcmBuffer(np.zeros((10, 2), np.int16), 16000, 2)
    with pytest.raises(ValueError):
        adpcm_encode(stereo)


def test_zero_codes_from_smallest_step_are_silent():
    assert not decode_block(AdpcmBlock(0, 0, bytes(160), 320)).any()


def test_zero_codes_settle_to_a_constant():
    out = decode_block(AdpcmBlock(0, 40, bytes(160), 320)).astype(int)
    # each code 0 adds step >> 3 while the step shrinks, so the drift stops
    assert out[-1] == sum(STEP_TABLE[i] >> 3 for i in range(41))
    assert np.all(np.diff(out) >= 0) and np.all(np.diff(out[-100:]) == 0)


def test_unit_impulse_tracked_within_one_step():
    x = np.zeros(64, np.int16)
    x[0] = 1
    block = adpcm_encode(PcmBuffer(x))[0]
    y = decode_block(block)
    _, index, codes = ref.encode(x.tolist())[0]
    assert block.step_index == index
    steps = [ref.STEPS[index]]
    for code in codes:
        index = ref.clamp(index + ref.INDEX_ADJUST[code & 7], 0, 88)
        steps.append(ref.STEPS[index])
    for i in range(8):
        assert abs(int(y[i]) - int(x[i])) <= steps[i]


def test_corrupt_step_index_rejected():
    with pytest.raises(CorruptBlockError):
        AdpcmBlock(0, 89, bytes(2), 4)
    with pytest.raises(CorruptBlockError):
        AdpcmBlock.from_bytes(b"\x00\x00\x5a\x00" + bytes(4))
    with pytest.raises(CorruptBlockError):
        AdpcmBlock.from_bytes(b"\x00\x00")


def test_blocks_decode_independently():
    # a missing block does not disturb its neighbours
    x = sine(300, 0.2)
    blocks = adpcm_encode(x)
    full = adpcm_decode(blocks).samples
    gapped = adpcm_decode(blocks[:3] + blocks[4:]).samples
    assert np.array_equal(gapped[:960], full[:960])
    assert np.array_equal(gapped[960:], full[1280:])


def test_streaming_encoder_matches_batch():
    x = sine(523, 0.5)
    enc = AdpcmEncoder()
    streamed = [enc.encode(PcmBuffer(x.samples[i:i + 320])) for i in range(0, len(x), 320)]
    assert streamed == adpcm_encode(x)


def test_file_container_round_trip(tmp_path):
    x = sine(700, 0.33)
    blocks = adpcm_encode(x)
    size = write_adpcm_file(blocks, tmp_path / "a.ima")
    assert size == (tmp_path / "a.ima").stat().st_size
    back, rate = read_adpcm_file(tmp_path / "a.ima")
    assert rate == 16000 and back == blocks


def test_file_container_truncation(tmp_path):
    write_adpcm_file(adpcm_encode(sine(700, 0.1)), tmp_path / "a.ima")
    raw = (tmp_path / "a.ima").read_bytes()
    (tmp_path / "b.ima").write_bytes(raw[:-10])
    with pytest.raises(CorruptBlockError):
        read_adpcm_file(tmp_path / "b.ima")
    (tmp_path / "c.ima").write_bytes(b"WAVE" + raw[4:])
    with pytest.raises(CorruptBlockError):
        read_adpcm_file(tmp_path / "c.ima")


@given(arrays(np.int16, st.integers(0, 2000)))
def test_exactly_four_bits_per_sample(samples):
    blocks = adpcm_encode(PcmBuffer(samples))
    assert sum(b.sample_count for b in blocks) == len(samples)
    assert payload_bytes(blocks) == sum(math.ceil(b.sample_count / 2) for b in blocks)
    assert all(0 <= b.step_index <= 88 for b in blocks)
    assert len(adpcm_decode(blocks)) == len(samples)


@given(arrays(np.int16, st.integers(1, 700)))
def test_matches_oracle_on_arbitrary_input(samples):
    blocks = adpcm_encode(PcmBuffer(samples))
    expected = ref.encode(samples.tolist())
    assert [(b.predictor, b.step_index) for b in blocks] == [(p, i) for p, i, _ in expected]
    assert [b.nibbles for b in blocks] == [ref.pack(c) for _, _, c in expected]
    assert adpcm_decode(blocks).samples.tolist() == ref.decode(expected)


@given(st.lists(st.tuples(st.floats(50, 1000), st.floats(0, 2 * math.pi)), min_size=1, max_size=3),
       st.floats(0.05, 0.5))
def test_round_trip_snr_band_limited(tones, level):
    # voice-band content up to 1 kHz; the codec's SNR falls with frequency
    mix = sum(sine(f, 0.25, level=1.0, phase=p).samples / 32768.0 for f, p in tones)
    peak = np.abs(mix).max()
    if peak < 1e-3:
        return
    x = PcmBuffer.from_float(mix * (level / peak))
    y = adpcm_decode(adpcm_encode(x))
    assert snr_db(x.samples, y.samples) >= 25


def test_start_index_beats_fixed_start_on_short_tone():
    x = sine(800, 0.02, level=0.5)
    chosen = adpcm_decode(adpcm_encode(x)).samples
    fixed = ref.decode([(x.samples[0], 0, ref.encode(x.samples.tolist())[0][2])])
    assert snr_db(x.samples, chosen) > snr_db(x.samples, np.array(fixed))


@given(arrays(np.int16, st.integers(1, 500)))
def test_encode_and_decode_are_pure(samples):
    pcm = PcmBuffer(samples)
    a, b = adpcm_encode(pcm), adpcm_encode(pcm)
    assert a == b
    assert adpcm_decode(a) == adpcm_decode(b)
