from earedge.kws import KwsModel, profile
from earedge.kws.profile import REFERENCE_PEAK_RAM_BYTES, layer_shapes


def test_static_counts_float():
    prof = profile(KwsModel.init())
    assert prof.params == 1492
    assert prof.weight_bytes == 1492 * 4
    assert prof.mfcc_ms is None


def test_static_counts_int8(int8_model):
    prof = profile(int8_model)
    assert prof.params == 1492
    assert prof.weight_bytes == prof.params
    assert prof.peak_activation_bytes <= REFERENCE_PEAK_RAM_BYTES


def test_mac_count_by_hand():
    # conv1: 49 steps x 8 filters x 39 taps; conv2: 24 x 16 x 24; dense: 192 x 4
    expected = 49 * 8 * 39 + 24 * 16 * 24 + 192 * 4
    assert sum(s[3] for s in layer_shapes()) == expected
    assert profile(KwsModel.init()).macs == expected


def test_peak_is_largest_adjacent_pair(int8_model):
    # conv1 reads 49x13 and writes 49x8 int8 values
    assert profile(int8_model).peak_activation_bytes == 49 * 13 + 49 * 8


def test_timing_is_reported_not_asserted(int8_model):
    prof = profile(int8_model, time_it=True, repeats=2)
    assert prof.mfcc_ms > 0 and prof.classify_ms > 0
    assert set(prof.as_dict()) >= {"params", "macs", "peak_activation_bytes", "weight_bytes"}
