import numpy as np
import pytest
from helpers import golden_json
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import int_arith

from earedge.dataset.toy import toy_dataset
from earedge.features import mfcc_batch
from earedge.kws import KwsModel, QuantizedKwsModel, quantize_int8, top1_agreement
from earedge.kws.modelio import from_bytes, to_bytes
from earedge.kws.quantize import (
    LAYERS,
    SCALE_FLOOR,
    QParams,
    affine_qparams,
    multiply_by_quantized_multiplier,
    quantize_multiplier,
    symmetric_qparams,
)

GOLDEN = golden_json("int8_forward.json")


def model_from_spec(spec) -> QuantizedKwsModel:
    weights = {l: np.array(spec[l]["w"], dtype=np.int32) for l in LAYERS}
    biases = {l: np.array(spec[l]["b"], dtype=np.int32) for l in LAYERS}
    weight_q = {l: QParams(spec[l]["w_scale"]) for l in LAYERS}
    bias_q = {l: QParams(spec[l]["b_scale"]) for l in LAYERS}
    act_q = {k: QParams(v["scale"], v["zp"]) for k, v in spec["act"].items()}
    return QuantizedKwsModel(weights, biases, weight_q, bias_q, act_q, np.zeros(13), np.ones(13))


def spec_from_model(q: QuantizedKwsModel) -> dict:
    spec = {"act": {k: {"scale": v.scale, "zp": v.zero_point} for k, v in q.act_q.items()}}
    for l in LAYERS:
        spec[l] = {"w": q.weights[l].tolist(), "b": q.biases[l].tolist(),
                   "w_scale": q.weight_q[l].scale, "b_scale": q.bias_q[l].scale}
    return spec


def test_weights_stay_in_symmetric_int8_range(int8_model):
    for l in LAYERS:
        assert int8_model.weights[l].min() >= -127 and int8_model.weights[l].max() <= 127
        assert int8_model.weight_q[l].zero_point == 0


def test_dequantization_error_within_half_step():
    model = KwsModel.init(7)
    q = quantize_int8(model, np.random.default_rng(0).normal(size=(4, 49, 13)))
    deq = q.dequantized_params()
    for l in LAYERS:
        err = np.abs(deq[f"{l}.w"] - model.params[f"{l}.w"]).max()
        assert err <= q.weight_q[l].scale / 2 + 1e-12


@given(arrays(np.float64, st.integers(1, 200), elements=st.floats(-10, 10)))
def test_symmetric_quantizer_round_trip(w):
    q = symmetric_qparams(w)
    codes = q.quantize(w, -127, 127)
    assert np.abs(codes).max() <= 127
    assert np.abs(q.dequantize(codes) - w).max() <= q.scale / 2 + 1e-12


@given(st.floats(-100, 100), st.floats(-100, 100))
def test_affine_range_contains_zero_exactly(a, b):
    q = affine_qparams(min(a, b), max(a, b))
    assert -128 <= q.zero_point <= 127
    assert q.dequantize(q.quantize(0.0)) == 0.0


def test_all_zero_calibration_uses_scale_floor():
    model = KwsModel.zeros()
    q = quantize_int8(model, np.zeros((1, 49, 13)))
    for name, p in q.act_q.items():
        assert p.scale == SCALE_FLOOR, name
    assert all(q.weight_q[l].scale == SCALE_FLOOR for l in LAYERS)
    probs = q.predict_proba(np.zeros((49, 13)))
    assert np.all(np.isfinite(probs)) and np.allclose(probs, 0.25)


def test_empty_calibration_rejected():
    with pytest.raises(ValueError):
        quantize_int8(KwsModel.init(), np.zeros((0, 49, 13)))


@pytest.mark.parametrize("case", range(4))
def test_integer_forward_matches_golden(case):
    q = model_from_spec(GOLDEN["spec"])
    entry = GOLDEN["cases"][case]
    got = q.forward_int(np.array([entry["input"]], dtype=np.int32))[0]
    assert got.tolist() == entry["logits"]


def test_integer_forward_matches_reference_on_bundled_model(int8_model):
    rng = np.random.default_rng(17)
    spec = spec_from_model(int8_model)
    xs = rng.integers(-128, 128, (3, 49, 13))
    got = int8_model.forward_int(xs.astype(np.int32))
    for x, row in zip(xs, got):
        assert row.tolist() == int_arith.forward(spec, x.tolist())


@given(st.integers(-(2 ** 31), 2 ** 31 - 1), st.floats(1e-6, 0.999))
def test_fixed_point_rescale_matches_reference(acc, m):
    mult, shift = quantize_multiplier(m)
    got = int(multiply_by_quantized_multiplier(np.array([acc]), mult, shift)[0])
    assert got == int_arith.rescale(acc, m)


def test_bundled_int8_agrees_with_float(float_model, int8_model):
    clips, _ = toy_dataset(per_class=25, seed=99)
    x = mfcc_batch([c.samples for c in clips])
    assert top1_agreement(float_model, int8_model, x) >= 0.95


def test_int8_file_round_trip(int8_model):
    back = from_bytes(to_bytes(int8_model))
    assert isinstance(back, QuantizedKwsModel)
    for l in LAYERS:
        assert np.array_equal(back.weights[l], int8_model.weights[l])
        assert back.weight_q[l] == int8_model.weight_q[l]
    assert back.act_q == int8_model.act_q
    assert int8_model.n_params == 1492
