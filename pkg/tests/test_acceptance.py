"""The twelve acceptance criteria, one test each.

Every test records a single PASS/FAIL line, printed in a summary section at the
end of the run, and then asserts on the same checks.
"""

import socket
import time
from contextlib import contextmanager

import numpy as np
import pytest
from helpers import golden_json, snr_db, wake_stream
from oracles import ima_adpcm as ref

from earedge.audio.adpcm import (
    AdpcmBlock,
    adpcm_decode,
    adpcm_encode,
    payload_bytes,
    write_adpcm_file,
)
from earedge.audio.pcm import PcmBuffer, write_wav
from earedge.dataset.toy import background, synth_clip, toy_dataset
from earedge.device import DeviceState, PowerProfile, simulate_power
from earedge.device.power import runtime_hours
from earedge.features import mfcc_batch, mfcc_window
from earedge.intent import bundled_corpus, fit
from earedge.kws import (
    LABELS,
    DetectorConfig,
    detect_stream,
    profile,
    quantize_int8,
    top1_agreement,
    train,
)
from earedge.kws.profile import REFERENCE_PEAK_RAM_BYTES
from earedge.netsim import coexistence_scenario, jitter_scenario
from earedge.scenario import bundled_scenario, load_scenario, run_scenario

RATE = 16000


@pytest.fixture
def verdict(verdicts):
    """Returns a recorder: ``verdict(n, title, checks, detail)``."""

    def record(n: int, title: str, checks: dict[str, bool], detail: str):
        failed = [name for name, ok in checks.items() if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n:>2} {status}  {title}: {detail}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        verdicts.append(line)
        print(line)
        assert not failed, line

    return record


@contextmanager
def stopwatch():
    box = {}
    t0 = time.perf_counter()
    yield box
    box["s"] = time.perf_counter() - t0


def one_minute_recording(seed: int = 0) -> PcmBuffer:
    """Sixty seconds of synthetic speech-like clips over a quiet room."""
    rng = np.random.default_rng(seed)
    clips = [synth_clip(LABELS[i % 4], rng).samples for i in range(60)]
    return PcmBuffer(np.concatenate(clips))


# ---- 1 -------------------------------------------------------------------

def test_compression_ratio(tmp_path, verdict):
    pcm = one_minute_recording()
    # compile the codec kernels once so the clock sees only the encode
    adpcm_decode(adpcm_encode(PcmBuffer(pcm.samples[:320])))
    with stopwatch() as sw:
        blocks = adpcm_encode(pcm)
        adpcm_size = write_adpcm_file(blocks, tmp_path / "minute.adpcm", RATE)
    wav = tmp_path / "minute.wav"
    write_wav(pcm, wav)
    wav_size = wav.stat().st_size
    ratio = wav_size / adpcm_size
    bits = 8 * payload_bytes(blocks) / len(pcm)
    verdict(1, "compression ratio", {
        "60 s fixture": len(pcm) == 60 * RATE,
        "4 bits/sample": bits == 4.0,
        "ratio >= 3.9": ratio >= 3.9,
        "runtime < 1 s": sw["s"] < 1.0,
    }, f"{bits:g} bits/sample, {wav_size} / {adpcm_size} bytes = {ratio:.3f}x, {sw['s']:.2f} s")


# ---- 2 -------------------------------------------------------------------

def band_limited(rng) -> PcmBuffer:
    t = np.arange(RATE) / RATE
    x = np.zeros(RATE)
    for _ in range(rng.integers(1, 4)):
        x += rng.uniform(0.2, 1.0) * np.sin(2 * np.pi * rng.uniform(50, 1000) * t
                                            + rng.uniform(0, 2 * np.pi))
    x *= rng.uniform(0.05, 0.5) / np.abs(x).max()
    return PcmBuffer.from_float(x)


def test_codec_fidelity(verdict):
    rng = np.random.default_rng(2024)
    with stopwatch() as sw:
        snrs = []
        for _ in range(100):
            x = band_limited(rng)
            snrs.append(snr_db(x.samples, adpcm_decode(adpcm_encode(x)).samples))
        vectors = golden_json("adpcm_vectors.json")
        exact = 0
        for vec in vectors:
            blocks = adpcm_encode(PcmBuffer(np.array(vec["input"], np.int16)))
            enc = [[b.predictor, b.step_index, b.sample_count, b.nibbles.hex()] for b in blocks]
            want = [[b["predictor"], b["step_index"], b["sample_count"], b["nibbles"]]
                    for b in vec["blocks"]]
            decoded = adpcm_decode([AdpcmBlock(b["predictor"], b["step_index"],
                                               bytes.fromhex(b["nibbles"]), b["sample_count"])
                                    for b in vec["blocks"]])
            oracle_hex = [ref.pack(c).hex() for _, _, c in ref.encode(vec["input"])]
            exact += (enc == want and decoded.samples.tolist() == vec["decoded"]
                      and oracle_hex == [b["nibbles"] for b in vec["blocks"]])
    worst = min(snrs)
    verdict(2, "codec fidelity", {
        "min SNR >= 25 dB": worst >= 25,
        "golden vectors bit-exact": exact == len(vectors),
        "runtime < 5 s": sw["s"] < 5.0,
    }, f"SNR min {worst:.1f} dB / median {np.median(snrs):.1f} dB over 100 signals, "
       f"{exact}/{len(vectors)} vectors exact, {sw['s']:.2f} s")


# ---- 3 -------------------------------------------------------------------

def test_mfcc_shape(verdict):
    rng = np.random.default_rng(3)
    shapes, shift_ok = set(), 0
    for _ in range(50):
        level = rng.uniform(0.01, 1.0)
        x = (level * rng.uniform(-32768, 32767, RATE + 320)).astype(np.int16)
        a = mfcc_window(x[:RATE])
        b = mfcc_window(x[320:])
        shapes.add(a.shape)
        # one 20 ms hop later, every frame but the first reappears one row up
        shift_ok += np.allclose(b[1:48], a[2:49], rtol=1e-6, atol=1e-6 * np.abs(a).max())
    n_feats = {r * c for r, c in shapes}
    verdict(3, "MFCC shape", {
        "49x13 = 637": shapes == {(49, 13)} and n_feats == {637},
        "shift covariance 50/50": shift_ok == 50,
    }, f"shapes {sorted(shapes)}, {n_feats.pop()} features, shift covariance {shift_ok}/50")


# ---- 4 -------------------------------------------------------------------

def gradient_error(model, x, y, h=1e-6) -> float:
    _, grads = model.loss_and_grad(x, y)
    worst = 0.0
    for name, p in model.params.items():
        flat = p.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up, _ = model.loss_and_grad(x, y)
            flat[i] = old - h
            down, _ = model.loss_and_grad(x, y)
            flat[i] = old
            num = (up - down) / (2 * h)
            ana = grads[name].reshape(-1)[i]
            denom = max(abs(num), abs(ana))
            if denom > 1e-7:
                worst = max(worst, abs(num - ana) / denom)
    return worst


def test_kws_training_and_int8(verdict):
    with stopwatch() as sw:
        clips, names = toy_dataset(per_class=300, seed=0)
        x = mfcc_batch([c.samples for c in clips])
        labels = np.array([LABELS.index(n) for n in names])
        result = train(x, labels, epochs=100, lr=0.005, batch=32, split=0.8, seed=0)
        val = x[result.val_idx]
        q = quantize_int8(result.model, x[result.train_idx[:200]])
        agree = top1_agreement(result.model, q, val)
        grad_err = gradient_error(result.model, val[:4], labels[result.val_idx[:4]])
    acc = result.final_val_acc
    verdict(4, "KWS training", {
        "val acc >= 0.95": acc >= 0.95,
        "int8 agreement >= 0.95": agree >= 0.95,
        "gradient rel err <= 1e-3": grad_err <= 1e-3,
        "runtime < 120 s": sw["s"] < 120,
    }, f"val acc {acc:.3f} after {len(result.history)} epochs, int8 agreement {agree:.3f}, "
       f"gradient rel err {grad_err:.1e}, {sw['s']:.1f} s")


# ---- 5 -------------------------------------------------------------------

OFFSETS = [[2.0], [3.3], [1.2, 6.0], [4.7], [2.5, 8.1], [1.0], [5.6], [3.0, 7.5], [2.2], [6.4]]


def test_detector_properties(int8_model, verdict):
    cfg = DetectorConfig(threshold=0.43)
    with stopwatch() as sw:
        noise_events = 0
        for k, kind in enumerate(("white", "pink", "brown", "hum")):
            rng = np.random.default_rng(100 + k)
            noise = PcmBuffer.from_float(background(60.0, rng, -30.0, kind))
            noise_events += len(detect_stream(noise, cfg, int8_model))
        hits, positives, min_gap = 0, 0, np.inf
        for seed, offs in enumerate(OFFSETS):
            events = detect_stream(wake_stream(10.0, offs, seed), cfg, int8_model)
            positives += len(offs)
            matched = sum(1 for off in offs
                          if sum(abs(e.t_start - off) <= cfg.stride_s for e in events) == 1)
            hits += matched if len(events) == len(offs) else 0
            starts = [e.t_start for e in events]
            if len(starts) > 1:
                min_gap = min(min_gap, float(np.min(np.diff(starts))))
    verdict(5, "detector properties", {
        "no events on noise": noise_events == 0,
        "one event per positive": hits == positives,
        "events >= 1 s apart": min_gap >= cfg.suppression_s,
        "runtime < 30 s": sw["s"] < 30,
    }, f"{noise_events} events on 4x60 s noise, {hits}/{positives} positives matched "
       f"in 10 fixtures, closest pair {min_gap:.1f} s, {sw['s']:.1f} s")


# ---- 6 -------------------------------------------------------------------

def test_resource_profile(float_model, int8_model, verdict):
    fp = profile(float_model)
    qp = profile(int8_model, time_it=True)
    verdict(6, "resource profile", {
        "params == 1492": fp.params == qp.params == 1492,
        "int8 weight bytes == 1492": qp.weight_bytes == 1492,
        "peak activations <= 15.4 KB": qp.peak_activation_bytes <= REFERENCE_PEAK_RAM_BYTES,
    }, f"{qp.params} params, {qp.weight_bytes} weight bytes, peak {qp.peak_activation_bytes} B, "
       f"{qp.macs} MACs, mfcc {qp.mfcc_ms:.2f} ms, classify {qp.classify_ms:.2f} ms (reported)")


# ---- 7 -------------------------------------------------------------------

def test_power_model(verdict):
    p = PowerProfile()
    baseline_h = simulate_power(p, [(DeviceState.BASELINE_LISTENING, 1.0)]).runtime_to_empty_h
    burst_min = simulate_power(p, [(DeviceState.ACTIVE_QUERY, 0.1)]).runtime_to_empty_h * 60
    average_h = runtime_hours(p.battery_mah, 8.0)
    verdict(7, "power model", {
        "90 mA ~ 2 h (+-15%)": abs(baseline_h - 2.0) <= 0.3 and round(baseline_h, 2) == 2.22,
        "425 mA in 25-30 min": 25 <= burst_min <= 30 and round(burst_min, 1) == 28.2,
        "8 mA >= 24 h": average_h >= 24,
    }, f"{p.battery_mah:g} mAh: {baseline_h:.2f} h at {p.baseline_listening:g} mA, "
       f"{burst_min:.1f} min at {p.active_query:g} mA, {average_h:.1f} h at 8 mA")


# ---- 8 -------------------------------------------------------------------

def test_jitter_buffer(verdict):
    seeds = range(20)
    with stopwatch() as sw:
        buffered = [jitter_scenario(300, s, jitter_ms=250, duration_s=5).underruns for s in seeds]
        bare = [jitter_scenario(0, s, jitter_ms=250, duration_s=5).underruns for s in seeds]
    verdict(8, "jitter buffer", {
        "300 ms: 0 underruns": sum(buffered) == 0,
        "0 ms: >= 1 each": min(bare) >= 1,
        "runtime < 10 s": sw["s"] < 10,
    }, f"20 seeds, 250 ms jitter: {sum(buffered)} underruns at 300 ms, "
       f"{min(bare)}-{max(bare)} per seed at 0 ms, {sw['s']:.2f} s")


# ---- 9 -------------------------------------------------------------------

def test_coexistence(verdict):
    seeds = range(5)
    with stopwatch() as sw:
        naive = [coexistence_scenario("naive", s).underruns for s in seeds]
        prio = [coexistence_scenario("prioritized", s).underruns for s in seeds]
    verdict(9, "coexistence", {
        "naive >= 1 each": min(naive) >= 1,
        "prioritized 0": sum(prio) == 0,
        "runtime < 10 s": sw["s"] < 10,
    }, f"10 s duplex on seeds 0-4: naive {naive}, prioritized {prio}, {sw['s']:.2f} s")


# ---- 10 ------------------------------------------------------------------

def test_latency_budget(verdict):
    with stopwatch() as sw:
        res = run_scenario(load_scenario(bundled_scenario("latency")))
    rep = res.latency
    verdict(10, "latency budget", {
        "median in [2, 3] s": 2000 <= rep.median_ms <= 3000,
        "additive within 5%": rep.additive and rep.max_additivity_error <= 0.05,
        "runtime < 30 s": sw["s"] < 30,
    }, f"{rep.n} queries, median {rep.median_ms / 1000:.2f} s, "
       f"additivity error {100 * rep.max_additivity_error:.2f}%, {sw['s']:.2f} s")


# ---- 11 ------------------------------------------------------------------

def stratified_split(intents, frac, rng):
    intents = np.asarray(intents)
    train_idx, test_idx = [], []
    for label in sorted(set(intents)):
        idx = rng.permutation(np.flatnonzero(intents == label))
        cut = int(round(frac * len(idx)))
        train_idx += idx[:cut].tolist()
        test_idx += idx[cut:].tolist()
    return train_idx, test_idx


def test_intent_routing(verdict):
    texts, intents = bundled_corpus()
    tr, te = stratified_split(intents, 0.8, np.random.default_rng(0))
    clf = fit([texts[i] for i in tr], [intents[i] for i in tr], seed=0)
    held_out = clf.accuracy([texts[i] for i in te], [intents[i] for i in te])
    quoted = {"take a photo": "device_control", "what's on this table?": "visual_query"}
    got, worst_ms = {}, 0.0
    for text in quoted:
        t0 = time.perf_counter()
        got[text] = clf.classify(text)[0]
        worst_ms = max(worst_ms, 1000 * (time.perf_counter() - t0))
    verdict(11, "intent routing", {
        "200 utterances": len(texts) == 200,
        "held-out >= 90%": held_out >= 0.9,
        "quoted utterances": got == quoted,
        "<= 50 ms each": worst_ms <= 50,
    }, f"held-out {100 * held_out:.1f}% on {len(te)}, "
       f"{' / '.join(got.values())}, slowest classify {worst_ms:.2f} ms")


# ---- 12 ------------------------------------------------------------------

def test_no_egress(monkeypatch, tmp_path, verdict):
    opened = []

    class Tripwire(socket.socket):
        def __init__(self, *args, **kwargs):
            opened.append(("socket", args))
            raise OSError("network access attempted")

    def refuse(name):
        def fn(*args, **kwargs):
            opened.append((name, args))
            raise OSError("network access attempted")
        return fn

    monkeypatch.setattr(socket, "socket", Tripwire)
    monkeypatch.setattr(socket, "create_connection", refuse("create_connection"))
    monkeypatch.setattr(socket, "getaddrinfo", refuse("getaddrinfo"))
    monkeypatch.setattr(socket, "socketpair", refuse("socketpair"))

    res = run_scenario(load_scenario(bundled_scenario("walkthrough")),
                       query_log=tmp_path / "queries.jsonl")
    names = sorted(t.name for t in res.sim.transports)
    verdict(12, "no egress", {
        "no OS sockets": opened == [],
        "only session channels": names == ["session:provisioning", "session:runtime"],
        "scenario completed": len(res.records) == 3,
    }, f"{len(opened)} socket calls, transports {names}, {len(res.records)} queries answered")
