import numpy as np
import pytest
from helpers import fixture_clip, session_scenario, sine

from earedge.audio.pcm import PcmBuffer
from earedge.device import Device, DeviceState, mic_source
from earedge.errors import ConfigError
from earedge.scenario import bundled_scenario, load_scenario, run_scenario
from earedge.wire import SessionState


def run(mic, **overrides):
    return run_scenario(load_scenario(session_scenario(mic, **overrides)))


@pytest.fixture(scope="module")
def walkthrough():
    return run_scenario(load_scenario(bundled_scenario("walkthrough")))


def test_mic_timeline_concatenates():
    a = sine(440, 0.25)
    out = mic_source([{"silence_s": 1.0}, {"clip": a}])
    assert len(out) == 16000 + len(a)
    assert not out.samples[:16000].any()
    assert np.array_equal(out.samples[16000:], a.samples)


def test_mic_pinned_entry_leaves_gap():
    a = sine(440, 0.1)
    out = mic_source([{"clip": a}, {"clip": a, "at_s": 0.5}])
    assert len(out) == 8000 + len(a)
    assert not out.samples[len(a):8000].any()


def test_empty_timeline_is_empty_stream():
    assert len(mic_source([])) == 0


def test_overlapping_entries_rejected():
    a = sine(440, 0.5)
    with pytest.raises(ConfigError, match="overlaps"):
        mic_source([{"clip": a}, {"clip": a, "at_s": 0.25}])


def test_missing_fixture_fails_before_assembly(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        mic_source([{"silence_s": 1}, {"clip": "nope.wav"}], tmp_path)
    with pytest.raises(ConfigError):
        mic_source([{"clip": sine(1, 0.1), "silence_s": 1}])


def test_device_needs_16k_mono(int8_model):
    with pytest.raises(ValueError):
        Device(PcmBuffer(np.zeros(100, np.int16), 8000), int8_model)


def test_wake_then_two_second_query_sends_100_chunks():
    query = {"clip": sine(400, 2.5, level=0.3)}
    wake = [{"clip": fixture_clip("wake"), "at_s": 1.0}, {"silence_s": 0.5}]
    probe = run(wake + [query, {"silence_s": 2}])
    (ep,) = probe.device.episodes
    # cut the microphone exactly two seconds after streaming began
    cut = ep.stream_start_sample + 32000
    mic = mic_source(wake + [query])
    res = run([{"clip": PcmBuffer(mic.samples[:cut])}])
    (ep,) = res.device.episodes
    assert ep.chunks_sent == -(-2 * 16000 // 320) == 100
    assert res.device.sent_counts["AUDIO_CHUNK"] == 100
    assert res.device.sent_counts["END_OF_UTTERANCE"] == 1


def test_no_wake_word_sends_no_audio():
    res = run([{"clip": sine(600, 3.0, level=0.3)}, {"silence_s": 3.0}])
    assert res.device.episodes == []
    assert "AUDIO_CHUNK" not in res.device.sent_counts
    assert res.records == []


def test_one_photo_pair_per_capture(walkthrough):
    dev = walkthrough.device
    by_episode = {r.episode: r for r in walkthrough.records}
    assert dev.sent_counts["PHOTO_META"] == dev.sent_counts["PHOTO_DATA"] == 2
    for ep in dev.episodes:
        rec = by_episode[ep.index]
        wants_photo = rec.pathway == "visual_pipeline" or rec.transcript == "take a photo"
        assert ep.photos_sent == (1 if wants_photo else 0)


def test_session_ends_listening_and_idle(walkthrough):
    dev = walkthrough.device
    assert dev.state == DeviceState.BASELINE_LISTENING
    assert dev.session.state == SessionState.IDLE
    assert walkthrough.edge.session.state == SessionState.IDLE
    assert all(ep.response_done_t is not None and not ep.aborted for ep in dev.episodes)


def test_power_timeline_follows_episodes(walkthrough):
    states = [s for _, s in walkthrough.device.power_timeline]
    expected = [DeviceState.BASELINE_LISTENING] + [
        DeviceState.ACTIVE_QUERY, DeviceState.PLAYING_RESPONSE, DeviceState.BASELINE_LISTENING] * 3
    assert states == expected
    times = [t for t, _ in walkthrough.device.power_timeline]
    assert times == sorted(times)


def test_energy_ledger_balances(walkthrough):
    e = walkthrough.energy
    assert e.total_consumed_mah + e.remaining_mah == pytest.approx(e.capacity_mah, abs=1e-12)
    # accounting runs to the later of the last event and the end of the mic
    end_ms = max(walkthrough.sim.end_t, walkthrough.scenario.mic.duration_s * 1000)
    assert e.elapsed_h == pytest.approx(end_ms / 3.6e6)
    for state in ("BaselineListening", "ActiveQuery", "PlayingResponse"):
        assert e.consumed_mah[state] > 0


def test_response_audio_duration_survives_the_trip(walkthrough):
    for ep, rec in zip(walkthrough.device.episodes, walkthrough.records):
        sent = rec.response_chunks * 320
        assert abs(ep.response_samples - sent) < 320


def test_link_drop_retries_and_keeps_credentials():
    res = run_scenario(load_scenario(bundled_scenario("linkdrop")))
    dev = res.device
    names = [e["event"] for e in dev.log]
    assert "link_down" in names and "episode_aborted" in names
    assert names.count("connected") >= 2
    assert dev.session.credentials == res.edge.session.credentials is not None
    # provisioning happened once; the reconnect reused the credentials
    assert names.count("provisioned") == 1
    assert dev.episodes[0].aborted and not dev.episodes[-1].aborted
    assert dev.episodes[-1].response_done_t is not None
    assert dev.state == DeviceState.BASELINE_LISTENING


def test_query_is_capped():
    # a query that never falls silent still ends at the safety cap
    mic = [{"clip": fixture_clip("wake"), "at_s": 1.0}, {"silence_s": 0.5},
           {"clip": sine(400, 14.0, level=0.3)}]
    res = run(mic, device={"max_query_s": 3.0})
    ep = res.device.episodes[0]
    assert ep.stop_reason == "max_duration" and ep.chunks_sent == 150
