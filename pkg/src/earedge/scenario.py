"""Scenario files: validation, assembly and end-to-end runs.

A scenario is a JSON object. Paths inside it are relative to the file.

    name, seed                  label and master seed
    mic                         timeline for :func:`mic_source`
    photos                      photo fixture paths (cycled per capture)
    model                       KWS model file (default: bundled int8 model)
    intent_model                intent classifier JSON (default: bundled)
    detector, device, edge      overrides of the respective config objects
    channel                     runtime channel, see ChannelConfig
    stubs                       {asr, llm, vlm, tts} stub table paths
    stage_costs                 fixed per-stage compute costs (ms)
    power_profile               object or path
    power_schedule              optional explicit (state, duration) list
    link_drops                  [{at_ms, duration_ms}]
    until_ms                    optional simulated-time limit
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from earedge.audio.pcm import PcmBuffer
from earedge.device.device import Device, DeviceConfig, Photo
from earedge.device.mic import mic_source
from earedge.device.power import EnergyLedger, PowerProfile, simulate_power
from earedge.edge.latency import LatencyReport, attach_timing, measure_latency
from earedge.edge.service import EdgeConfig, EdgeService, QueryRecord, StageCosts
from earedge.edge.stubs import StubSet
from earedge.errors import ConfigError
from earedge.intent.classifier import IntentClassifier
from earedge.intent.router import Router
from earedge.kws.detector import DetectorConfig
from earedge.kws.modelio import load_model
from earedge.netsim.channel import COEXISTENCE_MODES, ChannelConfig
from earedge.netsim.scenarios import COEXISTENCE_CHANNEL, coexistence_scenario, jitter_scenario
from earedge.sim import Simulation, SimResult

KNOWN_FIELDS = {
    "kind", "name", "description", "seed", "mic", "photos", "model", "intent_model", "detector",
    "device", "edge", "channel", "stubs", "stage_costs", "power_profile", "power_schedule",
    "link_drops", "until_ms",
}


def bundled_path(*parts: str) -> Path:
    return Path(str(resources.files("earedge.data").joinpath(*parts)))


def bundled_scenario(name: str) -> Path:
    path = bundled_path("scenarios", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return path


def bundled_scenarios() -> list[str]:
    return sorted(p.stem for p in bundled_path("scenarios").glob("*.json"))


@dataclass
class Scenario:
    name: str
    seed: int
    base_dir: Path
    mic: PcmBuffer
    photos: list[Photo]
    model: object
    router: Router
    stubs: StubSet
    detector: DetectorConfig
    device: DeviceConfig
    edge: EdgeConfig
    channel: ChannelConfig
    profile: PowerProfile
    power_schedule: list | None
    link_drops: list[dict]
    until_ms: float | None
    raw: dict = field(repr=False, default_factory=dict)


class _Errors:
    """Collects field-level problems so one run reports all of them."""

    def __init__(self):
        self.items: list[str] = []

    def check(self, where: str, build, *args, **kwargs):
        try:
            return build(*args, **kwargs)
        except (ConfigError, ValueError, TypeError, KeyError, OSError) as exc:
            self.items.append(f"{where}: {exc}")
            return None

    def add(self, where: str, msg: str) -> None:
        self.items.append(f"{where}: {msg}")


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def _existing(base: Path, p) -> Path:
    path = _resolve(base, p)
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    return path


def _sub_config(cls, d, extra: dict | None = None):
    if not isinstance(d, dict):
        raise ConfigError("must be an object")
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    return cls(**{**d, **(extra or {})})


def _detector(d) -> DetectorConfig:
    return _sub_config(DetectorConfig, d)


def _device(d, detector: DetectorConfig | None) -> DeviceConfig:
    d = dict(d)
    if "backoff_ms" in d:
        d["backoff_ms"] = tuple(float(x) for x in d["backoff_ms"])
    return _sub_config(DeviceConfig, d, {"detector": detector or DetectorConfig()})


def _edge(d, costs: StageCosts | None) -> EdgeConfig:
    d = dict(d)
    if "credentials" in d:
        d["credentials"] = str(d["credentials"]).encode()
    return _sub_config(EdgeConfig, d, {"costs": costs or StageCosts()})


def _link_drops(drops) -> list[dict]:
    if not isinstance(drops, list):
        raise ConfigError("must be a list")
    out = []
    for i, d in enumerate(drops):
        if not isinstance(d, dict) or set(d) != {"at_ms", "duration_ms"}:
            raise ConfigError(f"entry {i} must have exactly at_ms and duration_ms")
        at, dur = float(d["at_ms"]), float(d["duration_ms"])
        if at < 0 or dur <= 0:
            raise ConfigError(f"entry {i}: at_ms must be >= 0 and duration_ms > 0")
        out.append({"at_ms": at, "duration_ms": dur})
    return out


def load_scenario(source, base_dir=None) -> Scenario:
    """Validate and assemble a scenario from a path or an already-parsed dict.

    Every problem found is reported in one :class:`ConfigError`, one line
    per field.
    """
    if isinstance(source, dict):
        raw, base = source, Path(base_dir or ".")
    else:
        raw, base = read_scenario_json(source)
        base = Path(base_dir) if base_dir else base
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    if raw.get("kind", "session") != "session":
        raise ConfigError(f"kind: {raw.get('kind')!r} is a link-level scenario; "
                          "use load_link_scenario")
    err = _Errors()
    for key in sorted(set(raw) - KNOWN_FIELDS):
        err.add(key, "unknown field")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        err.add("seed", "must be an integer")
        seed = 0
    if "mic" not in raw:
        err.add("mic", "required")
    mic = err.check("mic", mic_source, raw.get("mic", []), base)
    photos = []
    for i, p in enumerate(raw.get("photos", [])):
        fp = err.check(f"photos[{i}]", _existing, base, p)
        if fp is not None:
            photos.append(Photo(fp.name, fp.read_bytes()))
    model_path = raw.get("model")
    model_file = (err.check("model", _existing, base, model_path) if model_path
                  else bundled_path("kws_int8.kws"))
    model = err.check("model", load_model, model_file) if model_file else None
    intent_path = raw.get("intent_model")
    intent_file = (err.check("intent_model", _existing, base, intent_path) if intent_path
                   else bundled_path("intent_model.json"))
    classifier = err.check("intent_model", IntentClassifier.load, intent_file) if intent_file else None
    stubs_raw = raw.get("stubs")
    stubs = None
    if not isinstance(stubs_raw, dict):
        err.add("stubs", "required object with asr, llm, vlm and tts table paths")
    else:
        stubs = err.check("stubs", StubSet.load, stubs_raw, base)
    detector = err.check("detector", _detector, raw.get("detector", {}))
    device = err.check("device", _device, raw.get("device", {}), detector)
    costs = err.check("stage_costs", StageCosts.from_dict, raw.get("stage_costs", {}))
    edge = err.check("edge", _edge, raw.get("edge", {}), costs)
    channel_raw = raw.get("channel", {})
    if isinstance(channel_raw, str):
        channel = err.check("channel", lambda: ChannelConfig.load(_existing(base, channel_raw)))
    elif isinstance(channel_raw, dict):
        channel = err.check("channel", ChannelConfig.from_dict, {"seed": seed, **channel_raw})
    else:
        err.add("channel", "must be an object or a path")
        channel = None
    prof_raw = raw.get("power_profile", {})
    if isinstance(prof_raw, str):
        prof_raw = err.check("power_profile", lambda: json.loads(_existing(base, prof_raw).read_text()))
    profile = err.check("power_profile", PowerProfile.from_dict, prof_raw) if prof_raw is not None else None
    schedule = raw.get("power_schedule")
    if schedule is not None and profile is not None:
        err.check("power_schedule", simulate_power, profile, schedule)
    drops = err.check("link_drops", _link_drops, raw.get("link_drops", []))
    until = raw.get("until_ms")
    if until is not None and (not isinstance(until, (int, float)) or until <= 0):
        err.add("until_ms", "must be a positive number")
    if err.items:
        exc = ConfigError("invalid scenario:\n  " + "\n  ".join(err.items))
        exc.errors = list(err.items)
        raise exc
    return Scenario(str(raw.get("name", "scenario")), seed, base, mic, photos, model,
                    Router(classifier), stubs, detector, device, edge, channel, profile,
                    schedule, drops, float(until) if until is not None else None, raw)


@dataclass
class ScenarioResult:
    scenario: Scenario
    sim: SimResult
    records: list[QueryRecord]
    latency: LatencyReport | None
    energy: EnergyLedger
    schedule_energy: EnergyLedger | None
    wall_s: float

    @property
    def device(self) -> Device:
        return self.sim.device

    @property
    def edge(self) -> EdgeService:
        return self.sim.edge

    @property
    def events(self) -> list[dict]:
        merged = self.device.log + self.edge.log
        return sorted(merged, key=lambda e: (e["t_ms"], e["actor"] != "device"))

    @property
    def underruns(self) -> int:
        return self.device.underruns

    def summary(self) -> dict:
        dev, edge = self.device, self.edge
        return {
            "name": self.scenario.name,
            "seed": self.scenario.seed,
            "wall_s": round(self.wall_s, 3),
            "simulated_ms": self.sim.end_t,
            "episodes": len(dev.episodes),
            "queries": [r.to_dict() for r in self.records],
            "latency": self.latency.to_dict() if self.latency else None,
            "underruns": self.underruns,
            "frames_sent": {"device": dict(dev.sent_counts), "edge": dict(edge.sent_counts)},
            "transports": [t.name for t in self.sim.transports],
            "final_state": {"device": dev.state.value, "session": dev.session.state.value,
                            "edge_session": edge.session.state.value},
            "link": self.sim.link.trace.stats(),
            "energy": self.energy.to_dict(),
            "schedule_energy": self.schedule_energy.to_dict() if self.schedule_energy else None,
        }

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def put(name, text):
            p = out / name
            p.write_text(text)
            written.append(p)

        put("events.jsonl", "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events))
        put("summary.json", json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        put("queries.jsonl", "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n"
                                     for r in self.records))
        put("trace.csv", self.sim.link.trace.to_csv())
        put("energy.json", json.dumps(self.energy.to_dict(), indent=2) + "\n")
        if self.latency is not None:
            put("latency.csv", self.latency.to_csv())
            put("latency.txt", self.latency.summary() + "\n")
        if self.edge.log_path is not None:
            written.append(self.edge.log_path)
        return written


LINK_KINDS = ("coexistence", "jitter")
_LINK_FIELDS = {
    "coexistence": {"kind", "name", "description", "seeds", "mode", "duration_s",
                    "prebuffer_ms", "channel"},
    "jitter": {"kind", "name", "description", "seeds", "prebuffer_ms", "jitter_ms",
               "duration_s", "base_latency_ms", "loss_prob"},
}


def read_scenario_json(source) -> tuple[dict, Path]:
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    return raw, path.parent


def load_link_scenario(raw: dict) -> dict:
    """Validate a link-level scenario (no device or edge, audio over the channel only)."""
    kind = raw.get("kind")
    if kind not in LINK_KINDS:
        raise ConfigError(f"kind: must be one of {('session',) + LINK_KINDS}")
    err = _Errors()
    for key in sorted(set(raw) - _LINK_FIELDS[kind]):
        err.add(key, "unknown field")
    seeds = raw.get("seeds", [0])
    if not (isinstance(seeds, list) and seeds and all(isinstance(x, int) for x in seeds)):
        err.add("seeds", "must be a non-empty list of integers")
    if kind == "coexistence":
        if raw.get("mode") not in COEXISTENCE_MODES:
            err.add("mode", f"must be one of {COEXISTENCE_MODES}")
        base = COEXISTENCE_CHANNEL.to_dict()
        err.check("channel", ChannelConfig.from_dict, {**base, **raw.get("channel", {})})
    for key in ("duration_s", "prebuffer_ms", "jitter_ms", "base_latency_ms"):
        v = raw.get(key)
        if v is not None and (not isinstance(v, (int, float)) or v < 0):
            err.add(key, "must be a non-negative number")
    if err.items:
        exc = ConfigError("invalid scenario:\n  " + "\n  ".join(err.items))
        exc.errors = list(err.items)
        raise exc
    return raw


def run_link_scenario(raw: dict) -> dict:
    """Per-seed underrun counts for a coexistence or jitter scenario."""
    raw = load_link_scenario(raw)
    rows = []
    t0 = time.perf_counter()
    for seed in raw.get("seeds", [0]):
        if raw["kind"] == "coexistence":
            cfg = ChannelConfig.from_dict({**COEXISTENCE_CHANNEL.to_dict(), **raw.get("channel", {})})
            r = coexistence_scenario(raw["mode"], seed, raw.get("duration_s", 10.0),
                                     raw.get("prebuffer_ms", 300.0), cfg)
            rows.append({"seed": seed, "mode": raw["mode"], "underruns": r.underruns,
                         "uplink_underruns": r.uplink.underruns,
                         "downlink_underruns": r.downlink.underruns})
        else:
            kw = {k: raw[k] for k in ("jitter_ms", "duration_s", "base_latency_ms", "loss_prob")
                  if k in raw}
            r = jitter_scenario(raw.get("prebuffer_ms", 300.0), seed, **kw)
            rows.append({"seed": seed, "prebuffer_ms": raw.get("prebuffer_ms", 300.0),
                         "underruns": r.underruns, "gaps": r.gaps, "late": r.late})
    return {"name": raw.get("name", raw["kind"]), "kind": raw["kind"], "runs": rows,
            "total_underruns": sum(r["underruns"] for r in rows),
            "wall_s": round(time.perf_counter() - t0, 3)}


def run_scenario(scn: Scenario, query_log=None) -> ScenarioResult:
    """Run device, link and edge to completion on simulated time.

    ``query_log`` is the edge's own append-only JSON-lines log, started
    afresh for each run. End-to-end figures are measured outside the edge
    and only appear in the result.
    """
    if query_log is not None:
        Path(query_log).parent.mkdir(parents=True, exist_ok=True)
        Path(query_log).write_text("")
    device = Device(scn.mic, scn.model, scn.photos, scn.device, scn.profile)
    edge = EdgeService(scn.stubs, scn.router, scn.edge, log_path=query_log)
    sim = Simulation(device, edge, scn.channel, scn.link_drops)
    t0 = time.perf_counter()
    res = sim.run(until_ms=scn.until_ms if scn.until_ms is not None else float("inf"))
    wall = time.perf_counter() - t0
    attach_timing(edge.records, device.episodes, sim.link.trace)
    done = [r for r in edge.records if r.end_to_end_ms is not None and r.transport_ms is not None]
    latency = measure_latency(done) if done else None
    end_t = max(res.end_t, len(scn.mic) * 1000 / scn.mic.sample_rate_hz)
    energy = device.energy(end_t)
    sched = simulate_power(scn.profile, scn.power_schedule) if scn.power_schedule else None
    return ScenarioResult(scn, res, list(edge.records), latency, energy, sched, wall)


__all__ = [
    "LINK_KINDS",
    "Scenario",
    "ScenarioResult",
    "bundled_path",
    "bundled_scenario",
    "bundled_scenarios",
    "load_link_scenario",
    "load_scenario",
    "read_scenario_json",
    "run_link_scenario",
    "run_scenario",
]
