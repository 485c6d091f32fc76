"""Current-draw model and battery ledger."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from earedge.errors import ConfigError

HOURS_PER_DAY = 24.0
# average draw that still lasts a full day on the stock cell
ALL_DAY_TARGET_MA = 8.0


class DeviceState(enum.Enum):
    DEEP_SLEEP = "DeepSleep"
    LIGHT_SLEEP = "LightSleep"
    MODEM_SLEEP = "ModemSleep"
    BASELINE_LISTENING = "BaselineListening"
    ACTIVE_QUERY = "ActiveQuery"
    PLAYING_RESPONSE = "PlayingResponse"

    @classmethod
    def parse(cls, value) -> DeviceState:
        if isinstance(value, cls):
            return value
        for s in cls:
            if value in (s.value, s.name, s.name.lower()):
                return s
        raise ConfigError(f"unknown device state {value!r}")


@dataclass(frozen=True)
class PowerProfile:
    """Representative currents (mA) and battery capacity (mAh)."""

    deep_sleep: float = 0.05
    light_sleep: float = 3.0
    modem_sleep: float = 25.0
    baseline_listening: float = 90.0
    active_query: float = 425.0
    playback_extra: float = 300.0
    battery_mah: float = 200.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "battery_mah":
                if v < 0:
                    raise ConfigError("battery_mah must be non-negative")
            elif v <= 0:
                raise ConfigError(f"{f.name} current must be positive")

    def current_ma(self, state) -> float:
        """Draw in ``state``; playback adds the amplifier to the listening baseline."""
        state = DeviceState.parse(state)
        return {
            DeviceState.DEEP_SLEEP: self.deep_sleep,
            DeviceState.LIGHT_SLEEP: self.light_sleep,
            DeviceState.MODEM_SLEEP: self.modem_sleep,
            DeviceState.BASELINE_LISTENING: self.baseline_listening,
            DeviceState.ACTIVE_QUERY: self.active_query,
            DeviceState.PLAYING_RESPONSE: self.baseline_listening + self.playback_extra,
        }[state]

    @classmethod
    def from_dict(cls, d: dict) -> PowerProfile:
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown power profile fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def runtime_hours(capacity_mah: float, current_ma: float) -> float:
    if capacity_mah <= 0:
        return 0.0
    return capacity_mah / current_ma


@dataclass
class EnergyLedger:
    capacity_mah: float
    consumed_mah: dict[str, float] = field(default_factory=dict)
    remaining_mah: float = 0.0
    elapsed_h: float = 0.0
    timeline: list[tuple[float, str, float]] = field(default_factory=list)
    depleted_at_h: float | None = None
    runtime_to_empty_h: float = 0.0

    @property
    def total_consumed_mah(self) -> float:
        return sum(self.consumed_mah.values())

    def to_dict(self) -> dict:
        return {
            "capacity_mah": self.capacity_mah,
            "consumed_mah": dict(self.consumed_mah),
            "total_consumed_mah": self.total_consumed_mah,
            "remaining_mah": self.remaining_mah,
            "elapsed_h": self.elapsed_h,
            "depleted_at_h": self.depleted_at_h,
            "runtime_to_empty_h": self.runtime_to_empty_h,
            "timeline": [{"t_h": t, "state": s, "remaining_mah": r} for t, s, r in self.timeline],
        }


def parse_schedule(schedule) -> list[tuple[DeviceState, float]]:
    """Accept (state, hours) pairs or dicts with ``state`` and a duration
    in ``hours``, ``minutes``, ``seconds`` or ``duration_s``."""
    if not isinstance(schedule, (list, tuple)):
        raise ConfigError("schedule must be a list of entries")
    out = []
    for item in schedule:
        if isinstance(item, dict):
            state = DeviceState.parse(item.get("state"))
            if "hours" in item:
                h = float(item["hours"])
            elif "minutes" in item:
                h = float(item["minutes"]) / 60
            elif "seconds" in item or "duration_s" in item:
                h = float(item.get("seconds", item.get("duration_s"))) / 3600
            else:
                raise ConfigError(f"schedule entry without a duration: {item}")
        else:
            state, h = DeviceState.parse(item[0]), float(item[1])
        if h <= 0:
            raise ConfigError("schedule durations must be positive")
        out.append((state, h))
    return out


def simulate_power(profile: PowerProfile, schedule) -> EnergyLedger:
    """Integrate current over a schedule of (state, hours).

    The run stops when the battery empties. ``runtime_to_empty_h`` assumes
    the schedule repeats: capacity over the schedule's average current.
    """
    steps = parse_schedule(schedule)
    cap = profile.battery_mah
    ledger = EnergyLedger(cap, {s.value: 0.0 for s in DeviceState}, cap)
    t = 0.0
    for state, hours in steps:
        ledger.timeline.append((t, state.value, ledger.remaining_mah))
        if ledger.remaining_mah <= 0:
            ledger.depleted_at_h = t
            break
        ma = profile.current_ma(state)
        need = ma * hours
        if need >= ledger.remaining_mah:
            hours = ledger.remaining_mah / ma
            need = ledger.remaining_mah
            ledger.depleted_at_h = t + hours
        ledger.consumed_mah[state.value] += need
        # consumed + remaining must equal capacity exactly
        ledger.remaining_mah = cap - ledger.total_consumed_mah
        t += hours
        if ledger.depleted_at_h is not None:
            ledger.remaining_mah = 0.0
            break
    ledger.elapsed_h = t
    total_h = sum(h for _, h in steps)
    if total_h > 0 and cap > 0:
        avg = sum(profile.current_ma(s) * h for s, h in steps) / total_h
        ledger.runtime_to_empty_h = runtime_hours(cap, avg)
    return ledger


REPORT_ROWS = (
    ("Deep sleep", DeviceState.DEEP_SLEEP),
    ("Light sleep", DeviceState.LIGHT_SLEEP),
    ("Modem sleep (Wi-Fi associated, idle)", DeviceState.MODEM_SLEEP),
    ("Baseline listening (Wi-Fi + mic + wake word)", DeviceState.BASELINE_LISTENING),
    ("Active query burst (streaming + camera)", DeviceState.ACTIVE_QUERY),
    ("Response playback (baseline + amplifier)", DeviceState.PLAYING_RESPONSE),
)


def power_report(profile: PowerProfile = PowerProfile(),
                 target_avg_ma: float = ALL_DAY_TARGET_MA) -> list[dict]:
    """One row per operating state plus the all-day average-current target."""
    rows = [(name, state.value, profile.current_ma(state)) for name, state in REPORT_ROWS]
    rows.append((f"All-day target ({target_avg_ma:g} mA average)", "", target_avg_ma))
    out = []
    for name, state, ma in rows:
        h = runtime_hours(profile.battery_mah, ma)
        out.append({"scenario": name, "state": state, "current_ma": ma,
                    "runtime_h": h, "runtime_min": h * 60})
    return out


def format_runtime(hours: float) -> str:
    if hours >= 1.0:
        return f"{hours:.2f} h"
    return f"{hours * 60:.1f} min"


def render_report(rows) -> str:
    width = max(len(r["scenario"]) for r in rows)
    lines = [f"{'Scenario':<{width}}  {'Current':>10}  {'Runtime':>10}"]
    for r in rows:
        lines.append(f"{r['scenario']:<{width}}  {r['current_ma']:>7.2f} mA  "
                     f"{format_runtime(r['runtime_h']):>10}")
    return "\n".join(lines)


def load_profile(path) -> PowerProfile:
    return PowerProfile.from_dict(json.loads(Path(path).read_text()))
