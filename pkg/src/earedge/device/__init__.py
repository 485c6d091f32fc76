"""Emulated earpiece: microphone, wake loop, query capture, playback and power."""

from earedge.device.device import Device, DeviceConfig, Episode, Photo
from earedge.device.mic import mic_source
from earedge.device.power import (
    DeviceState,
    EnergyLedger,
    PowerProfile,
    power_report,
    render_report,
    runtime_hours,
    simulate_power,
)

__all__ = [
    "Device",
    "DeviceConfig",
    "DeviceState",
    "EnergyLedger",
    "Episode",
    "Photo",
    "PowerProfile",
    "mic_source",
    "power_report",
    "render_report",
    "runtime_hours",
    "simulate_power",
]
