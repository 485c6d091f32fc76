"""Simulated transport between the wearable and the phone."""

from earedge.netsim.channel import (
    COEXISTENCE_MODES,
    Channel,
    ChannelConfig,
    Delivery,
    DeliveryTrace,
    Medium,
)
from earedge.netsim.scenarios import coexistence_scenario, jitter_scenario, playout

__all__ = [
    "COEXISTENCE_MODES",
    "Channel",
    "ChannelConfig",
    "Delivery",
    "DeliveryTrace",
    "Medium",
    "coexistence_scenario",
    "jitter_scenario",
    "playout",
]
