"""Emulated edge companion: endpointing, staged pipeline and latency accounting."""

from earedge.edge.endpoint import Boundary, EndpointDetector, endpoint_detect
from earedge.edge.latency import LatencyReport, attach_timing, measure_latency
from earedge.edge.service import STAGES, EdgeConfig, EdgeService, QueryRecord, StageCosts
from earedge.edge.stubs import InferenceStub, StubSet, audio_key, render_vlm, synthesize

__all__ = [
    "STAGES",
    "Boundary",
    "EdgeConfig",
    "EdgeService",
    "EndpointDetector",
    "InferenceStub",
    "LatencyReport",
    "QueryRecord",
    "StageCosts",
    "StubSet",
    "attach_timing",
    "audio_key",
    "endpoint_detect",
    "measure_latency",
    "render_vlm",
    "synthesize",
]
