"""Wake-word model: training, int8 conversion, streaming detection."""

from earedge.kws.detector import DetectionEvent, DetectorConfig, StreamingDetector, detect_stream
from earedge.kws.model import LABELS, KwsModel, forward_float
from earedge.kws.modelio import load_model, save_model
from earedge.kws.profile import ResourceProfile, profile
from earedge.kws.quantize import QuantizedKwsModel, quantize_int8, top1_agreement
from earedge.kws.train import TrainResult, train

__all__ = [
    "LABELS",
    "DetectionEvent",
    "DetectorConfig",
    "KwsModel",
    "QuantizedKwsModel",
    "ResourceProfile",
    "StreamingDetector",
    "TrainResult",
    "detect_stream",
    "forward_float",
    "load_model",
    "profile",
    "quantize_int8",
    "save_model",
    "top1_agreement",
    "train",
]
