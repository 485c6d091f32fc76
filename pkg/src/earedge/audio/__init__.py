from earedge.audio.adpcm import (
    BLOCK_SAMPLES,
    AdpcmBlock,
    AdpcmEncoder,
    adpcm_decode,
    adpcm_encode,
    payload_bytes,
)
from earedge.audio.pcm import PcmBuffer, concat, read_wav, resample, write_wav

__all__ = [
    "BLOCK_SAMPLES",
    "AdpcmBlock",
    "AdpcmEncoder",
    "PcmBuffer",
    "adpcm_decode",
    "adpcm_encode",
    "concat",
    "payload_bytes",
    "read_wav",
    "resample",
    "write_wav",
]
