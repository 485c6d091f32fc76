"""End-to-end latency accounting over completed queries."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from earedge.edge.service import STAGES, QueryRecord
from earedge.netsim.channel import DeliveryTrace

PERCENTILES = (50, 90, 95)
ADDITIVITY_TOLERANCE = 0.05


def _find(trace: DeliveryTrace, channel: str, prefix: str, send_t: float):
    for d in trace.records:
        if d.channel == channel and d.tag.startswith(prefix) and abs(d.send_t - send_t) < 1e-9:
            return d
    return None


def attach_timing(records, episodes, trace: DeliveryTrace) -> None:
    """Fill ``end_to_end_ms`` and ``transport_ms`` from device and channel records.

    End-to-end runs from the device sending END_OF_UTTERANCE to the first
    response chunk reaching it. Transport is the transit time of those two
    frames, read from the channel trace.
    """
    by_index = {ep.index: ep for ep in episodes}
    for rec in records:
        ep = by_index.get(rec.episode)
        if rec.aborted or ep is None or ep.first_audio_t is None or ep.eou_sent_t is None:
            continue
        up = _find(trace, "uplink", "END_OF_UTTERANCE:", ep.eou_sent_t)
        down = _find(trace, "downlink", "RESPONSE_AUDIO:0", rec.first_chunk_sent_ms)
        rec.end_to_end_ms = ep.first_audio_t - ep.eou_sent_t
        if up is not None and down is not None and not (up.dropped or down.dropped):
            rec.transport_ms = (up.deliver_t - up.send_t) + (down.deliver_t - down.send_t)


@dataclass
class LatencyReport:
    n: int
    end_to_end: dict[str, float]
    stages: dict[str, dict[str, float]]
    transport: dict[str, float]
    max_additivity_error: float

    @property
    def additive(self) -> bool:
        return self.max_additivity_error <= ADDITIVITY_TOLERANCE

    @property
    def median_ms(self) -> float:
        return self.end_to_end["p50"]

    def to_dict(self) -> dict:
        return {"n": self.n, "end_to_end_ms": self.end_to_end, "stages_ms": self.stages,
                "transport_ms": self.transport, "max_additivity_error": self.max_additivity_error,
                "additive": self.additive}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["mean"] + [f"p{p}" for p in PERCENTILES] + ["max"]
        w.writerow(["metric"] + keys)
        for name in STAGES:
            w.writerow([name] + [f"{self.stages[name][k]:.3f}" for k in keys])
        w.writerow(["transport"] + [f"{self.transport[k]:.3f}" for k in keys])
        w.writerow(["end_to_end"] + [f"{self.end_to_end[k]:.3f}" for k in keys])
        return buf.getvalue()

    def summary(self) -> str:
        e = self.end_to_end
        lines = [f"queries: {self.n}",
                 f"end-to-end: median {e['p50'] / 1000:.2f} s, p90 {e['p90'] / 1000:.2f} s, "
                 f"max {e['max'] / 1000:.2f} s"]
        for name in STAGES:
            lines.append(f"  {name:<12} median {self.stages[name]['p50']:8.1f} ms")
        lines.append(f"  {'transport':<12} median {self.transport['p50']:8.1f} ms")
        lines.append(f"additivity error: {100 * self.max_additivity_error:.2f}% "
                     f"({'ok' if self.additive else 'FAILED'})")
        return "\n".join(lines)


def _summary(values) -> dict[str, float]:
    v = np.asarray(values, dtype=np.float64)
    out = {"mean": float(v.mean())}
    for p in PERCENTILES:
        out[f"p{p}"] = float(np.percentile(v, p))
    out["max"] = float(v.max())
    return out


def measure_latency(records) -> LatencyReport:
    """Percentiles per stage and end to end, plus the additivity check.

    Only records with a measured end-to-end time count; the check compares
    it with the stage sum plus transport.
    """
    done: list[QueryRecord] = [r for r in records
                               if r.end_to_end_ms is not None and r.transport_ms is not None]
    if not done:
        raise ValueError("no completed queries with end-to-end timing")
    errors = []
    for r in done:
        predicted = r.stage_total_ms + r.transport_ms
        errors.append(abs(r.end_to_end_ms - predicted) / max(r.end_to_end_ms, 1e-9))
    stages = {name: _summary([r.stage_ms(name) for r in done]) for name in STAGES}
    return LatencyReport(len(done), _summary([r.end_to_end_ms for r in done]), stages,
                         _summary([r.transport_ms for r in done]), float(max(errors)))
