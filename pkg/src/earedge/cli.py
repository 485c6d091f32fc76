"""Command-line entry point.

Exit codes: 0 on success, 1 when a run fails, 2 for usage or
configuration errors. Tabular results go to stdout as CSV or JSON
(``--format``); files go under ``--out-dir``.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from earedge.errors import ConfigError, EarEdgeError

log = logging.getLogger("earedge")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
WINDOW_SAMPLES = 16000


class UsageError(Exception):
    """Bad command-line usage; reported with exit code 2."""


# ---- output helpers --------------------------------------------------------

def emit(data, fmt: str, out=None) -> None:
    """Write a dict or a list of flat dicts in the requested format."""
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
        return
    rows = data if isinstance(data, list) else [_flatten(data)]
    if not rows:
        return
    fields = list(dict.fromkeys(k for r in rows for k in r))
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(v) for k, v in r.items()})


def _json_default(obj):
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _cell(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return json.dumps(v, default=_json_default)
    return v


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _existing_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {p}")
    return p


# ---- dataset ---------------------------------------------------------------

def cmd_dataset_summarize(args) -> int:
    from earedge.dataset import load_corpus

    _, summary = load_corpus(args.corpus)
    for path, err in summary.errors:
        print(f"warning: {path}: {err}", file=sys.stderr)
    if args.format == "csv":
        sys.stdout.write(summary.to_csv())
    else:
        emit(summary.to_dict(), "json")
    return EXIT_OK


def cmd_dataset_segment(args) -> int:
    from earedge.audio.pcm import read_wav, write_wav
    from earedge.dataset import segment

    src = _existing_file(args.wav, "recording")
    pcm = read_wav(src, downmix=True)
    spans = segment(pcm, min_gap_ms=args.min_gap_ms, energy_threshold=args.threshold_db,
                    pad_ms=args.pad_ms)
    rows = []
    for i, (a, b) in enumerate(spans):
        row = {"index": i, "start_s": a, "end_s": b}
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{src.stem}_seg{i:03d}.wav"
            write_wav(pcm.slice(a, b), path)
            row["path"] = str(path)
        rows.append(row)
    emit(rows, args.format)
    return EXIT_OK


def _read_spec(ref: str | None):
    from earedge.dataset import AugmentSpec

    if not ref:
        return AugmentSpec()
    text = Path(ref).read_text() if Path(ref).is_file() else ref
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"augmentation spec is neither a JSON file nor JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("augmentation spec must be a JSON object")
    return AugmentSpec.from_dict(raw)


def cmd_dataset_augment(args) -> int:
    from earedge.audio.pcm import write_wav
    from earedge.dataset import augment, load_corpus
    from earedge.dataset.corpus import load_clip

    spec = _read_spec(args.spec)
    src = Path(args.source)
    if src.is_dir():
        clips, _ = load_corpus(src)
        if args.label:
            clips = [c for c in clips if c.label == args.label]
    elif src.is_file():
        if not args.label:
            raise UsageError("--label is required when augmenting a single WAV")
        clips = [load_clip(src, args.label)]
    else:
        raise ConfigError(f"no such file or directory: {src}")
    out = _out_dir(args)
    rows = []
    for k, clip in enumerate(clips):
        stem = Path(clip.source_path).stem if clip.source_path else f"clip{k:04d}"
        (out / clip.label).mkdir(exist_ok=True)
        for i, aug in enumerate(augment(clip, spec, args.n, args.seed + k)):
            path = out / clip.label / f"{stem}_aug{i:03d}.wav"
            write_wav(aug.pcm, path)
            rows.append({"path": str(path), "label": aug.label,
                         "duration_s": round(aug.duration_s, 6)})
    emit(rows, args.format)
    return EXIT_OK


# ---- kws -------------------------------------------------------------------

def _labelled_features(args):
    """(features, labels) from ``--corpus`` or the synthetic toy corpus."""
    from earedge.dataset import load_corpus, toy_dataset
    from earedge.features import mfcc_batch

    if args.corpus:
        clips, summary = load_corpus(args.corpus)
        if not clips:
            raise ConfigError(f"no readable clips under {args.corpus}")
        # clips longer than the analysis window keep their first second
        return mfcc_batch([c.pcm.samples[:WINDOW_SAMPLES] for c in clips]), [c.label for c in clips]
    clips, labels = toy_dataset(per_class=args.per_class, seed=args.seed)
    return mfcc_batch(clips), labels


def _load_kws(path: str):
    from earedge.kws import load_model

    return load_model(_existing_file(path, "model"))


def cmd_kws_train(args) -> int:
    from earedge.kws import quantize_int8, save_model, top1_agreement, train

    x, labels = _labelled_features(args)
    result = train(x, labels, epochs=args.epochs, lr=args.lr, batch=args.batch,
                   split=args.split, seed=args.seed)
    calib = x[result.train_idx][: args.calibration]
    qmodel = quantize_int8(result.model, calib)
    out = _out_dir(args)
    save_model(result.model, out / "kws_float.kws")
    save_model(qmodel, out / "kws_int8.kws")
    with (out / "train_metrics.csv").open("w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for m in result.history:
            w.writerow([m.epoch, f"{m.train_loss:.6f}", f"{m.train_acc:.6f}",
                        f"{m.val_loss:.6f}", f"{m.val_acc:.6f}"])
    agree = top1_agreement(result.model, qmodel, x[result.val_idx])
    emit({"epochs": args.epochs, "final_val_acc": result.final_val_acc, "int8_agreement": agree,
          "float_model": str(out / "kws_float.kws"), "int8_model": str(out / "kws_int8.kws"),
          "metrics": str(out / "train_metrics.csv")}, args.format)
    return EXIT_OK


def cmd_kws_eval(args) -> int:
    from earedge.kws import LABELS
    from earedge.kws.train import encode_labels

    model = _load_kws(args.model)
    x, labels = _labelled_features(args)
    y = encode_labels(labels)
    pred = model.predict_proba(x).argmax(axis=1)
    confusion = np.zeros((len(LABELS), len(LABELS)), dtype=int)
    np.add.at(confusion, (y, pred), 1)
    rows = [{"label": LABELS[i], **{f"pred_{LABELS[j]}": int(confusion[i, j])
                                    for j in range(len(LABELS))},
             "recall": float(confusion[i, i] / max(confusion[i].sum(), 1))}
            for i in range(len(LABELS))]
    if args.format == "json":
        emit({"accuracy": float(np.mean(pred == y)), "n": int(len(y)), "per_class": rows}, "json")
    else:
        emit(rows, "csv")
    print(f"accuracy {np.mean(pred == y):.4f} on {len(y)} clips", file=sys.stderr)
    return EXIT_OK


def cmd_kws_quantize(args) -> int:
    from earedge.kws import KwsModel, quantize_int8, save_model, top1_agreement

    model = _load_kws(args.model)
    if not isinstance(model, KwsModel):
        raise ConfigError(f"{args.model} is already quantized")
    x, _ = _labelled_features(args)
    rng = np.random.default_rng(args.seed)
    calib = x[rng.permutation(len(x))[: args.calibration]]
    qmodel = quantize_int8(model, calib)
    out = _out_dir(args) / (args.output or "kws_int8.kws")
    save_model(qmodel, out)
    emit({"int8_model": str(out), "agreement": top1_agreement(model, qmodel, x)}, args.format)
    return EXIT_OK


def cmd_kws_profile(args) -> int:
    from earedge.kws.profile import REFERENCE_PEAK_RAM_BYTES, profile

    model = _load_kws(args.model)
    prof = profile(model, time_it=True)
    row = prof.as_dict()
    row["reference_peak_ram_bytes"] = REFERENCE_PEAK_RAM_BYTES
    emit(row, args.format)
    return EXIT_OK


def cmd_kws_detect(args) -> int:
    from earedge.audio.pcm import SAMPLE_RATE, read_wav, resample
    from earedge.kws import DetectorConfig, detect_stream

    model = _load_kws(args.model)
    pcm = read_wav(_existing_file(args.wav, "recording"), downmix=True)
    if pcm.sample_rate_hz != SAMPLE_RATE:
        pcm = resample(pcm, SAMPLE_RATE)
    cfg = DetectorConfig(threshold=args.threshold, smoothing=args.smoothing,
                         suppression_s=args.suppression_s)
    if len(pcm) < int(cfg.window_s * SAMPLE_RATE):
        print(f"warning: recording is shorter than one {cfg.window_s:g} s window", file=sys.stderr)
    events = detect_stream(pcm, cfg, model)
    emit([{"t_start_s": e.t_start, "t_end_s": e.t_end, "score": round(e.score, 6),
           "label": e.label} for e in events], args.format)
    return EXIT_OK


# ---- intent ----------------------------------------------------------------

def cmd_intent_fit(args) -> int:
    from earedge.intent import bundled_corpus, fit

    if args.corpus:
        with _existing_file(args.corpus, "intent corpus").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or not {"text", "intent"} <= set(rows[0]):
            raise ConfigError("intent corpus must be CSV with 'text' and 'intent' columns")
        texts, intents = [r["text"] for r in rows], [r["intent"] for r in rows]
    else:
        texts, intents = bundled_corpus()
    clf = fit(texts, intents, iterations=args.iterations, seed=args.seed)
    out = _out_dir(args) / "intent_model.json"
    clf.save(out)
    emit({"model": str(out), "train_accuracy": clf.accuracy(texts, intents),
          "vocabulary": len(clf.vectorizer.vocabulary), "final_loss": clf.loss_history[-1]},
         args.format)
    return EXIT_OK


def cmd_intent_classify(args) -> int:
    from earedge.intent import IntentClassifier, Router
    from earedge.scenario import bundled_path

    path = _existing_file(args.model, "intent model") if args.model else bundled_path(
        "intent_model.json")
    router = Router(IntentClassifier.load(path))
    texts = (args.utterances or []) + (args.text or [])
    if not texts:
        texts = [line.rstrip("\n") for line in sys.stdin if line.strip()]
    rows = []
    for text in texts:
        d = router.decide(text)
        rows.append({"text": text, "intent": d.intent, "pathway": d.pathway,
                     "confidence": round(d.confidence, 6)})
    emit(rows, args.format)
    return EXIT_OK


# ---- codec -----------------------------------------------------------------

def cmd_codec_encode(args) -> int:
    from earedge.audio.adpcm import adpcm_encode, write_adpcm_file
    from earedge.audio.pcm import read_wav

    src = _existing_file(args.input, "input WAV")
    pcm = read_wav(src, downmix=True)
    size = write_adpcm_file(adpcm_encode(pcm), args.output, pcm.sample_rate_hz)
    wav_size = src.stat().st_size
    emit({"input": str(src), "output": args.output, "samples": len(pcm),
          "pcm_bytes": 2 * len(pcm), "adpcm_bytes": size,
          "ratio": (2 * len(pcm)) / size if size else 0.0, "wav_bytes": wav_size}, args.format)
    return EXIT_OK


def cmd_codec_decode(args) -> int:
    from earedge.audio.adpcm import adpcm_decode, read_adpcm_file
    from earedge.audio.pcm import write_wav

    blocks, rate = read_adpcm_file(_existing_file(args.input, "ADPCM file"))
    pcm = adpcm_decode(blocks, rate)
    write_wav(pcm, args.output)
    emit({"input": args.input, "output": args.output, "samples": len(pcm),
          "sample_rate_hz": rate}, args.format)
    return EXIT_OK


# ---- simulation --------------------------------------------------------------

def _scenario_path(ref: str) -> Path:
    from earedge.scenario import bundled_scenario

    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return _existing_file(ref, "scenario")
    return bundled_scenario(ref)


def _run_session(args, path: Path):
    from earedge.scenario import load_scenario, run_scenario

    scn = load_scenario(path)
    if args.seed is not None and "seed" not in scn.raw.get("channel", {}):
        scn.channel = replace(scn.channel, seed=args.seed)
    out = _out_dir(args)
    result = run_scenario(scn, query_log=out / "edge_log.jsonl")
    result.write(out)
    return result


def cmd_simulate(args) -> int:
    from earedge.scenario import read_scenario_json, run_link_scenario

    path = _scenario_path(args.scenario)
    raw, _ = read_scenario_json(path)
    if raw.get("kind", "session") != "session":
        if args.seed is not None:
            raw = {**raw, "seeds": [args.seed]}
        res = run_link_scenario(raw)
        out = _out_dir(args)
        (out / "summary.json").write_text(json.dumps(res, indent=2) + "\n")
        emit(res if args.format == "json" else res["runs"], args.format)
        return EXIT_OK
    result = _run_session(args, path)
    summary = result.summary()
    if args.format == "json":
        emit({k: v for k, v in summary.items() if k != "energy"}, "json")
    else:
        emit([{"id": q["id"], "transcript": q["transcript"], "intent": q["intent"],
               "pathway": q["pathway"], "end_to_end_ms": q["end_to_end_ms"],
               "stage_total_ms": q["stage_total_ms"], "transport_ms": q["transport_ms"],
               "aborted": q["aborted"]} for q in summary["queries"]], "csv")
    if result.latency is not None:
        print(result.latency.summary(), file=sys.stderr)
    return EXIT_OK


def cmd_power_report(args) -> int:
    from earedge.device.power import (
        ALL_DAY_TARGET_MA,
        PowerProfile,
        load_profile,
        power_report,
        render_report,
        simulate_power,
    )

    profile = load_profile(_existing_file(args.profile, "power profile")) if args.profile \
        else PowerProfile()
    if args.battery_mah is not None:
        profile = replace(profile, battery_mah=args.battery_mah)
    rows = power_report(profile, args.target_ma or ALL_DAY_TARGET_MA)
    if args.schedule:
        schedule = json.loads(_existing_file(args.schedule, "schedule").read_text())
        if isinstance(schedule, dict):  # a scenario file with an embedded schedule
            if "power_profile" in schedule and not args.profile:
                profile = PowerProfile.from_dict(schedule["power_profile"])
                if args.battery_mah is not None:
                    profile = replace(profile, battery_mah=args.battery_mah)
            schedule = schedule.get("power_schedule")
        ledger = simulate_power(profile, schedule)
        emit(ledger.to_dict() if args.format == "json" else
             [{"state": s, "consumed_mah": v} for s, v in ledger.consumed_mah.items()]
             + [{"state": "remaining", "consumed_mah": ledger.remaining_mah}], args.format)
        return EXIT_OK
    if args.format == "json":
        emit(rows, "json")
    else:
        emit(rows, "csv")
        print(render_report(rows), file=sys.stderr)
    return EXIT_OK


def cmd_device_run(args) -> int:
    result = _run_session(args, _scenario_path(args.scenario))
    dev = result.device
    emit([{"episode": ep.index, "wake_ms": ep.wake_t, "chunks": ep.chunks_sent,
           "stop_reason": ep.stop_reason, "photos": ep.photos_sent,
           "eou_sent_ms": ep.eou_sent_t, "first_audio_ms": ep.first_audio_t,
           "response_done_ms": ep.response_done_t, "underruns": ep.underruns,
           "aborted": ep.aborted} for ep in dev.episodes], args.format)
    print(f"device ends in {dev.state.value}, session {dev.session.state.value}; "
          f"event log in {Path(args.out_dir) / 'events.jsonl'}", file=sys.stderr)
    return EXIT_OK


def cmd_edge_serve(args) -> int:
    if args.tcp is not None:
        from earedge.edge.service import EdgeService
        from earedge.edge.stubs import StubSet
        from earedge.edge.tcp import serve_tcp
        from earedge.intent import IntentClassifier, Router
        from earedge.scenario import bundled_path

        stubs = StubSet.load({k: f"{k}.json" for k in ("asr", "llm", "vlm", "tts")},
                             bundled_path("stubs"))
        router = Router(IntentClassifier.load(bundled_path("intent_model.json")))
        log_path = _out_dir(args) / "edge_log.jsonl"
        try:
            asyncio.run(serve_tcp(lambda: EdgeService(stubs, router, log_path=log_path),
                                  args.tcp, args.host))
        except KeyboardInterrupt:
            pass
        return EXIT_OK
    if not args.scenario:
        raise UsageError("edge serve needs --scenario or --tcp")
    result = _run_session(args, _scenario_path(args.scenario))
    if result.latency is None:
        print("no query completed", file=sys.stderr)
        return EXIT_FAILURE
    if args.format == "json":
        emit(result.latency.to_dict(), "json")
    else:
        sys.stdout.write(result.latency.to_csv())
    print(result.latency.summary(), file=sys.stderr)
    return EXIT_OK


# ---- parser ----------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    p.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for output files")
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS,
                   help="stdout format")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", help="corpus root with one folder per label")
    p.add_argument("--per-class", type=int, default=300,
                   help="toy corpus size per class when --corpus is not given")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="earedge", parents=[common],
                                 description="Wake-word earpiece and edge companion toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(parent, name, func, help_text):
        p = parent.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    ds = sub.add_parser("dataset", help="corpus tools").add_subparsers(dest="sub", required=True)
    p = cmd(ds, "summarize", cmd_dataset_summarize, "Count clips per label and their durations.")
    p.add_argument("corpus")
    p = cmd(ds, "segment", cmd_dataset_segment, "Find speech regions in a long recording.")
    p.add_argument("wav")
    p.add_argument("--min-gap-ms", type=float, default=200.0)
    p.add_argument("--pad-ms", type=float, default=100.0)
    p.add_argument("--threshold-db", type=float, default=None)
    p.add_argument("--out", help="write each segment as a WAV into this directory")
    p = cmd(ds, "augment", cmd_dataset_augment,
            "Write augmented variants of a corpus (label folders) or of one clip.")
    p.add_argument("source", help="corpus root or a single WAV")
    p.add_argument("--label", help="label of a single WAV, or the only label to augment")
    p.add_argument("-n", type=int, default=10, help="variants per clip")
    p.add_argument("--spec", help="augmentation spec: JSON file or inline JSON")

    kws = sub.add_parser("kws", help="wake-word model").add_subparsers(dest="sub", required=True)
    p = cmd(kws, "train", cmd_kws_train, "Train float and int8 wake-word models.")
    _corpus_args(p)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--calibration", type=int, default=200)
    p = cmd(kws, "eval", cmd_kws_eval, "Accuracy and confusion matrix of a model.")
    p.add_argument("--model", required=True)
    _corpus_args(p)
    p = cmd(kws, "quantize", cmd_kws_quantize, "Post-training int8 quantization.")
    p.add_argument("--model", required=True)
    p.add_argument("--output")
    p.add_argument("--calibration", type=int, default=200)
    _corpus_args(p)
    p = cmd(kws, "profile", cmd_kws_profile, "Parameter, MAC and memory counts.")
    p.add_argument("--model", required=True)
    p = cmd(kws, "detect", cmd_kws_detect, "Run the streaming detector over a recording.")
    p.add_argument("--model", required=True)
    p.add_argument("wav")
    p.add_argument("--threshold", type=float, default=0.43)
    p.add_argument("--smoothing", type=float, default=0.5)
    p.add_argument("--suppression-s", type=float, default=1.0)

    it = sub.add_parser("intent", help="intent classifier").add_subparsers(dest="sub", required=True)
    p = cmd(it, "fit", cmd_intent_fit, "Fit the TF-IDF intent classifier.")
    p.add_argument("--corpus", help="CSV with text,intent columns (default: bundled)")
    p.add_argument("--iterations", type=int, default=500)
    p = cmd(it, "classify", cmd_intent_classify, "Classify and route utterances.")
    p.add_argument("utterances", nargs="*", help="utterances (default: one per stdin line)")
    p.add_argument("--text", action="append", help="an utterance; may be repeated")
    p.add_argument("--model", help="intent model JSON (default: bundled)")

    co = sub.add_parser("codec", help="IMA ADPCM files").add_subparsers(dest="sub", required=True)
    p = cmd(co, "encode", cmd_codec_encode, "WAV to ADPCM.")
    p.add_argument("input")
    p.add_argument("output")
    p = cmd(co, "decode", cmd_codec_decode, "ADPCM to WAV.")
    p.add_argument("input")
    p.add_argument("output")

    p = cmd(sub, "simulate", cmd_simulate, "Run a scenario file or bundled scenario by name.")
    p.add_argument("scenario")
    p = cmd(sub, "power-report", cmd_power_report, "Current draw and battery runtime per state.")
    p.add_argument("--profile", help="power profile JSON")
    p.add_argument("--battery-mah", type=float)
    p.add_argument("--target-ma", type=float)
    p.add_argument("--schedule", help="JSON list of state durations to integrate")

    dev = sub.add_parser("device", help="emulated earpiece").add_subparsers(dest="sub", required=True)
    p = cmd(dev, "run", cmd_device_run, "Run a scenario and report device episodes.")
    p.add_argument("--scenario", required=True)

    edge = sub.add_parser("edge", help="emulated edge companion").add_subparsers(dest="sub",
                                                                                required=True)
    p = cmd(edge, "serve", cmd_edge_serve, "Run the edge in a scenario or on loopback TCP.")
    p.add_argument("--scenario")
    p.add_argument("--tcp", type=int, metavar="PORT")
    p.add_argument("--host", default="127.0.0.1")
    return ap


DEFAULTS = {"seed": None, "out_dir": "earedge-out", "format": "csv", "verbose": False}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    for k, v in DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    if args.seed is None and args.func not in (cmd_simulate, cmd_device_run, cmd_edge_serve):
        args.seed = 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EarEdgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
