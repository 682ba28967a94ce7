"""Command-line surface: corpus construction, declipping, evaluation,
spectrum dumps and streaming simulation."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from declip import aspade, signal_core, spectral, streamsim, wavio
from declip.engine import (
    DemucsConfig,
    StreamState,
    forward_offline,
    lookahead_samples,
    mac_per_sample,
    random_weights,
    read_weights,
    validate_weights,
)
from declip.engine.analysis import algorithmic_tail_samples
from declip.engine.model import DemucsModel
from declip.signal_core import Waveform

RATE = 16000


def _wav_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.suffix.lower() == ".wav")


def _fmt_snr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


@click.group()
def main():
    """Speech declipping toolkit."""


@main.command()
@click.option("--in-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--snr", "snr_list", type=float, multiple=True, default=(1.0, 3.0, 7.0, 15.0), show_default=True)
@click.option("--tol", type=float, default=0.01, show_default=True, help="SNR tolerance in dB")
@click.option("--float32", is_flag=True, help="write float32 PCM instead of 16-bit")
@click.option("--jobs", type=int, default=1, show_default=True)
def clip(in_dir, out_dir, snr_list, tol, float32, jobs):
    """Build a hard-clipped corpus at fixed SNR levels plus a manifest."""
    if not snr_list:
        raise click.UsageError("at least one --snr level is required")
    files = _wav_files(in_dir)
    if not files:
        raise click.ClickException(f"no WAV files in {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(path: Path):
        entries = []
        try:
            wav = wavio.read_wav_checked(path, RATE)
        except wavio.WavFormatError as e:
            click.echo(f"skipping {path.name}: {e}", err=True)
            return entries
        for target in snr_list:
            theta = signal_core.threshold_for_target_snr(wav.samples, target, tol)
            clipped = signal_core.hard_clip(wav.samples, theta)
            measured = signal_core.snr_db(wav.samples, clipped)
            name = f"{path.stem}__snr{target:g}.wav"
            wavio.write_wav(out_dir / name, Waveform(clipped, RATE), float32=float32)
            entries.append(
                {
                    "file": name,
                    "target_snr_db": target,
                    "theta": theta,
                    "measured_snr_db": measured,
                }
            )
        return entries

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        manifest = [e for entries in pool.map(one, files) for e in entries]
    manifest.sort(key=lambda e: e["file"])
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    click.echo(f"wrote {len(manifest)} clipped files and manifest.json to {out_dir}")


def _load_model(weights_path, config_override=None) -> DemucsModel:
    path = weights_path or os.environ.get("DDD_WEIGHTS")
    if not path:
        raise click.UsageError("ddd method needs --weights or the DDD_WEIGHTS env var")
    weights = read_weights(path)
    cfg = config_override or weights.config_echo() or DemucsConfig()
    return DemucsModel(cfg, validate_weights(cfg, weights))


@main.command("declip")
@click.option("--in-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--method", type=click.Choice(["ddd", "aspade"]), required=True)
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--theta", type=float, default=None, help="clip threshold override for aspade")
@click.option("--float32", is_flag=True)
def declip_cmd(in_dir, out_dir, method, weights, manifest, theta, float32):
    """Restore a clipped corpus with the neural engine or the sparse baseline."""
    files = _wav_files(in_dir)
    if not files:
        raise click.ClickException(f"no WAV files in {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    thetas = {}
    if method == "aspade":
        manifest = manifest or (in_dir / "manifest.json")
        if theta is None:
            if not Path(manifest).exists():
                raise click.UsageError("aspade needs --theta or a corpus manifest.json")
            thetas = {e["file"]: e["theta"] for e in json.loads(Path(manifest).read_text())}
    model = _load_model(weights) if method == "ddd" else None

    total_audio = 0.0
    total_time = 0.0
    for path in files:
        wav = wavio.read_wav_checked(path, RATE)
        t0 = time.perf_counter()
        if method == "ddd":
            restored = forward_offline(model, wav).samples
        else:
            th = theta if theta is not None else thetas.get(path.name)
            if th is None:
                raise click.ClickException(f"no theta in manifest for {path.name}")
            mask = signal_core.clip_mask(wav.samples, th)
            restored = aspade.declip(wav.samples, mask, th).restored
        dt = time.perf_counter() - t0
        total_audio += wav.duration_s
        total_time += dt
        wavio.write_wav(out_dir / path.name, Waveform(restored, RATE), float32=float32)
        click.echo(f"{path.name}: {dt:.3f} s for {wav.duration_s:.2f} s of audio")
    click.echo(f"aggregate RTF: {streamsim.rtf_offline(total_audio, total_time):.3f}")


@main.command("eval")
@click.option("--clean-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--restored-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--clipped-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out", "out_prefix", type=click.Path(path_type=Path), default=Path("eval"), show_default=True)
@click.option("--method", default="unknown", show_default=True, help="method label for the rows")
def eval_cmd(clean_dir, restored_dir, clipped_dir, out_prefix, method):
    """Per-file SNR/spectral metrics and saturated-region extrema counts."""
    manifest_path = clipped_dir / "manifest.json"
    thetas = {}
    if manifest_path.exists():
        thetas = {e["file"]: e["theta"] for e in json.loads(manifest_path.read_text())}

    rows = []
    for clipped_path in _wav_files(clipped_dir):
        name = clipped_path.name
        restored_path = restored_dir / name
        clean_name = name.split("__snr")[0] + ".wav" if "__snr" in name else name
        clean_path = clean_dir / clean_name
        if not restored_path.exists() or not clean_path.exists():
            click.echo(f"skipping {name}: missing clean or restored counterpart", err=True)
            continue
        clean = wavio.read_wav_checked(clean_path, RATE).samples
        clipped = wavio.read_wav_checked(clipped_path, RATE).samples
        restored = wavio.read_wav_checked(restored_path, RATE).samples
        theta = thetas.get(name, float(np.max(np.abs(clipped))))
        mask = signal_core.clip_mask(clipped, theta)
        in_snr = signal_core.snr_db(clean, clipped)
        out_snr = signal_core.snr_db(clean, restored)
        rows.append(
            {
                "utterance": name,
                "method": method,
                "input_snr_db": in_snr,
                "output_snr_db": out_snr,
                "delta_snr_db": out_snr - in_snr,
                "mrstft": spectral.multi_res_stft_loss(clean, restored)
                if clean.size >= 2048
                else float("nan"),
                "extrema_clean": signal_core.count_saturated_extrema(clean, mask),
                "extrema_restored": signal_core.count_saturated_extrema(restored, mask),
            }
        )
    rows.sort(key=lambda r: r["utterance"])

    columns = [
        "utterance",
        "method",
        "input_snr_db",
        "output_snr_db",
        "delta_snr_db",
        "mrstft",
        "extrema_clean",
        "extrema_restored",
    ]
    csv_path = out_prefix.with_suffix(".csv")
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for r in rows:
            writer.writerow(
                [
                    r["utterance"],
                    r["method"],
                    _fmt_snr(r["input_snr_db"]),
                    _fmt_snr(r["output_snr_db"]),
                    _fmt_snr(r["delta_snr_db"]),
                    f"{r['mrstft']:.6f}",
                    r["extrema_clean"],
                    r["extrema_restored"],
                ]
            )
    finite = [r for r in rows if math.isfinite(r["delta_snr_db"])]
    summary = {
        "count": len(rows),
        "mean_delta_snr_db": float(np.mean([r["delta_snr_db"] for r in finite])) if finite else None,
        "median_delta_snr_db": float(np.median([r["delta_snr_db"] for r in finite])) if finite else None,
    }
    json_path = out_prefix.with_suffix(".json")
    json_rows = [
        {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in r.items()}
        for r in rows
    ]
    json_path.write_text(json.dumps({"rows": json_rows, "summary": summary}, indent=2))
    click.echo(f"wrote {csv_path} and {json_path} ({len(rows)} rows)")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--start", "start_s", type=float, required=True)
@click.option("--end", "end_s", type=float, required=True)
@click.option("--fft", type=int, default=2048, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def spectrum(file, start_s, end_s, fft, out):
    """Dump the Hann-windowed magnitude spectrum of a region as CSV."""
    wav = wavio.read_wav_checked(file, RATE)
    a, b = int(start_s * RATE), int(end_s * RATE)
    if not (0 <= a < b <= len(wav)):
        raise click.UsageError(f"region [{start_s}, {end_s}] s out of bounds for {file}")
    seg = wav.samples[a:b]
    if seg.size < fft:
        seg = np.concatenate([seg, np.zeros(fft - seg.size)])
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(fft) / fft)
    mags = np.abs(np.fft.rfft(seg[:fft] * window))
    db = 20.0 * np.log10(np.maximum(mags, 1e-12))
    db = np.maximum(db, -140.0)
    freqs = np.fft.rfftfreq(fft, 1.0 / RATE)
    out = out or file.with_suffix(".spectrum.csv")
    with open(out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frequency_hz", "magnitude_db"])
        for fr, d in zip(freqs, db):
            writer.writerow([f"{fr:.4f}", f"{d:.4f}"])
    click.echo(f"wrote {out} ({freqs.size} rows)")


@main.command()
@click.option("--method", type=click.Choice(["identity", "ddd"]), default="identity", show_default=True)
@click.option("--block", type=int, default=None, help="FixedBlock size in samples")
@click.option("--frames", type=int, default=None, help="FrameBuffered latent frame count")
@click.option("--duration", type=float, default=100.0, show_default=True)
@click.option("--mode", type=click.Choice(["virtual", "wall"]), default="virtual", show_default=True)
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def simulate(method, block, frames, duration, mode, weights, out):
    """Run the streaming latency/RTF simulation and write a JSON report."""
    if (block is None) == (frames is None):
        raise click.UsageError("specify exactly one of --block or --frames")
    if block is not None:
        if block < 1:
            raise click.UsageError("--block must be >= 1")
        policy = streamsim.FixedBlock(block)
    else:
        if frames < 1:
            raise click.UsageError("--frames must be >= 1")
        policy = streamsim.FrameBuffered(frames)

    if method == "identity":
        if isinstance(policy, streamsim.FrameBuffered):
            raise click.UsageError("identity runs under --block; use --ddd with --frames")
        proc = streamsim.identity_processor()
    else:
        if isinstance(policy, streamsim.FixedBlock):
            raise click.UsageError("ddd streams frame-buffered; use --frames")
        model = _load_model(weights) if (weights or os.environ.get("DDD_WEIGHTS")) else DemucsModel(
            DemucsConfig(), random_weights(DemucsConfig(), seed=0)
        )
        state = StreamState(model, buffer_frames=policy.frames)
        proc = streamsim.ProcessorUnderTest(
            process=state,
            algorithmic_tail=algorithmic_tail_samples(model.cfg),
            hop_samples=model.cfg.hop,
            name="ddd",
        )
    report = streamsim.simulate(proc, policy, duration=duration, mode=mode)
    text = report.to_json()
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@main.command()
def info():
    """Print engine configuration, latency and compute figures."""
    cfg = DemucsConfig()
    report = mac_per_sample(cfg)
    click.echo(f"sample rate: {cfg.sample_rate} Hz")
    click.echo(f"frame hop: {cfg.hop} samples")
    click.echo(f"MACs/sample: {report.macs_per_sample / 1e6:.3f} M")
    for frames in (1, 2, 4, 8):
        la = lookahead_samples(cfg, frames)
        click.echo(f"lookahead @ {frames} frame(s): {la} samples ({la / cfg.sample_rate * 1000:.1f} ms)")


if __name__ == "__main__":
    main()
