"""End-to-end commands: synthesize, measure, reconstruct, detect, score."""

from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import detection, netpbm, sensing, solver
from .config import RunConfig
from .detection import SilhouetteMask
from .framelet import FrameletTransform
from .scene import generate_scene, moving_square_scene, step_illumination
from .volume import (FrameGeometry, GeometryMismatch, VideoVolume, volume_from_frames,
                     volume_to_frames)

log = logging.getLogger(__name__)

# foreground frames are signed; they are stored with this offset added
FOREGROUND_OFFSET = 128.0


def measurement_count(rate: float, N: int) -> int:
    """``floor(rate * N)``, computed exactly from the decimal value of ``rate``."""
    return math.floor(Fraction(repr(float(rate))) * N)


def load_volume(frames_dir, mode: str = "grayscale") -> VideoVolume:
    frames = netpbm.read_frames(frames_dir)
    if mode == "grayscale":
        frames = [f.luminance() for f in frames]
    elif any(f.geometry.channels != 3 for f in frames):
        raise GeometryMismatch("color mode needs PPM (3-channel) frames")
    return volume_from_frames(frames)


def measure_volume(vol: VideoVolume, rate: float, seed: int) -> sensing.MeasurementFile:
    N = vol.size
    M = measurement_count(rate, N)
    if M < 1:
        raise ValueError(f"rate {rate} gives no measurements for N={N}")
    op = sensing.build_operator(N, M, seed)
    g = vol.geometry
    return sensing.MeasurementFile(N, M, seed, g.width, g.height, g.channels,
                                   vol.frame_count, op.measure(vol))


def cmd_synth(out_dir, width=64, height=64, frames=20, sprite=8, color=False,
              illum_low: Optional[float] = None, seed: int = 0) -> dict:
    """Write a synthetic scene: ``frames/``, ``background/`` and truth ``masks/``."""
    illum = step_illumination(frames, illum_low) if illum_low is not None else None
    offset = (70.0, -60.0, 80.0) if color else 80.0
    spec = moving_square_scene(width, height, frames, sprite, 3 if color else 1, illum, offset)
    scene = generate_scene(spec, seed)
    out = Path(out_dir)
    netpbm.write_frames(volume_to_frames(scene.volume), out / "frames")
    netpbm.write_frames(volume_to_frames(scene.background), out / "background")
    g = spec.geometry.gray()
    netpbm.write_masks([SilhouetteMask(g, m) for m in scene.masks], out / "masks")
    return {"frames": frames, "width": width, "height": height}


def cmd_measure(frames_dir, out_file, cfg: RunConfig) -> sensing.MeasurementFile:
    vol = load_volume(frames_dir, cfg.mode)
    mf = measure_volume(vol, cfg.measurement_rate, cfg.seed)
    sensing.write_measurements(out_file, mf)
    log.info("wrote %d measurements of %d entries to %s", mf.m, mf.signal_len, out_file)
    return mf


def decompose(mf: sensing.MeasurementFile, cfg: solver.SolverConfig) -> solver.Decomposition:
    geom = FrameGeometry(mf.width, mf.height, mf.channels)
    op = sensing.build_operator(mf.signal_len, mf.m, mf.seed)
    W = FrameletTransform(geom)
    run = solver.reconstruct_color if geom.channels == 3 else solver.reconstruct
    return run(mf.y, op, W, W, geom, cfg)


def diagnostics_text(dec: solver.Decomposition, elapsed: Optional[float] = None) -> str:
    lines = [
        f"iterations = {dec.iterations}",
        f"converged = {int(dec.converged)}",
        f"final_feasibility = {dec.final_feasibility:.9e}",
        f"objective = {dec.final_objective:.9e}",
        f"numerical_rank_X1 = {dec.numerical_rank_X1}",
    ]
    if elapsed is not None:
        lines.append(f"seconds = {elapsed:.3f}")
    return "\n".join(lines) + "\n"


def parse_diagnostics(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = float(v) if any(c in v for c in ".en") else int(v)
    return out


def cmd_reconstruct(measure_file, out_dir, cfg: RunConfig,
                    expect: Optional[FrameGeometry] = None) -> solver.Decomposition:
    """Writes ``background/``, ``foreground/`` (offset by 128), ``video/`` and ``diagnostics.txt``."""
    mf = sensing.read_measurements(measure_file)
    geom = FrameGeometry(mf.width, mf.height, mf.channels)
    if expect is not None and expect != geom:
        raise GeometryMismatch(f"measurement file holds {geom}, expected {expect}")
    t0 = time.perf_counter()
    dec = decompose(mf, cfg.solver)
    elapsed = time.perf_counter() - t0
    out = Path(out_dir)
    netpbm.write_frames(volume_to_frames(dec.background), out / "background")
    netpbm.write_frames(volume_to_frames(VideoVolume(geom, dec.X2 + FOREGROUND_OFFSET)),
                        out / "foreground")
    netpbm.write_frames(volume_to_frames(dec.video), out / "video")
    # timing is left out so repeated runs give identical files
    text = diagnostics_text(dec)
    tmp = out / "diagnostics.txt.tmp"
    tmp.write_text(text)
    tmp.replace(out / "diagnostics.txt")
    log.info("reconstructed in %.2fs: %s", elapsed, text.replace("\n", "; "))
    return dec


def cmd_silhouette(foreground_dir, out_dir, delta: Optional[float] = None, window: int = 3,
                   offset: float = FOREGROUND_OFFSET) -> tuple:
    frames = netpbm.read_frames(foreground_dir)
    vol = volume_from_frames(frames)
    X2 = VideoVolume(vol.geometry, vol.data - offset)
    if delta is None:
        delta = detection.default_delta(X2)
    masks = detection.silhouettes(X2, delta, window)
    netpbm.write_masks(masks, out_dir)
    return masks, delta


def _is_mask(frames) -> bool:
    return all(f.geometry.channels == 1 and np.isin(f.samples, (0.0, 255.0)).all()
               for f in frames)


def cmd_score(dir_a, dir_b, metric: str = "auto", peak: float = 255.0) -> list:
    """Per-frame IoU (mask dirs) or PSNR (frame dirs).

    Returns ``(rows, metric)`` where rows are ``(label, value)`` pairs ending
    with the mean IoU or the PSNR over all frames.
    """
    fa = netpbm.read_frames(dir_a)
    fb = netpbm.read_frames(dir_b)
    if len(fa) != len(fb):
        raise GeometryMismatch(f"{dir_a} has {len(fa)} frames, {dir_b} has {len(fb)}")
    if metric == "auto":
        metric = "iou" if _is_mask(fa) and _is_mask(fb) else "psnr"
    rows = []
    if metric == "iou":
        for j, (a, b) in enumerate(zip(fa, fb)):
            ma = SilhouetteMask(a.geometry, a.samples > 0)
            mb = SilhouetteMask(b.geometry, b.samples > 0)
            rows.append((str(j), detection.mask_iou(ma, mb)))
        rows.append(("mean", float(np.mean([v for _, v in rows]))))
    elif metric == "psnr":
        for j, (a, b) in enumerate(zip(fa, fb)):
            if a.geometry != b.geometry:
                raise GeometryMismatch(f"frame {j} differs in geometry")
            rows.append((str(j), detection.psnr(a.samples, b.samples, peak)))
        va, vb = volume_from_frames(fa), volume_from_frames(fb)
        rows.append(("all", detection.psnr(va, vb, peak)))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return rows, metric


def format_table(rows, metric: str) -> str:
    return f"frame\t{metric}\n" + "".join(f"{k}\t{v:.6f}\n" for k, v in rows)
