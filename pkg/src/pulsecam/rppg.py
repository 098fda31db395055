"""Pulse extraction from the stored frame stream.

The stream of optimally exposed (or fused) frames is turned into per-patch RGB
traces, processed in sliding windows (normalise, band-pass, chrominance
projection), combined across the strongest patches, spliced by Hann-weighted
overlap-add into a continuous pulse wave, and finally read out as windowed
heart-rate estimates from the FFT peak inside the pulse band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal as sps

from .sensor import Frame

PULSE_BAND = (0.6, 3.0)


@dataclass
class PatchTrace:
    """Per-patch channel means over time, uniformly sampled."""

    patch: tuple[int, int]
    samples: np.ndarray  # (n, 3) in RGB order
    timestamps: np.ndarray  # (n,)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 3:
            raise ValueError("trace samples must have shape (n, 3)")
        if len(self.timestamps) != len(self.samples):
            raise ValueError("timestamps and samples disagree in length")

    @property
    def rate(self) -> float:
        if len(self.timestamps) < 2:
            raise ValueError("trace too short to define a rate")
        return 1.0 / float(np.mean(np.diff(self.timestamps)))


@dataclass
class PulseWave:
    samples: np.ndarray
    rate: float
    timestamps: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.timestamps = np.asarray(self.timestamps, dtype=float)


@dataclass
class HRSeries:
    """Windowed heart-rate estimates: (window-centre time, bpm) pairs."""

    times: np.ndarray
    bpm: np.ndarray

    def __post_init__(self):
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        self.bpm = np.atleast_1d(np.asarray(self.bpm, dtype=float))
        if self.times.shape != self.bpm.shape:
            raise ValueError("times and bpm must align")

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class PipelineConfig:
    window_s: float = 10.0
    hop_s: float = 5.0
    band: tuple[float, float] = PULSE_BAND
    top_k: int | None = None  # None -> quartile of the ROI patch count
    nfft: int = 4096


def extract_patch_traces(frames: list[Frame], roi: np.ndarray) -> list[PatchTrace]:
    """One RGB trace per ROI patch from a uniformly sampled frame stream."""
    if not frames:
        raise ValueError("empty frame stream")
    roi = np.asarray(roi, dtype=bool)
    if roi.shape != frames[0].grid:
        raise ValueError("roi mask does not match the frame grid")
    ts = np.array([f.timestamp for f in frames])
    if len(ts) > 2:
        dt = np.diff(ts)
        if not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-9):
            raise ValueError("frame stream is not uniformly sampled")
    stack = np.stack([f.intensities for f in frames])  # (n, rows, cols, 3)
    return [
        PatchTrace((int(r), int(c)), stack[:, r, c, :], ts)
        for r, c in np.argwhere(roi)
    ]


@lru_cache(maxsize=32)
def _band_sos(rate: float, low: float, high: float):
    return sps.butter(2, [low, high], btype="bandpass", fs=rate, output="sos")


def window_normalize_filter(
    trace: PatchTrace,
    window_s: float = 10.0,
    band: tuple[float, float] = PULSE_BAND,
    hop_s: float | None = None,
) -> list[tuple[int, np.ndarray]]:
    """Sliding-window normalisation and band-pass filtering of one trace.

    Per window each channel is divided by its window mean and shifted to zero
    mean, then band-passed with a zero-phase Butterworth filter. Returns
    (start_index, segment) pairs; segments have shape (window_len, 3).
    """
    rate = trace.rate
    win = int(round(window_s * rate))
    if win > len(trace.samples):
        raise ValueError("window longer than the trace")
    if not 0.0 < band[0] < band[1] < rate / 2.0:
        raise ValueError("band must lie inside (0, rate/2)")
    hop = win // 2 if hop_s is None else int(round(hop_s * rate))
    sos = _band_sos(rate, band[0], band[1])
    out = []
    for start in range(0, len(trace.samples) - win + 1, hop):
        seg = trace.samples[start : start + win]
        means = seg.mean(axis=0)
        normed = np.zeros_like(seg)
        ok = means > 1e-12  # all-black patches carry no signal
        normed[:, ok] = seg[:, ok] / means[ok] - 1.0
        out.append((start, sps.sosfiltfilt(sos, normed, axis=0)))
    return out


def pos_project(window: np.ndarray) -> np.ndarray:
    """Chrominance projection of one normalised RGB window onto the pulse axis.

    Builds the two chrominance signals S1 = G - B and S2 = G + B - 2R and mixes
    them with the standard-deviation ratio so intensity changes cancel while the
    pulse adds up. Output is mean-centred.
    """
    window = np.asarray(window, dtype=float)
    r, g, b = window[:, 0], window[:, 1], window[:, 2]
    s1 = g - b
    s2 = g + b - 2.0 * r
    sd2 = float(np.std(s2))
    if sd2 > 0.0:
        h = s1 + (float(np.std(s1)) / sd2) * s2
    else:
        h = s1.copy()
    return h - h.mean()


def _band_bins(freqs: np.ndarray, band: tuple[float, float]) -> np.ndarray:
    return (freqs >= band[0] - 1e-12) & (freqs <= band[1] + 1e-12)


def patch_snr(segment: np.ndarray, rate: float, band: tuple[float, float] = PULSE_BAND,
              nfft: int = 1024, peak_halfwidth: float = 0.1) -> float:
    """Self-referenced spectral SNR: dominant in-band peak vs the rest of the band."""
    spec = np.abs(np.fft.rfft(segment, n=max(nfft, len(segment)))) ** 2
    freqs = np.fft.rfftfreq(max(nfft, len(segment)), d=1.0 / rate)
    in_band = _band_bins(freqs, band)
    if not in_band.any() or spec[in_band].max() <= 0.0:
        return 0.0
    f_band = freqs[in_band]
    p_band = spec[in_band]
    f_peak = f_band[int(np.argmax(p_band))]
    near_peak = np.abs(f_band - f_peak) <= peak_halfwidth
    sig = float(p_band[near_peak].sum())
    noise = float(p_band[~near_peak].sum())
    if noise <= 0.0:
        return math.inf
    return sig / noise


def select_top_k(segments: list[np.ndarray], k: int, rate: float,
                 band: tuple[float, float] = PULSE_BAND) -> np.ndarray:
    """Average the K spectrally strongest patch segments, sign-aligned.

    Ranking uses only the segments themselves (no reference heart rate). Each
    selected segment is flipped if it anti-correlates with the strongest one so
    the average is constructive. K larger than the patch count uses them all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not segments:
        raise ValueError("no segments to select from")
    k = min(k, len(segments))
    snrs = [patch_snr(s, rate, band) for s in segments]
    order = sorted(range(len(segments)), key=lambda i: snrs[i], reverse=True)
    best = segments[order[0]]
    picked = []
    for i in order[:k]:
        seg = segments[i]
        if float(np.dot(seg, best)) < 0.0:
            seg = -seg
        picked.append(seg)
    return np.mean(picked, axis=0)


def splice_overlap_add(segments: list[np.ndarray], hop: int) -> np.ndarray:
    """Hann-weighted overlap-add of consecutive window outputs.

    With 50% overlap the periodic Hann window is a partition of unity, so
    identical overlapping segments reconstruct their interior exactly.
    """
    if not segments:
        raise ValueError("nothing to splice")
    win = len(segments[0])
    if any(len(s) != win for s in segments):
        raise ValueError("segments must share one length")
    if hop != win // 2:
        raise ValueError("overlap-add expects hop = window/2")
    w = sps.windows.hann(win, sym=False)
    out = np.zeros(hop * (len(segments) - 1) + win)
    for i, seg in enumerate(segments):
        out[i * hop : i * hop + win] += w * np.asarray(seg, dtype=float)
    return out


def estimate_hr(
    wave: PulseWave,
    window_s: float = 10.0,
    hop_s: float = 5.0,
    band: tuple[float, float] = PULSE_BAND,
    nfft: int = 4096,
) -> HRSeries:
    """Windowed heart-rate readout: FFT magnitude peak inside the pulse band.

    Windows are zero-padded so the spectral grid is far finer than the native
    1/window resolution (about 0.22 bpm at the defaults).
    """
    if window_s < 10.0:
        raise ValueError("window must be at least 10 s")
    win = int(round(window_s * wave.rate))
    hop = int(round(hop_s * wave.rate))
    if win > len(wave.samples):
        raise ValueError("window longer than the wave")
    times, bpm = [], []
    for start in range(0, len(wave.samples) - win + 1, hop):
        seg = wave.samples[start : start + win]
        n = max(nfft, 1 << (win - 1).bit_length())
        spec = np.abs(np.fft.rfft(seg, n=n))
        freqs = np.fft.rfftfreq(n, d=1.0 / wave.rate)
        in_band = _band_bins(freqs, band)
        f_peak = freqs[in_band][int(np.argmax(spec[in_band]))]
        times.append(wave.timestamps[start] + (win - 1) / (2.0 * wave.rate))
        bpm.append(60.0 * f_peak)
    if not times:
        raise ValueError("wave shorter than one analysis window")
    return HRSeries(np.array(times), np.array(bpm))


@dataclass
class PipelineResult:
    wave: PulseWave
    hr: HRSeries
    patches: int
    top_k: int


def run_pipeline(frames: list[Frame], roi: np.ndarray,
                 config: PipelineConfig | None = None) -> PipelineResult:
    """Full frame-stream-to-heart-rate pipeline."""
    cfg = config or PipelineConfig()
    traces = extract_patch_traces(frames, roi)
    rate = traces[0].rate
    k = cfg.top_k if cfg.top_k is not None else max(1, math.ceil(0.25 * len(traces)))

    per_patch = [
        window_normalize_filter(tr, cfg.window_s, cfg.band, cfg.hop_s) for tr in traces
    ]
    n_windows = min(len(w) for w in per_patch)
    if n_windows == 0:
        raise ValueError("stream shorter than one analysis window")

    win = int(round(cfg.window_s * rate))
    hop = int(round(cfg.hop_s * rate))
    combined = []
    for w in range(n_windows):
        segs = [pos_project(per_patch[p][w][1]) for p in range(len(traces))]
        combined.append(select_top_k(segs, k, rate, cfg.band))
    spliced = splice_overlap_add(combined, hop)

    t0 = traces[0].timestamps[0]
    wave = PulseWave(spliced, rate, t0 + np.arange(len(spliced)) / rate)
    hr = estimate_hr(wave, cfg.window_s, cfg.hop_s, cfg.band, cfg.nfft)
    return PipelineResult(wave=wave, hr=hr, patches=len(traces), top_k=k)
