"""Evaluation metrics for windowed heart-rate estimates and pulse waves.

MAE and success rate compare estimate and reference trajectories after linear
interpolation of the reference onto the estimate timestamps. Spectral SNR
integrates PSD power in narrow bands around the reference rate and its first
harmonic against the rest of the analysis band. CDF/CCDF helpers produce
plot-ready robustness curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .rppg import HRSeries, PulseWave

SNR_BAND = (0.7, 4.0)
SNR_HARMONIC_HALFWIDTH = 0.1
SNR_FLOOR_DB = -80.0
SNR_CEIL_DB = 80.0


@dataclass
class MetricsReport:
    mae: float
    success_rate: float
    snr: float
    per_window: list[tuple[float, float, float, float]] = field(default_factory=list)
    cdf_points: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mae_bpm": self.mae,
            "success_rate_pct": self.success_rate,
            "snr_db": self.snr,
            "windows": len(self.per_window),
        }


def _aligned_errors(est: HRSeries, ref: HRSeries) -> np.ndarray:
    if len(est) == 0 or len(ref) == 0:
        raise ValueError("empty heart-rate series")
    ref_at_est = np.interp(est.times, ref.times, ref.bpm)
    return np.abs(est.bpm - ref_at_est)


def mae(est: HRSeries, ref: HRSeries) -> float:
    """Mean absolute heart-rate error in bpm."""
    return float(_aligned_errors(est, ref).mean())


def success_rate(est: HRSeries, ref: HRSeries, tol: float = 5.0) -> float:
    """Percentage of estimates within `tol` bpm of the reference (inclusive)."""
    err = _aligned_errors(est, ref)
    return 100.0 * float(np.count_nonzero(err <= tol)) / len(err)


def snr_db(
    wave: PulseWave,
    ref: HRSeries,
    window_s: float = 30.0,
    hop_s: float = 15.0,
    band: tuple[float, float] = SNR_BAND,
    halfwidth: float = SNR_HARMONIC_HALFWIDTH,
) -> float:
    """Mean windowed spectral SNR of the pulse wave against the reference rate.

    Signal power sits within +-halfwidth of the reference frequency and its
    first harmonic (clipped to the analysis band); everything else in the band
    counts as noise. The 30 s default keeps the Hann main lobe well inside the
    +-0.1 Hz signal band. Windows whose reference falls outside [band0/2,
    band1] are skipped; windows with no in-band energy at all contribute the
    floor value.
    """
    win = int(round(window_s * wave.rate))
    hop = int(round(hop_s * wave.rate))
    if win > len(wave.samples):
        raise ValueError("wave shorter than one analysis window")
    taper = sps.windows.hann(win, sym=False)
    values = []
    for start in range(0, len(wave.samples) - win + 1, hop):
        t_mid = wave.timestamps[start] + (win - 1) / (2.0 * wave.rate)
        f_ref = float(np.interp(t_mid, ref.times, ref.bpm)) / 60.0
        if not band[0] / 2.0 <= f_ref <= band[1]:
            continue
        seg = wave.samples[start : start + win]
        n = max(4096, 1 << (win - 1).bit_length())
        psd = np.abs(np.fft.rfft(taper * seg, n=n)) ** 2
        freqs = np.fft.rfftfreq(n, d=1.0 / wave.rate)
        in_band = (freqs >= band[0]) & (freqs <= band[1])
        sig_mask = in_band & (
            (np.abs(freqs - f_ref) <= halfwidth) | (np.abs(freqs - 2.0 * f_ref) <= halfwidth)
        )
        sig = float(psd[sig_mask].sum())
        noise = float(psd[in_band & ~sig_mask].sum())
        if sig <= 0.0 and noise <= 0.0:
            values.append(SNR_FLOOR_DB)  # dead window, e.g. fully clipped stream
        elif noise <= 0.0:
            values.append(SNR_CEIL_DB)
        elif sig <= 0.0:
            values.append(SNR_FLOOR_DB)
        else:
            values.append(min(max(10.0 * math.log10(sig / noise), SNR_FLOOR_DB), SNR_CEIL_DB))
    if not values:
        raise ValueError("no analysable window (reference outside the band everywhere)")
    return float(np.mean(values))


def cdf_points(values: list[float], direction: str = "cdf") -> list[tuple[float, float]]:
    """Empirical CDF P(X <= x) or CCDF P(X >= x) at the sorted sample points."""
    if len(values) == 0:
        raise ValueError("empty value list")
    if direction not in ("cdf", "ccdf"):
        raise ValueError("direction must be 'cdf' or 'ccdf'")
    xs = np.sort(np.asarray(values, dtype=float))
    n = len(xs)
    if direction == "cdf":
        return [(float(x), float(np.count_nonzero(xs <= x)) / n) for x in xs]
    return [(float(x), float(np.count_nonzero(xs >= x)) / n) for x in xs]


def evaluate(
    est: HRSeries,
    ref: HRSeries,
    wave: PulseWave,
    tol: float = 5.0,
    snr_window_s: float = 30.0,
    snr_hop_s: float = 15.0,
) -> MetricsReport:
    """Bundle the three headline metrics plus the per-window error table.

    The SNR window is clamped to the wave length so short runs still score
    (at reduced spectral selectivity).
    """
    errs = _aligned_errors(est, ref)
    ref_at_est = np.interp(est.times, ref.times, ref.bpm)
    per_window = [
        (float(t), float(e), float(r), float(a))
        for t, e, r, a in zip(est.times, est.bpm, ref_at_est, errs)
    ]
    wave_span = len(wave.samples) / wave.rate
    win = min(snr_window_s, wave_span)
    report = MetricsReport(
        mae=float(errs.mean()),
        success_rate=100.0 * float(np.count_nonzero(errs <= tol)) / len(errs),
        snr=snr_db(wave, ref, win, min(snr_hop_s, win / 2.0)),
        per_window=per_window,
        cdf_points=cdf_points(list(errs), "cdf"),
    )
    return report
