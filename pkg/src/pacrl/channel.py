"""BI-AWGN channel with BPSK (0 -> +1, 1 -> -1) and a seeded Monte Carlo FER harness.

Noise for frame ``f`` is drawn from its own stream keyed by ``(seed, f)``, so a
sweep gives the same counts whether it runs on one worker or many.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import CodeParams, RateProfile, as_precoder, pac_encode_all
from .scl import DecoderConfig, decode_best_v

SNR_CONVENTION = "Eb/N0, sigma^2 = 1 / (2 R Eb/N0)"


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")

    @property
    def sigma(self) -> float:
        return sigma_from_ebn0(self.ebn0_db, self.rate)


@dataclass(frozen=True)
class SimConfig:
    snr_points: tuple
    max_frames: int = 10_000
    min_frame_errors: int = 100
    mode: str = "allzero"
    batch_size: int = 250

    def __post_init__(self):
        object.__setattr__(self, "snr_points", tuple(float(s) for s in self.snr_points))
        if self.max_frames < 1:
            raise ValueError(f"max_frames must be >= 1, got {self.max_frames}")
        if self.min_frame_errors < 0:
            raise ValueError(f"min_frame_errors must be >= 0, got {self.min_frame_errors}")
        if self.mode not in ("allzero", "random"):
            raise ValueError(f"mode must be 'allzero' or 'random', got {self.mode!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.snr_points:
            raise ValueError("at least one SNR point is required")


@dataclass(frozen=True)
class SimPoint:
    ebn0_db: float
    frames: int
    errors: int
    bit_errors: int = 0

    @property
    def fer(self) -> float:
        return self.errors / self.frames

    @property
    def ci95(self) -> float:
        """Normal-approximation half-width of the 95% interval on the FER."""
        p = self.fer
        return 1.959963984540054 * math.sqrt(p * (1.0 - p) / self.frames)


@dataclass
class SimResult:
    points: list
    metadata: dict = field(default_factory=dict)

    @property
    def fer(self) -> np.ndarray:
        return np.array([p.fer for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["ebn0_db", "frames", "errors", "fer", "ci95"])
        for p in self.points:
            wr.writerow([f"{p.ebn0_db:g}", p.frames, p.errors, f"{p.fer:.6e}", f"{p.ci95:.6e}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "points": [
                {**asdict(p), "fer": p.fer, "ci95": p.ci95} for p in self.points
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "SimResult":
        pts = [SimPoint(p["ebn0_db"], p["frames"], p["errors"], p.get("bit_errors", 0))
               for p in obj["points"]]
        return cls(pts, obj.get("metadata", {}))


def sigma_from_ebn0(ebn0_db: float, rate: float) -> float:
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def frame_rng(seed: int, frame_index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(frame_index), int(stream)])


def transmit(x, cfg: ChannelConfig, frame_index: int) -> np.ndarray:
    """BPSK-map ``x`` and add white Gaussian noise drawn from the frame's own stream."""
    s = 1.0 - 2.0 * np.asarray(x, dtype=np.float64)
    if cfg.noiseless:
        return s
    return s + cfg.sigma * frame_rng(cfg.seed, frame_index).standard_normal(s.size)


def llr(y, sigma2: float) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2


def _run_batch(job) -> tuple:
    """Worker body: decode frames ``start .. start+count-1`` at one SNR point."""
    bits, taps, L, kernel, ebn0, rate, seed, noiseless, start, count, mode = job
    profile = RateProfile(bits)
    dcfg = DecoderConfig(L, kernel, taps)
    ccfg = ChannelConfig(ebn0, rate, seed, noiseless)
    sigma2 = ccfg.sigma ** 2
    N, K = profile.N, profile.K
    errors = bit_errors = 0
    zero = np.zeros(N, dtype=np.uint8)
    for f in range(start, start + count):
        if mode == "random":
            d = frame_rng(seed, f, 1).integers(0, 2, K).astype(np.uint8)
            v, _, x = pac_encode_all(d, profile, taps)
        else:
            v, x = zero, zero
        vhat = decode_best_v(llr(transmit(x, ccfg, f), sigma2), profile, dcfg)
        nerr = int(np.count_nonzero(vhat != v))
        if nerr:
            errors += 1
            bit_errors += nerr
    return errors, bit_errors


def run_fer(code: CodeParams, profile: RateProfile, w, decoder_cfg: DecoderConfig,
            sim_cfg: SimConfig, seed: int = 0, workers: int = 1, noiseless: bool = False) -> SimResult:
    """Frame error rate per SNR point.

    Frames run in fixed-size batches; a point stops after the first batch that
    brings the error count to ``min_frame_errors`` (0 disables early stopping),
    or at ``max_frames``. Batch boundaries do not depend on ``workers``.
    """
    if profile.N != code.N or profile.K != code.K:
        raise ValueError(f"profile is ({profile.N}, {profile.K}) but code is ({code.N}, {code.K})")
    w = as_precoder(w)
    if w != decoder_cfg.w:
        raise ValueError(f"decoder precoder {decoder_cfg.w} differs from encoder precoder {w}")
    bits = profile.bits.copy()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    points = []
    try:
        for ebn0 in sim_cfg.snr_points:
            starts = list(range(0, sim_cfg.max_frames, sim_cfg.batch_size))
            jobs = [(bits, w.taps, decoder_cfg.L, decoder_cfg.kernel, ebn0, code.rate, seed,
                     noiseless, s, min(sim_cfg.batch_size, sim_cfg.max_frames - s), sim_cfg.mode)
                    for s in starts]
            frames = errors = bit_errors = 0
            if pool is None:
                results = map(_run_batch, jobs)
            else:
                results = _ordered_window(pool, jobs, window=2 * workers)
            for job, (e, be) in zip(jobs, results):
                frames += job[9]
                errors += e
                bit_errors += be
                if sim_cfg.min_frame_errors and errors >= sim_cfg.min_frame_errors:
                    break
            if hasattr(results, "close"):
                results.close()
            points.append(SimPoint(ebn0, frames, errors, bit_errors))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    meta = {
        "code": {"N": code.N, "K": code.K},
        "profile_hex": profile.to_hex(),
        "w": str(w),
        "decoder": decoder_cfg.as_dict(),
        "sim": {**asdict(sim_cfg), "snr_points": list(sim_cfg.snr_points)},
        "seed": seed,
        "snr_convention": SNR_CONVENTION,
        "noiseless": noiseless,
    }
    return SimResult(points, meta)


def _ordered_window(pool, jobs, window):
    """Yield job results in submission order, keeping at most ``window`` in flight."""
    pending = []
    it = iter(jobs)
    for job in it:
        pending.append(pool.submit(_run_batch, job))
        if len(pending) >= window:
            break
    while pending:
        fut = pending.pop(0)
        nxt = next(it, None)
        if nxt is not None:
            pending.append(pool.submit(_run_batch, nxt))
        try:
            yield fut.result()
        except GeneratorExit:
            for p in pending:
                p.cancel()
            raise
