"""LLR-domain successive cancellation list decoding of PAC codes.

Two ways in: :func:`decode` for a whole frame, or a :class:`DecoderSession`
stepped one bit at a time, which is what the rate-profile trainer needs so it
can decide each bit's frozen/information role on the fly and watch whether the
all-zero path is still in the list.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .core import POLAR, PrecoderPolynomial, RateProfile, as_precoder, polar_transform

KERNELS = ("exact", "min-sum")


class DecoderError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    """List size, LLR combining rule and precoder used by the decoder."""

    L: int = 8
    kernel: str = "exact"
    w: PrecoderPolynomial = field(default=POLAR)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"list size must be >= 1, got {self.L}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        object.__setattr__(self, "w", as_precoder(self.w))

    @property
    def minsum(self) -> bool:
        return self.kernel == "min-sum"

    def as_dict(self) -> dict:
        return {"L": self.L, "kernel": self.kernel, "w": str(self.w)}


@dataclass(frozen=True)
class StepReport:
    allzero_alive: bool
    active_path_count: int


@dataclass(frozen=True)
class Candidate:
    v: np.ndarray
    u: np.ndarray
    x: np.ndarray
    pm: float


@dataclass(frozen=True)
class DecodeResult:
    """Surviving paths sorted by ascending path metric."""

    candidates: list
    allzero_rank: int | None = None

    @property
    def best(self) -> Candidate:
        return self.candidates[0]

    @property
    def path_metrics(self) -> np.ndarray:
        return np.array([c.pm for c in self.candidates])

    def to_dict(self) -> dict:
        bits = lambda a: "".join(str(int(b)) for b in a)  # noqa: E731
        return {
            "allzero_rank": self.allzero_rank,
            "candidates": [
                {"rank": r + 1, "pm": c.pm, "v": bits(c.v), "u": bits(c.u), "x": bits(c.x)}
                for r, c in enumerate(self.candidates)
            ],
        }


def _result_from_paths(v, u, pm, az) -> DecodeResult:
    order = np.argsort(pm, kind="stable")
    cands = [Candidate(v[i].copy(), u[i].copy(), polar_transform(u[i]), float(pm[i])) for i in order]
    rank = None
    alive = np.flatnonzero(az[order])
    if alive.size:
        rank = int(alive[0]) + 1
    return DecodeResult(cands, rank)


class DecoderSession:
    """Bit-by-bit SCL decoder state over one received frame.

    Every call to :meth:`step` decides exactly one more bit on every path. The
    path whose v-history is all zeros is tracked by a flag: the ``v_k = 0``
    child inherits it at information steps and frozen steps never clear it.
    """

    def __init__(self, llrs, config: DecoderConfig, N: int | None = None):
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        if llrs.ndim != 1:
            raise ValueError("llrs must be a 1-D vector")
        if N is not None and llrs.size != N:
            raise ValueError(f"expected {N} LLRs, got {llrs.size}")
        size = llrs.size
        if size < 1 or size & (size - 1):
            raise ValueError(f"LLR length must be a power of two, got {size}")
        self.config = config
        self.N = size
        self.n = size.bit_length() - 1
        self.k = 0
        self._w = config.w.as_array()
        L = config.L
        st = K.alloc_state(size, L)
        self._alpha, self._beta = st["alpha"], st["beta"]
        self._v, self._u, self._pm, self._az = st["v"], st["u"], st["pm"], st["az"]
        self._scratch = K.alloc_state(size, L)
        self._alpha[0, :size] = llrs
        self._az[0] = 1
        self._m = 1

    @property
    def active_path_count(self) -> int:
        return self._m

    @property
    def allzero_alive(self) -> bool:
        return bool(self._az[: self._m].any())

    @property
    def path_metrics(self) -> np.ndarray:
        return self._pm[: self._m].copy()

    @property
    def v_hist(self) -> np.ndarray:
        return self._v[: self._m, : self.k].copy()

    @property
    def u_hist(self) -> np.ndarray:
        return self._u[: self._m, : self.k].copy()

    def step(self, frozen: bool) -> StepReport:
        if self.k >= self.N:
            raise DecoderError(f"all {self.N} bits already decoded")
        cfg = self.config
        if frozen:
            K.step_frozen(self._alpha, self._beta, self._v, self._u, self._pm,
                          self._m, self.k, self._w, self.n, self.N, cfg.minsum)
        else:
            s = self._scratch
            self._m = K.step_info(self._alpha, self._beta, self._v, self._u, self._pm, self._az,
                                  self._m, self.k, self._w, self.n, self.N, cfg.L, cfg.minsum,
                                  s["alpha"], s["beta"], s["v"], s["u"], s["pm"], s["az"],
                                  s["cpm"], s["cub"])
        self.k += 1
        return StepReport(self.allzero_alive, self._m)

    def finalize(self) -> DecodeResult:
        if self.k != self.N:
            raise DecoderError(f"finalize called after {self.k} of {self.N} steps")
        m = self._m
        return _result_from_paths(self._v[:m], self._u[:m], self._pm[:m], self._az[:m])


def session_init(llrs, config: DecoderConfig, N: int | None = None) -> DecoderSession:
    return DecoderSession(llrs, config, N)


def step(session: DecoderSession, frozen: bool) -> StepReport:
    return session.step(frozen)


def finalize(session: DecoderSession) -> DecodeResult:
    return session.finalize()


def decode(llrs, profile: RateProfile, config: DecoderConfig) -> DecodeResult:
    """Decode one frame with frozen positions taken from ``profile``."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (profile.N,):
        raise ValueError(f"expected {profile.N} LLRs, got shape {llrs.shape}")
    v, u, pm, az = K.decode_all(llrs, profile.bits, config.w.as_array(), config.L, config.minsum)
    return _result_from_paths(v, u, pm, az)


def decode_best_v(llrs, profile: RateProfile, config: DecoderConfig) -> np.ndarray:
    """Only the minimum-metric v-vector; the fast path used by the simulator."""
    return K.best_v(np.ascontiguousarray(llrs, dtype=np.float64), profile.bits,
                    config.w.as_array(), config.L, config.minsum)
