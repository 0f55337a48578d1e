"""PAC encoding: rate-profiling, convolutional precoding and the polar transform.

Bit vectors are 1-D ``numpy.uint8`` arrays holding 0/1 values.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

_HEX_RE = re.compile(r"^[0-9a-fA-F]*$")


class ProfileError(ValueError):
    """Raised for malformed rate profiles or hex strings."""


@dataclass(frozen=True)
class CodeParams:
    N: int
    K: int

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not 0 < self.K <= self.N:
            raise ValueError(f"K must satisfy 0 < K <= N, got K={self.K}, N={self.N}")

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def rate(self) -> float:
        return self.K / self.N


class RateProfile:
    """Information-set indicator of length N (1 marks an information index)."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=np.uint8).copy()
        if bits.ndim != 1 or np.any(bits > 1):
            raise ProfileError("profile bits must be a 1-D 0/1 vector")
        bits.setflags(write=False)
        self.bits = bits

    @classmethod
    def from_indices(cls, indices, N: int) -> "RateProfile":
        bits = np.zeros(N, dtype=np.uint8)
        idx = np.asarray(list(indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= N):
            raise ProfileError(f"information index out of range for N={N}")
        bits[idx] = 1
        return cls(bits)

    @property
    def N(self) -> int:
        return int(self.bits.size)

    @property
    def K(self) -> int:
        return int(self.bits.sum())

    @property
    def info(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    @property
    def frozen(self) -> np.ndarray:
        return np.flatnonzero(self.bits == 0)

    def __contains__(self, index) -> bool:
        return bool(self.bits[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RateProfile):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"RateProfile(N={self.N}, K={self.K}, hex={profile_to_hex(self)!r})"

    def to_hex(self) -> str:
        return profile_to_hex(self)

    def to_json(self) -> str:
        return json.dumps([int(i) for i in self.info])

    @classmethod
    def from_json(cls, text: str, N: int) -> "RateProfile":
        return cls.from_indices(json.loads(text), N)


@dataclass(frozen=True)
class PrecoderPolynomial:
    """Convolutional precoder taps ``w``; ``w[0]`` must be 1."""

    taps: tuple

    def __post_init__(self):
        taps = tuple(int(t) for t in self.taps)
        if not taps or taps[0] != 1 or any(t not in (0, 1) for t in taps):
            raise ValueError(f"precoder must be a 0/1 vector with leading 1, got {self.taps}")
        object.__setattr__(self, "taps", taps)

    @classmethod
    def from_string(cls, s: str) -> "PrecoderPolynomial":
        s = s.strip()
        if not s or any(ch not in "01" for ch in s):
            raise ValueError(f"precoder string must be binary, got {s!r}")
        return cls(tuple(int(ch) for ch in s))

    @property
    def p(self) -> int:
        return len(self.taps)

    def __str__(self):
        return "".join(str(t) for t in self.taps)

    def as_array(self) -> np.ndarray:
        return np.array(self.taps, dtype=np.uint8)


def as_precoder(w) -> PrecoderPolynomial:
    if isinstance(w, PrecoderPolynomial):
        return w
    if isinstance(w, str):
        return PrecoderPolynomial.from_string(w)
    return PrecoderPolynomial(tuple(w))


POLAR = PrecoderPolynomial((1,))
W_1011011 = PrecoderPolynomial((1, 0, 1, 1, 0, 1, 1))
W_11010001001 = PrecoderPolynomial((1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 1))


def rm_score(j: int) -> int:
    """Reed-Muller score of index ``j``: the Hamming weight of its binary expansion."""
    return int(j).bit_count()


def rm_scores(N: int) -> np.ndarray:
    return np.array([rm_score(j) for j in range(N)], dtype=np.int64)


def rate_profile_map(d, profile: RateProfile) -> np.ndarray:
    """Place the K data bits at the information indices (ascending) of a length-N vector."""
    d = np.asarray(d, dtype=np.uint8)
    if d.ndim != 1 or d.size != profile.K:
        raise ValueError(f"expected {profile.K} data bits, got {d.size}")
    v = np.zeros(profile.N, dtype=np.uint8)
    v[profile.info] = d
    return v


def conv_precode(v, w) -> np.ndarray:
    """u_i = XOR_j w_j v_{i-j}, with v taken as 0 at negative indices."""
    v = np.asarray(v, dtype=np.uint8)
    taps = as_precoder(w).taps
    u = v.copy()
    for j in range(1, min(len(taps), v.size)):
        if taps[j]:
            u[j:] ^= v[:-j]
    return u


def conv_unprecode(u, w) -> np.ndarray:
    """Inverse of :func:`conv_precode` (back-substitution, valid because w_0 = 1)."""
    u = np.asarray(u, dtype=np.uint8)
    taps = as_precoder(w).taps
    v = np.zeros_like(u)
    for i in range(u.size):
        acc = u[i]
        for j in range(1, min(len(taps), i + 1)):
            if taps[j]:
                acc ^= v[i - j]
        v[i] = acc
    return v


def polar_transform(u) -> np.ndarray:
    """x = u P^{(x)n} over GF(2), natural order, via in-place butterflies."""
    x = np.array(u, dtype=np.uint8)
    N = x.size
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    half = N // 2
    while half >= 1:
        blocks = x.reshape(-1, 2 * half)
        blocks[:, :half] ^= blocks[:, half:]
        half //= 2
    return x


def pac_encode(d, profile: RateProfile, w) -> np.ndarray:
    return polar_transform(conv_precode(rate_profile_map(d, profile), w))


def pac_encode_all(d, profile: RateProfile, w):
    """Return the intermediate vectors ``(v, u, x)`` of the encoder."""
    v = rate_profile_map(d, profile)
    u = conv_precode(v, w)
    return v, u, polar_transform(u)


def profile_to_hex(profile: RateProfile) -> str:
    """Render bits MSB-first (index 0 is the top bit of the first digit), uppercase."""
    bits = profile.bits
    if bits.size % 4:
        raise ProfileError(f"profile length {bits.size} is not a multiple of 4")
    nibbles = bits.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return "".join("0123456789ABCDEF"[int(q)] for q in nibbles)


def hex_to_profile(s: str, N: int) -> RateProfile:
    s = s.strip()
    if not _HEX_RE.match(s):
        raise ProfileError(f"non-hex characters in profile string {s!r}")
    if N % 4 or len(s) != N // 4:
        raise ProfileError(f"profile string must have N/4 = {N / 4:g} hex digits, got {len(s)}")
    bits = np.zeros(N, dtype=np.uint8)
    for q, ch in enumerate(s):
        val = int(ch, 16)
        for b in range(4):
            bits[4 * q + b] = (val >> (3 - b)) & 1
    return RateProfile(bits)


def rm_profile(N: int, K: int) -> RateProfile:
    """Reed-Muller profile: the K indices of largest weight, only defined when unambiguous."""
    scores = rm_scores(N)
    for t in range(int(scores.max()) + 1):
        sel = scores >= t
        if sel.sum() == K:
            return RateProfile(sel.astype(np.uint8))
    raise ProfileError(f"no Reed-Muller profile with exactly K={K} indices for N={N}")


@dataclass(frozen=True)
class Table1Entry:
    name: str
    N: int
    K: int
    w: PrecoderPolynomial
    L: int
    hex: str

    @property
    def profile(self) -> RateProfile:
        return hex_to_profile(self.hex, self.N)


_TABLE1_ROWS = [
    ("64-32-polar-l8", 64, 32, POLAR, 8, "01050377051F7F7F"),
    ("64-32-pac-l8", 64, 32, W_1011011, 8, "0015115F175717FF"),
    ("64-32-pac-l32", 64, 32, W_1011011, 32, "01070737057F177F"),
    ("128-72-polar-l8", 128, 72, POLAR, 8, "0001115701173F7F053F177F17FF7FFF"),
    ("128-72-pac-l8", 128, 72, W_1011011, 8, "0011011711371FFF0177577F177F7FFF"),
    ("256-128-pac-l8", 256, 128, W_1011011, 8,
     "000100010001011F0001113F073737FF0105157F055F5F7F157F5FFF7FFFFFFF"),
    ("256-128-pac-l32", 256, 128, W_1011011, 32,
     "000100010001011F0001113F073737FF0105157F055F5F7F157F5FFF7FFFFFFF"),
]

TABLE1 = {row[0]: Table1Entry(*row) for row in _TABLE1_ROWS}


def parse_profile(source: str, N: int | None = None) -> RateProfile:
    """Resolve ``table1:<name>``, a path to a JSON/hex file, or a literal hex string."""
    from pathlib import Path

    if source.startswith("table1:"):
        name = source.split(":", 1)[1]
        if name not in TABLE1:
            raise ProfileError(f"unknown table1 profile {name!r}; known: {', '.join(TABLE1)}")
        prof = TABLE1[name].profile
    else:
        path = Path(source)
        if path.suffix in (".json", ".hex", ".txt") and path.exists():
            text = path.read_text().strip()
            if path.suffix == ".json":
                obj = json.loads(text)
                if isinstance(obj, dict):
                    n_ = int(obj.get("N", N or 0))
                    prof = hex_to_profile(obj["hex"], n_) if "hex" in obj else RateProfile.from_indices(obj["indices"], n_)
                else:
                    if N is None:
                        raise ProfileError("N is required to load an index-list profile")
                    prof = RateProfile.from_indices(obj, N)
            else:
                prof = hex_to_profile(text, N if N is not None else 4 * len(text))
        else:
            prof = hex_to_profile(source, N if N is not None else 4 * len(source.strip()))
    if N is not None and prof.N != N:
        raise ProfileError(f"profile has length {prof.N}, expected N={N}")
    return prof
