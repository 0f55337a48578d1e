"""``pacrl`` command line: train profiles, run FER sweeps, encode/decode frames, inspect profiles.

Exit status is 0 on success, 2 for bad usage and 3 when an input is well-formed
on the command line but its content is wrong (bad hex, N/K mismatch, ...).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import SimConfig, run_fer
from .core import (
    TABLE1, CodeParams, ProfileError, RateProfile, as_precoder,
    pac_encode_all, parse_profile,
)
from .profiler import (
    MazeError, TrainConfig, extract_profile, new_q_table, rm_score_partition, save_q, train,
)
from .scl import DecoderConfig, decode

EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    seed: int | None
    config: dict
    argv: list = field(default_factory=lambda: list(sys.argv[1:]))
    tool: str = "pacrl"
    version: str = __version__
    started: str = field(default_factory=_now)
    finished: str | None = None

    def finish(self) -> "RunManifest":
        self.finished = _now()
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ProfileRecord:
    N: int
    K: int
    w: str
    L: int
    hex: str
    provenance: str
    indices: list = field(default_factory=list)
    note: str | None = None

    @classmethod
    def build(cls, profile: RateProfile, w, L: int, provenance: str, note=None) -> "ProfileRecord":
        return cls(profile.N, profile.K, str(as_precoder(w)), L, profile.to_hex(), provenance,
                   [int(i) for i in profile.info], note)

    def profile(self) -> RateProfile:
        prof = parse_profile(self.hex, self.N)
        if prof.K != self.K:
            raise ProfileError(f"record says K={self.K} but hex has popcount {prof.K}")
        return prof


# -- argument helpers ------------------------------------------------------

def parse_snr_range(text: str) -> list:
    """``start:stop:step`` (stop inclusive), or a comma list, in dB."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"SNR range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise UsageError(f"empty SNR range {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _profile_for(args, N=None, K=None) -> RateProfile:
    prof = parse_profile(args.profile, N)
    if K is not None and prof.K != K:
        raise ProfileError(f"profile has popcount {prof.K}, expected K={K}")
    return prof


def _bits_from_text(text: str, length: int, what: str) -> np.ndarray:
    """Binary string, or ``0x``-prefixed hex, of exactly ``length`` bits."""
    text = text.strip().replace(" ", "")
    if text.lower().startswith("0x"):
        digits = text[2:]
        try:
            bits = "".join(format(int(ch, 16), "04b") for ch in digits)
        except ValueError:
            raise ProfileError(f"{what}: invalid hex {text!r}") from None
    else:
        bits = text
    if any(ch not in "01" for ch in bits):
        raise ProfileError(f"{what}: expected 0/1 characters, got {text!r}")
    if len(bits) != length:
        raise ProfileError(f"{what}: expected {length} bits, got {len(bits)}")
    return np.array([int(ch) for ch in bits], dtype=np.uint8)


def _bitstr(a) -> str:
    return "".join(str(int(b)) for b in a)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- commands --------------------------------------------------------------

def cmd_train(args) -> int:
    code = CodeParams(args.n, args.k)
    w = as_precoder(args.w)
    cfg = TrainConfig(
        episodes=args.episodes, alpha=args.alpha, epsilon=args.epsilon,
        epsilon_final=None if args.no_decay else args.epsilon_final, gamma=args.gamma,
        base_reward=args.x, step_reward=args.z, train_ebn0_db=args.train_snr, L=args.list,
        kernel=args.kernel, seed=args.seed, freeze_noise=args.freeze_noise,
    )
    part = rm_score_partition(code.N, code.K)
    manifest = RunManifest("train", args.seed, {
        "code": {"N": code.N, "K": code.K}, "w": str(w), "trainer": asdict(cfg),
        "extract": args.extract,
    })
    determined = len(part.I_init) == code.K or len(part.I_init) + len(part.N_set) == code.K
    if determined:
        Q, report = new_q_table(code.N, code.K), None
        note = "deterministic fallback: the Reed-Muller partition fixes every index, nothing to learn"
        profile = extract_profile(Q, code.N, code.K)
    else:
        Q, report = train(code.N, code.K, w, cfg)
        note = None
        profile = extract_profile(Q, code.N, code.K)
        if args.extract == "best":
            best = report.best_profile()
            if best is None:
                raise ProfileError("no episode completed, best-episode extraction is unavailable")
            profile = best
        if report.records and report.f_rate == 1.0:
            print("warning: every episode dropped the all-zero path (F-rate 1.0); "
                  "the Q table carries no ranking signal, try a higher --train-snr or larger --list",
                  file=sys.stderr)
    if profile.K != code.K:
        raise AssertionError(f"extracted profile has {profile.K} information bits, expected {code.K}")
    record = ProfileRecord.build(profile, w, args.list, "trained", note)
    manifest.finish()
    out = Path(args.out)
    _write(out / "profile.json", json.dumps({**asdict(record), "manifest": manifest.to_dict()}, indent=2))
    _write(out / "profile.hex", record.hex + "\n")
    save_q(out / "q_table.json", Q, code.N, code.K, cfg, w, manifest.to_dict())
    _write(out / "telemetry.jsonl", "" if report is None else report.to_jsonl())
    _write(out / "manifest.json", json.dumps(manifest.to_dict(), indent=2))
    if note:
        print(note)
    print(f"profile {record.hex}  N={record.N} K={record.K} w={record.w}")
    if report is not None:
        print(f"episodes {len(report.records)}  F-rate {report.f_rate:.4f}  "
              f"greedy calls {report.greedy_calls}")
    print(f"wrote {out}/")
    return 0


def cmd_simulate(args) -> int:
    if args.frames < 1:
        raise UsageError("--frames must be at least 1")
    prof = _profile_for(args, args.n, args.k)
    code = CodeParams(prof.N, prof.K)
    w = as_precoder(args.w)
    dec = DecoderConfig(args.list, args.kernel, w)
    sim = SimConfig(tuple(parse_snr_range(args.snr)), max_frames=args.frames,
                    min_frame_errors=args.min_errors, mode=args.mode, batch_size=args.batch_size)
    manifest = RunManifest("simulate", args.seed, {
        "code": {"N": code.N, "K": code.K}, "profile_hex": prof.to_hex(), "w": str(w),
        "decoder": dec.as_dict(), "sim": {**asdict(sim), "snr_points": list(sim.snr_points)},
        "workers": args.workers,
    })
    res = run_fer(code, prof, w, dec, sim, seed=args.seed, workers=args.workers)
    manifest.finish()
    csv_text = res.to_csv()
    if args.out:
        out = Path(args.out)
        _write(out / "fer.csv", csv_text)
        _write(out / "fer.json", json.dumps({**res.to_dict(), "manifest": manifest.to_dict()}, indent=2))
        _write(out / "manifest.json", json.dumps(manifest.to_dict(), indent=2))
    sys.stdout.write(csv_text)
    return 0


def cmd_codec(args) -> int:
    prof = _profile_for(args, args.n, args.k)
    w = as_precoder(args.w)
    if args.op == "encode":
        d = _bits_from_text(args.data, prof.K, "data")
        v, u, x = pac_encode_all(d, prof, w)
        out = {"d": _bitstr(d), "v": _bitstr(v), "u": _bitstr(u), "x": _bitstr(x)}
        if args.json:
            print(json.dumps(out))
        else:
            for key, val in out.items():
                print(f"{key} {val}")
        return 0
    if args.llrs is not None:
        llrs = np.array([float(t) for t in args.llrs.replace(",", " ").split()])
        if llrs.size != prof.N:
            raise ProfileError(f"expected {prof.N} LLRs, got {llrs.size}")
    elif args.frame is not None:
        x = _bits_from_text(args.frame, prof.N, "frame")
        llrs = args.llr_scale * (1.0 - 2.0 * x.astype(np.float64))
    else:
        raise UsageError("decode needs --frame or --llrs")
    res = decode(llrs, prof, DecoderConfig(args.list, args.kernel, w))
    if args.json:
        print(json.dumps(res.to_dict()))
        return 0
    print("rank  pm            d")
    for r, c in enumerate(res.candidates, 1):
        print(f"{r:<5d} {c.pm:<13.6g} {_bitstr(c.v[prof.info])}")
    return 0


def cmd_profile(args) -> int:
    if args.op == "convert":
        prof = parse_profile(args.profile, args.n)
        if args.to == "hex":
            print(prof.to_hex())
        else:
            print(prof.to_json())
        return 0
    if args.op == "report":
        if args.n is None or args.k is None:
            raise UsageError("report needs --n and --k")
        part = rm_score_partition(args.n, args.k)
        K = args.k
        lines = [
            f"N={args.n} K={K}",
            f"t_b={part.t_b}",
            f"forced info (score > t_b): {len(part.I_init)}",
            f"boundary (score = t_b): {len(part.N_set)}",
            f"learnable: {K - len(part.I_init)} of {len(part.N_set)}",
        ]
        if args.profile:
            prof = parse_profile(args.profile, args.n)
            info = set(prof.info.tolist())
            lines.append(f"profile popcount {prof.K}, contains forced set: {part.I_init <= info}")
            if prof.K != K:
                print("\n".join(lines))
                raise ProfileError(f"profile popcount {prof.K} != K={K}")
        print("\n".join(lines))
        return 0
    a = parse_profile(args.a, args.n)
    b = parse_profile(args.b, args.n)
    if a.N != b.N:
        raise ProfileError(f"profiles have different lengths {a.N} and {b.N}")
    sa, sb = set(a.info.tolist()), set(b.info.tolist())
    only_a, only_b = sorted(sa - sb), sorted(sb - sa)
    print(f"A: N={a.N} K={a.K} {a.to_hex()}")
    print(f"B: N={b.N} K={b.K} {b.to_hex()}")
    print(f"only in A ({len(only_a)}): {only_a}")
    print(f"only in B ({len(only_b)}): {only_b}")
    print(f"symmetric difference: {len(only_a) + len(only_b)}")
    return 0


# -- parser ----------------------------------------------------------------

def _add_code(p, required=True):
    p.add_argument("--n", type=int, required=required, help="block length N (power of two)")
    p.add_argument("--k", type=int, required=required, help="information length K")


def _add_decoder(p):
    p.add_argument("--w", default="1011011", help="precoder taps as a binary string (1 = plain polar)")
    p.add_argument("--list", type=int, default=8, help="list size L")
    p.add_argument("--kernel", choices=["exact", "min-sum"], default="exact")


def build_parser() -> argparse.ArgumentParser:
    profiles = ", ".join(f"table1:{k}" for k in TABLE1)
    ap = argparse.ArgumentParser(prog="pacrl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pacrl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn a rate profile by Q-learning")
    _add_code(p)
    _add_decoder(p)
    p.add_argument("--episodes", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-snr", type=float, default=2.5, help="training Eb/N0 in dB")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--epsilon-final", type=float, default=0.01)
    p.add_argument("--no-decay", action="store_true", help="keep epsilon constant")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0, help="base reward")
    p.add_argument("--z", type=float, default=0.25, help="step reward")
    p.add_argument("--freeze-noise", action="store_true", help="reuse one noise draw for all episodes")
    p.add_argument("--extract", choices=["greedy", "best"], default="greedy")
    p.add_argument("--out", default="run-train", help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="Monte Carlo FER sweep")
    p.add_argument("--profile", required=True, help=f"hex, .json/.hex file, or one of {profiles}")
    _add_code(p, required=False)
    _add_decoder(p)
    p.add_argument("--snr", default="1:4:0.5", help="start:stop:step in dB (inclusive) or a comma list")
    p.add_argument("--frames", type=int, default=10_000, help="max frames per point")
    p.add_argument("--min-errors", type=int, default=100, help="stop a point after this many frame errors")
    p.add_argument("--batch-size", type=int, default=250)
    p.add_argument("--mode", choices=["allzero", "random"], default="allzero")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory for fer.csv / fer.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("codec", help="encode or decode a single frame")
    p.add_argument("op", choices=["encode", "decode"])
    p.add_argument("--profile", required=True)
    _add_code(p, required=False)
    _add_decoder(p)
    p.add_argument("--data", help="K data bits (binary or 0x-hex) for encode")
    p.add_argument("--frame", help="N hard-decision bits for decode")
    p.add_argument("--llrs", help="N channel LLRs, comma or space separated, for decode")
    p.add_argument("--llr-scale", type=float, default=20.0, help="LLR magnitude given to hard bits")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_codec)

    p = sub.add_parser("profile", help="convert, report on, or diff rate profiles")
    psub = p.add_subparsers(dest="op", required=True)
    q = psub.add_parser("convert")
    q.add_argument("profile")
    q.add_argument("--n", type=int)
    q.add_argument("--to", choices=["hex", "indices"], default="indices")
    q = psub.add_parser("report")
    _add_code(q, required=False)
    q.add_argument("--profile")
    q = psub.add_parser("diff")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--n", type=int)
    p.set_defaults(func=cmd_profile)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "codec" and args.op == "encode" and args.data is None:
        parser.print_usage(sys.stderr)
        print("pacrl: error: encode needs --data", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pacrl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProfileError, MazeError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"pacrl: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
