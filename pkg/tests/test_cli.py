import json

import numpy as np
import pytest

from pacrl.cli import EXIT_DATA, EXIT_USAGE, ProfileRecord, main, parse_snr_range
from pacrl.core import TABLE1, parse_profile, rm_profile
from pacrl.profiler import load_q, rm_score_partition

HEX64 = "0015115F175717FF"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_snr_range():
    assert parse_snr_range("1:4:0.5") == [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    assert parse_snr_range("2.5,3") == [2.5, 3.0]
    assert parse_snr_range("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]


class TestTrain:
    def test_small_run(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, stdout, _ = run(capsys, "train", "--n", "64", "--k", "32", "--w", "1011011", "--list", "8",
                              "--seed", "7", "--episodes", "200", "--out", str(out))
        assert code == 0
        rec = json.loads((out / "profile.json").read_text())
        prof = ProfileRecord(**{k: v for k, v in rec.items() if k != "manifest"}).profile()
        assert prof.K == 32 and rec["provenance"] == "trained" and rec["w"] == "1011011"
        assert rm_score_partition(64, 32).I_init <= set(prof.info.tolist())
        assert (out / "profile.hex").read_text().strip() == prof.to_hex() == rec["hex"]
        assert rec["manifest"]["seed"] == 7 and rec["manifest"]["version"]
        assert rec["manifest"]["config"]["trainer"]["episodes"] == 200
        Q, meta = load_q(out / "q_table.json")
        assert Q.shape == (33, 33, 2) and meta["manifest"]["command"] == "train"
        lines = (out / "telemetry.jsonl").read_text().splitlines()
        assert len(lines) == 200 and set(json.loads(lines[0])) >= {"episode", "F", "i", "epsilon", "cumulative_reward"}

    def test_rm_fallback(self, tmp_path, capsys):
        code, stdout, _ = run(capsys, "train", "--n", "128", "--k", "64", "--out", str(tmp_path))
        assert code == 0 and "deterministic fallback" in stdout
        rec = json.loads((tmp_path / "profile.json").read_text())
        assert parse_profile(rec["hex"], 128) == rm_profile(128, 64)

    def test_missing_k(self, tmp_path, capsys):
        code, _, err = run(capsys, "train", "--n", "64", "--out", str(tmp_path))
        assert code == EXIT_USAGE and "--k" in err

    def test_bad_code(self, tmp_path, capsys):
        code, _, err = run(capsys, "train", "--n", "60", "--k", "30", "--out", str(tmp_path))
        assert code == EXIT_DATA

    def test_nonconvergent_warning(self, tmp_path, capsys):
        code, _, err = run(capsys, "train", "--n", "64", "--k", "32", "--list", "1", "--train-snr", "-8",
                           "--episodes", "20", "--out", str(tmp_path))
        assert code == 0 and "F-rate 1.0" in err


class TestSimulate:
    ARGS = ("simulate", "--profile", HEX64, "--n", "64", "--k", "32", "--w", "1011011", "--list", "8",
            "--frames", "250", "--min-errors", "0", "--seed", "3")

    def test_seven_point_csv(self, tmp_path, capsys):
        code, stdout, _ = run(capsys, *self.ARGS, "--snr", "1:4:0.5", "--out", str(tmp_path))
        assert code == 0
        rows = stdout.strip().splitlines()
        assert rows[0] == "ebn0_db,frames,errors,fer,ci95" and len(rows) == 8
        assert (tmp_path / "fer.csv").read_text() == stdout
        obj = json.loads((tmp_path / "fer.json").read_text())
        assert obj["manifest"]["config"]["profile_hex"] == HEX64 and len(obj["points"]) == 7

    def test_byte_identical(self, tmp_path, capsys):
        _, a, _ = run(capsys, *self.ARGS, "--snr", "2,3")
        _, b, _ = run(capsys, *self.ARGS, "--snr", "2,3")
        assert a == b

    def test_table1_name(self, capsys):
        code, stdout, _ = run(capsys, "simulate", "--profile", "table1:64-32-pac-l8", "--snr", "3",
                              "--frames", "100")
        assert code == 0 and stdout.splitlines()[1].startswith("3")

    def test_zero_frames(self, capsys):
        code, _, err = run(capsys, "simulate", "--profile", HEX64, "--frames", "0")
        assert code == EXIT_USAGE

    @pytest.mark.parametrize("argv", [
        ("--profile", "00GG115F175717FF"),
        ("--profile", HEX64, "--k", "30"),
        ("--profile", HEX64, "--n", "128"),
        ("--profile", "table1:nope"),
    ])
    def test_bad_profile(self, argv, capsys):
        code, _, err = run(capsys, "simulate", *argv, "--frames", "10")
        assert code == EXIT_DATA and "data error" in err


class TestCodec:
    def test_zero_data(self, capsys):
        code, stdout, _ = run(capsys, "codec", "encode", "--profile", HEX64, "--data", "0" * 32)
        assert code == 0
        assert dict(line.split() for line in stdout.splitlines())["x"] == "0" * 64

    def test_encode_then_decode(self, capsys):
        d = "".join(map(str, np.random.default_rng(0).integers(0, 2, 32)))
        _, stdout, _ = run(capsys, "codec", "encode", "--profile", HEX64, "--data", d, "--json")
        x = json.loads(stdout)["x"]
        code, stdout, _ = run(capsys, "codec", "decode", "--profile", HEX64, "--frame", x, "--json")
        res = json.loads(stdout)
        assert code == 0 and len(res["candidates"]) == 8
        v = np.array([int(b) for b in res["candidates"][0]["v"]])
        assert "".join(map(str, v[parse_profile(HEX64).info])) == d
        pms = [c["pm"] for c in res["candidates"]]
        assert pms == sorted(pms)

    def test_decode_table(self, capsys):
        code, stdout, _ = run(capsys, "codec", "decode", "--profile", HEX64, "--llrs", ",".join(["3"] * 64),
                              "--list", "4")
        lines = stdout.splitlines()
        assert code == 0 and len(lines) == 5 and lines[1].split()[2] == "0" * 32

    def test_hex_data(self, capsys):
        code, stdout, _ = run(capsys, "codec", "encode", "--profile", HEX64, "--data", "0x00000000")
        assert code == 0

    @pytest.mark.parametrize("argv", [
        ("encode", "--data", "0101"),
        ("encode", "--data", "2" * 32),
        ("decode", "--frame", "01"),
        ("decode", "--llrs", "1,2,3"),
    ])
    def test_length_and_alphabet(self, argv, capsys):
        code, _, _ = run(capsys, "codec", argv[0], "--profile", HEX64, *argv[1:])
        assert code == EXIT_DATA

    def test_encode_needs_data(self, capsys):
        assert run(capsys, "codec", "encode", "--profile", HEX64)[0] == EXIT_USAGE


class TestProfile:
    def test_report(self, capsys):
        code, stdout, _ = run(capsys, "profile", "report", "--n", "64", "--k", "32")
        assert code == 0
        assert "t_b=3" in stdout and "forced info (score > t_b): 22" in stdout and "boundary (score = t_b): 20" in stdout

    def test_report_popcount_mismatch(self, capsys):
        code, _, _ = run(capsys, "profile", "report", "--n", "64", "--k", "31", "--profile", HEX64)
        assert code == EXIT_DATA

    def test_diff(self, capsys):
        code, stdout, _ = run(capsys, "profile", "diff", HEX64, "01070737057F177F")
        assert code == 0
        last = stdout.strip().splitlines()[-1]
        assert last.startswith("symmetric difference") and int(last.split()[-1]) > 0

    def test_identity_diff(self, capsys):
        _, stdout, _ = run(capsys, "profile", "diff", HEX64, "table1:64-32-pac-l8")
        assert stdout.strip().endswith("symmetric difference: 0")

    def test_convert_round_trip(self, tmp_path, capsys):
        _, stdout, _ = run(capsys, "profile", "convert", HEX64, "--to", "indices")
        path = tmp_path / "p.json"
        path.write_text(stdout)
        _, back, _ = run(capsys, "profile", "convert", str(path), "--n", "64", "--to", "hex")
        assert back.strip() == HEX64

    def test_all_table1_names_resolve(self, capsys):
        for name, row in TABLE1.items():
            _, stdout, _ = run(capsys, "profile", "convert", f"table1:{name}", "--to", "hex")
            assert stdout.strip() == row.hex


def test_version(capsys):
    assert main(["--version"]) == 0
