import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacrl.core import (
    POLAR, TABLE1, W_1011011, CodeParams, PrecoderPolynomial, ProfileError, RateProfile,
    conv_precode, conv_unprecode, hex_to_profile, pac_encode, parse_profile, polar_transform,
    profile_to_hex, rate_profile_map, rm_profile, rm_score,
)
from oracles import kron_matrix, pac_generator_matrix


@pytest.mark.parametrize("j, expected", [(0, 0), (7, 3), (63, 6), (5, 2), (128, 1)])
def test_rm_score(j, expected):
    assert rm_score(j) == expected


def test_code_params():
    c = CodeParams(64, 32)
    assert (c.n, c.rate) == (6, 0.5)
    with pytest.raises(ValueError):
        CodeParams(48, 10)
    with pytest.raises(ValueError):
        CodeParams(8, 0)


def test_precoder_validation():
    assert PrecoderPolynomial.from_string("1011011") == W_1011011
    assert W_1011011.p == 7
    with pytest.raises(ValueError):
        PrecoderPolynomial((0, 1))
    with pytest.raises(ValueError):
        PrecoderPolynomial.from_string("10a")


class TestRateProfileMap:
    def test_zero_data(self):
        prof = TABLE1["64-32-pac-l8"].profile
        assert not rate_profile_map(np.zeros(32, np.uint8), prof).any()

    def test_direct_placement(self):
        prof = RateProfile.from_indices([2, 3], 4)
        assert rate_profile_map([1, 0], prof).tolist() == [0, 0, 1, 0]

    def test_all_ones_cardinality(self):
        prof = TABLE1["128-72-pac-l8"].profile
        assert rate_profile_map(np.ones(72, np.uint8), prof).sum() == 72

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rate_profile_map([1, 0, 1], RateProfile.from_indices([2, 3], 4))


class TestConvPrecode:
    def test_polar_identity(self):
        v = np.random.default_rng(0).integers(0, 2, 64).astype(np.uint8)
        assert np.array_equal(conv_precode(v, POLAR), v)

    def test_impulse_response(self):
        v = np.zeros(8, np.uint8)
        v[0] = 1
        assert conv_precode(v, W_1011011).tolist() == [1, 0, 1, 1, 0, 1, 1, 0]

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        w = np.array(W_1011011.taps)
        for _ in range(20):
            v = rng.integers(0, 2, 32)
            u = [sum(w[j] * v[i - j] for j in range(len(w)) if i - j >= 0) % 2 for i in range(32)]
            assert conv_precode(v, W_1011011).tolist() == u

    def test_linearity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            v1, v2 = rng.integers(0, 2, (2, 64)).astype(np.uint8)
            assert np.array_equal(conv_precode(v1 ^ v2, W_1011011),
                                  conv_precode(v1, W_1011011) ^ conv_precode(v2, W_1011011))

    def test_injective_via_inverse(self):
        rng = np.random.default_rng(2)
        seen = {}
        for _ in range(300):
            v = rng.integers(0, 2, 16).astype(np.uint8)
            u = conv_precode(v, W_1011011)
            assert np.array_equal(conv_unprecode(u, W_1011011), v)
            key = u.tobytes()
            assert seen.setdefault(key, v.tobytes()) == v.tobytes()


class TestPolarTransform:
    def test_small_rows(self):
        assert polar_transform([0, 1]).tolist() == [1, 1]
        assert polar_transform([0, 0, 0, 1]).tolist() == [1, 1, 1, 1]
        assert polar_transform([1, 0, 0, 0]).tolist() == [1, 0, 0, 0]

    @pytest.mark.parametrize("N", [1, 2, 4, 8, 16])
    def test_involution_exhaustive(self, N):
        for bits in itertools.product([0, 1], repeat=N):
            u = np.array(bits, np.uint8)
            assert np.array_equal(polar_transform(polar_transform(u)), u)

    @pytest.mark.parametrize("N", [8, 32, 64])
    def test_matches_kronecker_matrix(self, N):
        G = kron_matrix(N)
        rng = np.random.default_rng(N)
        for _ in range(30):
            u = rng.integers(0, 2, N).astype(np.uint8)
            assert np.array_equal(polar_transform(u), (u.astype(int) @ G) % 2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(5, 10).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=2**n, max_size=2**n)))
    def test_involution_random(self, bits):
        u = np.array(bits, np.uint8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            polar_transform([0, 1, 1])


class TestPacEncode:
    def test_zero_message(self):
        prof = TABLE1["64-32-pac-l8"].profile
        assert not pac_encode(np.zeros(32, np.uint8), prof, W_1011011).any()

    def test_polar_fallback(self):
        prof = TABLE1["64-32-polar-l8"].profile
        d = np.random.default_rng(5).integers(0, 2, 32).astype(np.uint8)
        assert np.array_equal(pac_encode(d, prof, POLAR), polar_transform(rate_profile_map(d, prof)))

    def test_rm_8_4_matrix_oracle(self):
        prof = rm_profile(8, 4)
        G = pac_generator_matrix(prof, W_1011011)
        rng = np.random.default_rng(8)
        for _ in range(50):
            d = rng.integers(0, 2, 4).astype(np.uint8)
            assert np.array_equal(pac_encode(d, prof, W_1011011), (d.astype(int) @ G) % 2)

    def test_linearity(self):
        prof = TABLE1["64-32-pac-l8"].profile
        rng = np.random.default_rng(4)
        for _ in range(50):
            d1, d2 = rng.integers(0, 2, (2, 32)).astype(np.uint8)
            assert np.array_equal(pac_encode(d1 ^ d2, prof, W_1011011),
                                  pac_encode(d1, prof, W_1011011) ^ pac_encode(d2, prof, W_1011011))


class TestHexCodec:
    def test_table1_pac_l8(self):
        prof = hex_to_profile("0015115F175717FF", 64)
        assert prof.K == 32

    def test_table1_pac_l32_contains_weight4(self):
        prof = hex_to_profile("01070737057F177F", 64)
        assert prof.K == 32
        assert all(j in prof for j in range(64) if bin(j).count("1") >= 4)

    def test_zero_string(self):
        assert hex_to_profile("0000", 16).K == 0

    def test_lowercase_accepted_uppercase_emitted(self):
        prof = hex_to_profile("0015115f175717ff", 64)
        assert profile_to_hex(prof) == "0015115F175717FF"

    def test_msb_first_layout(self):
        assert hex_to_profile("8000", 16).info.tolist() == [0]
        assert hex_to_profile("0001", 16).info.tolist() == [15]

    @pytest.mark.parametrize("bad, N", [("00G0", 16), ("000", 16), ("00000", 16)])
    def test_errors(self, bad, N):
        with pytest.raises(ProfileError):
            hex_to_profile(bad, N)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 9).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=2**n, max_size=2**n)))
    def test_round_trip(self, bits):
        prof = RateProfile(bits)
        back = hex_to_profile(profile_to_hex(prof), prof.N)
        assert back == prof and back.K == prof.K

    def test_json_round_trip(self):
        prof = TABLE1["128-72-pac-l8"].profile
        assert RateProfile.from_json(prof.to_json(), 128) == prof


def test_parse_profile_sources(tmp_path):
    assert parse_profile("table1:64-32-pac-l8") == TABLE1["64-32-pac-l8"].profile
    assert parse_profile("0015115F175717FF", 64).K == 32
    f = tmp_path / "p.json"
    f.write_text(TABLE1["64-32-pac-l8"].profile.to_json())
    assert parse_profile(str(f), 64) == TABLE1["64-32-pac-l8"].profile
    with pytest.raises(ProfileError):
        parse_profile("table1:nope")
    with pytest.raises(ProfileError):
        parse_profile("0015115F175717FF", 128)


def test_rm_profile():
    assert rm_profile(8, 4).info.tolist() == [3, 5, 6, 7]
    assert rm_profile(128, 64).K == 64
    with pytest.raises(ProfileError):
        rm_profile(64, 32)
