import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wvote.core import (BlockValidity, Committee, ConfigError, Member, Outcome, WelfareParams,
                        as_votes, check_profile, clamp_profile)


class TestClampProfile:
    def test_cap_binds(self):
        assert clamp_profile(1.2, 0.5, 1e-5) == 1 - 1e-5

    def test_floor_binds(self):
        assert clamp_profile(0.3, 0.5, 1e-5) == 0.5

    def test_identity_inside(self):
        assert clamp_profile(0.9, 0.5, 1e-5) == 0.9

    @given(st.floats(allow_nan=False, allow_infinity=True),
           st.floats(min_value=1e-15, max_value=0.49))
    def test_output_is_valid_profile(self, raw, margin):
        p = clamp_profile(raw, 0.5, margin)
        assert 0.5 <= p <= 1 - margin
        assert check_profile(p, margin) == p


class TestVotes:
    def test_encodings(self):
        assert int(BlockValidity.VALID) == 1 and int(BlockValidity.INVALID) == -1
        assert int(Outcome.APPROVE) == 1 and int(Outcome.REJECT) == -1

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty committee"):
            as_votes([])

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError):
            as_votes([1, 0, -1])

    def test_round_trip(self):
        np.testing.assert_array_equal(as_votes([1, -1, 1]), [1, -1, 1])


class TestWelfareParams:
    def test_defaults(self):
        wp = WelfareParams()
        assert (wp.alpha, wp.loss_reject_valid, wp.loss_accept_invalid) == (0.5, 0.01, 12.0)

    def test_bias_zero_when_symmetric(self):
        assert WelfareParams(0.5, 1.0, 1.0).bias == 0.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ConfigError):
            WelfareParams(alpha=alpha)

    def test_nonpositive_loss(self):
        with pytest.raises(ConfigError):
            WelfareParams(loss_reject_valid=0.0)

    def test_warns_when_losses_inverted(self):
        with pytest.warns(UserWarning):
            WelfareParams(0.5, 12.0, 0.01)

    def test_no_warning_by_default(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            WelfareParams()


class TestCommittee:
    def test_from_profiles(self):
        c = Committee.from_profiles([0.9, 0.6], slot=3)
        assert c.n == 2 and c.slot == 3
        np.testing.assert_array_equal(c.ids, [0, 1])
        np.testing.assert_allclose(c.profiles, [0.9, 0.6])
        np.testing.assert_allclose(c.stakes, [1.0, 1.0])

    def test_duplicate_ids(self):
        with pytest.raises(ConfigError, match="duplicate"):
            Committee(0, (Member(1, 0.9), Member(1, 0.8)))

    @pytest.mark.parametrize("p", [0.49, 1.0, 0.999999])
    def test_out_of_range_profile(self, p):
        with pytest.raises(ConfigError):
            Committee.from_profiles([0.9, p])

    def test_empty(self):
        with pytest.raises(ConfigError):
            Committee(0, ())

    def test_negative_stake(self):
        with pytest.raises(ConfigError):
            Committee(0, (Member(0, 0.9, -1.0),))

    def test_immutable(self):
        c = Committee.from_profiles([0.9])
        with pytest.raises(AttributeError):
            c.slot = 2
