import math

import numpy as np
import pytest

from drto.system import (ChannelState, DomainError, OffloadDecision, SystemParams, cost_sat_path,
                         cost_tc_path, eval_cost, rate_first_hop, rate_second_hop,
                         total_latency_energy)

from conftest import channel_from_snr, random_channel


class TestSystemParams:
    def test_defaults_match_simulation_table(self):
        p = SystemParams()
        assert p.bandwidth_total == 8e8
        assert p.p_st == (1.0,) * 5
        assert p.p_sat == 3.0
        assert p.noise == 1e-9
        assert p.task_bits == 8e8
        assert p.intensity == 10
        assert (p.f_sat, p.f_tc) == (0.4e9, 3e9)
        assert p.p_compute_sat == 0.5
        assert p.lam == 0.5

    @pytest.mark.parametrize("kwargs", [
        {"n_st": 0}, {"noise": 0.0}, {"lam": 1.5}, {"lam": -0.1},
        {"p_st": (1.0, 1.0)}, {"f_sat": -1.0}, {"task_bits": math.inf},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SystemParams(**kwargs)

    def test_scalar_power_broadcast_and_replace(self):
        p = SystemParams(n_st=3, p_st=2.0)
        assert p.p_st == (2.0, 2.0, 2.0)
        q = p.replace(n_st=4)
        assert q.p_st == (2.0,) * 4

    def test_dict_roundtrip(self):
        p = SystemParams(n_st=2, p_st=(1.0, 2.0), lam=0.3)
        assert SystemParams.from_dict(p.to_dict()) == p

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            SystemParams.from_dict({"bandwith": 1.0})


class TestChannelState:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ChannelState([1e-9, 0.0], 1e-9)
        with pytest.raises(ValueError):
            ChannelState([1e-9], math.nan)

    def test_vector(self):
        ch = ChannelState([1.0, 2.0], 3.0)
        assert ch.vector.tolist() == [1.0, 2.0, 3.0]


class TestRates:
    def test_first_hop_snr3_quarter_band(self, params):
        ch = channel_from_snr(params, 3.0, 1.0)
        assert rate_first_hop(params, ch, 0, 0.25) == pytest.approx(4e8, rel=1e-12)

    def test_first_hop_full_band_snr1(self, params):
        ch = channel_from_snr(params, 1.0, 1.0)
        assert rate_first_hop(params, ch, 2, 1.0) == pytest.approx(8e8, rel=1e-12)

    def test_first_hop_linear_in_alpha(self, params, rng):
        ch = random_channel(params, rng)
        assert rate_first_hop(params, ch, 1, 0.5) == pytest.approx(
            0.5 * rate_first_hop(params, ch, 1, 1.0), rel=1e-15)

    def test_second_hop_values(self, params):
        assert rate_second_hop(params, channel_from_snr(params, 1.0, 3.0), 0.5) == pytest.approx(8e8)
        assert rate_second_hop(params, channel_from_snr(params, 1.0, 1.0), 1.0) == pytest.approx(
            params.bandwidth_total)

    def test_second_hop_doubles_from_snr1_to_snr3(self, params):
        r1 = rate_second_hop(params, channel_from_snr(params, 1.0, 1.0), 0.3)
        r3 = rate_second_hop(params, channel_from_snr(params, 1.0, 3.0), 0.3)
        assert r3 == pytest.approx(2 * r1, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, -0.1])
    def test_zero_allocation_is_domain_error(self, params, alpha):
        ch = channel_from_snr(params, 3.0, 3.0)
        with pytest.raises(DomainError):
            rate_first_hop(params, ch, 0, alpha)
        with pytest.raises(DomainError):
            rate_second_hop(params, ch, alpha)

    def test_monotone_in_gain(self, params):
        lo = channel_from_snr(params, 2.0, 1.0)
        hi = channel_from_snr(params, 2.5, 1.0)
        assert rate_first_hop(params, hi, 0, 0.2) > rate_first_hop(params, lo, 0, 0.2)


class TestPathCosts:
    def test_sat_compute_terms(self, params):
        assert params.sat_compute_time == pytest.approx(20.0)
        assert params.p_compute_sat * params.sat_compute_time == pytest.approx(10.0)

    def test_sat_path_with_4e8_rate(self, params):
        ch = channel_from_snr(params, 3.0, 1.0)
        t, e = cost_sat_path(params, ch, 0, 0.25)
        assert t == pytest.approx(22.0)
        assert e == pytest.approx(12.0)

    def test_sat_path_fast_cpu_limit(self, params):
        fast = params.replace(f_sat=1e30)
        ch = channel_from_snr(fast, 3.0, 1.0)
        t, _ = cost_sat_path(fast, ch, 0, 0.25)
        assert t == pytest.approx(2.0, rel=1e-12)

    def test_tc_path_values(self, params):
        assert params.tc_compute_time == pytest.approx(8e9 / 3e9)
        ch = channel_from_snr(params, 1.0, 1.0)
        t, e = cost_tc_path(params, ch, 0, 1.0, 1.0)
        assert t == pytest.approx(1 + 1 + 8 / 3)
        assert e == pytest.approx(1.0 * 1 + 3.0 * 1)

    def test_tc_path_strong_backhaul_limit(self, params):
        ch = channel_from_snr(params, 1.0, 1e300)
        t, e = cost_tc_path(params, ch, 0, 1.0, 0.5)
        assert t == pytest.approx(1 + 8 / 3, rel=1e-2)
        assert e == pytest.approx(1.0, rel=1e-2)

    def test_tc_needs_forward_bandwidth(self, params):
        ch = channel_from_snr(params, 1.0, 1.0)
        with pytest.raises(DomainError):
            cost_tc_path(params, ch, 0, 0.5, 0.0)


class TestEvalCost:
    def test_single_st_on_satellite(self):
        p = SystemParams(n_st=1)
        ch = channel_from_snr(p, 3.0, 1.0)
        assert eval_cost(p, ch, [1], [0.25, 0.0]) == pytest.approx(17.0)

    def test_weight_endpoints(self, params, rng):
        ch = random_channel(params, rng)
        x = np.array([1, 0, 1, 0, 0])
        alpha = np.array([0.1, 0.1, 0.1, 0.1, 0.1, 0, 0.1, 0, 0.1, 0.1])
        latency, energy = total_latency_energy(params, ch, x, alpha)
        assert eval_cost(params.replace(lam=1.0), ch, x, alpha) == pytest.approx(latency)
        assert eval_cost(params.replace(lam=0.0), ch, x, alpha) == pytest.approx(energy)

    def test_additive_over_identical_sts(self):
        p1 = SystemParams(n_st=1)
        p2 = SystemParams(n_st=2)
        f1 = eval_cost(p1, channel_from_snr(p1, 5.0, 7.0), [0], [0.2, 0.3])
        f2 = eval_cost(p2, channel_from_snr(p2, 5.0, 7.0), [0, 0], [0.2, 0.2, 0.3, 0.3])
        assert f2 == pytest.approx(2 * f1, rel=1e-14)

    def test_missing_forward_allocation(self, params):
        ch = channel_from_snr(params, 3.0, 3.0)
        with pytest.raises(DomainError):
            eval_cost(params, ch, [0, 1, 1, 1, 1], [0.1] * 5 + [0.0] * 5)

    def test_budget_violation(self, params):
        ch = channel_from_snr(params, 3.0, 3.0)
        with pytest.raises(DomainError):
            eval_cost(params, ch, [1] * 5, [0.3] * 5 + [0.0] * 5)

    def test_decomposition_cross_check(self, params, rng):
        for _ in range(20):
            ch = random_channel(params, rng)
            x = rng.integers(0, 2, 5)
            alpha = rng.uniform(0.01, 1, 10) * np.r_[np.ones(5), 1 - x]
            alpha /= alpha.sum()
            latency, energy = total_latency_energy(params, ch, x, alpha)
            f = eval_cost(params, ch, x, alpha)
            assert f == pytest.approx(params.lam * latency + (1 - params.lam) * energy, rel=1e-12)

    def test_doubling_task_size_doubles_cost(self, params, rng):
        ch = random_channel(params, rng)
        x = np.array([0, 1, 0, 1, 1])
        alpha = np.r_[np.full(5, 0.1), 0.25, 0, 0.25, 0, 0]
        f = eval_cost(params, ch, x, alpha)
        f2 = eval_cost(params.replace(task_bits=2 * params.task_bits), ch, x, alpha)
        assert f2 == pytest.approx(2 * f, rel=1e-12)

    def test_monotone_in_alpha_and_gain(self, params, rng):
        ch = random_channel(params, rng)
        x = np.array([0, 1, 0, 1, 1])
        alpha = np.r_[np.full(5, 0.08), 0.2, 0, 0.2, 0, 0]
        base = eval_cost(params, ch, x, alpha)
        for j in (0, 3, 5, 7):
            bumped = alpha.copy()
            bumped[j] += 0.01
            assert eval_cost(params, ch, x, bumped) < base
        for n in range(5):
            h = ch.h_st.copy()
            h[n] *= 1.1
            assert eval_cost(params, ChannelState(h, ch.h_tc), x, alpha) < base

    def test_all_satellite_ignores_backhaul(self, params, rng):
        ch = random_channel(params, rng)
        x = np.ones(5, dtype=int)
        alpha = np.r_[np.full(5, 0.2), np.zeros(5)]
        other = ChannelState(ch.h_st, ch.h_tc * 17.0)
        assert eval_cost(params, ch, x, alpha) == eval_cost(params, other, x, alpha)


class TestOffloadDecision:
    def test_rejects_forward_bandwidth_for_satellite_task(self):
        with pytest.raises(ValueError):
            OffloadDecision([1, 0], [0.3, 0.3, 0.2, 0.2], 1.0)

    def test_rejects_budget_overrun(self):
        with pytest.raises(ValueError):
            OffloadDecision([0], [0.6, 0.6], 1.0)
