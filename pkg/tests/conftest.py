import numpy as np
import pytest

from drto.system import ChannelState, SystemParams

ACCEPTANCE_LINES: list[str] = []


def channel_from_snr(params: SystemParams, snr_st, snr_tc, frame=0) -> ChannelState:
    """Channel whose received SNRs (linear) equal ``snr_st`` / ``snr_tc``."""
    snr_st = np.broadcast_to(np.asarray(snr_st, dtype=float), (params.n_st,))
    return ChannelState(snr_st * params.noise / params.p_st_array,
                        snr_tc * params.noise / params.p_sat, frame)


def random_channel(params: SystemParams, rng, low_db=-5.0, high_db=30.0) -> ChannelState:
    snr_st = 10 ** (rng.uniform(low_db, high_db, params.n_st) / 10)
    snr_tc = 10 ** (rng.uniform(low_db, high_db) / 10)
    return channel_from_snr(params, snr_st, snr_tc)


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
