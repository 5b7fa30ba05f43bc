import pytest

from prbdim import InterferenceModel, LinkBudget, Service


@pytest.fixture
def link_budget():
    """Urban macro cell: 60 dBm EIRP, 20 MHz noise floor, 2 spatial layers."""
    return LinkBudget(tx_power_dbm=60.0, noise_power_dbm=-93.0,
                      prop_const_db=130.0, prop_const_indoor_db=166.0,
                      path_loss_exp=3.5, tx_antennas=8, rx_antennas=2,
                      prb_bandwidth_hz=180e3, cell_radius_km=0.7,
                      max_user_prbs=256)


@pytest.fixture
def noise_limited():
    return InterferenceModel.noise_limited()


@pytest.fixture
def three_region():
    return InterferenceModel.three_region(1.0, 8.0, 15.0, 0.7)


@pytest.fixture
def service_500k():
    return Service(rate_bps=500e3)
