import math

import pytest

from cvqkdsec import (
    ChannelModel,
    ConstellationSpec,
    MeasurementSpec,
    build_grid,
    epsilon_a,
)

# Reference working point used throughout: N = 3 mean photons, range at six
# standard deviations, 6 bits per quadrature, 10% transmissivity, 1e-4
# excess noise.
N_REF = 3.0
R_A_REF = 6.0 * math.sqrt(3.0)
ETA_REF = 0.1
U_REF = 1.0e-4


@pytest.fixture(scope="session")
def ref_spec():
    return ConstellationSpec(N=N_REF, R_A=R_A_REF, b=6)


@pytest.fixture(scope="session")
def ref_grid(ref_spec):
    return build_grid(ref_spec)


@pytest.fixture(scope="session")
def ref_channel():
    return ChannelModel.from_excess_noise(ETA_REF, U_REF)


@pytest.fixture(scope="session")
def sigma_b():
    # detected per-quadrature std: sqrt(eta N + u + 1)
    return math.sqrt(ETA_REF * N_REF + U_REF + 1.0)


@pytest.fixture(scope="session")
def ref_meas(sigma_b):
    m = 6.0 * sigma_b
    return MeasurementSpec(M=m, R_B=m, b_B=6)


@pytest.fixture(scope="session")
def ref_eps_a(ref_grid):
    return epsilon_a(ref_grid)
