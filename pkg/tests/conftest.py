import pytest

from model.geometry import NetworkGeometry, segment_plan
from model.link import LinkBudget, SnrModel
from model.units import kmh_to_ms

TABLE1_D0 = 20.0
TABLE1_SPEED = kmh_to_ms(300.0)


@pytest.fixture
def budget() -> LinkBudget:
    """Link budget with the standard simulation parameters."""
    return LinkBudget.from_parameters(
        theta_3db=30.0,
        shadowing=10.0,
        path_loss_exp=2.0,
        wavelength=0.005,
        bandwidth=2.16e9,
        noise_figure=6.0,
    )


@pytest.fixture
def zero_noise_budget() -> LinkBudget:
    # -174 + 10*log10(1e17) + 4 == 0 dBm
    return LinkBudget.from_parameters(
        theta_3db=30.0,
        shadowing=10.0,
        path_loss_exp=2.0,
        wavelength=0.005,
        bandwidth=1e17,
        noise_figure=4.0,
    )


def make_geometry(dl: float = 120.0, n_segments: int = 2, v: float = TABLE1_SPEED, d0: float = TABLE1_D0) -> NetworkGeometry:
    return NetworkGeometry(d0=d0, dl=dl, n_segments=n_segments, v=v)


@pytest.fixture
def geometry() -> NetworkGeometry:
    return make_geometry()


@pytest.fixture
def plan(geometry):
    return segment_plan(geometry)


@pytest.fixture(params=[SnrModel.PAPER_LITERAL, SnrModel.PHYSICAL], ids=lambda m: m.value)
def mode(request) -> SnrModel:
    return request.param
