import pytest

from skewspin import catalog
from skewspin.geometry import chart_from_frame_exprs, flat_chart
from skewspin.spinfield import SpinorSection


@pytest.fixture(scope="session")
def hyperbolic():
    """Solvable-group hyperbolic 3-space with structure constants and a
    coordinate realization, constant section, b = 1/2."""
    built = catalog.build("hyperbolic-group")
    return built


@pytest.fixture(scope="session")
def hyperbolic_grid(hyperbolic):
    return hyperbolic.chart.grid(5)


@pytest.fixture(scope="session")
def flat3():
    return flat_chart(3)


@pytest.fixture(scope="session")
def flat2():
    return flat_chart(2)


@pytest.fixture(scope="session")
def sphere():
    """Unit round sphere (curvature 1) in the stereographic chart."""
    return catalog.build("round-s2")


@pytest.fixture(scope="session")
def hyperbolic_disk():
    """Hyperbolic plane of curvature -4a^2 (a = 1/2) on the unit disk, with
    its imaginary Killing section h (1 + i(x g1 + y g2)) (1,0)."""
    a = 0.5
    coords = ("x", "y")
    finv = f"({a} * (1 - x^2 - y^2))"
    chart = chart_from_frame_exprs(
        2, coords, ((-0.7, 0.7),) * 2, ((finv, "0"), ("0", finv)), name="h2-disk"
    )
    h = "(1/sqrt(1 - x^2 - y^2))"
    psi = SpinorSection.from_exprs(chart, h, "0", f"-x*{h}", f"-y*{h}")
    return chart, psi, a
