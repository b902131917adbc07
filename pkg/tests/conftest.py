"""Shared fixtures: device presets, prebuilt spectra, golden-file helper,
and the acceptance-criteria summary printed after the run."""

from pathlib import Path

import pytest

import biphoton as bp

GOLDEN_DIR = Path(__file__).parent / "golden"

_acceptance_results = []


def pytest_addoption(parser):
    parser.addoption(
        "--bless",
        action="store_true",
        default=False,
        help="regenerate golden files from current outputs",
    )


@pytest.fixture(scope="session")
def pump():
    return bp.paper_pump()


@pytest.fixture(scope="session")
def model():
    return bp.paper_device()


@pytest.fixture(scope="session")
def js256(pump, model):
    return bp.build_joint_spectrum(pump, model, bp.GridSpec(256, 5.0))


@pytest.fixture(scope="session")
def js512(pump, model):
    return bp.build_joint_spectrum(pump, model, bp.GridSpec(512, 5.0))


@pytest.fixture(scope="session")
def cavity_js(pump, model):
    wg = bp.paper_waveguide()
    grid = bp.cavity_grid(pump, model, wg)
    return bp.build_joint_spectrum(pump, model, grid)


@pytest.fixture
def golden_check(request):
    """Compare text against tests/golden/<name>; --bless rewrites it."""

    def check(name: str, text: str):
        path = GOLDEN_DIR / name
        if request.config.getoption("--bless"):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            pytest.skip(f"blessed golden file {name}")
        assert path.exists(), f"golden file {name} missing; run pytest --bless"
        expected = path.read_text(encoding="utf-8")
        assert text == expected, f"output differs from golden file {name}"

    return check


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            label = marker.kwargs.get("label") or (
                marker.args[0] if marker.args else item.name
            )
            _acceptance_results.append((label, rep.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in _acceptance_results:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {label}: {status}")
