import pytest

from wavespin import packet, well

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion (printed in the summary)."""

    def record(label: str, passed: bool, detail: str = ""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert passed, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def well10():
    return well.solve_ground(well.WellConfig(10e-9))


@pytest.fixture(scope="session")
def packet10():
    return packet.prepare(packet.PacketConfig(10e-9))
