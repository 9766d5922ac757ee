import pytest
from hypothesis import settings

from hyperkey import catalog

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def receptacle():
    return catalog.receptacle()


@pytest.fixture
def scoop():
    return catalog.scoop()


@pytest.fixture
def path3():
    return catalog.motivating_pin()


@pytest.fixture
def triangle():
    return catalog.triangle()


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    def record(number: int, ok: bool, text: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
        ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
