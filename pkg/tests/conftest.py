import os

import pytest
from hypothesis import HealthCheck, settings

from rfso.channel import make_gamma_gamma, make_k_distribution, malaga_from_budget

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def fig2_params():
    """alpha=10, beta=5, rho=0.5, b0=0.25, Omega=1-2b0."""
    return malaga_from_budget(10.0, 5, 0.5, 0.25)


@pytest.fixture(scope="session")
def fig5_params():
    return malaga_from_budget(10.0, 5, 0.75, 0.25)


@pytest.fixture(scope="session")
def k_params():
    return make_k_distribution(10.0, 0.25)


@pytest.fixture(scope="session")
def gg_params():
    return make_gamma_gamma(4.2, 2)


# criterion number -> list of (part, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one part of an acceptance criterion and return whether it passed."""

    def record(criterion: int, part: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        return bool(passed)

    return record


def acceptance_lines() -> list[str]:
    lines = []
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        body = "; ".join(f"{part} {'ok' if ok else 'FAILED'} ({detail})" for part, ok, detail in parts)
        lines.append(f"criterion {n}: {verdict} | {body}")
    return lines


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines():
        terminalreporter.write_line(line)
