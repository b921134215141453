import sys

from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=200,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("repo")


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criterion lines collected during the run."""
    lines = []
    for mod in list(sys.modules.values()):
        lines.extend(getattr(mod, "ACCEPTANCE_LINES", {}).items() if hasattr(mod, "ACCEPTANCE_LINES") else [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
