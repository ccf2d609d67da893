from hypothesis import settings

settings.register_profile("dnnflab", deadline=None)
settings.load_profile("dnnflab")

# one line per acceptance criterion, printed after the test run
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
