def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.REPORT):
        terminalreporter.write_line(module.REPORT[number])
