_results: dict[int, list[bool]] = {}
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return None
    num, title = mark.args
    _titles[num] = title
    _results.setdefault(num, []).append(call.excinfo is None)
    return None


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        status = "PASS" if all(_results[num]) else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2} {status}  {_titles[num]}")
