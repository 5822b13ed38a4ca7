import pytest

from tmdtochain._backend import available


@pytest.fixture(params=available(), ids=lambda k: k.NAME)
def kernels(request):
    """Each usable kernel backend in turn."""
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if not module or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(module.RESULTS):
        ok, detail = module.RESULTS[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'} {detail}")
