import random

import pytest

from holdout_kfold.dataset import from_rows


def make_rows(n, seed=0, separable=False, classes=("neg", "pos")):
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        x = rng.gauss(0.0, 1.0)
        if separable:
            label = classes[1] if x > 0 else classes[0]
            # open a gap so unseen points cannot fall between the classes
            x += 3.0 if x > 0 else -3.0
        else:
            label = classes[1] if x + rng.gauss(0.0, 0.8) > 0.3 else classes[0]
        rows.append([f"r{i:05d}", f"{x:.6f}", rng.choice(["a", "b", "c"]), label])
    return rows


def make_dataset(n, seed=0, **kw):
    return from_rows(["id", "x", "c", "label"], make_rows(n, seed, **kw))


@pytest.fixture
def small():
    return make_dataset(40, seed=3)


@pytest.fixture
def separable():
    return make_dataset(60, seed=5, separable=True)


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


_ACCEPTANCE: dict[str, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE, key=int):
        title, outcome, duration = _ACCEPTANCE[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title} ({duration:.2f}s)")
