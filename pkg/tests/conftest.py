import functools

import pytest

from kstab_mirror import catalog

_RESULTS: dict[str, list[tuple[bool, str]]] = {}


@functools.lru_cache(maxsize=None)
def built(name, **params):
    return catalog.make(name, **params)


def cached(name, **params):
    """catalog.make with memoisation (charts cache their derivatives)."""
    return built(name, **{k: params[k] for k in sorted(params)})


@pytest.fixture
def record():
    def _record(criterion, ok, detail=""):
        _RESULTS.setdefault(str(criterion), []).append((bool(ok), detail))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda s: int(s)):
        parts = _RESULTS[key]
        ok = all(p for p, _ in parts)
        details = "; ".join(d for p, d in parts if d)
        tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {details}")
