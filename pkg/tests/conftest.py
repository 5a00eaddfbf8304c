from __future__ import annotations

import sys
from pathlib import Path

from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from selkit.formula import And, Atom, Bottom, Iff, Implies, Knows, Not, Or, Top, modal_depth  # noqa: E402
from selkit.kripke import KripkeStructure  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ATOMS = ("p", "q")


def formulas(atoms=ATOMS, agents=2, max_depth=3, max_leaves=8):
    base = st.one_of(
        st.sampled_from([Atom(a) for a in atoms]),
        st.just(Top()),
        st.just(Bottom()),
    )

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Implies, children, children),
            st.builds(Iff, children, children),
            st.builds(Knows, st.integers(1, agents), children),
        )

    return st.recursive(base, extend, max_leaves=max_leaves).filter(lambda f: modal_depth(f) <= max_depth)


@st.composite
def structures(draw, atoms=ATOMS, agents=2, max_worlds=4):
    n = draw(st.integers(1, max_worlds))
    worlds = [f"w{k}" for k in range(n)]
    partitions = {}
    for i in range(1, agents + 1):
        labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
        blocks: dict[int, list[str]] = {}
        for w, lab in zip(worlds, labels):
            blocks.setdefault(lab, []).append(w)
        partitions[i] = list(blocks.values())
    valuation = {w: draw(st.lists(st.sampled_from(atoms), unique=True)) for w in worlds}
    return KripkeStructure.build(agents, atoms, worlds, partitions, valuation)


# acceptance summary -----------------------------------------------------------

ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    ACCEPTANCE.append((name, report.passed, f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, took in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({took})")
