import random

from hypothesis import settings, strategies as st

from mitl.formula import random_formula

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@st.composite
def formulas(draw, modalities: int = 3, cmax: int = 4):
    """Random formulas over {a, b} built by the package's own generator from a drawn seed."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_formula(random.Random(seed), modalities=modalities, cmax=cmax)


ACCEPTANCE = {}  # criterion number -> summary line, filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
