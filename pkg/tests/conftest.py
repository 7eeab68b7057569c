import random

import pytest

from tashkeel.codec import COMBOS, DiacritizedWord, recompose


def random_word(rng: random.Random, alphabet: str = "ktbdrsmlnqEHfj", lo: int = 2, hi: int = 6) -> str:
    bare = "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))
    return recompose(DiacritizedWord(bare, tuple(rng.choice(COMBOS) for _ in bare)))


@pytest.fixture
def toy_plain(tmp_path):
    path = tmp_path / "toy.txt"
    path.write_text("kitaAb kut~aAb\nkataba Alwaladu Aldarsa .\n", encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
