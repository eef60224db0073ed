from pathlib import Path

import numpy as np
import pytest

from ctsmooth.tables import CountTable, ProbTable, parse_prob_table

DATA = Path(__file__).parent / "data"

TABLE_IDS = ("table1a", "table1b", "table1c", "table2a", "table2b", "table2c")


def load_truth(name: str) -> ProbTable:
    return parse_prob_table((DATA / f"{name}.csv").read_text())


def counts_x1000(name: str) -> CountTable:
    return CountTable.from_array(np.round(load_truth(name).as_matrix() * 1000).astype(np.int64))


def random_interior(rng, r, c, floor=0.02):
    """Random table with every cell at least ``floor / (r c)``."""
    p = rng.dirichlet(np.ones(r * c) * 2.0)
    p = (1 - floor) * p + floor / (r * c)
    return ProbTable.from_array(p.reshape(r, c))


@pytest.fixture
def tables():
    return {name: load_truth(name) for name in TABLE_IDS}
