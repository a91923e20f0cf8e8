import textwrap

import pytest

from sparcmod.sparc.base_matrix import build_flat, build_sc
from sparcmod.sparc.params import SparcParams

TINY_CONFIG = """
[code]
L = 8
M = 4
K = 2
n = 32

[base]
kind = "flat"

[channel]
ebn0_db = [8.0, 12.0]

[decoder]
max_iterations = 25

[operator]
kind = "gaussian"

[run]
trials = 4
master_seed = 11

[se]
T_max = 10
mc_samples = 200
compare_trials = 3
"""


@pytest.fixture
def flat_params():
    """A small flat-profile code."""
    return SparcParams(L=8, M=4, K=2, n=32, P=1.0, sigma2=0.1)


@pytest.fixture
def flat_base():
    return build_flat(1.0)


@pytest.fixture
def coupled_setup():
    """(1, 2, 0) coupled code with power-of-two block widths: 2 x 2 blocks, LM/C = 8."""
    base = build_sc(1, 2, 0.0, 1.0)
    params = SparcParams(L=4, M=4, K=2, n=8, P=1.0, sigma2=0.5, row_blocks=2, col_blocks=2)
    return base, params


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML config into tmp_path; output dir points inside tmp_path too."""

    def _write(text: str = TINY_CONFIG, name: str = "run.toml"):
        body = textwrap.dedent(text)
        if "[output]" not in body:
            body += f'\n[output]\ndir = "{(tmp_path / "out").as_posix()}"\n'
        path = tmp_path / name
        path.write_text(body)
        return path

    return _write
