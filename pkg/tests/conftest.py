from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from wavemap_engine.contract.schemas.scenario import LapseSpec, ProfileFamily, ProfileSpec, TargetKind
from wavemap_engine.domain.rules.fields import FieldState, Grid
from wavemap_engine.domain.rules.geometry import WarpedSpacetime
from wavemap_engine.domain.rules.target import TargetChart

# 数秒で終わる最小シナリオ（n=2, 16 点）
SMALL_SCENARIO = """\
scenario.name = small
geometry.n = 2
grid.npts = 16
run.t_end = 0.5
run.dt_max = 0.1
output.stride = 2
init.mode_cutoff = 2
"""


def spacetime(
    n: int = 2,
    *,
    s: ProfileSpec | None = None,
    a: ProfileSpec | None = None,
    lapse: LapseSpec | None = None,
) -> WarpedSpacetime:
    const = ProfileSpec(family=ProfileFamily.CONST)
    return WarpedSpacetime(n=n, s=s or const, a=a or const, lapse=lapse or LapseSpec())


def zero_spinor_state(phi: np.ndarray, pi: np.ndarray, t: float = 0.0) -> FieldState:
    zeros = np.zeros(phi.shape + (2,), dtype=complex)
    return FieldState(phi=phi, pi=pi, psi=zeros, chi=zeros.copy(), t=t)


@pytest.fixture
def static_st() -> WarpedSpacetime:
    return spacetime(2)


@pytest.fixture
def de_sitter_st() -> WarpedSpacetime:
    return spacetime(2, s=ProfileSpec(family=ProfileFamily.EXP, rate=1.0))


@pytest.fixture
def oscillating_st() -> WarpedSpacetime:
    return spacetime(
        3,
        s=ProfileSpec(family=ProfileFamily.EXP, rate=0.5),
        a=ProfileSpec(family=ProfileFamily.OSC, mu=0.1, omega=1.0),
    )


@pytest.fixture
def sphere() -> TargetChart:
    return TargetChart(kind=TargetKind.SPHERE, dim=2)


@pytest.fixture
def flat() -> TargetChart:
    return TargetChart(kind=TargetKind.FLAT, dim=2)


@pytest.fixture
def grid1d() -> Grid:
    return Grid(d=1, npts=32)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """SMALL_SCENARIO に追加行を足した設定ファイルを書き出す."""

    def _write(extra: str = "", *, name: str = "scenario.cfg", base: str = SMALL_SCENARIO) -> Path:
        path = tmp_path / name
        path.write_text(base + extra, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def make_st() -> Callable[..., WarpedSpacetime]:
    return spacetime


@pytest.fixture
def map_state() -> Callable[..., FieldState]:
    """ψ ≡ 0 の状態を作る."""
    return zero_spinor_state


@pytest.fixture
def small_scenario() -> str:
    return SMALL_SCENARIO
