"""デフォルト設定.

設計意図:
- 設定ファイルで省略されたキーの既定値をセクションごとの dict で定義する。
- 環境依存・I/O・検証は行わない（loader / resolver / schemas が責務を持つ）。
- 値は ScenarioConfig のフィールド既定値と一致させる（resolver のテストで照合する）。
"""

from __future__ import annotations

# ====================
# Scenario / geometry
# ====================

SCENARIO_DEFAULTS: dict[str, object] = {
    "name": "default",
}

GEOMETRY_DEFAULTS: dict[str, object] = {
    "n": 3,
}

# ====================
# Background profiles
# ====================

S_DEFAULTS: dict[str, object] = {
    "family": "exp",
    "scale": 1.0,
    "rate": 1.0,
    "p": 2.0,
    "mu": 0.1,
    "omega": 1.0,
}

A_DEFAULTS: dict[str, object] = {
    "family": "const",
    "scale": 1.0,
    "rate": 1.0,
    "p": 2.0,
    "mu": 0.1,
    "omega": 1.0,
}

LAPSE_DEFAULTS: dict[str, object] = {
    "family": "const",
    "scale": 1.0,
    "beta": 0.2,
    "omega": 1.0,
}

# ====================
# Target / discretization
# ====================

TARGET_DEFAULTS: dict[str, object] = {
    "kind": "sphere",
    "dim": 2,
    "f": "cubic",
    "f_coeff": 1.0,
    "chart_radius": 10.0,
    # None: 族ごとの既定基点
    "base": None,
}

GRID_DEFAULTS: dict[str, object] = {
    "npts": 64,
    "fd_order": 4,
}

RUN_DEFAULTS: dict[str, object] = {
    "t_end": 10.0,
    "cfl": 0.4,
    "dt_max": 0.05,
}

INIT_DEFAULTS: dict[str, object] = {
    "epsilon": 1e-2,
    "seed": 0,
    "mode_cutoff": 3,
    "spinor": True,
}

# ====================
# Verdicts / output
# ====================

GRONWALL_DEFAULTS: dict[str, object] = {
    "fit_fraction": 0.1,
    "ratio_limit": 2.0,
}

OUTPUT_DEFAULTS: dict[str, object] = {
    "path": "runs/default",
    "stride": 10,
}

SECTION_DEFAULTS: dict[str, dict[str, object]] = {
    "scenario": SCENARIO_DEFAULTS,
    "geometry": GEOMETRY_DEFAULTS,
    "s": S_DEFAULTS,
    "a": A_DEFAULTS,
    "lapse": LAPSE_DEFAULTS,
    "target": TARGET_DEFAULTS,
    "grid": GRID_DEFAULTS,
    "run": RUN_DEFAULTS,
    "init": INIT_DEFAULTS,
    "gronwall": GRONWALL_DEFAULTS,
    "output": OUTPUT_DEFAULTS,
}
