"""設定リゾルバ（defaults + user config の合成と検証）.

設計意図:
- defaults（不変）と user config（可変）を deep merge し、ScenarioConfig で厳密検証する。
- I/O は loader に限定し、本モジュールは純粋関数として扱えるようにする。
- pydantic の検証エラーは "dotted.key: reason" 形式の ConfigurationError に変換する。
"""

from __future__ import annotations

from copy import deepcopy
from typing import Any, Mapping

from pydantic import ValidationError

from wavemap_engine.config.defaults import SECTION_DEFAULTS
from wavemap_engine.contract.errors import ConfigurationError
from wavemap_engine.contract.schemas.scenario import ScenarioConfig


def resolve_config(user_config: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """defaults と user config を合成し、検証済み ScenarioConfig を返す.

    Args:
        user_config: loader が読み込んだユーザー設定（dict 相当）。

    Returns:
        検証済み ScenarioConfig。

    Raises:
        ConfigurationError: 未知のキー、型不正、値が許容範囲外など。
    """
    if user_config is None:
        user_config_dict: dict[str, Any] = {}
    else:
        if not isinstance(user_config, Mapping):
            raise ConfigurationError("user_config must be a mapping.")
        user_config_dict = dict(user_config)

    merged = _deep_merge(deepcopy(SECTION_DEFAULTS), user_config_dict)
    try:
        return ScenarioConfig.model_validate(merged)
    except ValidationError as e:
        messages = [_format_error(err) for err in e.errors()]
        raise ConfigurationError("; ".join(messages), context={"errors": len(messages)}) from e


def _deep_merge(base: dict[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """辞書を deep merge する（override が優先）.

    - dict 同士は再帰的に merge
    - それ以外（list/str/int/...）は override で上書き
    """
    result = dict(base)
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, Mapping):
            result[key] = _deep_merge(result[key], value)
        elif isinstance(value, Mapping):
            result[key] = dict(value)
        else:
            result[key] = value
    return result


def _format_error(err: Mapping[str, Any]) -> str:
    loc = ".".join(str(part) for part in err.get("loc", ()))
    msg = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
    return f"{loc}: {msg}" if loc else msg
