"""設定ファイルローダ（I/O 境界）.

設計意図:
- ファイル読み込みと構文解析に責務を限定する。既定値の合成と検証は resolver/schemas に寄せる。
- 既定形式はフラットな `section.key = value` 行（`#` 以降はコメント）。.json は入れ子 dict として読む。
- 値はスカラーへ軽く変換するだけで、型の最終判断は pydantic に任せる。
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

from wavemap_engine.contract.errors import ConfigurationError

_KEY_PATTERN = re.compile(r"^[a-z_][a-z0-9_]*(\.[a-z_][a-z0-9_]*)+$")
_INT_PATTERN = re.compile(r"^[+-]?\d+$")
_FLOAT_PATTERN = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def load_config(path: str | Path) -> dict[str, Any]:
    """設定ファイルを読み込む（フラット key=value / JSON）.

    Args:
        path: 設定ファイルパス。

    Returns:
        セクションごとに入れ子にした設定 dict。

    Raises:
        ConfigurationError: ファイルが存在しない、形式不正、読み込み失敗など。
    """
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"Config file not found: {p}")
    if not p.is_file():
        raise ConfigurationError(f"Config path is not a file: {p}")

    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigurationError(f"Config file is not valid UTF-8: {p}") from e
    except OSError as e:
        raise ConfigurationError(f"Failed to read config: {p}") from e

    if p.suffix.lower() == ".json":
        return _load_json(text)
    return parse_flat_text(text)


def _load_json(text: str) -> dict[str, Any]:
    """JSON を読み込む."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid JSON: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError("Config root must be a JSON object (dict).")
    return data


def parse_flat_text(text: str) -> dict[str, Any]:
    """`section.key = value` 行の列を入れ子 dict へ変換する.

    Raises:
        ConfigurationError: 行の構文不正、キーの重複（いずれも 1 始まりの行番号付き）。
    """
    result: dict[str, Any] = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"Line {lineno}: expected 'key = value'", context={"line": lineno})
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY_PATTERN.match(key):
            raise ConfigurationError(f"Line {lineno}: invalid key '{key}'", context={"line": lineno, "key": key})
        if not value:
            raise ConfigurationError(f"Line {lineno}: missing value for '{key}'", context={"line": lineno, "key": key})
        if key in seen:
            raise ConfigurationError(
                f"Line {lineno}: duplicate key '{key}' (first set on line {seen[key]})",
                context={"line": lineno, "key": key},
            )
        seen[key] = lineno
        _insert(result, key.split("."), _coerce(value), lineno)
    return result


def _insert(target: dict[str, Any], parts: list[str], value: Any, lineno: int) -> None:
    node = target
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"Line {lineno}: '{part}' is both a value and a section", context={"line": lineno})
        node = child
    if isinstance(node.get(parts[-1]), dict):
        raise ConfigurationError(f"Line {lineno}: '{parts[-1]}' is both a value and a section", context={"line": lineno})
    node[parts[-1]] = value


def _coerce(value: str) -> Any:
    """数値とカンマ区切りの列だけを変換する（on/off 等の真偽値は pydantic が解釈する）."""
    if "," in value:
        return [_coerce_scalar(item.strip()) for item in value.split(",") if item.strip()]
    return _coerce_scalar(value)


def _coerce_scalar(value: str) -> Any:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    if _INT_PATTERN.match(value):
        return int(value)
    if _FLOAT_PATTERN.match(value):
        return float(value)
    return value
