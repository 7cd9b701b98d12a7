"""
src/main.py

リポジトリ直下（src/）での実行エントリポイント。

設計意図:
- 入口を 1 箇所に固定し、実体は wavemap_engine.cli.main の typer アプリに委ねる
- `python src/main.py simulate scenario.cfg` でもインストール済みの `wavemap` と同じ挙動にする

注意:
- スクリプト実行では import 解決が壊れやすいため、本ファイルの親（src/）を sys.path に追加する。
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Sequence


def run(argv: Sequence[str] | None = None) -> int:
    """
    共通実行関数（CLI/バッチから利用可能な薄い入口）。

    Args:
        argv: コマンドライン引数（sys.argv[1:] 相当）。None の場合は sys.argv[1:] を使用。

    Returns:
        終了コード（0 正常 / 1 設定不備 / 2 数値破綻による打ち切り）。
    """
    if argv is None:
        argv = sys.argv[1:]

    src = str(Path(__file__).resolve().parent)
    if src not in sys.path:
        sys.path.insert(0, src)

    from wavemap_engine.cli.main import app

    try:
        # standalone_mode=False では typer.Exit の終了コードが戻り値になる
        result = app(args=list(argv), prog_name="wavemap", standalone_mode=False)
    except Exception as e:  # noqa: BLE001
        exit_code = getattr(e, "exit_code", None)
        if isinstance(exit_code, int):
            return exit_code
        raise
    return int(result) if isinstance(result, int) else 0


def main() -> None:
    """スクリプト実行用 main。"""
    exit_code = run()
    raise SystemExit(exit_code)


if __name__ == "__main__":
    main()
