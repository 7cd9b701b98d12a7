"""ロギング設定（rich のコンソールハンドラ）."""

from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler

_HANDLER_NAME = "wavemap-rich"


def configure_logging(level: str | int = "INFO", *, console: Console | None = None) -> logging.Logger:
    """パッケージロガーに RichHandler を一度だけ取り付ける.

    Args:
        level: ログレベル。
        console: 出力先（None なら stderr）。

    Returns:
        パッケージのルートロガー。
    """
    logger = logging.getLogger("wavemap_engine")
    logger.setLevel(level)
    if not any(h.get_name() == _HANDLER_NAME for h in logger.handlers):
        handler = RichHandler(
            console=console or Console(stderr=True),
            show_path=False,
            rich_tracebacks=True,
            log_time_format="[%X]",
        )
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    return logger
