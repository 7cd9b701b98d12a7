"""実行時設定（環境変数）."""

from __future__ import annotations

import os
from typing import Any, Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """WAVEMAP_ 接頭辞の環境変数から読む実行時設定.

    Attributes:
        threads: sweep と verify バッテリーのワーカー上限（None なら CPU 数）
        log_level: ルートロガーのレベル
    """

    model_config = SettingsConfigDict(env_prefix="WAVEMAP_", extra="ignore", frozen=True)

    threads: int | None = Field(default=None, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper(cls, v: Any) -> Any:
        return v.strip().upper() if isinstance(v, str) else v

    def worker_cap(self) -> int:
        """実際に使うワーカー数."""
        return self.threads if self.threads is not None else max(1, os.cpu_count() or 1)
