"""wavemap-engine における例外定義モジュール.

Purpose:
    - 設定不備・呼び出し契約違反・数値破綻を明確に区別する（原因特定を容易にする）
    - パイプライン制御（設定エラーで終了コード 1 / 数値破綻で終了コード 2）を severity で明示する

Notes:
    - 例外メッセージは英語（ログ/CI の一貫性）。
    - severity="abort" はシミュレーションの打ち切り（最後の正常時刻を context に残す）を意味する。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

ErrorSeverity = Literal["error", "abort", "warning", "fatal"]


@dataclass(eq=False, slots=True)
class WaveMapEngineError(Exception):
    """プロジェクト共通の基底例外.

    Attributes:
        - message: 例外メッセージ（英語）
        - code: 機械判定用の短い識別子
        - severity: パイプライン上の重要度（error/abort/warning/fatal）
        - context: 追加情報（t, step, key, scenario など任意）
    """

    message: str
    code: str = "WAVEMAP_ERROR"
    severity: ErrorSeverity = "error"
    context: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        return self.message

    def with_context(self, **kwargs: Any) -> "WaveMapEngineError":
        """コンテキストを追加した同型例外を返す（例外自体は raise しない）."""
        merged = dict(self.context)
        merged.update(kwargs)
        clone = Exception.__new__(type(self))
        WaveMapEngineError.__init__(
            clone,
            message=self.message,
            code=self.code,
            severity=self.severity,
            context=merged,
        )
        return clone


class ContractError(WaveMapEngineError):
    """呼び出し契約違反（開発者/利用者の誤用）.

    Examples:
        - 配列形状が FieldState の約束と合わない
        - k が許容範囲外
        - F_r(0) > 1 の系列で Grönwall 定数をフィットしようとした
    """

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="CONTRACT_ERROR",
            severity="fatal",
            context=dict(context or {}),
        )


class ConfigurationError(WaveMapEngineError):
    """設定不備（起動前に検出したい種類のエラー）."""

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="CONFIGURATION_ERROR",
            severity="fatal",
            context=dict(context or {}),
        )


class ProfileDomainError(WaveMapEngineError):
    """解析プロファイルの値域違反（s ≤ 0, a ≤ 0, N ≤ 0, 共形因子 ≤ 0 など）."""

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="PROFILE_DOMAIN_ERROR",
            severity="error",
            context=dict(context or {}),
        )


class ChartExitError(WaveMapEngineError):
    """写像が座標チャートの許容領域を出た（小データ仮定の破綻）.

    Policy:
        - 発展中に発生した場合は run を打ち切る（severity=abort）。
    """

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="CHART_EXIT",
            severity="abort",
            context=dict(context or {}),
        )


class NumericalAbortError(WaveMapEngineError):
    """NaN/Inf の検出など、数値的に継続不能な状態."""

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="NUMERICAL_ABORT",
            severity="abort",
            context=dict(context or {}),
        )


class CFLViolationError(WaveMapEngineError):
    """要求された時間刻みが CFL 上限を超えている."""

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None) -> None:
        super().__init__(
            message=message,
            code="CFL_VIOLATION",
            severity="error",
            context=dict(context or {}),
        )
