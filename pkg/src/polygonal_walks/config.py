"""
Configuration management for the polygonal walks lab.

設定管理モジュール
"""

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


# プロジェクトルートディレクトリ
PROJECT_ROOT = Path(__file__).parent.parent.parent


class Settings(BaseSettings):
    """
    アプリケーション設定クラス

    環境変数（POLYWALK_ プレフィックス）から設定を読み込み、デフォルト値を提供する。
    """

    model_config = SettingsConfigDict(
        env_prefix="POLYWALK_", env_file=".env", extra="ignore"
    )

    debug: bool = False
    log_dir: Path = PROJECT_ROOT / "logs"

    # 並列実行
    workers: int = 1
    block_size: int = 65536

    # 分布演算
    max_support_atoms: int = 2**24
    g_max: int = 20
    float_tolerance: float = 1e-12

    # 統計
    confidence: float = 0.99

    # パラメータ構成（対数領域）
    mp_dps: int = 50
    log_slack: float = 1e-9
    params_iteration_budget: int = 64

    # サンプリング可能な最大 y
    sampling_limit: int = 2**53

    @property
    def log_file(self) -> Path:
        """ログファイルのパスを返す"""
        return self.log_dir / "polywalk.log"


# シングルトンインスタンス
settings = Settings()
