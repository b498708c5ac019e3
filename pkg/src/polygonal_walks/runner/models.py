"""
実行設定とマニフェストのモデル
"""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..config import settings
from ..drw import DRWRule
from ..walks import EventKind


class Command(str, Enum):
    CONSTRUCT_PARAMS = "construct-params"
    SIMULATE = "simulate"
    ESTIMATE = "estimate"
    VERIFY = "verify"


class SimMode(str, Enum):
    WALK = "walk"
    DRW = "drw"


class WalkKind(str, Enum):
    """推定に使う 1 座標の増分分布"""

    LAZY = "lazy"
    SIMPLE = "simple"
    LAW = "law"  # --law / --params-file の待ち時間分布から作る X


class Suite(str, Enum):
    LEMMAS = "lemmas"
    SCALING = "scaling"
    PARAMS = "params"
    EMBEDDED = "embedded"
    QKN2 = "qkn2"
    SERIES = "series"
    STREAMS = "streams"
    ALL = "all"


class RunConfig(BaseModel):
    """1 回の実行設定"""

    command: Command = Field(description="実行するコマンド")
    law: Optional[str] = Field(default=None, description='待ち時間分布 "p:y,..."')
    params_file: Optional[Path] = Field(default=None, description="HierarchyParams ファイル")
    dim: int = Field(default=1, ge=1, description="次元")
    n_grid: List[int] = Field(default_factory=lambda: [16, 32, 64, 128, 256], description="時刻のグリッド")
    replicas: int = Field(default=10000, ge=1, description="反復数")
    master_seed: int = Field(default=0, ge=0, lt=2**64, description="マスターシード")
    workers: int = Field(default_factory=lambda: settings.workers, ge=1, description="プロセス数")
    confidence: float = Field(default_factory=lambda: settings.confidence, gt=0, lt=1, description="信頼水準")
    out_dir: Path = Field(default=Path("results"), description="出力ディレクトリ")
    suite: Optional[Suite] = Field(default=None, description="verify のスイート")
    k_max: int = Field(default=5, description="construct-params の最大レベル")
    a_constant: Optional[float] = Field(default=None, gt=0, description="定数 A（省略時 compute_A）")
    event: EventKind = Field(default=EventKind.RETURN, description="estimate の事象")
    walk: WalkKind = Field(default=WalkKind.LAZY, description="estimate の増分分布")
    level: float = Field(default=1.0, description="level_crossing の水準")
    mode: SimMode = Field(default=SimMode.WALK, description="simulate の対象")
    steps: int = Field(default=1000, ge=1, description="simulate walk のステップ数")
    phases: int = Field(default=1000, ge=1, description="simulate drw のフェーズ数")
    rule: DRWRule = Field(default=DRWRule.FULL, description="DRW の方向転換規則")

    @field_validator("n_grid")
    @classmethod
    def _increasing(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("n_grid が空")
        if any(n < 0 for n in v):
            raise ValueError("n_grid は非負")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_grid は狭義単調増加")
        return v

    @model_validator(mode="after")
    def _per_command(self) -> "RunConfig":
        if self.command == Command.CONSTRUCT_PARAMS and self.k_max < 2:
            raise ValueError(f"k_max は 2 以上: {self.k_max}")
        if self.command == Command.VERIFY and self.suite is None:
            raise ValueError("verify には suite が必要")
        if self.law is not None and self.params_file is not None:
            raise ValueError("law と params_file は同時に指定できない")
        uses_walk = self.command == Command.ESTIMATE or (self.command == Command.SIMULATE and self.mode == SimMode.WALK)
        if uses_walk and self.walk == WalkKind.LAW and self.law is None and self.params_file is None:
            raise ValueError("walk=law には law または params_file が必要")
        if self.command == Command.ESTIMATE and self.event == EventKind.V_N and self.dim != 2:
            raise ValueError("V_n は dim = 2 のみ")
        if self.command == Command.SIMULATE and self.mode == SimMode.DRW and self.rule == DRWRule.PERPENDICULAR and self.dim < 2:
            raise ValueError("perpendicular 規則は dim >= 2")
        return self

    def echo(self) -> Dict[str, object]:
        """マニフェスト用（workers は出力に影響しないので含めない）"""
        return self.model_dump(mode="json", exclude={"workers"})


class RunManifest(BaseModel):
    """実行記録"""

    config: Dict[str, object] = Field(description="設定のエコー")
    version: str = Field(description="ラボのバージョン")
    wall_time_s: float = Field(description="所要時間（秒）")
    checks: Dict[str, bool] = Field(default_factory=dict, description="チェックごとの成否")
    digests: Dict[str, str] = Field(default_factory=dict, description="出力ファイルの SHA-256")
