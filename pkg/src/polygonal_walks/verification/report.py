"""
チェック結果のレポート出力（CSV 行 + JSON サマリ）
"""

import csv
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from pydantic import BaseModel, Field

CHECK_COLUMNS = ["check_name", "param_summary", "lhs", "rhs", "margin", "holds"]


class CheckRow(BaseModel):
    """1 件のチェック結果"""

    check_name: str = Field(description="チェック名")
    param_summary: str = Field(description="パラメータの要約")
    lhs: Optional[float] = Field(default=None, description="左辺")
    rhs: Optional[float] = Field(default=None, description="右辺")
    margin: Optional[float] = Field(default=None, description="余裕（正なら成立側）")
    holds: bool = Field(description="成立したか")

    @classmethod
    def inequality(
        cls, check_name: str, param_summary: str, lhs, rhs, holds: bool, larger_is_lhs: bool = True
    ) -> "CheckRow":
        """lhs >= rhs（larger_is_lhs=False なら lhs <= rhs）の行"""
        lhs_f, rhs_f = float(lhs), float(rhs)
        margin = lhs_f - rhs_f if larger_is_lhs else rhs_f - lhs_f
        return cls(
            check_name=check_name, param_summary=param_summary, lhs=lhs_f, rhs=rhs_f, margin=margin, holds=holds
        )


class CheckSummary(BaseModel):
    """レポートの JSON サマリ"""

    suite: str = Field(description="スイート名")
    master_seed: int = Field(description="マスターシード")
    replicas: Dict[str, int] = Field(default_factory=dict, description="チェックごとの反復数")
    total: int = Field(description="チェック数")
    failed: int = Field(description="失敗数")
    failures: List[str] = Field(default_factory=list, description="失敗したチェック")


def format_number(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return repr(float(value))


def write_check_csv(rows: Iterable[CheckRow], path: Union[str, Path]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CHECK_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.check_name,
                    row.param_summary,
                    format_number(row.lhs),
                    format_number(row.rhs),
                    format_number(row.margin),
                    "true" if row.holds else "false",
                ]
            )


def summarize(suite: str, master_seed: int, rows: List[CheckRow], replicas: Optional[Dict[str, int]] = None) -> CheckSummary:
    failures = [f"{r.check_name}[{r.param_summary}]" for r in rows if not r.holds]
    return CheckSummary(
        suite=suite,
        master_seed=master_seed,
        replicas=dict(sorted((replicas or {}).items())),
        total=len(rows),
        failed=len(failures),
        failures=failures,
    )


def write_summary_json(summary: BaseModel, path: Union[str, Path]):
    Path(path).write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
