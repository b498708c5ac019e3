"""
ブロック単位の並列実行

各タスクはブロック番号から自分のストリームを導出するので、ワーカー数や
スケジューリングは結果に影響しない。結果はタスク順で返す。
"""

import multiprocessing
from typing import Callable, List, Optional, Sequence, TypeVar

from ..config import settings
from ..logger import logger

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(func: Callable[[T], R], tasks: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    tasks を func で処理する

    Args:
        func: モジュールのトップレベル関数（pickle 可能であること）
        tasks: タスク列
        workers: プロセス数（省略時 settings.workers、1 ならインライン実行）

    Returns:
        tasks と同じ順序の結果
    """
    workers = workers or settings.workers
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    logger.debug(f"{len(tasks)} タスクを {workers} プロセスで実行")
    with multiprocessing.Pool(min(workers, len(tasks))) as pool:
        return pool.map(func, tasks)
