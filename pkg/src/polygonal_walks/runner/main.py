"""
コマンドライン本体

終了コード: 0 成功 / 1 検証失敗・構成失敗 / 2 設定・使い方の誤り
"""

import argparse
import hashlib
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from .. import __version__
from ..drw import DRWRule
from ..exceptions import PolywalkError
from ..logger import logger
from ..walks import EventKind
from .commands import CommandResult, cmd_construct_params, cmd_estimate, cmd_simulate, write_json
from .models import Command, RunConfig, RunManifest, SimMode, Suite, WalkKind
from .suites import cmd_verify

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMANDS = {
    Command.CONSTRUCT_PARAMS: cmd_construct_params,
    Command.SIMULATE: cmd_simulate,
    Command.ESTIMATE: cmd_estimate,
    Command.VERIFY: cmd_verify,
}


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"整数のカンマ区切りが必要: {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="多角形再帰ランダムウォーク検証ラボ",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用例:
  # パラメータ構成（k_max=5）
  python scripts/run_lab.py --command construct-params --k-max 5

  # 1 次元遅延ウォークの原点回帰確率と傾き
  python scripts/run_lab.py --command estimate --event return --n-grid 16,32,64,128

  # 3 次元の線分ヒット（10^7 反復、8 プロセス）
  python scripts/run_lab.py --command estimate --event segment_hit --dim 3 --replicas 10000000 --workers 8

  # DRW のトレース
  python scripts/run_lab.py --command simulate --mode drw --dim 2 --law 3/4:1,1/4:3 --phases 1000

  # 補題スイート
  python scripts/run_lab.py --command verify --suite lemmas
        """,
    )
    parser.add_argument("--command", required=True, choices=[c.value for c in Command], help="コマンド")
    parser.add_argument("--law", help='待ち時間分布 "p:y,..."（例: 3/4:1,1/4:3）')
    parser.add_argument("--params-file", type=Path, help="construct-params が書いた params.json")
    parser.add_argument("--dim", type=int, help="次元")
    parser.add_argument("--n-grid", type=_int_list, help="時刻のグリッド（カンマ区切り）")
    parser.add_argument("--replicas", type=int, help="反復数")
    parser.add_argument("--seed", type=int, help="マスターシード（64 ビット）")
    parser.add_argument("--workers", type=int, help="プロセス数（省略時 POLYWALK_WORKERS）")
    parser.add_argument("--confidence", type=float, help="信頼水準")
    parser.add_argument("--out-dir", type=Path, help="出力ディレクトリ")
    parser.add_argument("--suite", choices=[s.value for s in Suite], help="verify のスイート")
    parser.add_argument("--k-max", type=int, help="construct-params の最大レベル")
    parser.add_argument("--a-constant", type=float, help="定数 A（省略時 compute_A）")
    parser.add_argument("--event", choices=[e.value for e in EventKind], help="estimate の事象")
    parser.add_argument("--walk", choices=[w.value for w in WalkKind], help="増分分布 (lazy/simple/law)")
    parser.add_argument("--level", type=float, help="level_crossing の水準")
    parser.add_argument("--mode", choices=[m.value for m in SimMode], help="simulate の対象")
    parser.add_argument("--steps", type=int, help="simulate walk のステップ数")
    parser.add_argument("--phases", type=int, help="simulate drw のフェーズ数")
    parser.add_argument("--rule", choices=[r.value for r in DRWRule], help="DRW の方向転換規則")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    指定されたフラグだけで RunConfig を作る

    Raises:
        ValidationError: 値またはフラグの組み合わせが不正
    """
    fields = vars(args).copy()
    fields["master_seed"] = fields.pop("seed")
    return RunConfig.model_validate({k: v for k, v in fields.items() if v is not None})


def file_digests(paths: Sequence[Path], root: Path) -> Dict[str, str]:
    """出力ファイルの SHA-256（キーは root からの相対パス）"""
    digests = {}
    for path in sorted(set(paths)):
        digests[str(path.relative_to(root))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


def write_manifest(config: RunConfig, result: CommandResult, wall_time: float) -> Path:
    manifest = RunManifest(
        config=config.echo(),
        version=__version__,
        wall_time_s=round(wall_time, 3),
        checks=result.checks,
        digests=file_digests(result.outputs, config.out_dir),
    )
    path = config.out_dir / "run_manifest.json"
    write_json(manifest.model_dump(mode="json"), path)
    return path


def run(config: RunConfig) -> int:
    """
    1 コマンドを実行してマニフェストを書き、終了コードを返す
    """
    config.out_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"{config.command.value}: seed={config.master_seed}, workers={config.workers}, out={config.out_dir}")
    started = time.perf_counter()
    result = COMMANDS[config.command](config)
    manifest = write_manifest(config, result, time.perf_counter() - started)
    logger.info(f"マニフェスト: {manifest}")

    failed = [name for name, ok in result.checks.items() if not ok]
    if failed:
        for name in failed:
            logger.error(f"失敗: {name}")
        return EXIT_FAILED
    logger.success(f"{config.command.value} 完了")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as e:
        for err in e.errors():
            field = ".".join(str(v) for v in err["loc"]) or "config"
            logger.error(f"設定エラー: {field}: {err['msg']}")
        return EXIT_USAGE

    try:
        return run(config)
    except ValueError as e:
        # ConfigError / PreconditionViolation などの入力誤りも ValueError
        logger.error(f"入力エラー: {e}")
        return EXIT_USAGE
    except PolywalkError as e:
        logger.error(f"実行エラー: {e}")
        return EXIT_FAILED
