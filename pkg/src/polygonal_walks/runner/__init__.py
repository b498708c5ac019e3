"""
バッチ実行モジュール（設定・乱数ストリーム・並列実行・出力）
"""

from .commands import CommandResult, cmd_construct_params, cmd_estimate, cmd_simulate, estimate_over_grid
from .main import build_parser, config_from_args, main, run
from .models import Command, RunConfig, RunManifest, SimMode, Suite, WalkKind
from .pool import run_tasks
from .seeds import AuditResult, block_ranges, collision_audit, command_key, stream
from .suites import SUITES, SuiteOutput, cmd_verify

__all__ = [
    "CommandResult",
    "cmd_construct_params",
    "cmd_estimate",
    "cmd_simulate",
    "estimate_over_grid",
    "build_parser",
    "config_from_args",
    "main",
    "run",
    "Command",
    "RunConfig",
    "RunManifest",
    "SimMode",
    "Suite",
    "WalkKind",
    "run_tasks",
    "AuditResult",
    "block_ranges",
    "collision_audit",
    "command_key",
    "stream",
    "SUITES",
    "SuiteOutput",
    "cmd_verify",
]
