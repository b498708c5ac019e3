"""
ログ出力のテスト
"""

from src.polygonal_walks.logger import Logger


def test_log_dir_created_on_first_write(tmp_path):
    log_file = tmp_path / "sub" / "lab.log"
    log = Logger(log_file=log_file, debug=False)
    assert not log_file.parent.exists()

    log.debug("出力されない")
    assert not log_file.parent.exists()

    log.info("開始")
    log.error("失敗")
    lines = log_file.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0].endswith("[INFO] 開始")
    assert lines[1].endswith("[ERROR] 失敗")


def test_debug_lines_when_enabled(tmp_path, capsys):
    log = Logger(log_file=tmp_path / "lab.log", debug=True)
    log.debug("詳細")
    assert "[DEBUG] 詳細" in capsys.readouterr().out
    assert "[DEBUG] 詳細" in (tmp_path / "lab.log").read_text(encoding="utf-8")
