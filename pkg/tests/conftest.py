"""
テスト共通の設定

scripts/ と同じく、プロジェクトルートをパスに追加して src パッケージを読み込む。
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

sys.path.insert(0, str(Path(__file__).parent.parent))

# 厳密演算のケースは 1 件が重いので件数を絞る
hypothesis_settings.register_profile("lab", max_examples=40, deadline=None)
hypothesis_settings.load_profile("lab")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    path = tmp_path / "out"
    path.mkdir()
    return path
