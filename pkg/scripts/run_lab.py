#!/usr/bin/env python3
"""
多角形再帰ランダムウォーク検証ラボ

Usage:
    # パラメータ構成
    python scripts/run_lab.py --command construct-params --k-max 5 --out-dir results/params

    # 事象確率の推定と傾きのフィット
    python scripts/run_lab.py --command estimate --event box_visit --dim 2 --n-grid 16,32,64,128,256,512

    # 検証スイート（失敗があれば終了コード 1）
    python scripts/run_lab.py --command verify --suite all --replicas 1000000 --workers 8
"""

import sys
from pathlib import Path

# プロジェクトルートをパスに追加
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.polygonal_walks.runner import main

if __name__ == "__main__":
    sys.exit(main())
