"""
多角形再帰ランダムウォーク検証ラボ
Polygonal Walks Lab - simulation and exact verification
"""

__version__ = "1.0.0"
