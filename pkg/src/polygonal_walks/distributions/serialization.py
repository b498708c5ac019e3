"""
LatticePMF のテキスト形式

1 行目: offset=<int> mode=<exact|float>
以降: 1 行 1 重み（厳密モードは num/den、浮動小数点は repr）
"""

from fractions import Fraction
from pathlib import Path
from typing import Union

from ..exceptions import InvalidDistributionError
from .lattice_pmf import LatticePMF, PMFMode


def dumps_pmf(p: LatticePMF) -> str:
    """テキスト形式に変換"""
    lines = [f"offset={p.offset} mode={p.mode.value}"]
    if p.mode == PMFMode.EXACT:
        lines.extend(f"{w.numerator}/{w.denominator}" for w in p.weights)
    else:
        lines.extend(repr(float(w)) for w in p.weights)
    return "\n".join(lines) + "\n"


def loads_pmf(text: str) -> LatticePMF:
    """
    テキスト形式から復元

    Raises:
        InvalidDistributionError: ヘッダや重みが読めない
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise InvalidDistributionError("空の pmf テキスト")
    try:
        header = dict(part.split("=", 1) for part in lines[0].split())
        offset = int(header["offset"])
        mode = PMFMode(header["mode"])
    except (KeyError, ValueError) as e:
        raise InvalidDistributionError(f"ヘッダが不正: {lines[0]!r}") from e

    parse = Fraction if mode == PMFMode.EXACT else float
    try:
        weights = [parse(line) for line in lines[1:]]
    except ValueError as e:
        raise InvalidDistributionError(f"重みが読めない: {e}") from e
    return LatticePMF.from_weights(offset, weights, mode)


def save_pmf(p: LatticePMF, path: Union[str, Path]):
    Path(path).write_text(dumps_pmf(p), encoding="utf-8")


def load_pmf(path: Union[str, Path]) -> LatticePMF:
    return loads_pmf(Path(path).read_text(encoding="utf-8"))
