"""
階層パラメータ (p_k, y_k, c_k) の再帰構成と検証

制約（k >= 2）:
    ck      c_k > k^8/p_k^2                    （最小の整数 c_k = floor(k^8/p_k^2)+1）
    pest    y_k √p_k >= max(12 c_k, y_{k-1} √p_{k-1})
    pkhalf  p_{k+1} <= p_k/2
    lest1   1/(2k^4) <= (A/(p_k y_k))^2 log(1/p_{k+1}) <= 1/k^4

y_3 以降は天文学的な大きさになるため、全ての大きさを LogForm（対数領域）で保持し、
2^53 以下に収まる値だけ厳密な整数・分数も併記する。
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import mpmath
from pydantic import BaseModel, Field

from ..config import settings
from ..exceptions import InfeasibleWindowError, PreconditionViolation, SamplingRangeError
from .constants import compute_A
from .log_magnitude import LogForm, form_max, log_of_scale
from .waiting_time import WaitingTimeLaw

CONSTRAINTS = ("ck", "pest", "pkhalf", "lest1_lower", "lest1_upper")


@dataclass(frozen=True)
class LevelRecord:
    """
    レベル k の記録

    log_inv_p は L_k = log(1/p_k)。halvings は p_k = p_{k-1}/2^halvings の指数。
    """

    k: int
    log_inv_p: LogForm
    log_y: LogForm
    log_c: Optional[LogForm] = None
    p_exact: Optional[Fraction] = None
    y_exact: Optional[int] = None
    c_exact: Optional[int] = None
    halvings: Optional[int] = None


@dataclass(frozen=True)
class HierarchyParams:
    """構成済みパラメータ（レベル 1..k_max と L_{k_max+1}）"""

    A: mpmath.mpf
    levels: Tuple[LevelRecord, ...]
    log_inv_p_next: LogForm
    scales: Dict[int, LogForm] = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> LevelRecord:
        return self.levels[k - 1]

    def log_inv_p(self, k: int) -> LogForm:
        """L_k（k = k_max+1 も可）"""
        if k == self.k_max + 1:
            return self.log_inv_p_next
        return self.level(k).log_inv_p


@dataclass(frozen=True)
class ConstraintCheck:
    k: int
    constraint: str
    slack: mpmath.mpf
    holds: bool


@dataclass
class ParamsReport:
    checks: List[ConstraintCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.holds for c in self.checks)

    def failures(self) -> List[ConstraintCheck]:
        return [c for c in self.checks if not c.holds]


def _min_y_exact(p_k: Fraction, floor_sq: Fraction) -> int:
    """y^2·p_k >= floor_sq を満たす最小の整数 y"""
    ratio = floor_sq / p_k
    y = math.isqrt(ratio.numerator // ratio.denominator)
    while y * y < ratio:
        y += 1
    while y > 0 and (y - 1) * (y - 1) >= ratio:
        y -= 1
    return y


def _log_c_form(k: int, L_k: LogForm) -> LogForm:
    """log c_k = log(k^8/p_k^2) + log1p(p_k^2/k^8)"""
    base = L_k * 2 + 8 * mpmath.log(k)
    if L_k.is_numeric:
        base = base + mpmath.log1p(mpmath.exp(-base.const))
    return base


def construct_params(A: Optional[float] = None, k_max: int = 5) -> HierarchyParams:
    """
    再帰的パラメータ構成

    y_1 = 1, p_2 = 1/4 から始め、各 k で c_k を最小に取り、p_{k+1} = p_k/2 から
    半減を繰り返して (lest1) の窓 [A k^2 √log(1/p_{k+1}), A k^2 √(2 log(1/p_{k+1}))]/p_k
    が (pest) の下限と交わる最小の半減回数を選ぶ。y_k は交わりの最小整数。
    半減回数は閉じた式で求め、丸めの分だけ反復予算内で 1 ずつ増やす。

    Args:
        A: 定数 A（省略時 compute_A()）
        k_max: 構成する最大レベル（>= 2）

    Returns:
        HierarchyParams

    Raises:
        PreconditionViolation: A <= 0 または k_max < 2
        InfeasibleWindowError: 反復予算内に窓が見つからない
    """
    if k_max < 2:
        raise PreconditionViolation(f"k_max は 2 以上: {k_max}")
    with mpmath.workdps(settings.mp_dps):
        A_mp = mpmath.mpf(A) if A is not None else mpmath.mpf(compute_A())
        if A_mp <= 0:
            raise PreconditionViolation(f"A は正: {A}")
        log2 = mpmath.log(2)
        log_A = mpmath.log(A_mp)
        limit = settings.sampling_limit
        log_limit = mpmath.log(limit)

        scales: Dict[int, LogForm] = {}
        L: Dict[int, LogForm] = {2: LogForm.constant(mpmath.log(4))}
        p_exact: Dict[int, Optional[Fraction]] = {2: Fraction(1, 4)}
        halvings: Dict[int, Optional[int]] = {2: None}
        log_y: Dict[int, LogForm] = {1: LogForm.constant(0)}
        y_exact: Dict[int, Optional[int]] = {1: 1}
        records: List[LevelRecord] = []

        for k in range(2, k_max + 1):
            L_k = L[k]
            log_k = mpmath.log(k)
            p_k = p_exact[k]

            # (ck)
            c_k: Optional[int] = None
            if p_k is not None:
                c_candidate = (k**8 * p_k.denominator**2) // p_k.numerator**2 + 1
                if c_candidate <= limit:
                    c_k = c_candidate
            log_c = LogForm.constant(mpmath.log(c_k)) if c_k is not None else _log_c_form(k, L_k)

            # (pest) の下限。k = 2 では y_1 √p_1 <= 1 を使う
            if k == 2:
                previous = LogForm.constant(0)
            else:
                previous = log_y[k - 1] - L[k - 1] * Fraction(1, 2)
            log_F = form_max(log_c + mpmath.log(12), previous, scales) + L_k * Fraction(1, 2)

            y_floor: Optional[int] = None
            prev_p = p_exact.get(k - 1) if k > 2 else None
            if p_k is not None and c_k is not None and (k == 2 or (prev_p is not None and y_exact.get(k - 1))):
                floor_sq = max(
                    Fraction(144 * c_k * c_k),
                    Fraction(1) if k == 2 else y_exact[k - 1] ** 2 * prev_p,
                )
                y_floor = _min_y_exact(p_k, floor_sq)
                if y_floor > limit:
                    y_floor = None
            log_y_floor = LogForm.constant(mpmath.log(y_floor)) if y_floor is not None else log_F

            # L_{k+1} >= (p_k y_k/(A k^2))^2/2 となる最小の半減回数
            log_target = (log_y_floor - L_k - log_A - 2 * log_k) * 2 - log2
            target_value = log_target.evaluate(scales)

            F_value = log_F.evaluate(scales)
            numeric = (
                L_k.is_numeric
                and target_value is not None
                and target_value < log_limit
                and F_value is not None
                and F_value < log_limit
            )
            if numeric:
                L_value = L_k.const
                floor_int = y_floor if y_floor is not None else int(mpmath.ceil(mpmath.exp(F_value)))
                L_target = max(mpmath.exp(target_value), L_value + log2)
                j = max(1, int(mpmath.ceil((L_target - L_value) / log2)))
                y_k: Optional[int] = None
                for _ in range(settings.params_iteration_budget):
                    L_next_value = L_value + j * log2
                    scale = A_mp * k * k * mpmath.exp(L_value)
                    window_lo = scale * mpmath.sqrt(L_next_value)
                    window_hi = scale * mpmath.sqrt(2 * L_next_value)
                    candidate = max(floor_int, int(mpmath.ceil(window_lo)))
                    if candidate <= window_hi:
                        y_k = candidate
                        break
                    j += 1
                if y_k is None:
                    raise InfeasibleWindowError(
                        f"k={k}: {settings.params_iteration_budget} 回の反復で y_k が見つからない"
                    )
                L[k + 1] = LogForm.constant(L_next_value)
                halvings[k + 1] = j
                if p_k is not None and p_k.denominator.bit_length() + j <= 53:
                    p_exact[k + 1] = p_k / 2**j
                else:
                    p_exact[k + 1] = None
                y_exact[k] = y_k if y_k <= limit else None
                log_y[k] = LogForm.constant(mpmath.log(y_k))
            else:
                # 半減回数が 2^53 を超える: L_{k+1} を新しい記号スケールにする
                if (log_target - log_of_scale(L_k, scales)).sign(scales) <= 0:
                    raise InfeasibleWindowError(f"k={k}: 記号スケールの窓が p_k/2 より下にある")
                scales[k + 1] = log_target
                L[k + 1] = LogForm.scale(k + 1)
                halvings[k + 1] = None
                p_exact[k + 1] = None
                y_exact[k] = y_floor
                log_y[k] = log_y_floor

            records.append(
                LevelRecord(
                    k=k,
                    log_inv_p=L_k,
                    log_y=log_y[k],
                    log_c=log_c,
                    p_exact=p_k,
                    y_exact=y_exact[k],
                    c_exact=c_k,
                    halvings=halvings[k],
                )
            )

        # p_1 は残りの質量を全て吸収する
        if all(p_exact[k] is not None for k in range(2, k_max + 1)):
            p1_exact: Optional[Fraction] = 1 - sum((p_exact[k] for k in range(2, k_max + 1)), Fraction(0))
            p1_value = mpmath.mpf(p1_exact.numerator) / p1_exact.denominator
        else:
            p1_exact = None
            p1_value = mpmath.mpf(1)
            for k in range(2, k_max + 1):
                L_value = L[k].evaluate(scales)
                if L_value is not None:
                    p1_value -= mpmath.exp(-L_value)
        level_one = LevelRecord(
            k=1,
            log_inv_p=LogForm.constant(-mpmath.log(p1_value)),
            log_y=LogForm.constant(0),
            p_exact=p1_exact,
            y_exact=1,
        )
        return HierarchyParams(
            A=A_mp,
            levels=(level_one, *records),
            log_inv_p_next=L[k_max + 1],
            scales=dict(scales),
        )


def _slack_value(form: LogForm, scales) -> mpmath.mpf:
    value = form.evaluate(scales)
    if value is None:
        return mpmath.inf if form.sign(scales) > 0 else -mpmath.inf
    return value


def validate_params(params: HierarchyParams) -> ParamsReport:
    """
    全レベルの制約を対数領域で再検証

    slack は「左辺 - 右辺 >= 0」の形の対数差。-settings.log_slack 以上なら成立。
    厳密値が揃っているレベルでは (ck) と (pest) を有理数で判定する。
    """
    checks: List[ConstraintCheck] = []
    scales = params.scales
    with mpmath.workdps(settings.mp_dps):
        tol = mpmath.mpf(settings.log_slack)
        log2 = mpmath.log(2)
        log_A = mpmath.log(params.A)

        def add(k: int, name: str, form: LogForm, exact: Optional[bool] = None):
            slack = _slack_value(form, scales)
            holds = slack >= -tol if exact is None else exact
            checks.append(ConstraintCheck(k, name, slack, bool(holds)))

        for k in range(2, params.k_max + 1):
            rec = params.level(k)
            prev = params.level(k - 1)
            L_k = rec.log_inv_p
            L_next = params.log_inv_p(k + 1)
            log_k = mpmath.log(k)
            log_c = rec.log_c if rec.log_c is not None else LogForm.constant(0)

            exact_ck = None
            if rec.c_exact is not None and rec.p_exact is not None:
                exact_ck = rec.c_exact * rec.p_exact**2 > k**8
            add(k, "ck", log_c - (L_k * 2 + 8 * log_k), exact_ck)

            previous = prev.log_y - prev.log_inv_p * Fraction(1, 2)
            floor = form_max(log_c + mpmath.log(12), previous, scales)
            exact_pest = None
            if (
                rec.y_exact is not None
                and rec.p_exact is not None
                and rec.c_exact is not None
                and prev.y_exact is not None
                and prev.p_exact is not None
            ):
                lhs = rec.y_exact**2 * rec.p_exact
                exact_pest = lhs >= 144 * rec.c_exact**2 and lhs >= prev.y_exact**2 * prev.p_exact
            add(k, "pest", rec.log_y - L_k * Fraction(1, 2) - floor, exact_pest)

            add(k, "pkhalf", L_next - L_k - log2)

            q = log_of_scale(L_next, scales) + L_k * 2 - rec.log_y * 2 + 2 * log_A
            add(k, "lest1_lower", q + log2 + 4 * log_k)
            add(k, "lest1_upper", -q - 4 * log_k)
    return ParamsReport(checks)


def law_from_params(params: HierarchyParams, K: int) -> WaitingTimeLaw:
    """
    レベル 1..K をサンプリング可能な待ち時間分布に変換（p_1 は残差を吸収）

    Raises:
        SamplingRangeError: p_k または y_k の厳密値がない
    """
    if not 1 <= K <= params.k_max:
        raise PreconditionViolation(f"K は 1..{params.k_max}: {K}")
    levels = []
    for k in range(2, K + 1):
        rec = params.level(k)
        if rec.p_exact is None or rec.y_exact is None:
            raise SamplingRangeError(f"レベル {k} は厳密値を持たずサンプリングできない")
        levels.append((rec.p_exact, rec.y_exact))
    p1 = 1 - sum((p for p, _ in levels), Fraction(0))
    return WaitingTimeLaw(((p1, 1), *levels))


def growth_report(params: HierarchyParams) -> List[Tuple[int, Optional[mpmath.mpf]]]:
    """
    log(log y_{k+1}) - log y_k（log y_{k+1} >= const·y_k の観測用）
    """
    rows = []
    with mpmath.workdps(settings.mp_dps):
        for k in range(2, params.k_max):
            loglog_next = params.level(k + 1).log_y.log_value(params.scales)
            log_y = params.level(k).log_y.evaluate(params.scales)
            rows.append((k, None if loglog_next is None or log_y is None else loglog_next - log_y))
    return rows


# ======================
# シリアライズ
# ======================


class LevelModel(BaseModel):
    """レベルごとのファイル表現"""

    k: int
    p_mantissa: Optional[str] = Field(None, description="p_k = mantissa × 10^floor(p_log10)")
    p_log10: Optional[str] = Field(None, description="log10 p_k")
    log10_y: Optional[str] = Field(None, description="log10 y_k")
    log10_log10_y: Optional[str] = Field(None, description="log10 log10 y_k")
    log10_c: Optional[str] = Field(None, description="log10 c_k")
    p_exact: Optional[str] = None
    y_exact: Optional[int] = None
    c_exact: Optional[int] = None
    halvings: Optional[int] = None
    log_inv_p: dict
    log_y: dict
    log_c: Optional[dict] = None


class ParamsFileModel(BaseModel):
    """HierarchyParams のファイル表現"""

    A: str
    k_max: int
    mp_dps: int
    levels: List[LevelModel]
    log_inv_p_next: dict
    scales: Dict[str, dict] = Field(default_factory=dict)


def _nstr(x: Optional[mpmath.mpf], digits: int = 20) -> Optional[str]:
    return None if x is None else mpmath.nstr(x, digits)


def level_display(params: HierarchyParams, rec: LevelRecord) -> dict:
    """表示用の log10 値（評価できない場合は None）"""
    scales = params.scales
    with mpmath.workdps(settings.mp_dps):
        ln10 = mpmath.log(10)
        L_value = rec.log_inv_p.evaluate(scales)
        p_log10 = None if L_value is None else -L_value / ln10
        p_mantissa = None if p_log10 is None else mpmath.power(10, p_log10 - mpmath.floor(p_log10))
        log_y = rec.log_y.evaluate(scales)
        loglog_y = rec.log_y.log_value(scales)
        log_c = rec.log_c.evaluate(scales) if rec.log_c is not None else None
        return {
            "p_mantissa": _nstr(p_mantissa),
            "p_log10": _nstr(p_log10),
            "log10_y": _nstr(None if log_y is None else log_y / ln10),
            "log10_log10_y": _nstr(None if loglog_y is None else (loglog_y - mpmath.log(ln10)) / ln10),
            "log10_c": _nstr(None if log_c is None else log_c / ln10),
        }


def params_to_model(params: HierarchyParams) -> ParamsFileModel:
    with mpmath.workdps(settings.mp_dps):
        levels = [
            LevelModel(
                k=rec.k,
                p_exact=None if rec.p_exact is None else str(rec.p_exact),
                y_exact=rec.y_exact,
                c_exact=rec.c_exact,
                halvings=rec.halvings,
                log_inv_p=rec.log_inv_p.to_dict(),
                log_y=rec.log_y.to_dict(),
                log_c=None if rec.log_c is None else rec.log_c.to_dict(),
                **level_display(params, rec),
            )
            for rec in params.levels
        ]
        return ParamsFileModel(
            A=mpmath.nstr(params.A, settings.mp_dps),
            k_max=params.k_max,
            mp_dps=settings.mp_dps,
            levels=levels,
            log_inv_p_next=params.log_inv_p_next.to_dict(),
            scales={str(k): form.to_dict() for k, form in params.scales.items()},
        )


def params_from_model(model: ParamsFileModel) -> HierarchyParams:
    with mpmath.workdps(max(model.mp_dps, settings.mp_dps)):
        levels = tuple(
            LevelRecord(
                k=lv.k,
                log_inv_p=LogForm.from_dict(lv.log_inv_p),
                log_y=LogForm.from_dict(lv.log_y),
                log_c=None if lv.log_c is None else LogForm.from_dict(lv.log_c),
                p_exact=None if lv.p_exact is None else Fraction(lv.p_exact),
                y_exact=lv.y_exact,
                c_exact=lv.c_exact,
                halvings=lv.halvings,
            )
            for lv in sorted(model.levels, key=lambda lv: lv.k)
        )
        return HierarchyParams(
            A=mpmath.mpf(model.A),
            levels=levels,
            log_inv_p_next=LogForm.from_dict(model.log_inv_p_next),
            scales={int(k): LogForm.from_dict(v) for k, v in model.scales.items()},
        )


def save_params(params: HierarchyParams, path: Union[str, Path]):
    Path(path).write_text(params_to_model(params).model_dump_json(indent=2), encoding="utf-8")


def load_params(path: Union[str, Path]) -> HierarchyParams:
    text = Path(path).read_text(encoding="utf-8")
    return params_from_model(ParamsFileModel.model_validate_json(text))
