"""
有限時間の事象系と回数変数の下界チェック

状態 X_n のマルコフ連鎖と、時刻 n の事象 E_n = {pred(n, X_n)} で事象系を表す。
E_0 は全空間で、Φ = Σ_{n=0}^{N} 1{E_n}。
仮定 P(E_n | F_m) <= P(E_{n-m})（E_m 上）は、マルコフ性により
(m, X_m) ごとの条件付き確率で網羅的に確認する。
"""

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, NamedTuple, Sequence, Tuple

from ..exceptions import HypothesisViolation, PreconditionViolation
from ..logger import logger

State = Hashable
Kernel = Callable[[State], Sequence[Tuple[Fraction, State]]]

MAX_HORIZON = 16
MAX_PATHS = 10**7


@dataclass(frozen=True)
class EventSystem:
    name: str
    initial: Sequence[Tuple[Fraction, State]]
    kernel: Kernel
    predicate: Callable[[int, State], bool]
    horizon: int

    def __post_init__(self):
        if not 1 <= self.horizon <= MAX_HORIZON:
            raise PreconditionViolation(f"horizon は 1..{MAX_HORIZON}: {self.horizon}")
        if sum((p for p, _ in self.initial), Fraction(0)) != 1:
            raise PreconditionViolation(f"{self.name}: 初期分布の総和が 1 でない")

    def event(self, n: int, state: State) -> bool:
        return n == 0 or self.predicate(n, state)


class RecurreventsRow(NamedTuple):
    r: int
    prob_phi_gt_r: Fraction
    bound: Fraction
    holds: bool


class RecurreventsReport(NamedTuple):
    name: str
    expected_phi: Fraction
    rows: List[RecurreventsRow]

    @property
    def holds(self) -> bool:
        return all(row.holds for row in self.rows)


def _step(system: EventSystem, dist: Dict[State, Fraction]) -> Dict[State, Fraction]:
    out: Dict[State, Fraction] = defaultdict(Fraction)
    for s, w in dist.items():
        for p, t in system.kernel(s):
            out[t] += w * p
    return out


def path_count(system: EventSystem) -> int:
    """遷移の枝の数で数えた全経路数"""
    counts: Dict[State, int] = defaultdict(int)
    for _, s in system.initial:
        counts[s] += 1
    total = sum(counts.values())
    for _ in range(system.horizon):
        nxt: Dict[State, int] = defaultdict(int)
        for s, c in counts.items():
            for _, t in system.kernel(s):
                nxt[t] += c
        counts = nxt
        total = sum(counts.values())
    return total


def marginal_event_probs(system: EventSystem) -> Tuple[List[Fraction], List[Dict[State, Fraction]]]:
    """P(E_n) (n=0..N) と各時刻の状態分布"""
    dist: Dict[State, Fraction] = defaultdict(Fraction)
    for p, s in system.initial:
        dist[s] += p
    dists = [dict(dist)]
    for _ in range(system.horizon):
        dists.append(_step(system, dists[-1]))
    probs = [
        sum((w for s, w in d.items() if system.event(n, s)), Fraction(0)) for n, d in enumerate(dists)
    ]
    return probs, dists


def verify_hypothesis(system: EventSystem):
    """
    E_m 上で P(E_n | X_m = x) <= P(E_{n-m}) を全 (m, n, x) で確認

    m = 0 も含む（E_0 は全空間なので初期状態ごとに P(E_n | X_0 = x) <= P(E_n)）。

    Raises:
        HypothesisViolation: witness = (m, n, x)
    """
    probs, dists = marginal_event_probs(system)
    N = system.horizon
    for m in range(0, N):
        for x, w in dists[m].items():
            if w == 0 or not system.event(m, x):
                continue
            dist: Dict[State, Fraction] = {x: Fraction(1)}
            for n in range(m + 1, N + 1):
                dist = _step(system, dist)
                cond = sum((v for s, v in dist.items() if system.event(n, s)), Fraction(0))
                if cond > probs[n - m]:
                    raise HypothesisViolation(
                        f"{system.name}: P(E_{n}|X_{m}={x!r}) = {cond} > P(E_{n - m}) = {probs[n - m]}",
                        witness=(m, n, x),
                    )


def phi_distribution(system: EventSystem) -> Dict[int, Fraction]:
    """Φ の厳密分布（(状態, 回数) の動的計画法）"""
    joint: Dict[Tuple[State, int], Fraction] = defaultdict(Fraction)
    for p, s in system.initial:
        joint[(s, 1)] += p  # E_0
    for n in range(1, system.horizon + 1):
        nxt: Dict[Tuple[State, int], Fraction] = defaultdict(Fraction)
        for (s, c), w in joint.items():
            for p, t in system.kernel(s):
                nxt[(t, c + int(system.event(n, t)))] += w * p
        joint = nxt
    phi: Dict[int, Fraction] = defaultdict(Fraction)
    for (_, c), w in joint.items():
        phi[c] += w
    return dict(phi)


def check_recurrevents(system: EventSystem, r_grid: Sequence[int]) -> RecurreventsReport:
    """
    P(Φ > r) >= 1 - r/E(Φ) を r_grid の全 r で厳密に確認

    Raises:
        PreconditionViolation: 経路数が上限を超える
        HypothesisViolation: 事象系が仮定を満たさない
    """
    paths = path_count(system)
    if paths > MAX_PATHS:
        raise PreconditionViolation(f"{system.name}: 経路数 {paths} が上限 {MAX_PATHS} を超える")
    verify_hypothesis(system)

    phi = phi_distribution(system)
    expected = sum((c * w for c, w in phi.items()), Fraction(0))
    rows = []
    for r in r_grid:
        tail = sum((w for c, w in phi.items() if c > r), Fraction(0))
        bound = 1 - Fraction(r) / expected
        rows.append(RecurreventsRow(r, tail, bound, tail >= bound))
    logger.debug(f"recurrevents {system.name}: E(Φ)={float(expected):.4f} paths={paths}")
    return RecurreventsReport(system.name, expected, rows)


# ======================
# 標準コーパス
# ======================


def bernoulli_system(p: Fraction, horizon: int) -> EventSystem:
    """独立な Bernoulli(p) 事象"""
    p = Fraction(p)
    return EventSystem(
        name=f"bernoulli(p={p},N={horizon})",
        initial=[(Fraction(1), "start")],
        kernel=lambda s: [(p, "hit"), (1 - p, "miss")],
        predicate=lambda n, s: s == "hit",
        horizon=horizon,
    )


def certain_system(horizon: int) -> EventSystem:
    return EventSystem(
        name=f"certain(N={horizon})",
        initial=[(Fraction(1), 0)],
        kernel=lambda s: [(Fraction(1), 0)],
        predicate=lambda n, s: True,
        horizon=horizon,
    )


def walk_return_system(name: str, steps: Sequence[Tuple[Fraction, Tuple[int, ...]]], horizon: int) -> EventSystem:
    """増分分布 steps のウォークの原点回帰"""
    dim = len(steps[0][1])
    origin = (0,) * dim

    def kernel(s):
        return [(p, tuple(a + b for a, b in zip(s, step))) for p, step in steps]

    return EventSystem(
        name=f"{name}(N={horizon})",
        initial=[(Fraction(1), origin)],
        kernel=kernel,
        predicate=lambda n, s: s == origin,
        horizon=horizon,
    )


def _steps(pairs) -> List[Tuple[Fraction, Tuple[int, ...]]]:
    return [(Fraction(p), step if isinstance(step, tuple) else (step,)) for p, step in pairs]


SIMPLE_STEPS = _steps([("1/2", -1), ("1/2", 1)])
LAZY_STEPS = _steps([("1/4", -1), ("1/2", 0), ("1/4", 1)])
UNIFORM3_STEPS = _steps([("1/3", -1), ("1/3", 0), ("1/3", 1)])
PLANAR_STEPS = _steps([("1/4", (1, 0)), ("1/4", (-1, 0)), ("1/4", (0, 1)), ("1/4", (0, -1))])


def standard_event_systems() -> List[EventSystem]:
    """仮定を満たす標準の事象系（21 系）"""
    systems: List[EventSystem] = []
    for p in ("1/10", "3/10", "1/2", "7/10", "9/10"):
        for horizon in (6, 10):
            systems.append(bernoulli_system(Fraction(p), horizon))
    systems.append(certain_system(8))
    for horizon in (8, 10, 12, 14):
        systems.append(walk_return_system("simple_walk_return", SIMPLE_STEPS, horizon))
        systems.append(walk_return_system("lazy_walk_return", LAZY_STEPS, horizon))
    systems.append(walk_return_system("uniform3_walk_return", UNIFORM3_STEPS, 10))
    systems.append(walk_return_system("planar_walk_return", PLANAR_STEPS, 10))
    return systems


def sticky_violator(horizon: int = 6) -> EventSystem:
    """状態 1 に留まりやすい連鎖。E_n = {X_n = 1} は仮定を破る"""
    table = {
        0: [(Fraction(9, 10), 0), (Fraction(1, 10), 1)],
        1: [(Fraction(1, 10), 0), (Fraction(9, 10), 1)],
    }
    return EventSystem(
        name=f"sticky(N={horizon})",
        initial=[(Fraction(1), 0)],
        kernel=lambda s: table[s],
        predicate=lambda n, s: s == 1,
        horizon=horizon,
    )
