"""
自由范数计算模块
在有限有点度量空间上计算形式向量的自由Banach空间范数，
同时给出原始证书（运输方案）与对偶证书（1-Lipschitz势函数），
并提供支撑下界、小规模暴力枚举对照与证书复核功能
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from .metric_core import (
    FreeVector,
    MetricConfig,
    PointedMetricSpace,
    Scalar,
    ScalarMode,
    StructuralError,
    ValidationReport,
    Violation,
    format_scalar,
    to_scalar,
    tolerance_for,
)

# 获取日志记录器实例
logger = logging.getLogger(__name__)


class NormConfig:
    """
    自由范数求解配置类
    存储容差、暴力枚举预算与线性规划方法等常量信息
    """

    # 浮点模式下的对偶间隙容差
    TOLERANCE = 1e-9

    # 暴力枚举预算：系数绝对值之和与支撑大小的上限
    ORACLE_MAX_MASS = 6
    ORACLE_MAX_SUPPORT = 5

    # scipy线性规划方法
    LINPROG_METHOD = "highs"

    # 批量求解时的默认线程数
    DEFAULT_WORKERS = 4


class OracleBudgetError(ValueError):
    """暴力枚举的输入超出预算"""


class LowerBoundUndefinedError(ValueError):
    """支撑点少于两个，支撑下界没有定义"""


class NormSolverError(RuntimeError):
    """线性规划求解失败"""


# ==================== 证书数据类型 ====================

@dataclass(frozen=True)
class Move:
    """运输方案中的一笔运输：从 source 运送 mass 到 target"""
    source: str
    target: str
    mass: Scalar


@dataclass(frozen=True)
class TransportPlan:
    """
    运输方案（原始证书）

    对每个非基点 p，流出减流入等于向量在 p 处的系数；基点吸收剩余的差额。
    """
    moves: Tuple[Move, ...] = ()

    def cost(self, space: PointedMetricSpace) -> Scalar:
        return sum((m.mass * space.distance(m.source, m.target) for m in self.moves), 0)

    def divergence(self) -> Dict[str, Scalar]:
        """每个点的 流出 - 流入"""
        net: Dict[str, Scalar] = {}
        for m in self.moves:
            net[m.source] = net.get(m.source, 0) + m.mass
            net[m.target] = net.get(m.target, 0) - m.mass
        return net

    def endpoints(self) -> frozenset:
        return frozenset(p for m in self.moves for p in (m.source, m.target))

    def to_list(self) -> List[Dict]:
        return [{'source': m.source, 'target': m.target, 'mass': format_scalar(m.mass)} for m in self.moves]


@dataclass(frozen=True)
class LipschitzPotential:
    """
    1-Lipschitz势函数（对偶证书），在基点处取值为0
    """
    phi: Tuple[Tuple[str, Scalar], ...] = ()

    @property
    def values(self) -> Dict[str, Scalar]:
        return dict(self.phi)

    def at(self, point: str) -> Scalar:
        return self.values.get(point, 0)

    def value(self, v: FreeVector) -> Scalar:
        """对偶目标值 Σ coeff(p)·phi(p)，是范数的下界"""
        values = self.values
        return sum((c * values.get(p, 0) for p, c in v.terms), 0)

    def to_dict(self) -> Dict[str, Union[str, float, int]]:
        return {p: format_scalar(value) for p, value in self.phi}


@dataclass(frozen=True)
class NormResult:
    """
    范数计算结果

    Attributes:
        space (PointedMetricSpace): 环境空间
        vector (FreeVector): 被计算的向量
        value (Scalar): 范数值（运输方案的费用）
        plan (TransportPlan): 达到该值的运输方案
        potential (LipschitzPotential): 对偶势函数
        gap (Scalar): 原始费用减对偶值，非负
    """
    space: PointedMetricSpace
    vector: FreeVector
    value: Scalar
    plan: TransportPlan
    potential: LipschitzPotential
    gap: Scalar

    @property
    def mode(self) -> ScalarMode:
        return ScalarMode.EXACT if isinstance(self.value, (int, Fraction)) else ScalarMode.FLOAT

    def to_dict(self) -> Dict:
        return {
            'vector': str(self.vector),
            'value': format_scalar(self.value),
            'gap': format_scalar(self.gap),
            'mode': self.mode.value,
            'plan': self.plan.to_list(),
            'potential': self.potential.to_dict(),
        }


# ==================== 内部工具 ====================

def _resolve_mode(space: PointedMetricSpace, v: FreeVector, mode: Union[str, ScalarMode, None]) -> ScalarMode:
    if v.basis != space.labels:
        raise StructuralError("向量不在给定空间上")
    if mode is None:
        if space.mode is ScalarMode.EXACT and v.mode is ScalarMode.EXACT:
            return ScalarMode.EXACT
        return ScalarMode.FLOAT
    if isinstance(mode, str):
        mode_map = {m.value: m for m in ScalarMode}
        if mode not in mode_map:
            raise ValueError(f"无效的标量模式: {mode}。有效值为: {list(mode_map.keys())}")
        return mode_map[mode]
    return mode


def _nodes(v: FreeVector) -> List[str]:
    """求解只需要 supp(v) ∪ {*} 上的节点"""
    return [MetricConfig.BASEPOINT] + [p for p, _ in v.terms]


def _cost_table(space: PointedMetricSpace, nodes: Sequence[str], mode: ScalarMode) -> Dict[Tuple[str, str], Scalar]:
    return {(a, b): to_scalar(space.distance(a, b), mode) for a in nodes for b in nodes}


def _dijkstra(nodes: Sequence[str],
              source: str,
              cost: Dict[Tuple[str, str], Scalar],
              flow: Dict[Tuple[str, str], Scalar],
              pi: Dict[str, Scalar]):
    """
    稠密Dijkstra：在残量网络上按约化费用 c(a, b) + pi(a) - pi(b) 求最短路

    正向弧容量无限；有流量的弧提供一条费用为负的反向弧。
    势 pi 使所有残量弧的约化费用非负，返回的是约化距离。
    """
    order = {p: i for i, p in enumerate(nodes)}
    dist: Dict[str, Scalar] = {source: 0}
    pred: Dict[str, Tuple[str, str]] = {}
    done = set()
    while len(done) < len(nodes):
        a = min((p for p in dist if p not in done), key=lambda p: (dist[p], order[p]))
        done.add(a)
        for b in nodes:
            if b in done:
                continue
            c, kind = cost[(a, b)], 'forward'
            if flow.get((b, a), 0) > 0 and -cost[(b, a)] < c:
                c, kind = -cost[(b, a)], 'reverse'
            reduced = dist[a] + c + pi[a] - pi[b]
            if b not in dist or reduced < dist[b]:
                dist[b] = reduced
                pred[b] = (a, kind)
    return dist, pred


def _exact_flow(space: PointedMetricSpace, v: FreeVector) -> Tuple[List[str], Dict, Dict, Dict]:
    """
    逐次最短路算法求解完全有向图上的转运问题（精确有理数）

    从零流开始，每次沿残量网络中的最短路把一个正盈余节点的质量送往亏空节点。
    每轮把约化距离累加进势 pi，残量弧的约化费用保持非负，终止时的流即为最小费用流。

    Returns:
        Tuple: (节点, 费用表, 流, 势)
    """
    nodes = _nodes(v)
    order = {p: i for i, p in enumerate(nodes)}
    cost = _cost_table(space, nodes, ScalarMode.EXACT)
    excess: Dict[str, Fraction] = {p: Fraction(c) for p, c in v.terms}
    excess[MetricConfig.BASEPOINT] = -sum(excess.values(), Fraction(0))
    flow: Dict[Tuple[str, str], Fraction] = {}
    pi: Dict[str, Fraction] = {p: Fraction(0) for p in nodes}

    while True:
        sources = [p for p in nodes if excess[p] > 0]
        if not sources:
            break
        s = sources[0]
        dist, pred = _dijkstra(nodes, s, cost, flow, pi)
        for p in nodes:
            pi[p] += dist[p]
        # 更新后 pi(t) - pi(s) 即为 s 到 t 的真实最短距离
        sinks = [p for p in nodes if excess[p] < 0]
        t = min(sinks, key=lambda p: (pi[p], order[p]))

        path = []
        node = t
        while node != s:
            prev, kind = pred[node]
            path.append((prev, node, kind))
            node = prev
        path.reverse()

        delta = min(excess[s], -excess[t])
        for a, b, kind in path:
            if kind == 'reverse':
                delta = min(delta, flow[(b, a)])

        for a, b, kind in path:
            if kind == 'forward':
                flow[(a, b)] = flow.get((a, b), Fraction(0)) + delta
            else:
                flow[(b, a)] -= delta
                if flow[(b, a)] == 0:
                    del flow[(b, a)]
        excess[s] -= delta
        excess[t] += delta

    return nodes, cost, flow, pi


def _plan_from_flow(nodes: Sequence[str], flow: Dict[Tuple[str, str], Scalar]) -> TransportPlan:
    order = {p: i for i, p in enumerate(nodes)}
    moves = sorted((Move(a, b, m) for (a, b), m in flow.items() if m > 0),
                   key=lambda mv: (order[mv.source], order[mv.target]))
    return TransportPlan(tuple(moves))


def _mcshane_extension(space: PointedMetricSpace,
                       phi: Dict[str, Scalar],
                       mode: ScalarMode) -> LipschitzPotential:
    """
    把定义在 supp(v) ∪ {*} 上的1-Lipschitz函数延拓到整个空间

    phi(q) = min_p (phi(p) + d(p, q))，在原定义域上取值不变。
    """
    values = []
    for q in space.points:
        if q in phi:
            values.append((q, phi[q]))
        else:
            values.append((q, min(phi[p] + to_scalar(space.distance(p, q), mode) for p in phi)))
    return LipschitzPotential(tuple(values))


def _exact_potential(space: PointedMetricSpace,
                     nodes: Sequence[str],
                     cost: Dict[Tuple[str, str], Scalar],
                     flow: Dict[Tuple[str, str], Scalar],
                     pi: Dict[str, Scalar]) -> LipschitzPotential:
    """
    由最优流的残量网络读出对偶势函数（互补松弛）

    以基点为源点求残量网络最短路 dist，取 phi = -dist：
    正向弧给出 phi(a) - phi(b) <= d(a, b)，有流量的弧给出等号。
    """
    star = MetricConfig.BASEPOINT
    reduced, _ = _dijkstra(nodes, star, cost, flow, pi)
    phi = {p: -(reduced[p] + pi[p] - pi[star]) for p in nodes}
    return _mcshane_extension(space, phi, ScalarMode.EXACT)


def _float_primal(space: PointedMetricSpace, v: FreeVector) -> Tuple[float, TransportPlan]:
    nodes = _nodes(v)
    arcs = [(a, b) for a in nodes for b in nodes if a != b]
    c = np.array([float(space.distance(a, b)) for a, b in arcs])
    a_eq = np.zeros((len(nodes) - 1, len(arcs)))
    for j, (a, b) in enumerate(arcs):
        if a != MetricConfig.BASEPOINT:
            a_eq[nodes.index(a) - 1, j] += 1.0
        if b != MetricConfig.BASEPOINT:
            a_eq[nodes.index(b) - 1, j] -= 1.0
    b_eq = np.array([float(coeff) for _, coeff in v.terms])

    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method=NormConfig.LINPROG_METHOD)
    if res.status != 0:
        raise NormSolverError(f"原始线性规划求解失败: {res.message}")
    flow = {arc: float(x) for arc, x in zip(arcs, res.x) if x > 0}
    return float(res.fun), _plan_from_flow(nodes, flow)


def _float_dual(space: PointedMetricSpace, v: FreeVector) -> Tuple[float, LipschitzPotential]:
    nodes = _nodes(v)
    free = nodes[1:]
    rows, bounds = [], []
    for a in nodes:
        for b in nodes:
            if a == b:
                continue
            # phi(a) - phi(b) <= d(a, b)，基点上 phi = 0
            row = np.zeros(len(free))
            if a != MetricConfig.BASEPOINT:
                row[free.index(a)] += 1.0
            if b != MetricConfig.BASEPOINT:
                row[free.index(b)] -= 1.0
            rows.append(row)
            bounds.append(float(space.distance(a, b)))
    c = -np.array([float(coeff) for _, coeff in v.terms])

    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(bounds), bounds=(None, None),
                  method=NormConfig.LINPROG_METHOD)
    if res.status != 0:
        raise NormSolverError(f"对偶线性规划求解失败: {res.message}")
    phi = {MetricConfig.BASEPOINT: 0.0}
    phi.update({p: float(x) for p, x in zip(free, res.x)})
    return float(-res.fun), _mcshane_extension(space, phi, ScalarMode.FLOAT)


# ==================== 公开接口 ====================

def norm_primal(space: PointedMetricSpace,
                v: FreeVector,
                mode: Union[str, ScalarMode, None] = None) -> Tuple[Scalar, TransportPlan]:
    """
    原始问题：在 supp(v) ∪ {*} 的完全有向图上求最小费用转运

    Args:
        space (PointedMetricSpace): 环境空间
        v (FreeVector): 待求范数的向量
        mode (Union[str, ScalarMode, None]): 标量后端，默认由输入数据推断

    Returns:
        Tuple[Scalar, TransportPlan]: 范数值与达到该值的运输方案
    """
    mode = _resolve_mode(space, v, mode)
    if v.is_zero():
        return (0 if mode is ScalarMode.EXACT else 0.0), TransportPlan()
    if mode is ScalarMode.EXACT:
        nodes, _, flow, _ = _exact_flow(space, v)
        plan = _plan_from_flow(nodes, flow)
        return plan.cost(_exact_view(space)), plan
    return _float_primal(space, v)


def norm_dual(space: PointedMetricSpace,
              v: FreeVector,
              mode: Union[str, ScalarMode, None] = None) -> Tuple[Scalar, LipschitzPotential]:
    """
    对偶问题：在 phi(*) = 0 的1-Lipschitz函数上最大化 Σ coeff(p)·phi(p)

    精确模式下由原始最优流的残量网络读出势函数；浮点模式下直接求解对偶线性规划。

    Args:
        space (PointedMetricSpace): 环境空间
        v (FreeVector): 待求范数的向量
        mode (Union[str, ScalarMode, None]): 标量后端

    Returns:
        Tuple[Scalar, LipschitzPotential]: 对偶最优值与势函数
    """
    mode = _resolve_mode(space, v, mode)
    if v.is_zero():
        zero = 0 if mode is ScalarMode.EXACT else 0.0
        return zero, LipschitzPotential(tuple((p, zero) for p in space.points))
    if mode is ScalarMode.EXACT:
        nodes, cost, flow, pi = _exact_flow(space, v)
        potential = _exact_potential(space, nodes, cost, flow, pi)
        return potential.value(v), potential
    return _float_dual(space, v)


def compute_norm(space: PointedMetricSpace,
                 v: FreeVector,
                 mode: Union[str, ScalarMode, None] = None) -> NormResult:
    """
    同时求解原始与对偶问题，返回带双证书的范数结果

    Args:
        space (PointedMetricSpace): 环境空间
        v (FreeVector): 待求范数的向量
        mode (Union[str, ScalarMode, None]): 标量后端

    Returns:
        NormResult: 范数值、运输方案、势函数与对偶间隙
    """
    mode = _resolve_mode(space, v, mode)
    if v.is_zero():
        value, plan = norm_primal(space, v, mode)
        _, potential = norm_dual(space, v, mode)
        return NormResult(space, v, value, plan, potential, value)

    if mode is ScalarMode.EXACT:
        nodes, cost, flow, pi = _exact_flow(space, v)
        plan = _plan_from_flow(nodes, flow)
        value = plan.cost(_exact_view(space))
        potential = _exact_potential(space, nodes, cost, flow, pi)
        gap = value - potential.value(v)
    else:
        value, plan = _float_primal(space, v)
        _, potential = _float_dual(space, v)
        gap = max(float(plan.cost(space)) - float(potential.value(v)), 0.0)

    logger.debug(f"范数计算完成: ||{v}|| = {format_scalar(value)}，间隙 {format_scalar(gap)}")
    return NormResult(space, v, value, plan, potential, gap)


def _exact_view(space: PointedMetricSpace) -> PointedMetricSpace:
    """浮点输入被强制为精确模式时，用有理数化的距离计算费用"""
    if space.mode is ScalarMode.EXACT:
        return space
    matrix = [[to_scalar(v, ScalarMode.EXACT) for v in row] for row in space.dist]
    return PointedMetricSpace(space.points, matrix)


def norm_bruteforce(space: PointedMetricSpace, v: FreeVector) -> Scalar:
    """
    暴力枚举对照：穷举整数流的最小费用

    整数盈余的转运问题存在整数最优流（约束矩阵全幺模），整数流可分解为单位路径，
    在度量上每条单位路径都可以捷径化为一次直接运输。因此只需穷举
    正单位与负单位之间的部分匹配，未匹配的单位经由基点处理。

    Args:
        space (PointedMetricSpace): 环境空间
        v (FreeVector): 整数系数向量

    Returns:
        Scalar: 最小费用

    Raises:
        OracleBudgetError: Σ|coeff| 或支撑大小超出预算
        ValueError: 存在非整数系数
    """
    if v.basis != space.labels:
        raise StructuralError("向量不在给定空间上")
    for point, coeff in v.terms:
        if coeff != int(coeff):
            raise ValueError(f"暴力枚举只接受整数系数，点 {point} 的系数为 {coeff}")
    mass = v.mass()
    if mass > NormConfig.ORACLE_MAX_MASS or len(v.terms) > NormConfig.ORACLE_MAX_SUPPORT:
        raise OracleBudgetError(
            f"超出暴力枚举预算: Σ|λ| = {mass}（上限 {NormConfig.ORACLE_MAX_MASS}），"
            f"|supp| = {len(v.terms)}（上限 {NormConfig.ORACLE_MAX_SUPPORT}）"
        )

    star = MetricConfig.BASEPOINT
    positives = [p for p, c in v.terms if c > 0 for _ in range(int(c))]
    negatives = [q for q, c in v.terms if c < 0 for _ in range(int(-c))]
    best: List[Optional[Scalar]] = [None]

    def assign(i: int, used: frozenset, acc: Scalar) -> None:
        if i == len(positives):
            total = acc + sum((space.distance(star, q) for j, q in enumerate(negatives) if j not in used), 0)
            if best[0] is None or total < best[0]:
                best[0] = total
            return
        p = positives[i]
        assign(i + 1, used, acc + space.distance(p, star))
        for j, q in enumerate(negatives):
            if j not in used:
                assign(i + 1, used | {j}, acc + space.distance(p, q))

    assign(0, frozenset(), 0)
    return best[0]


def support_lower_bound(space: PointedMetricSpace, v: FreeVector) -> Scalar:
    """
    支撑下界：½·(Σ|λ|)·(支撑点之间的最小距离)

    Args:
        space (PointedMetricSpace): 环境空间
        v (FreeVector): 支撑至少含两个点的向量

    Returns:
        Scalar: 范数的下界

    Raises:
        LowerBoundUndefinedError: 支撑点少于两个
    """
    support = [p for p, _ in v.terms]
    if len(support) < 2:
        raise LowerBoundUndefinedError(f"支撑只有 {len(support)} 个点，两两最小距离没有定义")
    closest = min(space.distance(a, b) for i, a in enumerate(support) for b in support[i + 1:])
    exact = space.mode is ScalarMode.EXACT and v.mode is ScalarMode.EXACT
    half = Fraction(1, 2) if exact else 0.5
    return half * v.mass() * closest


def free_distance(space: PointedMetricSpace,
                  u: Union[str, FreeVector],
                  w: Union[str, FreeVector],
                  mode: Union[str, ScalarMode, None] = None) -> Scalar:
    """
    L(X) 上由范数诱导的度量 d̄(u, w) = ||u - w||，点标识按 1·p 处理，基点即零向量
    """
    if isinstance(u, str):
        u = space.zero() if u == MetricConfig.BASEPOINT else space.point(u)
    if isinstance(w, str):
        w = space.zero() if w == MetricConfig.BASEPOINT else space.point(w)
    value, _ = norm_primal(space, u - w, mode)
    return value


def check_certificates(result: NormResult, tolerance: Optional[float] = None) -> ValidationReport:
    """
    独立于求解器内部状态，从原始数据复核范数结果的两份证书

    检查项：运输质量非负、运输端点落在 supp(v) ∪ {*} 内、散度条件、
    方案费用与范数值一致、势函数在基点为0、势函数1-Lipschitz、对偶间隙不超过容差。

    Args:
        result (NormResult): 待复核的结果
        tolerance (Optional[float]): 浮点模式下的容差，精确模式下恒为0

    Returns:
        ValidationReport: 复核报告，失败时不抛出异常
    """
    space, v = result.space, result.vector
    mode = result.mode
    tol = tolerance_for(mode, NormConfig.TOLERANCE if tolerance is None else tolerance)
    # 精确结果按有理数化的距离复核，与求解器的费用口径一致
    metric = _exact_view(space) if mode is ScalarMode.EXACT else space
    star = MetricConfig.BASEPOINT
    violations: List[Violation] = []

    allowed = set(v.support()) | {star}
    for m in result.plan.moves:
        if m.mass < -tol:
            violations.append(Violation("plan_nonnegative", (m.source, m.target), m.mass))
        if m.source not in allowed or m.target not in allowed:
            violations.append(Violation("plan_support", (m.source, m.target), m.mass))
        if m.source not in space or m.target not in space:
            violations.append(Violation("plan_unknown_point", (m.source, m.target), m.mass))

    net = result.plan.divergence()
    for p in space.labels:
        gap = net.get(p, 0) - v.coefficient(p)
        if abs(gap) > tol:
            violations.append(Violation("divergence", (p,), gap))

    known_moves = [m for m in result.plan.moves if m.source in space and m.target in space]
    cost = sum((m.mass * metric.distance(m.source, m.target) for m in known_moves), 0)
    if abs(cost - result.value) > tol:
        violations.append(Violation("plan_cost", ("plan",), cost - result.value))

    phi = result.potential.values
    if abs(phi.get(star, 0)) > tol:
        violations.append(Violation("potential_basepoint", (star,), phi[star]))
    domain = [p for p in space.points if p in phi]
    for i, p in enumerate(domain):
        for q in domain[i + 1:]:
            excess = abs(phi[p] - phi[q]) - metric.distance(p, q)
            if excess > tol:
                violations.append(Violation("lipschitz", (p, q), excess))

    dual_value = result.potential.value(v)
    duality_gap = cost - dual_value
    if duality_gap > tol or duality_gap < -tol:
        violations.append(Violation("duality_gap", ("plan", "potential"), duality_gap))
    # 浮点模式下记录的间隙被截断为非负
    expected_gap = max(duality_gap, 0) if mode is ScalarMode.FLOAT else duality_gap
    if abs(result.gap - expected_gap) > tol:
        violations.append(Violation("gap_record", ("gap",), result.gap - expected_gap))

    report = ValidationReport(tuple(violations))
    if not report.ok:
        logger.error(f"范数证书复核失败: {sorted(report.axioms())}")
    return report


def compute_norms(space: PointedMetricSpace,
                  vectors: Sequence[FreeVector],
                  mode: Union[str, ScalarMode, None] = None,
                  max_workers: int = NormConfig.DEFAULT_WORKERS) -> Dict[int, NormResult]:
    """
    并行计算多个向量的范数

    Args:
        space (PointedMetricSpace): 环境空间
        vectors (Sequence[FreeVector]): 向量列表
        mode (Union[str, ScalarMode, None]): 标量后端
        max_workers (int): 最大并发线程数

    Returns:
        Dict[int, NormResult]: 向量下标到结果的映射，按下标排序；求解失败的向量记录日志后跳过
    """
    results: Dict[int, NormResult] = {}
    if not vectors:
        logger.warning("向量列表为空")
        return results

    with ThreadPoolExecutor(max_workers=max(1, min(max_workers, len(vectors)))) as executor:
        future_to_index = {executor.submit(compute_norm, space, vec, mode): i for i, vec in enumerate(vectors)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"第 {index} 个向量的范数计算失败: {e}")

    logger.info(f"批量范数计算完成，成功 {len(results)}/{len(vectors)} 个向量")
    return dict(sorted(results.items()))
