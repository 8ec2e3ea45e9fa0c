"""
自由Banach空间约化工具包

在有限规模上实现树化可数Borel等价关系到阿贝尔群轨道等价关系的构造性约化：
计算有限有点度量空间上的自由（Arens-Eells）范数，构造有限图的拉伸边标注，
在森林上运算路径标签，并以机器验证约化的各项性质。

主要功能:
- 有点度量空间的构造、公理校验与归一化
- 自由范数的原始/对偶求解（精确有理数与浮点两种后端）及证书复核
- 拉伸边标注构造（边图、幂图贪心着色、组合标签度量）
- 森林路径标签的计算、组合、唯一性与一致离散性
- 约化映射、平移作用与轨道等价判定
- 随机实例生成、JSON实例读写与完整验证套件
"""

# 从版本模块导入版本信息
from .version import (
    __version__,
    __author__,
    __email__,
    __description__,
    __url__,
    __license__
)

# 度量空间与形式向量
from .metric_core import (
    ScalarMode,              # 标量后端枚举
    MetricConfig,            # 度量配置类
    StructuralError,         # 结构错误（维度不符、空间不一致、未知点）
    MetricValidationError,   # 度量公理校验失败
    Violation,               # 单条违规记录
    ValidationReport,        # 校验报告
    PointedMetricSpace,      # 有限有点度量空间
    FreeVector,              # 有限支撑的形式向量
    validate_metric,         # 一般度量公理校验
    validate_space,          # 有点度量空间公理校验
    normalize_metric,        # 度量归一化 t/(t+1)
    adjoin_basepoint,        # 添加基点
    vec_add,                 # 向量加法
    vec_scale,               # 标量乘法
    vec_neg,                 # 取负
    vec_support,             # 支撑集
)

# 自由范数
from .free_norm import (
    NormConfig,                # 范数求解配置类
    OracleBudgetError,         # 暴力枚举超出预算
    LowerBoundUndefinedError,  # 支撑下界没有定义
    TransportPlan,             # 运输方案（原始证书）
    LipschitzPotential,        # Lipschitz势函数（对偶证书）
    NormResult,                # 范数结果
    norm_primal,               # 原始问题求解
    norm_dual,                 # 对偶问题求解
    compute_norm,              # 原始与对偶同时求解
    norm_bruteforce,           # 暴力枚举对照
    support_lower_bound,       # 支撑下界
    free_distance,             # 诱导度量
    check_certificates,        # 证书复核
    compute_norms,             # 并行批量计算
)

# 边标注
from .edge_labeling import (
    MetricKind,              # 基础标签度量类型枚举
    LabelingConfig,          # 拉伸标注配置类
    GraphValidationError,    # 边标注公理校验失败
    Edge,                    # 有向标注边
    LabeledGraph,            # 带标签图
    StretchedLabeling,       # 拉伸标注
    validate_graph,          # 边标注公理校验
    oriented_edge,           # 两顶点间边的带符号标签
    build_edge_graph,        # 边图
    power_graph,             # 幂图
    greedy_proper_coloring,  # 贪心真着色
    power_coloring,          # 由距离表直接做幂图着色
    stretch_labeling,        # 拉伸标注构造
    verify_stretched,        # 拉伸常数扫描
    stretch_violations,      # 拉伸违规列表
)

# 路径标签
from .path_labels import (
    CycleError,                 # 图中有圈
    DisconnectedVerticesError,  # 顶点不在同一分支
    Forest,                     # 无圈认证后的森林
    PathLabel,                  # 路径标签
    assert_forest,              # 无圈认证
    path_label,                 # 唯一路径标签
    path_labels_from,           # 从一个顶点出发的全部路径标签
    compose,                    # 路径标签组合
    is_path_label,              # 路径标签判定
    enumerate_path_labels,      # 简单路径枚举
    separation,                 # 分离度
)

# 约化
from .reduction import (
    ReductionPoint,     # 约化映射的像
    OrbitWitness,       # 轨道等价见证
    reduce_point,       # 计算 f(x)
    translate,          # 平移作用
    orbit_equivalent,   # 轨道等价判定
    verify_reduction,   # 约化性质穷举验证
    inject_fault,       # 故障注入
)

# 实例读写与生成
from .instance_io import (
    InstanceParseError,   # 实例格式错误
    parse_instance,       # 解析实例文件
    serialize_instance,   # 序列化实例文件
    parse_vector,         # 解析向量文本
    format_vector,        # 向量文本形式
    random_forest,        # 随机森林
    random_graph,         # 随机连通图
    attach_label_metric,  # 随机显式基础标签度量
    random_space,         # 随机有点度量空间
    random_vector,        # 随机向量
)

# 高层接口
from .api import (
    OutputFormat,     # 报告格式枚举
    SuiteConfig,      # 验证套件配置类
    SuiteOutcome,     # 套件结果
    RunReport,        # 运行报告
    verify_instance,  # 完整验证
)

# 定义包的公开API接口列表，用于 `from free_banach_reduction import *` 导入
__all__ = [
    # 度量空间与形式向量
    "ScalarMode", "MetricConfig", "StructuralError", "MetricValidationError", "Violation",
    "ValidationReport", "PointedMetricSpace", "FreeVector", "validate_metric", "validate_space",
    "normalize_metric", "adjoin_basepoint", "vec_add", "vec_scale", "vec_neg", "vec_support",

    # 自由范数
    "NormConfig", "OracleBudgetError", "LowerBoundUndefinedError", "TransportPlan",
    "LipschitzPotential", "NormResult", "norm_primal", "norm_dual", "compute_norm",
    "norm_bruteforce", "support_lower_bound", "free_distance", "check_certificates", "compute_norms",

    # 边标注
    "MetricKind", "LabelingConfig", "GraphValidationError", "Edge", "LabeledGraph",
    "StretchedLabeling", "validate_graph", "oriented_edge", "build_edge_graph", "power_graph",
    "greedy_proper_coloring", "power_coloring", "stretch_labeling", "verify_stretched", "stretch_violations",

    # 路径标签
    "CycleError", "DisconnectedVerticesError", "Forest", "PathLabel", "assert_forest",
    "path_label", "path_labels_from", "compose", "is_path_label", "enumerate_path_labels", "separation",

    # 约化
    "ReductionPoint", "OrbitWitness", "reduce_point", "translate", "orbit_equivalent",
    "verify_reduction", "inject_fault",

    # 实例读写与生成
    "InstanceParseError", "parse_instance", "serialize_instance", "parse_vector", "format_vector",
    "random_forest", "random_graph", "attach_label_metric", "random_space", "random_vector",

    # 高层接口
    "OutputFormat", "SuiteConfig", "SuiteOutcome", "RunReport", "verify_instance",
]
