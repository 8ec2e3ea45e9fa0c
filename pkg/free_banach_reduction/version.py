"""
自由Banach空间约化工具包版本信息模块

本模块定义了包的版本号、作者信息、描述信息等基本元数据。
这些信息被setup.py和__init__.py等模块引用，确保版本信息的一致性。

版本更新历史:
- v0.3.0: 新增命令行工具与完整验证套件，支持JSON/文本报告输出
- v0.2.0: 新增拉伸边标注、路径标签与约化映射模块
- v0.1.0: 初始版本发布，支持有点度量空间与自由范数的原始/对偶求解
"""

# 版本号 - 保持与setup.py一致
__version__ = "0.3.0"

# 作者信息
__author__ = "Yaohua Guo"
__email__ = "guo.yaohua@foxmail.com"

# 包描述信息
__description__ = "自由Banach空间约化工具包 - 提供自由范数计算、拉伸边标注构造、路径标签运算与树化等价关系约化的有限规模验证"

# 项目链接
__url__ = "https://github.com/guoyaohua/free-banach-reduction"
__license__ = "MIT"

# 包的关键字
__keywords__ = [
    # 中文关键词
    "自由Banach空间", "运输范数", "最小费用流", "对偶证书", "边标注", "图着色", "路径标签", "Borel约化",

    # 英文关键词
    "lipschitz-free-space", "arens-eells", "transport-norm", "min-cost-flow", "duality",
    "edge-labeling", "graph-coloring", "path-label", "borel-reduction", "treeable"
]

# 更新日志
__changelog__ = {
    "0.3.0": [
        "新增命令行工具：validate、norm、label、paths、reduce、verify、gen 七个子命令",
        "验证套件：对偶性、暴力枚举对照、等距性、下界、范数公理、拉伸常数、一致离散性、余循环、约化、唯一性",
        "报告输出：支持JSON与文本两种格式，失败项附带最小见证",
        "随机实例生成：固定伪随机算法，保证跨平台可复现",
    ],
    "0.2.0": [
        "新增拉伸边标注构造：边图、幂图、贪心着色与组合标签度量",
        "新增森林路径标签：唯一路径标签、组合运算与分离度计算",
        "新增约化映射：平移作用、轨道等价判定与见证",
    ],
    "0.1.0": [
        "初始版本发布",
        "支持有限有点度量空间的构造与公理校验",
        "支持自由范数的原始（运输方案）与对偶（Lipschitz势函数）求解",
    ],
}
