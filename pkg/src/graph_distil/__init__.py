"""
graph_distil - 基于图码的双局域Clifford纠缠蒸馏协议工具包

这个包枚举 n→k 双局域Clifford蒸馏协议，计算其在Bell对角输入下的精确统计量，
将协议编译为门电路并在门噪声和测量噪声下模拟，最后评估下游任务
（BB84密钥率、Steane码编码态隐形传态）。
"""
__version__ = "0.1.0"  # graph_distil包的当前版本
