"""
Serialize - 结果文件的 JSON 规范化
"""
import math

import numpy as np


def json_safe(obj):
    """
    递归转为可严格序列化的内建类型

    numpy 标量与数组转为内建类型；非有限浮点数记为字符串 "inf"、"-inf"、"nan"，
    输出因此总能通过 json.dump(..., allow_nan=False)。
    """
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_safe(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    return obj
