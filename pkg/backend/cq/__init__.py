"""
cq: k-means квантование цвета в RGB, XYZ и LUV с оценкой VIF и
круговыми / линейными статистиками тона, насыщенности и светлоты.
"""

__version__ = "1.0.0"
