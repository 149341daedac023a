"""弗拉门戈节奏与旋律几何分析工具"""

__version__ = "1.0.0"
