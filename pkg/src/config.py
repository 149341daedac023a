"""配置管理模块"""

import os
import yaml
from pathlib import Path
from dataclasses import dataclass, field, asdict, fields
from typing import List, Dict, Any, Optional


@dataclass
class PathConfig:
    data_dir: str = "./data"
    output_dir: str = "./output"

    @property
    def rhythm_file(self) -> str:
        return os.path.join(self.data_dir, "rhythms", "compases.txt")

    @property
    def debla_file(self) -> str:
        return os.path.join(self.data_dir, "melodies", "debla.csv")


@dataclass
class NotationConfig:
    default_n: int = 12
    default_format: str = "onset_list"
    pitch_unit: str = "hz"


@dataclass
class RegularityConfig:
    budget: int = 10_000_000
    n_jobs: int = 1
    tolerance: float = 1e-9


@dataclass
class SegmentationConfig:
    alpha: float = 12.0
    oracle_budget: int = 2000


@dataclass
class PhyloConfig:
    decimals: int = 6


@dataclass
class PlotConfig:
    width: float = 6.0
    height: float = 6.0
    dpi: int = 100


@dataclass
class LoggingConfig:
    level: str = "INFO"


class Config:
    """统一配置管理类"""

    def __init__(self, config_path: str = "configs/config.yaml"):
        self.config_path = config_path
        self._raw_config = self._load_yaml()

        # 初始化各配置模块
        self.paths = self._init_dataclass(PathConfig, "paths")
        self.notation = self._init_dataclass(NotationConfig, "notation")
        self.regularity = self._init_dataclass(RegularityConfig, "regularity")
        self.segmentation = self._init_dataclass(SegmentationConfig, "segmentation")
        self.phylo = self._init_dataclass(PhyloConfig, "phylo")
        self.plot = self._init_dataclass(PlotConfig, "plot")
        self.logging = self._init_dataclass(LoggingConfig, "logging")

    def _load_yaml(self) -> Dict[str, Any]:
        """加载YAML配置文件"""
        if os.path.exists(self.config_path):
            with open(self.config_path, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        return {}

    def _init_dataclass(self, cls, key: str):
        """初始化dataclass配置"""
        data = self._raw_config.get(key, {})
        if isinstance(data, dict):
            return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})
        return cls()

    def ensure_output_dir(self) -> Path:
        """确保输出目录存在"""
        path = Path(self.paths.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def save(self, path: str = None):
        """保存配置到文件"""
        path = path or self.config_path
        config_dict = {
            "paths": asdict(self.paths),
            "notation": asdict(self.notation),
            "regularity": asdict(self.regularity),
            "segmentation": asdict(self.segmentation),
            "phylo": asdict(self.phylo),
            "plot": asdict(self.plot),
            "logging": asdict(self.logging),
        }

        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            yaml.dump(config_dict, f, allow_unicode=True, default_flow_style=False)


@dataclass
class RunConfig:
    """一次命令行运行的全部参数，可序列化后复现"""
    command: str = ""
    inputs: List[str] = field(default_factory=list)
    format: Optional[str] = None
    n: Optional[int] = None
    metric: str = "chronotonic"
    criterion: str = "max-area"
    k: Optional[int] = None
    alpha: Optional[str] = None
    unit: Optional[str] = None
    output: Optional[str] = None
    matrix: Optional[str] = None
    svg: Optional[str] = None
    pattern: Optional[str] = None
    seed: int = 0
    trials: int = 20

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """从argparse结果构建"""
        values = {}
        for f in fields(cls):
            if hasattr(args, f.name):
                value = getattr(args, f.name)
                if value is not None:
                    values[f.name] = value
        values["command"] = getattr(args, "command", "") or ""
        if "inputs" in values and isinstance(values["inputs"], str):
            values["inputs"] = [values["inputs"]]
        return cls(**values)

    def overlay(self, path: str) -> "RunConfig":
        """用运行配置文件覆盖命令行参数"""
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
        merged = asdict(self)
        merged.update({k: v for k, v in data.items() if k in self.__dataclass_fields__})
        return RunConfig(**merged)

    def save(self, path: str):
        """保存运行配置"""
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            yaml.dump(asdict(self), f, allow_unicode=True, default_flow_style=False, sort_keys=True)


# 全局配置实例
_config: Optional[Config] = None


def get_config(config_path: str = "configs/config.yaml") -> Config:
    """获取全局配置实例"""
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def reload_config(config_path: str = "configs/config.yaml") -> Config:
    """重新加载配置"""
    global _config
    _config = Config(config_path)
    return _config
