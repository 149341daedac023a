"""测试公共设置"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.notation import CANONICAL_PATTERNS, parse_pitch_track  # noqa: E402


@pytest.fixture
def repo_root() -> Path:
    return ROOT


@pytest.fixture
def canonical():
    return dict(CANONICAL_PATTERNS)


@pytest.fixture
def debla():
    text = (ROOT / "data" / "melodies" / "debla.csv").read_text(encoding="utf-8")
    return parse_pitch_track(text, "hz", "debla")
