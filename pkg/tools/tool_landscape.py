#!/usr/bin/env python3
"""
景观实验工具
命令行运行实验配置, 用法与 python -m src.cli 相同

    python tools/tool_landscape.py validate docs/example_scaling.json
    python tools/tool_landscape.py run docs/example_scaling.json
    python tools/tool_landscape.py replay scaling_study 8 <seed>
"""

import sys
import os

# 添加仓库根目录, 以包的形式导入 src
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
