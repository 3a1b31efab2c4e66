#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
低 Pauli 维数酉矩阵过程层析的命令行入口
用法：
    python main.py gen spec.json --out instance.json --seed 1
    python main.py learn instance.json --learner kdim-inv --eps 0.1 --out report.json
    python main.py sweep grid.yaml --out sweep.csv --jobs 4
    python main.py verify pauli
"""

import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.main import main

if __name__ == '__main__':
    sys.exit(main())
