"""
scripts/epiwave.py
──────────────────
Command-line entry point.

Usage:
  python scripts/epiwave.py analyze    --config configs/baseline.cfg
  python scripts/epiwave.py dispersion --config configs/baseline.cfg --lambda-min 0.01 --lambda-max 10 --samples 500
  python scripts/epiwave.py simulate   --config configs/baseline.cfg --out out/baseline
  python scripts/epiwave.py certify    --config configs/baseline.cfg --c 0.5
"""

import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

from cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
