"""
Run the gibbs-discovery command line from a source checkout.

Examples:
    python scripts/gibbs_discovery.py fit data/aerobic.csv --prior pd
    python scripts/gibbs_discovery.py ci data/aerobic.csv --prior pd --fit --l 0,1,5,10 --seed 1
    python scripts/gibbs_discovery.py simulate --s 1.1 --n 1000 --replicates 500 --seed 7
"""

from __future__ import annotations

from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
import sys  # noqa: E402

sys.path.append(str(ROOT / "src"))

from gibbs_discovery.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
