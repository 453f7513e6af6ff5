#!/usr/bin/env python3
"""
slpencil study launcher

Runs the finite-data study and the direct-map Lipschitz experiment on the
problem corpus and writes all tables into one results directory.
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from slpencil.cli import main as slpencil_main  # noqa: E402


def main():
    """Run the configured studies"""
    parser = argparse.ArgumentParser(description="slpencil finite-data and stability studies")
    parser.add_argument("--config", default="configs/default-config.yaml", help="Configuration file")
    parser.add_argument("--problems", default="data/problems", help="Directory of problem files")
    parser.add_argument("--output", default="results", help="Results directory")
    parser.add_argument("--workers", type=int, default=1, help="Worker processes")
    parser.add_argument("--skip-stability", action="store_true", help="Only run the finite-data studies")
    args = parser.parse_args()

    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    failures = 0

    problems = sorted(Path(args.problems).glob("corpus_*.yaml"))
    for problem in problems:
        code = slpencil_main([
            "finite-study",
            "--input", str(problem),
            "--config", args.config,
            "--output", str(output_dir / f"{problem.stem}_study.csv"),
            "--workers", str(args.workers),
        ])
        if code:
            print(f"❌ {problem.name}: exit code {code}")
            failures += 1

    if not args.skip_stability:
        code = slpencil_main([
            "stability",
            "--config", args.config,
            "--output", str(output_dir / "lipschitz_direct.csv"),
            "--workers", str(args.workers),
        ])
        if code:
            print(f"❌ stability: exit code {code}")
            failures += 1

    print(f"\n🎉 Studies finished with {failures} failure(s)")
    print(f"📁 Results saved to: {output_dir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
