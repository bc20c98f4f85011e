#!/usr/bin/env python3
"""Regenerate the bundled benchmark circuits under benchmarks/."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from wavecamo.bench_gen import generate  # noqa: E402


def main() -> None:
    root = pathlib.Path(__file__).resolve().parents[1]
    names = generate(root / "benchmarks")
    for name in names:
        print(f"wrote benchmarks/{name}.bench")


if __name__ == "__main__":
    main()
