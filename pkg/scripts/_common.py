"""Shared helpers for the experiment scripts."""

import argparse
from pathlib import Path

from carpetlab.io import write_json


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--quick", action="store_true", help="smaller sizes for a fast check")
    return p


def save(out: str, name: str, payload) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    target = write_json(path / name, payload)
    print(f"wrote {target}")
    return target
