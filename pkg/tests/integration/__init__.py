# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.
from pathlib import Path

SRC = Path(__file__).resolve().parents[2] / "src"
SEED = "20240601"
