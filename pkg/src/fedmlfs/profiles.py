"""Built-in profiles for the standard Mulan benchmark datasets.

The default selection sizes and reference average-precision values are the
published figures for this method on these datasets; the CLI falls back to
them when the dataset file stem matches a profile name.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class DatasetProfile:
    name: str
    instances: int
    features: int
    labels: int
    default_select: int
    reference_ap: float


PROFILES = {
    "cal500": DatasetProfile("cal500", 502, 68, 174, 27, 0.5119),
    "corel5k": DatasetProfile("corel5k", 5000, 499, 374, 150, 0.2409),
    "emotions": DatasetProfile("emotions", 593, 72, 6, 28, 0.7749),
    "enron": DatasetProfile("enron", 1702, 1001, 53, 100, 0.6687),
    "yeast": DatasetProfile("yeast", 2417, 103, 14, 31, 0.7792),
}


def profile_for(dataset_path) -> DatasetProfile | None:
    """Profile matching the dataset file stem, if any."""
    stem = Path(str(dataset_path)).stem.lower()
    for name, profile in PROFILES.items():
        if stem == name or stem.startswith(name + "-") or stem.startswith(name + "_"):
            return profile
    return None
