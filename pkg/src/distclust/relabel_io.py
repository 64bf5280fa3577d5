"""CSV persistence for the site-local coverage-ownership bookkeeping.

Ownership is never transmitted; a site stores it next to its data so the
relabeling step can run when the global labels come back.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

from .errors import InputError


def save_owners_csv(coverage_owner: Mapping[int, int], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "owner_seq"])
        for oid, seq in sorted(coverage_owner.items()):
            writer.writerow([oid, seq])


def load_owners_csv(path: str | Path) -> dict[int, int]:
    owners: dict[int, int] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "owner_seq"]:
            raise InputError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                owners[int(row[0])] = int(row[1])
            except (ValueError, IndexError) as e:
                raise InputError(f"{path}:{lineno}: {e}") from None
    return owners
