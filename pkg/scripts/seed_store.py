#!/usr/bin/env python3
"""Seed a record store with pending-review records (used by the UI contract
test and handy for local demos).

    python3 scripts/seed_store.py /tmp/store --pending 2
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from controlgen import gherkin, rubric  # noqa: E402
from controlgen.catalog import ControlTypeId  # noqa: E402
from controlgen.resources import load_catalog  # noqa: E402
from controlgen.store import (  # noqa: E402
    GenerationRecord,
    RecordStatus,
    RecordStore,
    new_record_id,
    utcnow,
)

FEATURE = ROOT / "fixtures" / "features" / "ex_ddb_at_rest_001.feature"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("store_dir")
    parser.add_argument("--pending", type=int, default=2)
    args = parser.parse_args()

    catalog = load_catalog(ROOT / "catalog" / "aws_desk_catalog.json")
    schema = catalog.get("dynamodb", "Table")
    control = gherkin.parse(FEATURE.read_text(encoding="utf-8"))
    store = RecordStore(args.store_dir)
    for _ in range(args.pending):
        now = utcnow()
        store.append(
            GenerationRecord(
                id=new_record_id(),
                created_at=now,
                updated_at=now,
                service="dynamodb",
                resource="Table",
                control_type=ControlTypeId.ENCRYPTION_AT_REST,
                prompt_hash="seeded",
                provider_name="seed",
                raw_output="",
                control=control,
                findings=[],
                rubric=rubric.machine_prescreen(control, schema),
                status=RecordStatus.PENDING_REVIEW,
            )
        )
    print(f"seeded {args.pending} pending records in {args.store_dir}")


if __name__ == "__main__":
    main()
