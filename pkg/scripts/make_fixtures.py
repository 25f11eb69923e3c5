"""Regenerate fixtures/*.json from the builders in congestlab.fixtures."""
from pathlib import Path

from congestlab.fixtures import SHIPPED
from congestlab.formats import serialize_instance

out = Path(__file__).resolve().parent.parent / "fixtures"
out.mkdir(exist_ok=True)
for name, build in SHIPPED.items():
    (out / f"{name}.json").write_text(serialize_instance(build()))
    print(out / f"{name}.json")
