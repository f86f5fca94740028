"""Regenerate tests/golden/theories.json from the brute-force oracle."""
import json
from pathlib import Path

from sct.chartab import FIXTURES, fixture
from sct.enumeration import ORACLE_MAX_K, enumerate_theories

out = {}
for name in FIXTURES:
    t = fixture(name)
    if t.k <= ORACLE_MAX_K:
        out[name] = enumerate_theories(t, "oracle").to_json()
path = Path(__file__).resolve().parent.parent / "tests" / "golden" / "theories.json"
path.write_text(json.dumps(out, sort_keys=True, indent=1) + "\n")
print(f"wrote {path}: " + ", ".join(f"{k}={v['count']}" for k, v in out.items()))
