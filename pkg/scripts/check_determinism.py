"""Run each experiment twice with the same seed and compare csv bodies byte for byte."""
import sys
import tempfile
from pathlib import Path

from unidym.cli import main
from unidym.harness.records import body_of

root = Path(__file__).resolve().parent.parent
skip = set(sys.argv[1:])
bad = []
with tempfile.TemporaryDirectory() as tmp:
    for cfg in sorted((root / "configs").glob("*.cfg")):
        if cfg.stem in skip:
            continue
        bodies = []
        for k in range(2):
            out = Path(tmp) / str(k)
            main([cfg.stem, "--config", str(cfg), "--out", str(out)])
            bodies.append(body_of(out / f"{cfg.stem}.csv"))
        same = bodies[0] == bodies[1]
        print(f"{cfg.stem}: {'identical' if same else 'DIFFERENT'}")
        if not same:
            bad.append(cfg.stem)
sys.exit(1 if bad else 0)
