import sys
from pathlib import Path

# Make the tests/ helpers (synth.py) importable regardless of invocation dir.
sys.path.insert(0, str(Path(__file__).resolve().parent))
