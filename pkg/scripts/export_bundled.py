#!/usr/bin/env python3
"""Write the bundled specs and traces out as files for CLI experimentation.

Usage: python scripts/export_bundled.py [DIR]   (default ./bundled-out)
"""

import sys
from pathlib import Path

from gapstream.builtin_specs import SPEC_NAMES, _TRACE_KEYS, spec_text, trace_text


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "bundled-out")
    out.mkdir(parents=True, exist_ok=True)
    for name in SPEC_NAMES:
        (out / f"{name}.spec").write_text(spec_text(name))
        for key in _TRACE_KEYS[name]:
            (out / f"{key}.trace").write_text(trace_text(key))
    print(f"wrote {len(SPEC_NAMES)} specs and their traces to {out}/")


if __name__ == "__main__":
    main()
