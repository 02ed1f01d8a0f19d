"""Golden-file cases for the CLI.  Regenerate with ``python3 tests/golden_cases.py --write``."""

import contextlib
import io
import sys
from pathlib import Path

from gammadelta.cli import main

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "verify_all": ["verify", "all"],
    "verify_all_p3": ["verify", "all", "--p", "3", "--weight-bound", "9"],
    "delta_expand": ["compute", "delta-expand", "--expr", "d(x+y)"],
    "pd_env": ["compute", "pd-env", "--ring", "Z(3)[x]<y1,y2>", "--expr", "g_3(x*y1 + y2)", "--p", "3"],
    "prism_pn_1": ["compute", "prism-pn", "--n", "1"],
    "prism_pn_2": ["compute", "prism-pn", "--n", "2"],
    "prism_unit_2": ["compute", "prism-unit", "--n", "2"],
    "conj_table_pd": ["compute", "conj-table", "--kind", "pd", "--r", "2"],
    "conj_table_prism": ["compute", "conj-table", "--kind", "prism", "--r", "2", "--p", "3"],
    "ht_matrix": ["compute", "ht-matrix", "--i", "4", "--r", "2"],
    "derham_h": ["compute", "derham-h", "--ring", "F2[x]", "--weight", "2"],
    "cartier": ["compute", "cartier", "--ring", "F3[x,y]", "--weight-bound", "9"],
}


def run(args):
    """(exit code, stdout) of the CLI."""
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(args) + ["--format", "json"])
    return code, buf.getvalue()


if __name__ == "__main__":
    if "--write" in sys.argv:
        GOLDEN.mkdir(exist_ok=True)
        for name, args in CASES.items():
            code, out = run(args)
            (GOLDEN / f"{name}.json").write_text(out)
            print(f"{name}: exit {code}")
