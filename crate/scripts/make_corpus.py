#!/usr/bin/env python3
"""Builds corpus/ from the KnotInfo and LinkInfo tables.

Every diagram is written as a PD file with `# key: value` headers. The
`bracket` header is filled in by running `tanglescan oracle` on the file,
so only diagrams small enough for the brute-force sum carry one.

    pip install database_knotinfo sympy
    cargo build --release
    python3 scripts/make_corpus.py
"""

import argparse
import csv
import re
import subprocess
import sys
from pathlib import Path

import sympy

ROOT = Path(__file__).resolve().parent.parent
ORACLE_MAX_N = 16

A, t, x = sympy.symbols("A t x")

KNOTS_10 = [f"10_{i}" for i in range(1, 21)] + ["10_124", "10_132", "10_161"]
KNOTS_BIG = ["11a_1", "11n_34", "12a_1", "12n_242"]
LINKS = [
    "L2a1{0}", "L4a1{0}", "L5a1{0}", "L6a1{0}", "L6a4{0,0}", "L6a5{0,0}",
    "L6n1{0,0}", "L7a1{0}", "L7n1{0}", "L8a8{0}", "L8n3{0,0}", "L9a1{0}",
]


def csv_rows(path):
    csv.field_size_limit(1 << 30)
    with open(path, newline="") as f:
        rows = list(csv.reader(f, delimiter="|"))
    head = rows[0]
    # the second row repeats the columns as human-readable labels
    return {r[head.index("name")]: dict(zip(head, r)) for r in rows[2:]}


def knotinfo_dir():
    try:
        import database_knotinfo
    except ImportError:
        sys.exit("database_knotinfo is not installed")
    return Path(database_knotinfo.__file__).resolve().parent / "csv_data"


def pd_lines(quads, free_loops=0):
    """`quads` holds plain PD quadruples, or `(quad, over)` pairs for an explicit over flag."""
    parts = []
    for q in quads:
        if isinstance(q, tuple):
            q, over = q
            parts.append(f"X[{','.join(str(v) for v in q)}]o{over}")
        else:
            parts.append(f"X[{','.join(str(v) for v in q)}]")
    parts += ["O"] * free_loops
    return " ".join(parts)


def parse_quads(text):
    return [[int(v) for v in m.split(",")] for m in re.findall(r"[\[{]\s*([\d,\s]+?)\s*[\]}]", text)]


def to_a(expr_text, var, power):
    """Rewrites a polynomial in `var` as a polynomial in A with var = A^power."""
    s = expr_text.replace("^", "**")
    e = sympy.expand(sympy.sympify(s, locals={var.name: var}).subs(var, A**power))
    terms = sympy.Poly(sympy.expand(e * A**400), A).terms()
    coeffs = {int(m[0]) - 400: int(c) for m, c in terms}
    return render(coeffs)


def render(coeffs):
    out = []
    for e in sorted(coeffs, reverse=True):
        c = coeffs[e]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            body = ("" if mag == 1 else f"{mag}*") + ("A" if e == 1 else f"A^{e}")
        out.append((sign, body))
    if not out:
        return "0"
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def weave_closure(strands, word):
    """Braid closure in the same slot convention as the core crate."""
    nxt = [1]

    def fresh():
        nxt[0] += 1
        return nxt[0] - 1

    bottom = [fresh() for _ in range(strands)]
    cur = list(bottom)
    touched = [False] * strands
    quads = []
    for l in word:
        i = abs(l) - 1
        tl, tr = fresh(), fresh()
        quads.append(([cur[i], cur[i + 1], tr, tl], 0 if l > 0 else 1))
        cur[i], cur[i + 1] = tl, tr
        touched[i] = touched[i + 1] = True
    rename = {cur[j]: bottom[j] for j in range(strands) if touched[j]}
    out = []
    for q, over in quads:
        out.append(([rename.get(a, a) for a in q], over))
    return out, touched.count(False)


def with_kink(quads, label, side):
    k = max(max(q) for q in quads) + 1
    a2 = k + 1
    quads = [list(q) for q in quads]
    for q in reversed(quads):
        if label in q:
            j = len(q) - 1 - q[::-1].index(label)
            q[j] = a2
            break
    quads.append([label, k, k, a2] if side else [label, a2, k, k])
    return quads


def write_entry(path, name, source, pd, extra=()):
    lines = [f"# name: {name}", f"# source: {source}"]
    lines += [f"# {k}: {v}" for k, v in extra]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n" + pd + "\n")


def annotate(path, binary, n):
    if n > ORACLE_MAX_N:
        return
    res = subprocess.run([binary, "oracle", "--pd", f"@{path}"], capture_output=True, text=True, check=True)
    text = path.read_text().splitlines()
    body = [l for l in text if not l.startswith("#")]
    head = [l for l in text if l.startswith("#") and not l.startswith(("# bracket:", "# oracle:"))]
    head.append(f"# bracket: {res.stdout.strip()}")
    head.append(f"# oracle: tanglescan oracle --pd @{path.name} (2^{n} states)")
    path.write_text("\n".join(head + body) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=ROOT / "corpus")
    ap.add_argument("--bin", default=str(ROOT / "target" / "release" / "tanglescan"))
    ap.add_argument("--csv", type=Path, default=None)
    args = ap.parse_args()
    src = args.csv or knotinfo_dir()
    knots = csv_rows(src / "knotinfo_data_complete.csv")
    links = csv_rows(src / "linkinfo_data_complete.csv")
    written = []

    names = [k for k, r in knots.items() if r["crossing_number"].isdigit() and 3 <= int(r["crossing_number"]) <= 9]
    for name in names + KNOTS_10 + KNOTS_BIG:
        r = knots[name]
        quads = parse_quads(r["pd_notation"])
        p = args.out / "knots" / f"{name}.pd"
        jones = r["jones_polynomial"]
        write_entry(p, name, "KnotInfo pd_notation", pd_lines(quads),
                    [("jones", jones), ("jones_a", to_a(jones, t, -4))])
        written.append((p, len(quads)))

    for name in LINKS:
        r = links[name]
        quads = parse_quads(r["pd_notation_vector"])
        p = args.out / "links" / f"{re.sub(r'[{},]+', '_', name).rstrip('_')}.pd"
        jones = r["jones_polynomial"]
        write_entry(p, name, "LinkInfo pd_notation_vector", pd_lines(quads),
                    [("components", r["components"]), ("jones", jones), ("jones_oriented_a", to_a(jones, x, -2))])
        written.append((p, len(quads)))

    trefoil = parse_quads(knots["3_1"]["pd_notation"])
    fig8 = parse_quads(knots["4_1"]["pd_notation"])
    special = [
        ("unknot", "O", [("jones_a", "1")], 0),
        ("two_unknots", "O O", [], 0),
        ("trefoil_kinked", pd_lines(with_kink(trefoil, 1, True)), [], 4),
        ("trefoil_kinked_twice", pd_lines(with_kink(with_kink(trefoil, 2, False), 5, True)), [], 5),
        ("figure_eight_kinked", pd_lines(with_kink(fig8, 3, False)), [], 5),
        ("trefoil_split_unknot", pd_lines(trefoil, 1), [], 3),
    ]
    sigma3, free = weave_closure(2, [1, 1, 1])
    special.append(("trefoil_braid", pd_lines(sigma3, free), [("jones_a", to_a(knots["3_1"]["jones_polynomial"], t, -4))], 3))
    fig8_braid, free = weave_closure(3, [1, -2, 1, -2])
    special.append(("figure_eight_braid", pd_lines(fig8_braid, free), [("jones_a", to_a(knots["4_1"]["jones_polynomial"], t, -4))], 4))
    for k in (9, 25):
        q, free = weave_closure(2, [1] * k)
        special.append((f"torus_2_{k}", pd_lines(q, free), [], k))
    for name, pd, extra, n in special:
        p = args.out / "special" / f"{name}.pd"
        write_entry(p, name, "constructed", pd, extra)
        written.append((p, n))

    for p, n in written:
        annotate(p, args.bin, n)
    print(f"wrote {len(written)} diagrams to {args.out}")


if __name__ == "__main__":
    main()
