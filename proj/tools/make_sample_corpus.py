#!/usr/bin/env python3
"""Generate the synthetic CCS-labelled sample corpus shipped in data/.

The output is deterministic for a given --seed. Every label gets
--per-label verified atomic commits plus a handful of unverified ones, and
a small number of records that ingestion is expected to drop (excluded
types, empty fields) are mixed in.
"""

import argparse
import json
import random

WORDS = """
account adapter alias archive audit backoff badge batch buffer bundle cache
channel checksum chunk client cluster codec column config context cursor
daemon delta digest domain draft entry event export feature fetch field filter
flag frame gateway graph handle header hook index inventory job journal kernel
key label layer ledger limit listener loader locale lock manifest marker matrix
member metric mirror module monitor node notice offset option order packet
page parser patch payload peer pipeline plugin policy pool port profile prompt
proxy query queue quota range reader record region registry release replica
report request resolver resource result route rule runner schema scope session
shard signal slot snapshot socket source span stage state stream summary
symbol table tag target task tenant theme thread ticket timer token topic
trace tracker upload user value vector version view volume watcher widget
window worker writer zone
""".split()

VERBS = """
add allow apply build check clamp collect compute convert count create decode
emit encode ensure expose fetch flush format handle init load lookup merge
normalize parse persist prune read refresh register reject render reset
resolve retry return scan select send serialize skip sort split store sync
trim update validate verify wrap write
""".split()

LANGS = [
    ("py", "src/{pkg}/{mod}.py"),
    ("ts", "src/{pkg}/{mod}.ts"),
    ("go", "pkg/{pkg}/{mod}.go"),
    ("rs", "src/{pkg}/{mod}.rs"),
    ("java", "src/main/java/org/example/{pkg}/{Mod}.java"),
]


def ident(rng, parts=2):
    return "_".join(rng.choice(WORDS) for _ in range(parts))


def camel(name):
    return "".join(p.capitalize() for p in name.split("_"))


def hunk(old_start, old_lines, new_start, new_lines, body, section=""):
    def rng_part(start, count):
        return f"{start}" if count == 1 else f"{start},{count}"
    head = f"@@ -{rng_part(old_start, old_lines)} +{rng_part(new_start, new_lines)} @@"
    if section:
        head += " " + section
    return [head] + body


def file_diff(path, hunks, rng, new_file=False, deleted=False):
    idx_a = "%07x" % rng.getrandbits(28)
    idx_b = "%07x" % rng.getrandbits(28)
    out = [f"diff --git a/{path} b/{path}"]
    if new_file:
        out.append("new file mode 100644")
        out.append(f"index 0000000..{idx_b}")
        out.append("--- /dev/null")
        out.append(f"+++ b/{path}")
    elif deleted:
        out.append("deleted file mode 100644")
        out.append(f"index {idx_a}..0000000")
        out.append(f"--- a/{path}")
        out.append("+++ /dev/null")
    else:
        out.append(f"index {idx_a}..{idx_b} 100644")
        out.append(f"--- a/{path}")
        out.append(f"+++ b/{path}")
    for h in hunks:
        out.extend(h)
    return out


def code_lines(rng, lang, n, indent="    "):
    lines = []
    for _ in range(n):
        a, b = ident(rng), ident(rng, 1)
        kind = rng.randrange(4)
        if lang == "py":
            lines.append([f"{indent}{a} = {rng.choice(VERBS)}_{b}({ident(rng, 1)})",
                          f"{indent}if {a} is None:",
                          f"{indent}return self.{b}",
                          f"{indent}self.{b}.append({a})"][kind])
        else:
            lines.append([f"{indent}const {a} = {rng.choice(VERBS)}{camel(b)}({ident(rng, 1)});",
                          f"{indent}if ({a} == null) {{ return {b}; }}",
                          f"{indent}{b}.push({a});",
                          f"{indent}// {rng.choice(VERBS)} {rng.choice(WORDS)} before {rng.choice(WORDS)}"][kind])
    return lines


def source_path(rng):
    lang, tmpl = rng.choice(LANGS)
    mod = ident(rng)
    return lang, tmpl.format(pkg=rng.choice(WORDS), mod=mod, Mod=camel(mod))


def ctx(rng, lang, n):
    return [" " + l for l in code_lines(rng, lang, n)]


def gen_feat(rng):
    lang, path = source_path(rng)
    fn = f"{rng.choice(VERBS)}_{ident(rng)}"
    start = rng.randint(10, 400)
    added = code_lines(rng, lang, rng.randint(4, 14))
    if lang == "py":
        added = [f"    def {fn}(self, {ident(rng, 1)}):"] + ["    " + l for l in added]
    else:
        added = [f"  {camel(fn)}({ident(rng, 1)}) {{"] + ["  " + l for l in added] + ["  }"]
    before, after = ctx(rng, lang, 3), ctx(rng, lang, 3)
    body = before + ["+" + l for l in added] + after
    hunks = [hunk(start, 6, start, 6 + len(added), body)]
    files = [file_diff(path, hunks, rng)]
    if rng.random() < 0.35:
        lang2, path2 = source_path(rng)
        new = code_lines(rng, lang2, rng.randint(3, 10), indent="")
        files.append(file_diff(path2, [hunk(0, 0, 1, len(new), ["+" + l for l in new])], rng, new_file=True))
    subject = f"add {fn.replace('_', ' ')} to {rng.choice(WORDS)} {rng.choice(WORDS)}"
    return subject, files


def gen_fix(rng):
    lang, path = source_path(rng)
    start = rng.randint(5, 600)
    var = ident(rng)
    if lang == "py":
        old = [f"    if {var} > {rng.choice(['limit', 'size', 'count'])}:"]
        new = [f"    if {var} >= {rng.choice(['limit', 'size', 'count'])}:"]
    else:
        old = [f"    if ({var} > {rng.choice(['limit', 'size', 'count'])}) {{"]
        new = [f"    if ({var} >= {rng.choice(['limit', 'size', 'count'])}) {{"]
    extra = code_lines(rng, lang, rng.randint(0, 4))
    body = ctx(rng, lang, 3) + ["-" + l for l in old] + ["+" + l for l in new + extra] + ctx(rng, lang, 3)
    hunks = [hunk(start, 7, start, 7 + len(extra), body)]
    if rng.random() < 0.3:
        s2 = start + rng.randint(30, 120)
        o = code_lines(rng, lang, 1)
        n = code_lines(rng, lang, 1)
        hunks.append(hunk(s2, 7, s2 + len(extra), 7,
                          ctx(rng, lang, 3) + ["-" + l for l in o] + ["+" + l for l in n] + ctx(rng, lang, 3)))
    subject = f"handle {rng.choice(['off-by-one', 'null', 'empty', 'stale', 'negative'])} {var.replace('_', ' ')} in {rng.choice(WORDS)}"
    return subject, [file_diff(path, hunks, rng)]


def gen_refactor(rng):
    lang, path = source_path(rng)
    old_name, new_name = ident(rng), ident(rng)
    start = rng.randint(5, 300)
    body = ctx(rng, lang, 2)
    k = rng.randint(2, 6)
    for _ in range(k):
        tail = f"({ident(rng, 1)})"
        body.append(f"-    result = {old_name}{tail}")
        body.append(f"+    result = {new_name}{tail}")
    body += ctx(rng, lang, 2)
    hunks = [hunk(start, 4 + k, start, 4 + k, body)]
    files = [file_diff(path, hunks, rng)]
    if rng.random() < 0.4:
        _, path2 = source_path(rng)
        s = rng.randint(1, 80)
        mod = rng.choice(WORDS)
        body2 = [f" # {ident(rng)}", f"-from {mod} import {old_name}", f"+from {mod} import {new_name}",
                 f" {ident(rng)} = None"]
        files.append(file_diff(path2, [hunk(s, 3, s, 3, body2)], rng))
    subject = f"rename {old_name.replace('_', ' ')} to {new_name.replace('_', ' ')}"
    return subject, files


def prose(rng, n):
    out = []
    for _ in range(n):
        w = [rng.choice(WORDS + VERBS) for _ in range(rng.randint(6, 14))]
        out.append(" ".join(w).capitalize() + ".")
    return out


def gen_docs(rng):
    path = rng.choice(["README.md", "docs/{}.md", "docs/guide/{}.rst", "CONTRIBUTING.md", "docs/api/{}.md"]).format(ident(rng))
    start = rng.randint(1, 200)
    old = prose(rng, rng.randint(1, 3))
    new = prose(rng, rng.randint(1, 5))
    body = [" " + l for l in prose(rng, 2)] + ["-" + l for l in old] + ["+" + l for l in new] + [" " + l for l in prose(rng, 2)]
    subject = f"document {rng.choice(WORDS)} {rng.choice(WORDS)} options"
    return subject, [file_diff(path, [hunk(start, 4 + len(old), start, 4 + len(new), body)], rng)]


def gen_test(rng):
    lang, _ = source_path(rng)
    name = ident(rng)
    path = {"py": f"tests/test_{name}.py", "ts": f"test/{name}.spec.ts", "go": f"pkg/{rng.choice(WORDS)}/{name}_test.go",
            "rs": f"tests/{name}.rs", "java": f"src/test/java/org/example/{camel(name)}Test.java"}[lang]
    cases = []
    for _ in range(rng.randint(1, 3)):
        case = f"{rng.choice(VERBS)}_{ident(rng)}"
        if lang == "py":
            cases += [f"def test_{case}():", f"    {name} = make_{rng.choice(WORDS)}()",
                      f"    assert {name}.{rng.choice(VERBS)}() == {rng.randint(0, 99)}", ""]
        else:
            cases += [f"test('{case.replace('_', ' ')}', () => {{", f"  const {name} = make{camel(rng.choice(WORDS))}();",
                      f"  expect({name}.{rng.choice(VERBS)}()).toBe({rng.randint(0, 99)});", "});"]
    new_file = rng.random() < 0.5
    if new_file:
        hunks = [hunk(0, 0, 1, len(cases), ["+" + l for l in cases])]
    else:
        s = rng.randint(10, 300)
        body = [" " + l for l in ["", f"# {ident(rng)}"]] + ["+" + l for l in cases] + [" "]
        hunks = [hunk(s, 3, s, 3 + len(cases), body)]
    subject = f"cover {name.replace('_', ' ')} {rng.choice(['edge cases', 'error path', 'empty input', 'retries'])}"
    return subject, [file_diff(path, hunks, rng, new_file=new_file)]


def gen_build(rng):
    kind = rng.randrange(4)
    dep, ver_a, ver_b = ident(rng).replace("_", "-"), f"{rng.randint(0, 9)}.{rng.randint(0, 30)}.{rng.randint(0, 9)}", f"{rng.randint(0, 9)}.{rng.randint(0, 30)}.{rng.randint(0, 9)}"
    if kind == 0:
        path = "package.json"
        body = [f'     "{ident(rng).replace("_", "-")}": "^1.2.0",', f'-    "{dep}": "^{ver_a}",', f'+    "{dep}": "^{ver_b}",', f'     "{ident(rng).replace("_", "-")}": "~0.4.1"']
    elif kind == 1:
        path = "requirements.txt"
        body = [f" {ident(rng).replace('_', '-')}=={ver_a}", f"-{dep}=={ver_a}", f"+{dep}=={ver_b}"]
    elif kind == 2:
        path = "CMakeLists.txt"
        body = [f" add_library({ident(rng)} STATIC)", f"-target_compile_options({ident(rng)} PRIVATE -O2)",
                f"+target_compile_options({ident(rng)} PRIVATE -O3 -Wall)", f" target_link_libraries({ident(rng)} PUBLIC {dep})"]
    else:
        path = "go.mod"
        body = [" require (", f"-\tgithub.com/{rng.choice(WORDS)}/{dep} v{ver_a}", f"+\tgithub.com/{rng.choice(WORDS)}/{dep} v{ver_b}", " )"]
    s = rng.randint(3, 60)
    old_n = sum(1 for l in body if not l.startswith("+"))
    new_n = sum(1 for l in body if not l.startswith("-"))
    subject = f"bump {dep} from {ver_a} to {ver_b}"
    return subject, [file_diff(path, [hunk(s, old_n, s, new_n, body)], rng)]


def gen_ci(rng):
    wf = ident(rng)
    path = rng.choice([f".github/workflows/{wf}.yml", ".gitlab-ci.yml", ".circleci/config.yml", f".github/workflows/{wf}.yaml"])
    step = ident(rng)
    old_v, new_v = rng.randint(2, 3), rng.randint(4, 5)
    body = ["     steps:", f"-      - uses: actions/checkout@v{old_v}", f"+      - uses: actions/checkout@v{new_v}",
            f"       - name: {step.replace('_', ' ')}", f"-        run: make {rng.choice(WORDS)}",
            f"+        run: make {rng.choice(WORDS)} {rng.choice(WORDS)}"]
    if rng.random() < 0.5:
        body.append(f"+        timeout-minutes: {rng.randint(5, 60)}")
    s = rng.randint(5, 80)
    old_n = sum(1 for l in body if not l.startswith("+"))
    new_n = sum(1 for l in body if not l.startswith("-"))
    subject = f"update {step.replace('_', ' ')} workflow job"
    return subject, [file_diff(path, [hunk(s, old_n, s, new_n, body)], rng)]


GENERATORS = {"feat": gen_feat, "fix": gen_fix, "refactor": gen_refactor, "docs": gen_docs,
              "test": gen_test, "build": gen_build, "ci": gen_ci}


def render(files):
    lines = []
    for f in files:
        lines.extend(f)
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--per-label", type=int, default=480)
    ap.add_argument("--unverified", type=int, default=20)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    records = []
    serial = 0

    def emit(label, message, diff, verified):
        nonlocal serial
        serial += 1
        records.append({"id": f"c{serial:05d}", "label": label, "message": message, "diff": diff,
                        "verified_atomic": verified})

    for label, gen in GENERATORS.items():
        for i in range(args.per_label + args.unverified):
            subject, files = gen(rng)
            scope = rng.choice(["", "", f"({rng.choice(WORDS)})"])
            emit(label, f"{label}{scope}: {subject}", render(files), i < args.per_label)
    # excluded types and malformed rows exercise ingestion drop accounting
    for label in ["perf", "style", "chore"]:
        for _ in range(10):
            subject, files = gen_refactor(rng)
            emit(label, f"{label}: {subject}", render(files), True)
    for _ in range(5):
        subject, files = gen_fix(rng)
        emit("fix", f"fix: {subject}", "", True)
    # exact content duplicates of earlier verified records under new ids
    for src in rng.sample(records[: len(GENERATORS) * args.per_label], 12):
        emit(src["label"], src["message"], src["diff"], True)
    rng.shuffle(records)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
