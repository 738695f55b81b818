"""Checks presets and the JSON written by the renyi tool against schemas/."""

import json
import pathlib
import subprocess
import sys

import jsonschema

renyi, root = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in (root / "schemas").glob("*.schema.json")}
presets = root / "presets"


def check(kind, doc, what):
    validator = jsonschema.Draft202012Validator(schemas[kind])
    errors = sorted(validator.iter_errors(doc), key=str)
    if errors:
        sys.exit(f"{what} does not match {kind}: {errors[0].message} at {list(errors[0].absolute_path)}")
    print(f"ok  {what} ({kind})")


def run(*args):
    out = subprocess.run([renyi, *args, "--json"], capture_output=True, text=True)
    if out.returncode != 0:
        sys.exit(f"renyi {' '.join(args)} exited with {out.returncode}: {out.stderr}")
    return json.loads(out.stdout)


for schema in schemas.values():
    jsonschema.Draft202012Validator.check_schema(schema)

check("bell", json.loads((presets / "chsh.json").read_text()), "presets/chsh.json")
check("bell", json.loads((presets / "i3322.json").read_text()), "presets/i3322.json")
check("protocol", json.loads((presets / "chsh_protocol.json").read_text()), "presets/chsh_protocol.json")
check("strategy", json.loads((presets / "tsirelson_strategy.json").read_text()), "presets/tsirelson_strategy.json")
check("attack", json.loads((presets / "classical_attack.json").read_text()), "presets/classical_attack.json")
check("cq", json.loads((presets / "cq_example.json").read_text()), "presets/cq_example.json")

for r in run("counterexample", "--grid", "1.2:2:3")["reports"]:
    check("counterexample-report", r, "counterexample report")
check("suite-report", run("verify", "--seed", "3", "--count", "3"), "verify report")
check("two-round-result",
      run("simulate", "--proto", str(presets / "chsh_protocol.json"), "--attack", str(presets / "classical_attack.json")),
      "simulate result")
rate = run("rate", "--proto", str(presets / "chsh_protocol.json"), "--restarts", "1", "--alpha", "1.5")
check("protocol", rate["protocol"], "rate protocol")
check("constraints", rate["constraints"], "rate constraints")
for r in rate["reports"]:
    check("rate-report", r, "rate report")
cmp = run("compare", "--bell", str(presets / "chsh.json"), "--restarts", "2", "--alpha", "2")
check("strategy", cmp["strategy"], "compare strategy")
