"""End-to-end: config text -> analysis -> report in three formats.

The same pipeline backs the command line interface:

    kuokit check --config problem.toml --format human
"""

import json

from kuokit import emit_report, load_config, run_analysis

CONFIG = """
[problem]
r = 2
checks = ["K", "K_tilde", "gram3", "dual4", "certificate"]

[germ]
components = ["x1^2 + x2^2"]

[sigma]
kind = "origin"

[sampling]
alpha = 0.5
shells = 10
per_shell = 128
seed = 2024

[[arcs]]
components = ["t", "t^2"]
"""

config = load_config(CONFIG)
report = run_analysis(config)

print("=== human ===")
print(emit_report(report, "human"))

print("=== csv (first lines) ===")
print("\n".join(emit_report(report, "csv").splitlines()[:6]))

print("\n=== json (verdict statuses) ===")
data = json.loads(emit_report(report, "json"))
for v in data["verdicts"]:
    print(f"  {v['condition']}: {v['status']}  stable={None if v['stability'] is None else v['stability'].get('stable')}")

print("\nexit code:", report.exit_code)
