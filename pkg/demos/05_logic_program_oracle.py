"""Cross-checking the extension solver against a stable-model enumerator.

A flat framework maps to a normal logic program by replacing each assumption
in a rule body with negation-as-failure of its contrary; the stable models of
that program coincide with the stable-extension closures.  The brute-force
enumerator below checks the Gelfond-Lifschitz condition per candidate, so it
is an oracle that shares no code with the extension solver.
"""

from nal import (
    brute_force_stable_models,
    ground,
    parse_framework,
    stable_extensions,
    to_logic_program,
)

SOURCE = """
pa :- a. pb :- b. base.
assumption(a). assumption(b).
contrary(a, pb). contrary(b, pa).
"""

fw = parse_framework(SOURCE)
lp = to_logic_program(fw)
print("logic program:")
print(lp.to_text())

gfw = ground(fw)
extension_side = sorted(
    sorted(str(a) for a in e.closure if a not in gfw.assumptions)
    for e in stable_extensions(gfw)
)
model_side = sorted(
    sorted(map(str, m)) for m in brute_force_stable_models(lp)
)
print("extension closures:", extension_side)
print("stable models:     ", model_side)
print("agree:", extension_side == model_side)

# and the classic program with no stable model at all
none = parse_framework("p :- a. assumption(a). contrary(a, p).")
print("\n'p :- not p' has", len(brute_force_stable_models(to_logic_program(none))),
      "stable models and", len(stable_extensions(ground(none))), "stable extensions")
