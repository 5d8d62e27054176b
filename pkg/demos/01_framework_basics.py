"""A first framework: two images, one defeasible rule, one stable extension.

Both images contain a circle; the second also contains a square.  The rule
says an image is in class c_1 if it contains a circle -- unless it also
contains a square, which defeats the assumption guarding the rule.
"""

from nal import (
    compute_attacks,
    construct_arguments,
    ground,
    is_cautious,
    parse_atom,
    parse_framework,
    stable_extensions,
)

SOURCE = """
circle(A) :- A=img_1.
circle(A) :- A=img_2.
square(A) :- A=img_2.
c_1(A) :- circle(A), alpha(A).
c_alpha(A) :- square(A).
assumption(alpha(A)).
contrary(alpha(A), c_alpha(A)).
"""

fw = parse_framework(SOURCE)
print(f"parsed {len(fw.rules)} rules, {len(fw.assumptions)} assumption schema(s)")

gfw = ground(fw)
print(f"grounded over constants {sorted(gfw.constants)}")

for ext in stable_extensions(gfw):
    print("stable extension, assumptions:", sorted(map(str, ext.assumptions_in)))
    print("  derives:", sorted(map(str, ext.closure)))

for text in ("c_1(img_1)", "c_1(img_2)", "circle(img_2)"):
    print(f"cautiously accepted {text}?", is_cautious(gfw, parse_atom(text)))

# arguments are derivation trees; attacks undercut supporting assumptions
arguments = []
for claim in ("c_1(img_1)", "c_1(img_2)", "circle(img_2)", "c_alpha(img_2)"):
    arguments += construct_arguments(gfw, parse_atom(claim))
print("\narguments:")
for argument in arguments:
    print(" ", argument)
for attack in compute_attacks(arguments, gfw):
    print(f"attack: [{attack.attacker}] undercuts {attack.undercut_assumption} "
          f"in [{attack.target}]")
