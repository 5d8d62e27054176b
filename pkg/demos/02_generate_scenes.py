"""Symbolic scenes: generation, fact encoding, and perception-style noise."""

from nal import NoiseSpec, corrupt_facts, generate_scene, oracle, scene_to_facts

# a scene satisfying class s1 (contains a blue square) ...
scene = generate_scene("s1", positive=True, rng_seed=7, image_id="img_7")
print(f"{scene.image_id}: {len(scene.objects)} objects, label {scene.label}")
for obj in scene.objects:
    print(f"  {obj.size:5} {obj.color:5} {obj.shape:8} at col={obj.col} row={obj.row}")
print("oracle s1:", oracle("s1", scene), "| oracle s6:", oracle("s6", scene))

# ... encoded as facts: image/1, in/2, one atom per attribute, above/left pairs
facts = scene_to_facts(scene)
print(f"\n{len(facts)} facts, e.g.:")
for fact in facts[:8]:
    print(" ", f"{fact}.")

# attribute noise resamples within the family; dropping removes whole objects
noisy = corrupt_facts(facts, NoiseSpec(p_attr=0.3, p_drop=0.0, seed=1))
changed = [(a, b) for a, b in zip(facts, noisy) if a != b]
print(f"\nwith p_attr=0.3, {len(changed)} attribute facts changed:")
for before, after in changed[:5]:
    print(f"  {before}.  ->  {after}.")

dropped = corrupt_facts(facts, NoiseSpec(p_attr=0.0, p_drop=0.5, seed=2))
print(f"with p_drop=0.5, {len(facts) - len(dropped)} facts vanished "
      f"({len(dropped)} remain)")
