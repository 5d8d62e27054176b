import json

import pytest

from nal.core import parse_framework
from nal.scenes import (
    CLEVR_CLASSES,
    SHAPES_CLASSES,
    NoiseSpec,
    Scene,
    SceneObject,
    corrupt_facts,
    facts_to_text,
    generate_dataset,
    generate_scene,
    load_dataset_index,
    oracle,
    render_scene,
    scene_to_facts,
)


def scene_of(objs, mode="shapes", label="", image_id="img_0"):
    return Scene(image_id=image_id, objects=tuple(objs), label=label, mode=mode)


def obj(shape, color, size="small", col=0, row=0, material=None, id="o"):
    return SceneObject(id=id, shape=shape, color=color, size=size,
                       col=col, row=row, material=material)


class TestOracle:
    def test_blue_square_satisfies_s1(self):
        assert oracle("s1", scene_of([obj("square", "blue")]))

    def test_single_red_circle_fails_s2(self):
        assert not oracle("s2", scene_of([obj("circle", "red")]))

    def test_s4_above_convention(self):
        scene = scene_of([
            obj("circle", "red", col=1, row=0, id="a"),
            obj("square", "blue", col=1, row=2, id="b"),
        ])
        assert oracle("s4", scene)
        flipped = scene_of([
            obj("circle", "red", col=1, row=2, id="a"),
            obj("square", "blue", col=1, row=0, id="b"),
        ])
        assert not oracle("s4", flipped)

    def test_s5_left_convention(self):
        scene = scene_of([
            obj("triangle", "red", col=0, row=1, id="a"),
            obj("circle", "green", col=2, row=1, id="b"),
        ])
        assert oracle("s5", scene)

    def test_s6_rejects_blue_circle(self):
        assert oracle("s6", scene_of([obj("square", "blue")]))
        assert not oracle("s6", scene_of([obj("circle", "blue")]))

    def test_clevr_concepts(self):
        c1 = scene_of([
            obj("cube", "gray", "large", 0, 0, "metal", "a"),
            obj("cylinder", "red", "large", 1, 0, "rubber", "b"),
        ], mode="clevr")
        assert oracle("c1", c1) and not oracle("c2", c1) and not oracle("c3", c1)

    def test_unknown_class(self):
        with pytest.raises(ValueError):
            oracle("s9", scene_of([obj("square", "blue")]))


class TestGeneration:
    @pytest.mark.parametrize("class_id", SHAPES_CLASSES + CLEVR_CLASSES)
    @pytest.mark.parametrize("positive", [True, False])
    def test_label_fidelity(self, class_id, positive):
        for seed in range(5):
            scene = generate_scene(class_id, positive, seed)
            assert oracle(class_id, scene) == positive
            assert 1 <= len(scene.objects) <= 9
            cells = {(o.col, o.row) for o in scene.objects}
            assert len(cells) == len(scene.objects)

    def test_clevr_positives_are_exclusive(self):
        for seed in range(10):
            scene = generate_scene("c2", True, seed)
            assert not oracle("c1", scene) and not oracle("c3", scene)

    def test_deterministic_per_seed(self):
        a = generate_scene("s3", True, 42)
        b = generate_scene("s3", True, 42)
        assert a == b


class TestFacts:
    def test_one_object_fact_set(self):
        scene = scene_of([obj("square", "blue", "small", 1, 1)])
        facts = scene_to_facts(scene)
        texts = sorted(map(str, facts))
        assert texts == [
            "blue(obj_0_0)", "image(img_0)", "in(img_0,obj_0_0)",
            "small(obj_0_0)", "square(obj_0_0)",
        ]

    def test_relations_follow_the_grid_convention(self):
        scene = scene_of([
            obj("square", "blue", col=0, row=0, id="a"),
            obj("circle", "red", col=2, row=2, id="b"),
        ])
        texts = {str(a) for a in scene_to_facts(scene)}
        assert "above(obj_0_0,obj_0_1)" in texts
        assert "left(obj_0_0,obj_0_1)" in texts
        assert "above(obj_0_1,obj_0_0)" not in texts

    def test_relation_antisymmetry_property(self):
        for seed in range(10):
            scene = generate_scene("s4", False, seed)
            texts = {str(a) for a in scene_to_facts(scene)}
            for fact in list(texts):
                if fact.startswith(("above(", "left(")):
                    pred, args = fact.split("(")
                    x, y = args.rstrip(")").split(",")
                    assert f"{pred}({y},{x})" not in texts

    def test_facts_parse_as_aba_fragment(self):
        scene = generate_scene("c3", True, 3)
        fw = parse_framework(facts_to_text(scene_to_facts(scene)))
        assert all(r.is_fact() for r in fw.rules)


class TestNoise:
    def test_zero_noise_is_identity(self):
        facts = scene_to_facts(generate_scene("s1", True, 1))
        assert corrupt_facts(facts, NoiseSpec(0.0, 0.0, seed=9)) == facts

    def test_forced_resample_changes_every_attribute(self):
        facts = scene_to_facts(scene_of([obj("square", "blue", "small")]))
        noisy = corrupt_facts(facts, NoiseSpec(p_attr=1.0, p_drop=0.0, seed=0))
        original = {str(a) for a in facts}
        for fact in noisy:
            if fact.predicate in ("image", "in"):
                continue
            assert str(fact) not in original

    def test_drop_all_keeps_only_image(self):
        facts = scene_to_facts(generate_scene("s1", True, 2))
        noisy = corrupt_facts(facts, NoiseSpec(p_attr=0.0, p_drop=1.0, seed=0))
        assert [str(a) for a in noisy] == ["image(img_0)"]

    def test_resampling_stays_in_family(self):
        facts = scene_to_facts(generate_scene("s1", True, 4))
        noisy = corrupt_facts(facts, NoiseSpec(p_attr=1.0, p_drop=0.0, seed=1))
        shapes = {"square", "triangle", "circle"}
        colors = {"red", "green", "blue"}
        before = {a.args: a.predicate for a in facts if a.predicate in shapes}
        for fact in noisy:
            if fact.predicate in shapes:
                assert before[fact.args] != fact.predicate
            assert fact.predicate not in {"cube", "gray", "metal"}
        assert any(f.predicate in colors for f in noisy)

    def test_deterministic(self):
        facts = scene_to_facts(generate_scene("s2", False, 5))
        spec = NoiseSpec(0.3, 0.2, seed=77)
        assert corrupt_facts(facts, spec) == corrupt_facts(facts, spec)

    def test_probability_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(p_attr=1.5, p_drop=0.0, seed=0)


class TestDataset:
    def test_binary_layout(self, tmp_path):
        index = generate_dataset(tmp_path, "shapes", "s1", 60, seed=0)
        assert (tmp_path / "scenes.jsonl").exists()
        assert (tmp_path / "labels.csv").exists()
        assert len(list((tmp_path / "facts").glob("*.facts"))) == 60
        labels = [s.label for s in index.scenes]
        assert labels.count("s1") == 30 and labels.count("not_s1") == 30
        test = index.images("test")
        assert len(test) == 20
        assert sum(s.label == "s1" for s in test) == 10

    def test_reload_round_trip(self, tmp_path):
        generate_dataset(tmp_path, "shapes", "s6", 20, seed=3)
        index = load_dataset_index(tmp_path)
        assert len(index.scenes) == 20
        assert all(oracle("s6", s) == (s.label == "s6") for s in index.scenes)

    def test_multiclass_clevr_layout(self, tmp_path):
        index = generate_dataset(tmp_path, "clevr", None, 90, seed=0)
        labels = [s.label for s in index.scenes]
        assert labels.count("c1") == labels.count("c2") == labels.count("c3") == 30

    def test_determinism_is_byte_identical(self, tmp_path):
        generate_dataset(tmp_path / "a", "shapes", "s2", 30, seed=5)
        generate_dataset(tmp_path / "b", "shapes", "s2", 30, seed=5)
        for name in ("scenes.jsonl", "labels.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_render_mode(self, tmp_path):
        generate_dataset(tmp_path, "shapes", "s1", 4, seed=0, render=True)
        images = list((tmp_path / "images").glob("*.png"))
        assert len(images) == 4
        img = render_scene(generate_scene("c1", True, 0))
        assert img.size == (32, 32)

    def test_labels_csv_columns(self, tmp_path):
        generate_dataset(tmp_path, "shapes", "s1", 4, seed=0)
        header = (tmp_path / "labels.csv").read_text().splitlines()[0]
        assert header == "image_id,label,confidence"
