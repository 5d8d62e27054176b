"""From pixels to facts: the neural front end feeding the symbolic pipeline.

Requires the perception package (``pip install -e perception/``).  Renders a
small dataset, trains the slot autoencoder briefly (a real run uses ~2500+
steps; see perception/README.md), exports facts, and parses them with the
symbolic parser to show the interface is airtight.
"""

import tempfile
from pathlib import Path

from nal.core import parse_framework
from nal.pipeline import load_data
from nal.scenes import generate_dataset

from perception import export_facts, train
from perception.data import load_tensors
from perception.model import ModelConfig

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp) / "rendered"
    generate_dataset(root, "shapes", "s1", 96, seed=0, render=True)
    print("rendered 96 scenes")

    result = train(root, steps=300, batch_size=16, limit=64, max_objects=6)
    print(f"trained 300 steps, loss {result.losses[0]:.2f} -> {result.losses[-1]:.2f} "
          f"(short demo run; accuracy needs a few thousand steps)")

    images, _, _, records = load_tensors(root, ModelConfig(), limit=16)
    labels = {r.image_id: r.label for r in records[:16]}
    out = Path(tmp) / "perceived"
    export_facts(result.model, images, [r.image_id for r in records[:16]],
                 labels, out)

    sample = sorted((out / "facts").glob("*.facts"))[0]
    print(f"\nexported {sample.name}:")
    print(sample.read_text())
    fw = parse_framework(sample.read_text())
    print(f"parses cleanly: {len(fw.rules)} facts")

    data = load_data(out)
    print(f"pipeline sees {len(data.images)} images with confidences, e.g. "
          f"{data.confidences[data.images[0]]:.2f}")
