import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from divsel.pool import ModelRecord, build_pool

# shared 10-sample correctness fixture used across the metric tests
FIXTURE_WI = [1, 1, 1, 1, 0, 0, 1, 0, 1, 1]
FIXTURE_WJ = [1, 0, 1, 1, 1, 0, 1, 0, 0, 1]


def write_manifest(tmp_path, labels, pred_rows, probs_rows=None, num_classes=None,
                   dataset="test"):
    """Write a pool manifest plus data files under tmp_path; returns its path."""
    import json

    tmp_path.mkdir(parents=True, exist_ok=True)
    if num_classes is None:
        num_classes = int(max(labels)) + 1
    (tmp_path / "labels.txt").write_text("".join(f"{v}\n" for v in labels))
    models = []
    for i, preds in enumerate(pred_rows):
        pred_file = f"m{i}_pred.txt"
        (tmp_path / pred_file).write_text("".join(f"{v}\n" for v in preds))
        probs_file = None
        if probs_rows is not None and probs_rows[i] is not None:
            probs_file = f"m{i}_probs.csv"
            lines = [",".join(f"{x:.17g}" for x in row) for row in probs_rows[i]]
            (tmp_path / probs_file).write_text("".join(line + "\n" for line in lines))
        models.append({"id": i, "name": f"m{i}", "pred_labels": pred_file,
                       "probs": probs_file})
    manifest = {"dataset": dataset, "num_classes": num_classes,
                "labels": "labels.txt", "models": models}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def pool_from_correctness(rows, num_classes=2):
    """Build a pool whose correctness matrix equals the given binary rows.

    Ground truth is all-zeros; a wrong prediction is class 1.
    """
    rows = np.asarray(rows)
    n = rows.shape[1]
    labels = np.zeros(n, dtype=np.int64)
    models = [
        ModelRecord(id=i, name=f"m{i}",
                    pred_labels=np.where(rows[i] == 1, 0, 1).astype(np.int64))
        for i in range(rows.shape[0])
    ]
    return build_pool("from-correctness", num_classes, labels, models)


def pool_from_probs(labels, prob_matrices, num_classes, dataset="probs"):
    labels = np.asarray(labels, dtype=np.int64)
    models = []
    for i, probs in enumerate(prob_matrices):
        probs = np.asarray(probs, dtype=np.float64)
        preds = probs.argmax(axis=1).astype(np.int64)
        models.append(ModelRecord(id=i, name=f"m{i}", pred_labels=preds, probs=probs))
    return build_pool(dataset, num_classes, labels, models)


@pytest.fixture
def fixture_rows():
    return np.array([FIXTURE_WI, FIXTURE_WJ], dtype=np.uint8)
