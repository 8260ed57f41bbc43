import json
import os

import pytest

from geoprompt.cli import run
from geoprompt.ingest import parse_manifest
from geoprompt.mask import mask_from_file
from geoprompt.codec import read_embedding_table


def manifest_line(image_id, boxes, view="front"):
    record = {"image_id": image_id, "width": 800, "height": 456}
    if view:
        record["view"] = view
    record["boxes"] = [
        {"class": name, "x1": x1, "y1": y1, "x2": x2, "y2": y2}
        for name, (x1, y1, x2, y2) in boxes
    ]
    return json.dumps(record) + "\n"


@pytest.fixture
def manifest_path(tmp_path):
    path = tmp_path / "train.jsonl"
    path.write_text(
        manifest_line("0001", [("car", (100, 50, 300, 200)), ("pedestrian", (400, 100, 460, 260))])
        + manifest_line("0002", [("car", (10, 10, 200, 150))], view="back")
        + manifest_line("0003", [])
    )
    return str(path)


def run_ok(argv, capsys):
    code = run(argv)
    captured = capsys.readouterr()
    assert code == 0, captured.err
    lines = captured.out.splitlines()
    assert len(lines) == 1, "stdout must carry exactly one summary line"
    return json.loads(lines[0])


def test_convert(tmp_path, capsys):
    coco = {
        "images": [{"id": 1, "file_name": "a.jpg", "width": 800, "height": 456}],
        "annotations": [
            {"id": 10, "image_id": 1, "category_id": 3, "bbox": [100, 50, 200, 150]}
        ],
        "categories": [{"id": 3, "name": "car"}],
    }
    src = tmp_path / "coco.json"
    src.write_text(json.dumps(coco))
    out = tmp_path / "manifest.jsonl"
    summary = run_ok(["convert", "--coco", str(src), "--out", str(out)], capsys)
    assert summary["images"] == 1
    assert summary["annotations"] == 1
    manifest = parse_manifest(out)
    assert manifest.layouts[0].boxes[0].box.x2 == 300


def test_encode_writes_prompt_records(manifest_path, tmp_path, capsys):
    out = tmp_path / "prompts.jsonl"
    summary = run_ok(
        ["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "5", "--out", str(out)],
        capsys,
    )
    assert summary["records"] == 3
    assert summary["seed"] == 5
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["image_id"] for r in records] == ["0001", "0002", "0003"]
    assert all("<L_" in r["prompt"] for r in records[:2])


def test_encode_rerun_is_byte_identical(manifest_path, tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run_ok(["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "5", "--out", str(a)], capsys)
    run_ok(["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "5", "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_encode_jobs_do_not_change_output(manifest_path, tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run_ok(["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "11", "--out", str(a), "--jobs", "1"], capsys)
    run_ok(["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "11", "--out", str(b), "--jobs", "8"], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_and_flag_precedence(manifest_path, tmp_path, capsys, monkeypatch):
    out = tmp_path / "p.jsonl"
    monkeypatch.setenv("GEOPROMPT_SEED", "42")
    summary = run_ok(["encode", "--manifest", manifest_path, "--grid", "400x228", "--out", str(out)], capsys)
    assert summary["seed"] == 42
    summary = run_ok(
        ["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "7", "--out", str(out)],
        capsys,
    )
    assert summary["seed"] == 7


def test_bad_seed_env_is_a_data_error(manifest_path, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GEOPROMPT_SEED", "not-a-number")
    code = run(["encode", "--manifest", manifest_path, "--grid", "400x228", "--out", str(tmp_path / "p.jsonl")])
    captured = capsys.readouterr()
    assert code == 1
    assert "GEOPROMPT_SEED" in captured.err
    assert captured.out == ""


def test_encode_decode_round_trip(manifest_path, tmp_path, capsys):
    prompts = tmp_path / "prompts.jsonl"
    run_ok(
        ["encode", "--manifest", manifest_path, "--grid", "400x228", "--seed", "5", "--out", str(prompts)],
        capsys,
    )
    classes = tmp_path / "classes.json"
    classes.write_text(json.dumps({"car": 0, "pedestrian": 1}))
    decoded = tmp_path / "decoded.jsonl"
    summary = run_ok(
        [
            "decode",
            "--prompts", str(prompts),
            "--grid", "400x228",
            "--size", "800x456",
            "--classes", str(classes),
            "--out", str(decoded),
        ],
        capsys,
    )
    assert summary["records"] == 3
    manifest = parse_manifest(decoded)
    first = {b.class_name: b.box for b in manifest.layouts[0].boxes}
    # Bin centers sit within half a bin of the encoded corners.
    assert abs(first["car"].x1 - 100) <= 1.0 + 1e-9
    assert abs(first["car"].y2 - 200) <= 1.0 + 1e-9


def test_mask_outputs_and_jobs_parity(manifest_path, tmp_path, capsys):
    out_a = tmp_path / "masks_a"
    out_b = tmp_path / "masks_b"
    summary = run_ok(
        ["mask", "--manifest", manifest_path, "--latent", "100x57", "--out", str(out_a), "--sidecar"],
        capsys,
    )
    assert summary["images"] == 3
    run_ok(
        ["mask", "--manifest", manifest_path, "--latent", "100x57", "--out", str(out_b), "--jobs", "8", "--sidecar"],
        capsys,
    )
    for name in ("0001.geom", "0002.geom", "0003.geom"):
        blob_a = (out_a / name).read_bytes()
        blob_b = (out_b / name).read_bytes()
        assert blob_a == blob_b
        side_a = json.loads((out_a / (name + ".json")).read_text())
        side_b = json.loads((out_b / (name + ".json")).read_text())
        assert side_a == side_b
    mask = mask_from_file(out_a / "0001.geom")
    assert mask.values.shape == (57, 100)
    assert mask.normalized


def test_augment_deterministic(manifest_path, tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    summary = run_ok(["augment", "--manifest", manifest_path, "--seed", "3", "--out", str(a)], capsys)
    assert summary["images"] == 3
    run_ok(["augment", "--manifest", manifest_path, "--seed", "3", "--out", str(b), "--jobs", "8"], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_augment_policy_file(manifest_path, tmp_path, capsys):
    policy = tmp_path / "policy.json"
    policy.write_text(json.dumps({"flip_p": 0.0, "max_shift_px": 0}))
    out = tmp_path / "aug.jsonl"
    run_ok(["augment", "--manifest", manifest_path, "--policy", str(policy), "--out", str(out)], capsys)
    # Identity policy: all boxes survive untouched.
    result = parse_manifest(out)
    assert result.layouts[0].boxes[0].box.x1 == 100
    assert result.layouts[1].view == "back"


def test_stats_summary(manifest_path, tmp_path, capsys):
    summary = run_ok(["stats", "--manifest", manifest_path], capsys)
    assert summary["command"] == "stats"
    assert summary["total"] == 3
    # Class ids come from sorted names: car=0, pedestrian=1.
    assert summary["counts"]["0"] == 2
    out = tmp_path / "stats.json"
    run_ok(["stats", "--manifest", manifest_path, "--out", str(out)], capsys)
    assert json.loads(out.read_text())["counts"]["1"] == 1


def test_split(manifest_path, tmp_path, capsys):
    out = tmp_path / "half.jsonl"
    summary = run_ok(
        ["split", "--manifest", manifest_path, "--fraction", "0.5", "--seed", "1", "--out", str(out)],
        capsys,
    )
    assert summary["images"] == 2
    subset = parse_manifest(out)
    assert len(subset.layouts) == 2


def test_eval_map(manifest_path, tmp_path, capsys):
    preds = tmp_path / "preds.jsonl"
    rows = [
        {"image_id": "0001", "class_id": 0, "x1": 100, "y1": 50, "x2": 300, "y2": 200, "score": 0.9},
        {"image_id": "0001", "class_id": 1, "x1": 400, "y1": 100, "x2": 460, "y2": 260, "score": 0.8},
        {"image_id": "0002", "class_id": 0, "x1": 10, "y1": 10, "x2": 200, "y2": 150, "score": 0.95},
    ]
    preds.write_text("".join(json.dumps(r) + "\n" for r in rows))
    summary = run_ok(["eval-map", "--pred", str(preds), "--truth", manifest_path], capsys)
    assert summary["mAP"] == pytest.approx(1.0)
    out = tmp_path / "report.json"
    run_ok(["eval-map", "--pred", str(preds), "--truth", manifest_path, "--out", str(out)], capsys)
    assert json.loads(out.read_text())["AP50"] == pytest.approx(1.0)


def test_embed(tmp_path, capsys):
    out = tmp_path / "table.geoe"
    summary = run_ok(
        ["embed", "--grid", "10x6", "--size", "800x456", "--dim", "16", "--out", str(out)],
        capsys,
    )
    assert summary["rows"] == 60
    table = read_embedding_table(out)
    assert table.rows.shape == (60, 16)
    assert json.loads((tmp_path / "table.geoe.json").read_text())["rows"] == 60


def test_usage_errors_exit_two(capsys):
    assert run([]) == 2
    assert run(["encode"]) == 2
    assert run(["encode", "--manifest", "x", "--grid", "400by228", "--out", "y"]) == 2
    assert run(["no-such-command"]) == 2
    capsys.readouterr()


def test_data_errors_exit_one(tmp_path, capsys):
    missing = str(tmp_path / "missing.jsonl")
    assert run(["encode", "--manifest", missing, "--grid", "400x228", "--out", str(tmp_path / "o")]) == 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    assert run(["stats", "--manifest", str(bad)]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error:" in captured.err


def test_warnings_go_to_stderr_not_stdout(tmp_path, capsys):
    path = tmp_path / "weird.jsonl"
    path.write_text(manifest_line("0001", [("car", (0, 0, 50, 50))], view="sideways"))
    code = run(["stats", "--manifest", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert len(captured.out.splitlines()) == 1
    assert "sideways" in captured.err


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "geoprompt", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "geoprompt" in proc.stdout
