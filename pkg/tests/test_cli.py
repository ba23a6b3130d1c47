"""Command-line interface: exit codes and output contracts."""

import json

import pytest

from haraudit.cli import main

from conftest import make_entry, write_har

SITE = "alpha.test"
SITES = [("alpha", "alpha.test", "News", 0),
         ("beta", "beta.test", "E-commerce", 1),
         ("gamma", "gamma.test", "Reference", 2),
         ("delta", "delta.test", "Travel", 3),
         ("epsilon", "epsilon.test", "Forum", 5)]


@pytest.fixture()
def workspace(tmp_path):
    har_dir = tmp_path / "hars"
    for site_id, domain, _, flaws in SITES:
        entries = [make_entry(url=f"https://{domain}/", mime="text/html"),
                   make_entry(url=f"https://{domain}/api/data", mime="application/json",
                              response_headers=[("Content-Type", "application/json"),
                                                ("Cache-Control", "max-age=60")])]
        for i in range(flaws):
            entries.append(make_entry(url=f"https://{domain}/static/pad{i}.css",
                                      mime="text/css"))
            entries.append(make_entry(url=f"https://{domain}/api/flaky{i}",
                                      status=500, mime="application/json"))
        for run in range(1, 7):
            write_har(har_dir / f"{site_id}__home__run{run}.har", entries)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps([
        {"id": site_id, "domain": domain, "category": category,
         "architecture": "SPA", "pages": ["home"]}
        for site_id, domain, category, _ in SITES
    ]))
    return tmp_path


def test_analyze_exit_zero_and_outputs(workspace, capsys):
    out = workspace / "out"
    code = main(["analyze", "--har-dir", str(workspace / "hars"),
                 "--manifest", str(workspace / "manifest.json"),
                 "--out", str(out), "--anonymize"])
    assert code == 0
    captured = capsys.readouterr()
    assert "News-1" in captured.out
    assert (out / "results" / "quality_scores.csv").is_file()


def test_analyze_missing_har_dir_exits_2(workspace, capsys):
    code = main(["analyze", "--har-dir", str(workspace / "absent"),
                 "--manifest", str(workspace / "manifest.json"),
                 "--out", str(workspace / "out")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_analyze_bad_weights_exits_2(workspace, capsys):
    weights = workspace / "weights.json"
    weights.write_text(json.dumps({"D1": 1.0}))
    code = main(["analyze", "--har-dir", str(workspace / "hars"),
                 "--manifest", str(workspace / "manifest.json"),
                 "--out", str(workspace / "out"), "--weights", str(weights)])
    assert code == 2


def test_analyze_all_corrupt_exits_1(tmp_path, capsys):
    har_dir = tmp_path / "hars"
    har_dir.mkdir()
    (har_dir / "alpha__home__run1.har").write_text("{broken")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps([
        {"id": "alpha", "domain": SITE, "category": "News",
         "architecture": "SPA", "pages": ["home"]},
    ]))
    code = main(["analyze", "--har-dir", str(har_dir),
                 "--manifest", str(manifest), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "parse error" in capsys.readouterr().err


def test_validate_clean_run_exits_0(workspace, capsys):
    out = workspace / "out"
    main(["analyze", "--har-dir", str(workspace / "hars"),
          "--manifest", str(workspace / "manifest.json"),
          "--out", str(out), "--anonymize"])
    capsys.readouterr()
    code = main(["validate", "--har-dir", str(workspace / "hars"),
                 "--results", str(out / "results"),
                 "--manifest", str(workspace / "manifest.json")])
    captured = capsys.readouterr()
    assert code == 0
    assert "overall: PASS" in captured.out
    assert len([l for l in captured.out.splitlines() if l.startswith("check ")]) == 8
    assert (out / "results" / "validation_report.json").is_file()


def test_validate_tampered_csv_exits_1(workspace, capsys):
    out = workspace / "out"
    main(["analyze", "--har-dir", str(workspace / "hars"),
          "--manifest", str(workspace / "manifest.json"),
          "--out", str(out), "--anonymize"])
    csv_path = out / "results" / "quality_scores.csv"
    lines = csv_path.read_text().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    row[header.index("quality_score")] = "12.3"
    lines[1] = ",".join(row)
    csv_path.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    code = main(["validate", "--har-dir", str(workspace / "hars"),
                 "--results", str(out / "results"),
                 "--manifest", str(workspace / "manifest.json")])
    assert code == 1
    assert "overall: FAIL" in capsys.readouterr().out


def test_validate_missing_results_exits_2(workspace, capsys):
    code = main(["validate", "--har-dir", str(workspace / "hars"),
                 "--results", str(workspace / "nowhere"),
                 "--manifest", str(workspace / "manifest.json")])
    assert code == 2


def test_score_prints_dimensions(workspace, capsys):
    target = workspace / "hars" / "alpha__home__run1.har"
    code = main(["score", str(target), "--domain", SITE])
    captured = capsys.readouterr()
    assert code == 0
    assert "composite: 100.0" in captured.out
    assert captured.out.count("score") >= 8


def test_score_min_score_gate(workspace, capsys):
    bad = workspace / "hars" / "bad__home__run1.har"
    write_har(bad, [make_entry(url=f"https://{SITE}/api/x", status=500,
                               mime="application/json")])
    assert main(["score", str(bad), "--domain", SITE, "--min-score", "95"]) == 1
    capsys.readouterr()
    assert main(["score", str(bad), "--domain", SITE, "--min-score", "10"]) == 0


def test_score_unreadable_file_exits_2(workspace, capsys):
    code = main(["score", str(workspace / "missing.har"), "--domain", SITE])
    assert code == 2


def test_console_script_is_wired():
    import importlib.metadata as md

    entry_points = md.entry_points()
    scripts = entry_points.select(group="console_scripts", name="haraudit")
    assert any(ep.value == "haraudit.cli:main" for ep in scripts)
