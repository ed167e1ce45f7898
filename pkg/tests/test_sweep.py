import json

import numpy as np
import pytest

from liouvsync.errors import ConfigError
from liouvsync.liouvillian import assemble
from liouvsync.models import build_coupled_machines
from liouvsync.analysis import relative_entropy_coherence, thermo_report
from liouvsync.spectral import unique_steady_state
from liouvsync.sweep import (
    COLUMNS,
    SweepConfig,
    evaluate_point,
    load_config,
    read_result,
    resolve_threads,
    run_sweep,
    serialize,
)


def small_cfg(**kw):
    base = dict(eps_range=(0.0, 0.02, 3), delta_range=(-0.02, 0.02, 3))
    base.update(kw)
    return SweepConfig(**base)


def test_single_point_at_origin():
    res = run_sweep(small_cfg(eps_range=(0, 0, 1), delta_range=(0, 0, 1)), threads=1)
    assert len(res.rows) == 1
    row = res.rows[0]
    assert row["s_coh"] == 0.0 and abs(row["power"]) <= 1e-12 and row["status"] == "ok"


def test_row_order_and_count():
    res = run_sweep(small_cfg(eps_range=(0, 0.01, 2), delta_range=(-0.01, 0.01, 2)), threads=1)
    assert [(r["epsilon"], r["delta"]) for r in res.rows] == [
        (0.0, -0.01), (0.0, 0.01), (0.01, -0.01), (0.01, 0.01)]
    assert res.grid("s_coh").shape == (2, 2)


def test_rows_match_direct_pipeline():
    res = run_sweep(small_cfg(), threads=1)
    for row in res.rows[4:6]:
        preset = build_coupled_machines(epsilon=row["epsilon"], delta=row["delta"])
        rho = unique_steady_state(assemble(preset.model))
        assert row["s_coh"] == pytest.approx(relative_entropy_coherence(rho), abs=1e-14)
        assert row["power"] == pytest.approx(thermo_report(rho, preset).power, abs=1e-16)


def test_thread_count_does_not_change_results(tmp_path):
    cfg = small_cfg()
    a = serialize(run_sweep(cfg, threads=1), tmp_path / "a.csv")
    b = serialize(run_sweep(cfg, threads=4), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_determinism_with_source_date_epoch(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = small_cfg(format="json")
    a = serialize(run_sweep(cfg, threads=2), tmp_path / "a.json")
    b = serialize(run_sweep(cfg, threads=3), tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["metadata"]["created"] == "2023-11-14T22:13:20Z"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_bit_exact(tmp_path, fmt):
    res = run_sweep(small_cfg(format=fmt), threads=1)
    path = serialize(res, tmp_path / f"out.{fmt}")
    back = read_result(path)
    assert back.config == res.config
    for name in COLUMNS[:-1]:
        assert np.array_equal(back.column(name), res.column(name), equal_nan=True)
    assert [r["status"] for r in back.rows] == [r["status"] for r in res.rows]
    assert back.metadata == res.metadata


def test_csv_header_and_sidecar(tmp_path):
    path = serialize(run_sweep(small_cfg(), threads=1), tmp_path / "g.csv")
    assert path.read_text().splitlines()[0] == ",".join(COLUMNS)
    meta = json.loads((tmp_path / "g.csv.meta.json").read_text())
    assert meta["metadata"]["n_rows"] == 9
    assert "max_s_coh" in meta["metadata"] and "max_abs_power" in meta["metadata"]


def test_empty_observables_leave_cells_empty(tmp_path):
    res = run_sweep(small_cfg(observables=(), eps_range=(0, 0.01, 2), delta_range=(0, 0, 1)), threads=1)
    lines = serialize(res, tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert lines[1] == "0,0" + "," * 7 + ",ok"
    assert (tmp_path / "e.csv.meta.json").exists()


def test_non_machine_preset_sweep():
    cfg = small_cfg(preset="spin1_entrainment", observables=("s_coh", "l1", "spectral_gap"))
    res = run_sweep(cfg, threads=1)
    assert all(r["status"] == "ok" for r in res.rows)
    assert all(r.get("power") is None for r in res.rows)


def test_degenerate_null_space_is_flagged_not_raised():
    # isolated spin-1 pair: no dissipation, so the null space is large
    row = evaluate_point("coupled_spin1", {"channels": []}, 0.0, 0.0, ("s_coh",))
    assert row["status"] == "degenerate_null_space"
    assert row["s_coh"] is None


@pytest.mark.parametrize("bad", [
    {"schema_version": 2},
    {"schema_version": 1, "eps_range": [0, 1]},
    {"schema_version": 1, "eps_range": [1, 0, 3]},
    {"schema_version": 1, "delta_range": [0, 1, 0]},
    {"schema_version": 1, "format": "xml"},
    {"schema_version": 1, "observables": ["entropy"]},
    {"schema_version": 1, "threads": 0},
    {"schema_version": 1, "preset": {"name": "nope"}},
    {"schema_version": 1, "preset": {"name": "coupled_machines", "params": {"bogus": 1}}},
    {"schema_version": 1, "preset": "spin1_entrainment"},
    {"schema_version": 1, "extra": True},
    {"schema_version": 1, "preset": {"name": "coupled_spin1", "params": {"bogus": 1}},
     "observables": ["s_coh"]},
    {"schema_version": 1, "preset": "entanglement_machine", "observables": ["s_coh"]},
    [],
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        SweepConfig.from_dict(bad)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


def test_config_round_trip():
    cfg = small_cfg(params={"omega": 0.5}, output_path="x.csv", threads=2)
    assert SweepConfig.from_dict(cfg.to_dict()) == cfg


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("LIOUVSYNC_THREADS", "3")
    assert resolve_threads("auto") == 3
    assert resolve_threads(5) == 5
    monkeypatch.setenv("LIOUVSYNC_THREADS", "x")
    with pytest.raises(ConfigError):
        resolve_threads("auto")
    monkeypatch.delenv("LIOUVSYNC_THREADS")
    assert resolve_threads(None) >= 1


def test_weak_coupling_window_reproduces_reported_maxima():
    """eps up to 0.2 gamma_h, |delta| up to 10 gamma_h: maxima close to 0.001 and 1.8e-6."""
    cfg = SweepConfig(eps_range=(0.0, 0.002, 11), delta_range=(-0.1, 0.1, 41), observables=("s_coh", "power"))
    md = run_sweep(cfg).metadata
    assert md["max_s_coh"] == pytest.approx(1.06e-3, rel=0.02)
    assert md["max_abs_power"] == pytest.approx(1.75e-6, rel=0.02)
