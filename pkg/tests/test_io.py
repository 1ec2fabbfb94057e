"""Tests for the file readers and writers."""

import json

import numpy as np
import pytest

from triphoton import __version__
from triphoton.core.errors import DataFormatError, DimensionError
from triphoton.core.io import (
    bundled_path,
    load_bundled_result,
    manifest_path,
    read_fit_result,
    read_manifest,
    read_matrix,
    read_scan,
    read_singles,
    read_tomography_result,
    read_visibilities,
    scan_metadata_path,
    write_fit_result,
    write_manifest,
    write_matrix,
    write_scan,
    write_singles,
    write_tomography_result,
    write_visibilities,
)
from triphoton.core.schemas import DelayScan, RunManifest, SinglesCounts, VisibilityRecord
from triphoton.engine.distinguishability import hom_curve
from triphoton.engine.fitting import fit_gaussian
from triphoton.engine.tomography import reconstruct, synthesize_dataset


def test_bundled_device_values(device):
    assert device.shape == (3, 3)
    assert device.magnitudes[2, 2] == pytest.approx(1.199 / np.sqrt(3))
    assert device.phases[1, 1] == pytest.approx(0.610 * np.pi)
    assert device.phases[2, 1] == pytest.approx(-0.577 * np.pi)


def test_bundled_result_carries_published_sigmas():
    result = load_bundled_result()
    assert result.resample_count == 200
    assert result.amplitude_sigma[2, 2] == pytest.approx(0.009 / np.sqrt(3))
    assert result.phase_sigma[2, 1] == pytest.approx(0.010 * np.pi)


def test_unknown_bundled_matrix():
    with pytest.raises(DataFormatError):
        bundled_path("no_such_device")


@pytest.mark.parametrize("polar", [False, True])
def test_matrix_file_round_trip(tmp_path, device, polar):
    path = write_matrix(device, tmp_path / "device.json", polar=polar, scale=1 / np.sqrt(3))
    document = json.loads(path.read_text())
    assert document["polar"] is polar
    np.testing.assert_allclose(read_matrix(path).entries, device.entries, atol=1e-12)


def test_matrix_file_errors(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    with pytest.raises(DataFormatError):
        read_matrix(empty)
    with pytest.raises(DataFormatError):
        read_matrix(tmp_path / "missing.json")

    ragged = tmp_path / "ragged.json"
    ragged.write_text(json.dumps({"rows": 2, "cols": 2, "entries": [[[1, 0], [0, 0]], [[0, 0]]]}))
    with pytest.raises(DimensionError):
        read_matrix(ragged)


def test_scan_round_trip_with_sidecar(tmp_path, tritter):
    scan = hom_curve(tritter, (1, 3), (2, 3), np.linspace(-6, 6, 9), sigma_ps=2.0)
    path = write_scan(scan, tmp_path / "hom.csv")
    assert scan_metadata_path(path).name == "hom.meta.json"
    assert path.read_text().splitlines()[0] == "delay_ps,value"

    loaded = read_scan(path)
    np.testing.assert_allclose(loaded.values, scan.values, rtol=1e-12)
    assert loaded.inputs == (1, 3)
    assert loaded.kind == "hom"
    assert loaded.sigma_ps == 2.0
    assert loaded.delayed_input == 3
    assert loaded.integration_time_s == 60.0


def test_scan_without_sidecar(tmp_path):
    path = tmp_path / "measured.csv"
    path.write_text("delay_ps, value\n-1,10\n0,4\n1,10\n")
    scan = read_scan(path)
    assert scan.kind == "measured"
    assert scan.inputs == ()
    np.testing.assert_array_equal(scan.values, [10, 4, 10])


def test_scan_format_errors(tmp_path):
    cases = {
        "empty.csv": "",
        "header_only.csv": "delay_ps,value\n",
        "wrong_header.csv": "tau,counts\n0,1\n",
        "text.csv": "delay_ps,value\n0,abc\n",
        "unsorted.csv": "delay_ps,value\n1,3\n0,4\n",
        "negative.csv": "delay_ps,value\n0,-4\n1,3\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(DataFormatError):
            read_scan(path)


def test_singles_round_trip(tmp_path):
    counts = SinglesCounts(counts=[[100, 40, 3], [50, 60, 7], [25, 0, 9]])
    path = write_singles(counts, tmp_path / "singles.csv")
    assert path.read_text().splitlines()[0] == "output,input,counts"
    np.testing.assert_array_equal(read_singles(path).counts, counts.counts)


def test_singles_grid_errors(tmp_path):
    incomplete = tmp_path / "incomplete.csv"
    incomplete.write_text("output,input,counts\n1,1,5\n2,2,5\n")
    with pytest.raises(DimensionError):
        read_singles(incomplete)

    duplicate = tmp_path / "duplicate.csv"
    duplicate.write_text("output,input,counts\n1,1,5\n1,1,6\n")
    with pytest.raises(DataFormatError):
        read_singles(duplicate)

    zero_label = tmp_path / "zero_label.csv"
    zero_label.write_text("output,input,counts\n0,1,5\n")
    with pytest.raises(DataFormatError):
        read_singles(zero_label)


def test_visibility_round_trip(tmp_path, device):
    _, records = synthesize_dataset(device)
    path = write_visibilities(reversed(records), tmp_path / "vis.csv")
    loaded = read_visibilities(path)
    assert [r.key for r in loaded] == sorted(r.key for r in records)
    by_key = {r.key: r for r in records}
    for r in loaded:
        assert r.value == pytest.approx(by_key[r.key].value)
        assert r.c0 == pytest.approx(by_key[r.key].c0)


def test_visibility_optional_columns(tmp_path):
    path = tmp_path / "vis.csv"
    path.write_text("i,j,l,m,V\n1,2,1,2,0.5\n")
    (record,) = read_visibilities(path)
    assert record.key == (1, 2, 1, 2)
    assert record.uncertainty is None
    assert not record.has_raw_counts

    partial = tmp_path / "partial.csv"
    write_visibilities([VisibilityRecord(inputs=(1, 2), outputs=(1, 3), value=0.3, uncertainty=0.01)], partial)
    (record,) = read_visibilities(partial)
    assert record.uncertainty == pytest.approx(0.01)
    assert record.c0 is None


def test_visibility_record_errors(tmp_path):
    for name, text in {
        "out_of_range.csv": "i,j,l,m,V\n1,2,1,2,1.5\n",
        "reversed_pair.csv": "i,j,l,m,V\n2,1,1,2,0.5\n",
    }.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(DataFormatError):
            read_visibilities(path)


def test_tomography_result_round_trip(tmp_path, device):
    result = reconstruct(*synthesize_dataset(device))
    path = write_tomography_result(result, tmp_path / "result.json")
    document = json.loads(path.read_text())
    assert document["polar"] is True
    assert document["scale"] == pytest.approx(1 / np.sqrt(3))

    loaded = read_tomography_result(path)
    np.testing.assert_allclose(loaded.matrix.entries, result.matrix.entries, atol=1e-12)
    np.testing.assert_allclose(loaded.phase_sigma, result.phase_sigma)
    assert read_matrix(path).shape == (3, 3)


def test_fit_result_round_trip(tmp_path, tritter):
    result = fit_gaussian(hom_curve(tritter, (1, 2), (1, 2), np.linspace(-9, 9, 25)))
    path = write_fit_result(result, tmp_path / "fit.json")
    assert read_fit_result(path) == result


def test_manifest(tmp_path):
    source = tmp_path / "scan.csv"
    source.write_text("delay_ps,value\n0,1\n")
    out = tmp_path / "fit.json"
    manifest = RunManifest(
        command="fit",
        inputs={"scan": str(source)},
        parameters={"mode": "auto"},
        tool_version=__version__,
        outputs=[str(out)],
    )
    path = write_manifest(manifest, out)
    assert path == manifest_path(out)
    assert path.name == "fit.json.manifest.json"
    assert read_manifest(path) == manifest

    with pytest.raises(DataFormatError):
        RunManifest(command="fit", inputs={"scan": str(tmp_path / "gone.csv")}, tool_version=__version__)


def test_delay_scan_requires_matching_columns():
    with pytest.raises(DataFormatError):
        DelayScan(delays=[0.0, 1.0], values=[1.0])
