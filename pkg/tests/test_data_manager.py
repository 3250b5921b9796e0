"""Tests for table, report and raster files."""

import json

import numpy as np
import pytest

from src.core.data_manager import DataManager
from src.core.geo import GeoAnchor
from src.core.projective import ImagePoint, WorldPoint
from src.core.scene import Correspondence, ObjectAnnotation
from src.utils.exceptions import DataFileError, InvalidInputError

ANCHOR = GeoAnchor(-64.77, -64.05, 30.0)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def manager():
    return DataManager()


class TestTables:
    def test_read_annotations(self, tmp_path, manager):
        path = _write(tmp_path, "objects.csv",
                      "object_id,foot_x,foot_y,head_x,head_y,height_m\n"
                      "a,2304,2000.5,2304,1950,1.0\n"
                      "b, 100 ,1500,101,1480,1.8\n")
        annotations = manager.read_annotations(path)
        assert annotations == [
            ObjectAnnotation(ImagePoint(2304.0, 2000.5), ImagePoint(2304.0, 1950.0), 1.0),
            ObjectAnnotation(ImagePoint(100.0, 1500.0), ImagePoint(101.0, 1480.0), 1.8),
        ]

    def test_header_only_is_empty(self, tmp_path, manager):
        assert manager.read_horizon(_write(tmp_path, "h.csv", "image_x,image_y\n")) == []

    def test_missing_header(self, tmp_path, manager):
        with pytest.raises(DataFileError, match="header must be image_x,image_y"):
            manager.read_horizon(_write(tmp_path, "h.csv", "10,20\n30,40\n"))

    def test_empty_file(self, tmp_path, manager):
        with pytest.raises(DataFileError, match="header row is required"):
            manager.read_horizon(_write(tmp_path, "h.csv", ""))

    def test_missing_file(self, tmp_path, manager):
        with pytest.raises(DataFileError, match="not found"):
            manager.read_horizon(tmp_path / "absent.csv")

    @pytest.mark.parametrize("cell", ["abc", "nan", "inf", ""])
    def test_bad_cell_names_row_and_column(self, tmp_path, manager, cell):
        path = _write(tmp_path, "h.csv", f"image_x,image_y\n10,20\n30,{cell}\n")
        with pytest.raises(DataFileError) as err:
            manager.read_horizon(path)
        assert err.value.row == 3
        assert err.value.column == "image_y"
        assert "row 3" in str(err.value) and "image_y" in str(err.value)

    def test_duplicate_ids(self, tmp_path, manager):
        path = _write(tmp_path, "map.csv",
                      "id,image_x,image_y,world_x,world_y\np1,1,2,3,4\np1,5,6,7,8\n")
        with pytest.raises(DataFileError, match="duplicate id 'p1'"):
            manager.read_correspondences(path)

    def test_non_positive_known_height(self, tmp_path, manager):
        path = _write(tmp_path, "objects.csv",
                      "object_id,foot_x,foot_y,head_x,head_y,height_m\na,1,2,3,4,0\n")
        with pytest.raises(DataFileError, match="height_m"):
            manager.read_annotations(path)

    def test_metric_correspondences(self, tmp_path, manager):
        path = _write(tmp_path, "map.csv",
                      "id,image_x,image_y,world_x,world_y\np1,100,200,-5.5,40\n")
        (c,) = manager.read_correspondences(path)
        assert c == Correspondence(ImagePoint(100.0, 200.0), WorldPoint(-5.5, 40.0, 0.0))
        assert manager.correspondence_ids(path) == ["p1"]

    def test_geographic_correspondences_need_an_anchor(self, tmp_path, manager):
        path = _write(tmp_path, "map.csv", "id,image_x,image_y,lat,lon\np1,100,200,-64.77,-64.05\n")
        with pytest.raises(InvalidInputError, match="geo_anchor"):
            manager.read_correspondences(path)

    def test_geographic_and_metric_files_agree(self, tmp_path):
        manager = DataManager(ANCHOR)
        correspondences = [Correspondence(ImagePoint(10.0, 20.0), WorldPoint(120.0, -35.0, 0.0)),
                           Correspondence(ImagePoint(30.0, 40.0), WorldPoint(-800.0, 410.0, 0.0))]
        manager.write_correspondences(correspondences, tmp_path / "geo.csv", geographic=True)
        for read, written in zip(manager.read_correspondences(tmp_path / "geo.csv"), correspondences):
            assert read.image == written.image
            assert read.world.x1 == pytest.approx(written.world.x1, abs=1e-6)
            assert read.world.x2 == pytest.approx(written.world.x2, abs=1e-6)

    def test_written_annotations_read_back(self, tmp_path, manager):
        annotations = [ObjectAnnotation(ImagePoint(1.25, 2.5), ImagePoint(3.0, 4.0), 1.5)]
        manager.write_annotations(annotations, tmp_path / "objects.csv")
        assert manager.read_annotations(tmp_path / "objects.csv") == annotations

    def test_write_table_is_deterministic(self, tmp_path, manager):
        rows = [(1, 0.1, "ok"), (2, float("nan"), "behind")]
        text = manager.write_table(rows, ("n", "value", "status"), tmp_path / "t.csv")
        assert text == "n,value,status\n1,0.1,ok\n2,,behind\n"
        assert (tmp_path / "t.csv").read_bytes() == text.encode()
        assert manager.write_table(rows, ("n", "value", "status")) == text

    def test_world_and_image_point_files(self, tmp_path, manager):
        world = manager.read_world_points(_write(tmp_path, "w.csv", "x1,x2,x3\n0,100,0\n1,2,3\n"))
        pixels = manager.read_image_points(_write(tmp_path, "p.csv", "y1,y2\n2304,1296\n"))
        assert world.shape == (2, 3) and pixels.shape == (1, 2)
        assert world[0].tolist() == [0.0, 100.0, 0.0]


class TestReports:
    def test_nan_becomes_null(self, tmp_path, manager):
        text = manager.write_report({"rms": {"objects": float("nan")}, "pose": {"height": np.float64(2.0)}},
                                    tmp_path / "r.json")
        assert json.loads(text) == {"pose": {"height": 2.0}, "rms": {"objects": None}}
        assert "NaN" not in (tmp_path / "r.json").read_text()
        assert text.endswith("\n")


class TestRasters:
    def test_grey_round_trip(self, tmp_path, manager):
        image = np.arange(48, dtype=np.uint8).reshape(6, 8) * 5
        manager.write_raster(image, tmp_path / "a.pgm")
        assert np.array_equal(manager.read_raster(tmp_path / "a.pgm"), image)

    def test_colour_round_trip(self, tmp_path, manager):
        image = np.random.default_rng(0).integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        manager.write_raster(image, tmp_path / "a.ppm")
        assert np.array_equal(manager.read_raster(tmp_path / "a.ppm"), image)

    def test_plain_pgm(self, tmp_path, manager):
        path = _write(tmp_path, "plain.pgm", "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n")
        assert manager.read_raster(path).tolist() == [[0, 10, 20], [30, 40, 255]]

    def test_wrong_suffix(self, tmp_path, manager):
        with pytest.raises(DataFileError, match="raster output"):
            manager.write_raster(np.zeros((2, 2)), tmp_path / "a.png")

    def test_not_a_raster(self, tmp_path, manager):
        with pytest.raises(DataFileError):
            manager.read_raster(_write(tmp_path, "a.pgm", "hello"))
