import datetime as dt

import pytest
from hypothesis import given, strategies as st

from fogcache.records import (CategoryRule, ContentCategory, MobilityClass, ParseStats, Technology,
                              TraceFormatError, TraceRecord, UserHourProfile, classify_mobility,
                              filter_vehicular, load_rules, map_app_to_category, parse_trace,
                              write_trace)

HEADER = "day,hour,user_id,lat,lon,operator,cell_id,technology,app_class,bytes_down,bytes_up,ssid,bssid\n"
DAY = dt.date(2015, 10, 3)


def _write(tmp_path, body, header=HEADER):
    p = tmp_path / "trace.csv"
    p.write_text(header + body, encoding="utf-8")
    return p


def rec(user, hour, lat, lon, cell="c1", app="COM.GOOGLE.ANDROID.YOUTUBE", down=100):
    return TraceRecord(DAY, hour, user, lat, lon, "Verizon", cell, Technology.LTE, app, down, 0)


class TestParse:
    def test_three_row_fixture(self, tmp_path):
        path = _write(tmp_path,
                      "2015-10-03,8,u1,34.05,-118.25,Verizon,310-4,LTE,COM.GOOGLE.ANDROID.YOUTUBE,1200,30,,\n"
                      "2015-10-03,8,u1,34.06,-118.24,Verizon,,WiFi,COM.CNN.MOBILE,0,0,home,aa:bb\n"
                      "2015-10-03,9,u2,33.90,-118.40,AT&T,77,3G,ORG.VIDEOLAN.VLC,5,6,,\n")
        stats = ParseStats()
        records = list(parse_trace(path, stats=stats))
        assert records == [
            TraceRecord(DAY, 8, "u1", 34.05, -118.25, "Verizon", "310-4", Technology.LTE,
                        "COM.GOOGLE.ANDROID.YOUTUBE", 1200, 30),
            TraceRecord(DAY, 8, "u1", 34.06, -118.24, "Verizon", None, Technology.WIFI,
                        "COM.CNN.MOBILE", 0, 0, "home", "aa:bb"),
            TraceRecord(DAY, 9, "u2", 33.90, -118.40, "AT&T", "77", Technology.G3, "ORG.VIDEOLAN.VLC", 5, 6),
        ]
        assert (stats.rows, stats.parsed, stats.malformed) == (3, 3, 0)

    def test_empty_file(self, tmp_path):
        assert list(parse_trace(_write(tmp_path, ""))) == []

    def test_bad_latitude_is_skipped(self, tmp_path):
        path = _write(tmp_path,
                      "2015-10-03,8,u1,91,-118.25,Verizon,1,LTE,X,1,1,,\n"
                      "2015-10-03,8,u1,34,-118.25,Verizon,1,LTE,X,1,1,,\n"
                      "2015-10-03,8,u1,34,-118.25,Verizon,1,LTE,X,1,1,,\n")
        stats = ParseStats()
        assert len(list(parse_trace(path, stats=stats))) == 2
        assert stats.malformed == 1

    def test_custom_column_names(self, tmp_path):
        header = "d,h,uid,latitude,longitude,op,cell,tech,app,down,up\n"
        path = _write(tmp_path, "2015-10-03,1,u,1.5,2.5,S,9,LTE,A,3,4\n", header)
        schema = {"day": "d", "hour": "h", "user_id": "uid", "lat": "latitude", "lon": "longitude",
                  "operator": "op", "cell_id": "cell", "technology": "tech", "app_class": "app",
                  "bytes_down": "down", "bytes_up": "up"}
        (r,) = parse_trace(path, schema)
        assert (r.lat, r.lon, r.cell_id, r.bytes_up) == (1.5, 2.5, "9", 4)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            list(parse_trace(tmp_path / "nope.csv"))

    def test_missing_required_column(self, tmp_path):
        path = _write(tmp_path, "", header="day,hour,user_id\n")
        with pytest.raises(TraceFormatError, match="lat"):
            list(parse_trace(path))

    def test_majority_malformed_aborts(self, tmp_path):
        path = _write(tmp_path,
                      "2015-10-03,8,u1,34,-118,V,1,LTE,X,1,1,,\n"
                      "bad,8,u1,34,-118,V,1,LTE,X,1,1,,\n"
                      "2015-10-03,99,u1,34,-118,V,1,LTE,X,1,1,,\n")
        with pytest.raises(TraceFormatError, match="malformed"):
            list(parse_trace(path))

    def test_write_round_trip(self, tmp_path):
        records = [rec("u1", 3, 34.0123456789, -118.1, cell=None), rec("u2", 4, 33.5, -117.9)]
        write_trace(records, tmp_path / "out.csv")
        assert list(parse_trace(tmp_path / "out.csv")) == records


class TestCategories:
    @pytest.mark.parametrize("app, expected", [
        ("COM.GOOGLE.ANDROID.APPS.YOUTUBE.KIDS", ContentCategory.YOUTUBE),
        ("COM.GOOGLE.ANDROID.YOUTUBE", ContentCategory.YOUTUBE),
        ("com.netflix.mediaclient", ContentCategory.ON_DEMAND),
        ("TV.PERISCOPE.ANDROID", ContentCategory.REAL_TIME),
        ("ORG.VIDEOLAN.VLC", ContentCategory.PLAYERS),
        ("COM.WEATHER.WEATHER", ContentCategory.WEATHER),
        ("COM.GOOGLE.ANDROID.APPS.MAPS", ContentCategory.MAPS),
        ("COM.CNN.MOBILE.ANDROID.PHONE", ContentCategory.NEWS),
        ("COM.NBCSPORTS.APP", ContentCategory.SPORTS),
        ("COM.NBCUNI.NBC", ContentCategory.NEWS),
        ("COM.GOTV.NFLGAMECENTER.US.LITE", ContentCategory.SPORTS),
        ("COM.UNKNOWN.FOO", ContentCategory.OTHER),
    ])
    def test_default_rules(self, app, expected):
        assert map_app_to_category(app) is expected

    def test_first_rule_wins_and_prefix_anchor(self):
        rules = [CategoryRule("^COM.ACME", ContentCategory.NEWS), CategoryRule("ACME", ContentCategory.MAPS)]
        assert map_app_to_category("com.acme.x", rules) is ContentCategory.NEWS
        assert map_app_to_category("ORG.ACME", rules) is ContentCategory.MAPS

    def test_rules_file(self, tmp_path):
        p = tmp_path / "rules.csv"
        p.write_text("pattern,category\nFOO,Sports\n")
        assert map_app_to_category("X.FOO", load_rules(p)) is ContentCategory.SPORTS

    @given(st.text(max_size=40))
    def test_total_and_deterministic(self, app):
        assert map_app_to_category(app) is map_app_to_category(app)


class TestMobility:
    def _profile(self, positions):
        return UserHourProfile("u", DAY, 0, list(positions))

    def test_examples(self):
        # 0.01 deg of latitude = 1.11195 km; 0.0459 deg = 5.104 km
        assert classify_mobility(self._profile([(0, 0), (0.0459, 0)])) is MobilityClass.VEHICULAR
        assert classify_mobility(self._profile([(34, -118)])) is MobilityClass.STATIC
        assert classify_mobility(self._profile([(0, 0), (0.0108, 0)])) is MobilityClass.PEDESTRIAN

    def test_thresholds_are_exclusive_above(self):
        p = self._profile([(0, 0), (0, 1)])  # 111.19 km
        assert classify_mobility(p, (0.05, 111.0)) is MobilityClass.VEHICULAR
        assert classify_mobility(p, (0.05, 112.0)) is MobilityClass.PEDESTRIAN
        assert classify_mobility(p, (111.2, 200.0)) is MobilityClass.STATIC

    def test_empty_positions_rejected(self):
        with pytest.raises(ValueError):
            classify_mobility(self._profile([]))

    def test_bad_thresholds_rejected(self):
        with pytest.raises(ValueError):
            classify_mobility(self._profile([(0, 0)]), (5.0, 5.0))

    @given(st.lists(st.tuples(st.floats(33, 35), st.floats(-119, -117)), min_size=1, max_size=12))
    def test_reversal_keeps_distance(self, pts):
        assert self._profile(pts).distance_km == pytest.approx(self._profile(pts[::-1]).distance_km, abs=1e-9)

    @given(st.floats(0, 50), st.floats(0, 50))
    def test_monotone_in_distance(self, d1, d2):
        lo, hi = sorted((d1, d2))
        deg = 1 / 111.19492664455873  # km -> degrees of latitude
        rank = {MobilityClass.STATIC: 0, MobilityClass.PEDESTRIAN: 1, MobilityClass.VEHICULAR: 2}
        a = classify_mobility(self._profile([(0, 0), (lo * deg, 0)]))
        b = classify_mobility(self._profile([(0, 0), (hi * deg, 0)]))
        assert rank[a] <= rank[b]


class TestFilterVehicular:
    def test_user_vehicular_in_one_hour_only(self):
        stationary = [rec("u1", 7, 34.0, -118.0), rec("u1", 7, 34.0, -118.0)]
        moving = [rec("u1", 8, 34.0, -118.0), rec("u1", 8, 34.054, -118.0)]  # 6.0 km
        assert filter_vehicular(stationary + moving) == moving

    def test_all_static(self):
        assert filter_vehicular([rec("u", h, 34, -118) for h in range(5)]) == []

    def test_three_users_hand_classified(self):
        # hand distances: A 2 x 0.03 deg = 6.67 km (vehicular), B 0 km, C 0.02 deg = 2.22 km,
        # D 0.03 + 0.0 + 0.03 deg = 6.67 km split across records of one hour (vehicular)
        a = [rec("A", 1, 34.00, -118), rec("A", 1, 34.03, -118), rec("A", 1, 34.06, -118)]
        b = [rec("B", 1, 34.00, -118), rec("B", 1, 34.00, -118)]
        c = [rec("C", 1, 34.00, -118), rec("C", 1, 34.02, -118)]
        d = [rec("D", 2, 34.00, -118), rec("D", 2, 34.03, -118), rec("D", 2, 34.03, -118),
             rec("D", 2, 34.00, -118)]
        records = [a[0], b[0], c[0], d[0], a[1], b[1], c[1], d[1], a[2], d[2], d[3]]
        kept = filter_vehicular(records)
        assert {r.user_id for r in kept} == {"A", "D"}
        assert len(kept) == 7

    def test_subset_and_idempotent(self):
        records = [rec("A", 1, 34.0, -118), rec("A", 1, 34.1, -118), rec("B", 1, 34, -118)]
        once = filter_vehicular(records)
        assert all(r in records for r in once)
        assert filter_vehicular(once) == once
