import os
import pathlib

import pytest

import podcorpus

ROOT = pathlib.Path(__file__).resolve().parents[2]
MINI = ROOT / "data" / "mini_corpus"

FEED = """<?xml version="1.0"?>
<rss version="2.0" xmlns:itunes="http://www.itunes.com/dtds/podcast-1.0.dtd"><channel>
<title>Show</title><language>en</language><itunes:category text="News"/>
<item><guid>a</guid><pubDate>Tue, 02 Jun 2020 09:00:00 GMT</pubDate>
<itunes:duration>30:00</itunes:duration></item>
</channel></rss>"""


def test_feed():
    feed = podcorpus.parse_feed(FEED, "show")
    assert feed["category"] == "news"
    ep = feed["episodes"][0]
    assert ep["publication_date"] == "2020-06-02"
    assert ep["duration_s"] == 1800


def test_bad_feed_raises():
    with pytest.raises(ValueError):
        podcorpus.parse_feed("<rss><channel></chanel></rss>", "s")


def test_metrics():
    assert podcorpus.modularity(4, [(0, 1), (2, 3)], [0, 0, 1, 1]) == 0.5
    alpha = podcorpus.krippendorff_alpha([["a", "a"], ["b", "b"], ["a", "b"]])
    assert alpha == pytest.approx(4 / 9, abs=1e-12)
    assert podcorpus.krippendorff_alpha([["a", None], ["a", "a"], ["b", "b"]]) == 1.0
    assert podcorpus.fourgram_ratio(["a", "b", "c", "d"] * 10) == pytest.approx(10 / 37)
    assert podcorpus.contains_phrase("We discussed George Floyd's death", "george floyd's")


def test_pipeline(tmp_path):
    stages = podcorpus.run_pipeline(str(MINI / "config.json"), str(tmp_path / "work"))
    assert [s["stage"] for s in stages][0] == "ingest"
    for s in stages:
        assert s["input"] == s["retained"] + s["rejected"]
    assert os.path.exists(tmp_path / "work" / "network" / "edges.csv")
    assert len(podcorpus.config_hash(str(MINI / "config.json"))) == 16
