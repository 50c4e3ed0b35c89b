#!/usr/bin/env python3
"""Generate the bundled synthetic mini corpus.

Output is fully determined by the seed, so the files under data/mini_corpus
can be regenerated byte for byte:

    python3 tools/make_mini_corpus.py data/mini_corpus
"""

import argparse
import csv
import gzip
import json
import random
from datetime import date, timedelta
from email.utils import format_datetime
from datetime import datetime, timezone
from pathlib import Path
from xml.sax.saxutils import escape

SEED = 20200525

PODCASTS = [
    {
        "id": "full-court",
        "title": "Full Court Press",
        "category": "Sports",
        "host": "Marcus Delgado",
        "site": "https://anchor.fm/s/fullcourt",
        "guid": "url",
        "vocab": "game season team coach playoff league score player championship draft "
                 "basketball football roster injury trade",
        "gzip": False,
    },
    {
        "id": "ledger-lines",
        "title": "Ledger Lines",
        "category": "Business",
        "host": "Priya Raman",
        "site": "https://traffic.libsyn.com/ledgerlines",
        "guid": "plain",
        "vocab": "market revenue startup investor economy stock growth profit company "
                 "inflation capital payroll lending merger quarter",
        "gzip": True,
    },
    {
        "id": "morning-dispatch",
        "title": "Morning Dispatch",
        "category": "News",
        "host": "Helen Okafor",
        "site": "https://www.megaphone.fm/dispatch",
        "guid": "plain",
        "vocab": "protest police election government city reporter policy justice vote "
                 "mayor community reform senate statement curfew",
        "gzip": False,
    },
    {
        "id": "faith-reason",
        "title": "Faith and Reason",
        "category": "Religion & Spirituality",
        "host": "Tobias Lindqvist",
        "site": "https://anchor.fm/s/faithreason",
        "guid": "plain",
        "vocab": "faith church prayer scripture spirit grace congregation pastor gospel "
                 "worship belief ministry sermon parish hymn",
        "gzip": False,
    },
]

# Guests per podcast, one per episode. Rare names shared across shows form
# the network; common names share first or last tokens and should be
# filtered by name probability.
GUESTS = {
    "full-court": ["Ingrid Vasquez", "Kwame Lindahl", "John Smith", "Mary Smith", "Oskar Brandvold"],
    "ledger-lines": ["Dmitri Achebe", "Kwame Lindahl", "John Miller", "James Smith", "Yusra Thorsen"],
    "morning-dispatch": ["Ingrid Vasquez", "Dmitri Achebe", "Solveig Marchetti", "John Brown", "Mary Miller"],
    "faith-reason": ["Solveig Marchetti", "John Smith", "James Brown", "Anneliese Okonkwo", "Mary Johnson"],
}

FILLER = ("really think know people time thing way year good right lot work week "
          "story question point part idea kind world today happen start").split()
GLUE = "the and to of a in that it is was we you for on with this so but".split()

IN_WINDOW_DATES = [date(2020, 5, 20) + timedelta(days=d) for d in range(0, 26)]


def rfc822(d, hour):
    return format_datetime(datetime(d.year, d.month, d.day, hour, 0, tzinfo=timezone.utc))


def sentence(rng, vocab, n):
    words = []
    for _ in range(n):
        r = rng.random()
        if r < 0.35:
            words.append(rng.choice(GLUE))
        elif r < 0.75:
            words.append(rng.choice(vocab))
        else:
            words.append(rng.choice(FILLER))
    return words


def build_script(rng, pod, guest, ep_index, mentions_floyd):
    """Return a list of (speaker_role, [tokens]) utterances."""
    vocab = pod["vocab"].split()
    host = pod["host"]
    utts = [
        ("host", f"welcome to {pod['title']} I'm {host} and this is episode {ep_index + 1}".split()),
        ("host", f"today my guest is {guest} so let us get into it".split()),
        ("guest", "thanks for having me it is great to be here".split()),
    ]
    if mentions_floyd:
        utts.append(("host", "we have to start with the killing of George Floyd and what this week has meant".split()))
        utts.append(("guest", "what happened to George Floyd is on everyone's mind right now".split()))
    for turn in range(10):
        role = "host" if turn % 2 == 0 else "guest"
        utts.append((role, sentence(rng, vocab, rng.randint(14, 30))))
    utts.append(("ad", "this episode is brought to you by our sponsors".split()))
    for turn in range(8):
        role = "guest" if turn % 2 == 0 else "host"
        utts.append((role, sentence(rng, vocab, rng.randint(14, 30))))
    utts.append(("host", f"thanks for coming on {guest} and thanks everyone for listening".split()))
    return utts


def timeline(rng, utts):
    """Word timings plus per-utterance spans."""
    t = 0.5
    words, spans = [], []
    for role, tokens in utts:
        start = t
        for tok in tokens:
            dur = round(rng.uniform(0.18, 0.42), 3)
            words.append({"token": tok, "start_s": round(t, 3), "end_s": round(t + dur, 3), "role": role})
            t += dur + round(rng.uniform(0.02, 0.12), 3)
        spans.append((role, start, words[-1]["end_s"]))
        t += round(rng.uniform(0.3, 0.8), 3)
    return words, spans, t


def write_episode_files(out, stem, rng, words, spans, labels, total):
    with open(out / "transcripts" / f"{stem}.words.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for w in words:
            f.write(json.dumps({"token": w["token"], "start_s": w["start_s"], "end_s": w["end_s"]}) + "\n")

    with open(out / "diar" / f"{stem}.diar.csv", "w", encoding="utf-8", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(["speaker", "start_s", "end_s"])
        for i, (role, start, end) in enumerate(spans):
            # Every fourth boundary the next speaker starts before this one stops.
            tail = 0.35 if i % 4 == 3 and i + 1 < len(spans) else 0.05
            wr.writerow([labels[role], f"{max(0.0, start - 0.05):.3f}", f"{end + tail:.3f}"])

    base = {"host": 118.0, "guest": 196.0, "ad": 150.0}
    formant = {"host": 520.0, "guest": 610.0, "ad": 560.0}
    with open(out / "frames" / f"{stem}.frames.csv", "w", encoding="utf-8", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(["window_start_s", "f0", "f1", "mfcc1", "mfcc2", "mfcc3", "mfcc4"])
        span_i = 0
        n = int(total / 0.1)
        for k in range(n):
            t0 = round(k * 0.1, 1)
            while span_i < len(spans) and spans[span_i][2] < t0:
                span_i += 1
            role = spans[span_i][0] if span_i < len(spans) and spans[span_i][1] <= t0 else "ad"
            wr.writerow([
                f"{t0:.1f}",
                f"{base[role] + rng.gauss(0, 12):.2f}",
                f"{formant[role] + rng.gauss(0, 25):.2f}",
                f"{rng.gauss(-300, 20):.3f}",
                f"{rng.gauss(90, 10):.3f}",
                f"{rng.gauss(10, 5):.3f}",
                f"{rng.gauss(20, 5):.3f}",
            ])


def item_xml(guid, title, description, pub, duration, enclosure, is_permalink=False, language=None):
    parts = ["    <item>"]
    perm = "true" if is_permalink else "false"
    parts.append(f'      <guid isPermaLink="{perm}">{escape(guid)}</guid>')
    parts.append(f"      <title>{escape(title)}</title>")
    parts.append(f"      <description>{escape(description)}</description>")
    if pub is not None:
        parts.append(f"      <pubDate>{pub}</pubDate>")
    if duration is not None:
        parts.append(f"      <itunes:duration>{duration}</itunes:duration>")
    if language is not None:
        parts.append(f"      <dc:language>{language}</dc:language>")
    parts.append(f'      <enclosure url="{escape(enclosure)}" length="0" type="audio/mpeg"/>')
    parts.append("    </item>")
    return "\n".join(parts)


def hms(seconds):
    s = int(seconds)
    return f"{s // 3600:02d}:{(s % 3600) // 60:02d}:{s % 60:02d}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    args = ap.parse_args()
    out = args.out
    for sub in ("feeds", "transcripts", "frames", "diar"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)

    manifest_rows = []
    for p_index, pod in enumerate(PODCASTS):
        dates = sorted(rng.sample(IN_WINDOW_DATES, 5))
        items = []
        for e, d in enumerate(dates):
            guest = GUESTS[pod["id"]][e]
            guid = (f"https://fullcourt.example/episodes/{e + 1}" if pod["guid"] == "url"
                    else f"{pod['id']}-{d.isoformat()}")
            mentions = d >= date(2020, 5, 26) and (pod["category"] == "News" or e % 2 == 1)
            utts = build_script(rng, pod, guest, e, mentions)
            words, spans, total = timeline(rng, utts)
            speakers = ["SPEAKER_00", "SPEAKER_01", "SPEAKER_02"]
            rng.shuffle(speakers)
            labels = {"host": speakers[0], "guest": speakers[1], "ad": speakers[2]}
            stem = "".join(c if c.isalnum() or c in "-_." else "_" for c in guid)
            duration = total + 2.0
            if p_index == 2 and e == 4:
                # Feed duration shorter than the transcript: the tail is hallucinated.
                duration = words[-4]["start_s"]
            write_episode_files(out, stem, rng, words, spans, labels, total)
            description = (f"{pod['host']} sits down with {guest} to talk about "
                           f"{' and '.join(pod['vocab'].split()[:2])}.")
            items.append(item_xml(guid, f"Episode {e + 1}: {guest}", description,
                                  rfc822(d, 9 + p_index), hms(duration),
                                  f"{pod['site']}/audio/{e + 1}.mp3",
                                  is_permalink=pod["guid"] == "url"))
        # Out of scope: before the window, undated, and a non-English episode.
        items.append(item_xml(f"{pod['id']}-archive", "From the archive", "An older episode.",
                              rfc822(date(2019, 11, 4), 9), "00:41:10", f"{pod['site']}/audio/old.mp3"))
        items.append(item_xml(f"{pod['id']}-trailer", "Trailer", "Coming soon.", None, "95",
                              f"{pod['site']}/audio/trailer.mp3"))
        if pod["category"] == "News":
            items.append(item_xml(f"{pod['id']}-es", "Edicion especial", "Noticias.",
                                  rfc822(date(2020, 6, 2), 10), "18:30",
                                  f"{pod['site']}/audio/es.mp3", language="es"))

        channel = "\n".join([
            '<?xml version="1.0" encoding="UTF-8"?>',
            '<rss version="2.0" xmlns:itunes="http://www.itunes.com/dtds/podcast-1.0.dtd" '
            'xmlns:dc="http://purl.org/dc/elements/1.1/" xmlns:atom="http://www.w3.org/2005/Atom">',
            "  <channel>",
            f"    <title>{escape(pod['title'])}</title>",
            f"    <description>{escape(pod['title'])} with your host {escape(pod['host'])}.</description>",
            "    <language>en-us</language>",
            f'    <itunes:category text="{escape(pod["category"])}"/>',
            f'    <atom:link rel="self" href="{escape(pod["site"])}/feed.xml" type="application/rss+xml"/>',
            "\n".join(items),
            "  </channel>",
            "</rss>",
            "",
        ])
        name = f"{pod['id']}.xml" + (".gz" if pod["gzip"] else "")
        if pod["gzip"]:
            with open(out / "feeds" / name, "wb") as f:
                f.write(gzip.compress(channel.encode("utf-8"), mtime=0))
        else:
            (out / "feeds" / name).write_text(channel, encoding="utf-8")
        manifest_rows.append([pod["id"], f"feeds/{name}", f"{pod['site']}/feed.xml"])

    with open(out / "manifest.csv", "w", encoding="utf-8", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(["podcast_id", "feed_path", "feed_url"])
        wr.writerows(manifest_rows)

    config = {
        "manifest": "manifest.csv",
        "transcripts_dir": "transcripts",
        "frames_dir": "frames",
        "diar_dir": "diar",
        "work_dir": "work",
        "date_from": "2020-05-01",
        "date_to": "2020-06-30",
        "language": "en",
        "fourgram_threshold": 0.05,
        "min_speaker_share": 0.05,
        "classifier": "baseline",
        "name_prob_quantile": 0.5,
        "lda": {"topics": 4, "alpha": None, "beta": 0.01, "iterations": 200, "seed": 7},
        "window_days": 3,
        "series_topics": [2],
        "share_threshold": None,
        "mention_phrase": "george floyd",
        "workers": 4,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
