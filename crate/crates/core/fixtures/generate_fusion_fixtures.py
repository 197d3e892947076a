"""Writes the fusion fixtures (manifest + audio/text predictions).

Run from this directory: python3 generate_fusion_fixtures.py

sweep/      Binary-valence fixture whose weighted-fusion optimum sits at audio
            weight 0.6. Each "audio-right" song is labelled correctly only
            when w > t and each "text-right" song only when w < t, where the
            switch point t = |text - 0.5| / (|audio - 0.5| + |text - 0.5|)
            (inverse of w*(a-0.5) + (1-w)*(t-0.5) = 0). Switch points at
            0.575 and 0.625 leave 0.6 as the only perfect grid weight at
            step 0.05; every switch point is 0.025 away from the grid.
endpoint/   Text equals gold, audio inverted: optimum at weight 0.
selection/  100 songs, exactly 19 with audio max > text max.
"""
import json
import os


def write(dirname, songs, audio, text):
    os.makedirs(dirname, exist_ok=True)
    with open(os.path.join(dirname, "manifest.csv"), "w") as f:
        f.write("song_id,title,artist,valence,arousal,audio_path,lyrics_path\n")
        for sid, v, a in songs:
            f.write(f"{sid},Song {sid},Artist,{v},{a},audio/{sid}.mp3,lyrics/{sid}.txt\n")
    for name, recs in (("audio.json", audio), ("text.json", text)):
        with open(os.path.join(dirname, name), "w") as f:
            json.dump({"schema_version": "1", "records": recs}, f, indent=2)
            f.write("\n")


def quad_audio(sid, pos, high):
    # valence marginal Q1+Q4 = pos; arousal split 60/40 toward `high`
    hi = 0.6 if high else 0.4
    probs = [round(pos * hi, 6), round((1 - pos) * hi, 6), round((1 - pos) * (1 - hi), 6), round(pos * (1 - hi), 6)]
    probs[3] = round(1 - probs[0] - probs[1] - probs[2], 6)
    return {"song_id": sid, "modality": "audio", "model_id": "short-chunk-resnet",
            "labels": ["Q1", "Q2", "Q3", "Q4"], "probs": probs}


def bin_text(sid, pos, chunks=False):
    rec = {"song_id": sid, "modality": "text", "model_id": "lyrics-distilbert",
           "labels": ["positive", "negative"], "probs": [pos, round(1 - pos, 6)]}
    if chunks:
        rec["chunks"] = [
            {"start": 0, "end": 512, "probs": [round(pos + 0.1, 6), round(0.9 - pos, 6)]},
            {"start": 512, "end": 800, "probs": [round(pos - 0.1, 6), round(1.1 - pos, 6)]},
        ]
        rec["tokenizer_id"] = "distilbert-base-uncased"
    return rec


def sweep():
    # (gold valence sign, audio positive prob, text positive prob, count)
    groups = [
        ("+", 0.67, 0.27, 3),  # audio-right, switch 0.575
        ("-", 0.65, 0.25, 3),  # text-right, switch 0.625
        ("+", 0.71, 0.31, 2),  # audio-right, switch 0.475
        ("-", 0.61, 0.21, 2),  # text-right, switch 0.725
        ("+", 0.77, 0.37, 1),  # audio-right, switch 0.325
        ("-", 0.57, 0.17, 1),  # text-right, switch 0.825
        ("+", 0.80, 0.90, 4),  # both right
        ("-", 0.30, 0.20, 4),  # both right
    ]
    songs, audio, text = [], [], []
    n = 0
    for gold, a, t, count in groups:
        for _ in range(count):
            n += 1
            sid = f"s{n:02d}"
            high = n % 3 != 0
            v = 0.5 if gold == "+" else -0.5
            ar = 0.4 if high else -0.4
            songs.append((sid, v, ar))
            audio.append(quad_audio(sid, a, high))
            text.append(bin_text(sid, t, chunks=(n % 5 == 0)))
    write("sweep", songs, audio, text)


def endpoint():
    songs, audio, text = [], [], []
    for i in range(10):
        sid = f"e{i:02d}"
        pos = i % 2 == 0
        songs.append((sid, 0.6 if pos else -0.6, 0.3))
        text.append(bin_text(sid, 0.9 if pos else 0.1))
        a = 0.2 if pos else 0.85
        audio.append({"song_id": sid, "modality": "audio", "model_id": "short-chunk-resnet",
                      "labels": ["positive", "negative"], "probs": [a, round(1 - a, 6)]})
    write("endpoint", songs, audio, text)


def selection():
    songs, audio, text = [], [], []
    for i in range(100):
        sid = f"p{i:03d}"
        pos = i % 2 == 0
        songs.append((sid, 0.5 if pos else -0.5, 0.5))
        if i % 5 == 0 and i < 95:  # i = 0, 5, ..., 90: 19 songs
            a, t = 0.9, 0.7
        else:
            a, t = 0.65, 0.95 - (i % 7) * 0.02
        if not pos:
            a, t = round(1 - a, 6), round(1 - t, 6)
        audio.append({"song_id": sid, "modality": "audio", "model_id": "short-chunk-resnet",
                      "labels": ["positive", "negative"], "probs": [a, round(1 - a, 6)]})
        text.append(bin_text(sid, round(t, 6)))
    write("selection", songs, audio, text)


sweep()
endpoint()
selection()
