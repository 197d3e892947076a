"""Independent reference for the golden mapping tables in this directory.

Run from this directory: python3 oracle_mapping.py
"""
import csv
import re

MID = 5.0

lex = {}
with open("demo_lexicon.csv") as f:
    for row in csv.DictReader(f):
        lex[row["word"].strip().lower()] = (float(row["valence_mean"]), float(row["arousal_mean"]))

overrides = {}
with open("published_overrides.csv") as f:
    for row in csv.DictReader(f):
        overrides[row["term"]] = (row["decision"], row["provenance"])


def point(term):
    words = [w.lower() for w in re.split(r"[\s\-_]+", term) if w]
    found = [lex[w] for w in words if w in lex]
    if not found:
        return None
    return (sum(v for v, _ in found) / len(found), sum(a for _, a in found) / len(found))


def quadrant(p):
    if p is None:
        return "unmapped"
    v, a = p
    if v == MID or a == MID:
        return "unmapped"
    return {(True, True): "Q1", (False, True): "Q2", (False, False): "Q3", (True, False): "Q4"}[(v > MID, a > MID)]


def write(name, rows):
    with open(name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["term", "decision", "provenance"])
        for r in sorted(rows):
            w.writerow(r)


def rule(term, decision):
    if term in overrides:
        return (term, *overrides[term])
    return (term, decision, "lexicon-derived")


with open("mtg_jamendo_moods.txt") as f:
    vocab = {l.strip().lower() for l in f if l.strip() and not l.startswith("#")}
write("golden_mtg_mapping.csv", [rule(t, quadrant(point(t))) for t in vocab])

clusters = [
    "passionate, rousing, confident, boisterous, rowdy",
    "rollicking, cheerful, fun, sweet, amiable/good-natured",
    "literate, poignant, wistful, bittersweet, autumnal, brooding",
    "humorous, silly, campy, quirky, whimsical, witty, wry",
    "aggressive, fiery, tense/anxious, intense, volatile, visceral",
]
clusters = [[a.strip() for part in c.split(",") for a in part.split("/")] for c in clusters]
write("golden_mirex_mapping.csv", [rule(a, quadrant(point(a))) for c in clusters for a in c])

per_cluster = []
for c in clusters:
    pts = [point(a) for a in c if point(a) is not None]
    mean = (sum(v for v, _ in pts) / len(pts), sum(a for _, a in pts) / len(pts)) if pts else None
    per_cluster += [rule(a, quadrant(mean)) for a in c]
write("golden_mirex_per_cluster.csv", per_cluster)
