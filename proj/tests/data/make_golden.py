"""Computes fixture_piece.features.txt directly from the descriptor definitions."""
import json
import math
from fractions import Fraction

NAMES = ["PitchEntropy", "PitchRange", "AveragePitch", "DisplacementRate", "AverageIOI", "PitchSetLZ"]


def hand_features(notes, bpm):
    pitches = [n["pitch"] for n in notes]
    n = len(pitches)
    entropy = -sum((pitches.count(p) / n) * math.log2(pitches.count(p) / n) for p in set(pitches))
    groups = {}
    for note in notes:
        onset = Fraction(*note["onset_beats"])
        groups.setdefault(onset, set()).add(note["pitch"])
    onsets = sorted(groups)
    sets = [frozenset(groups[o]) for o in onsets]
    weights = []
    for a, b in zip(sets, sets[1:]):
        d = max(abs(p - q) for p in a for q in b)
        weights.append(0 if d < 7 else (1 if d < 12 else 2))
    disp = sum(weights) / len(weights)
    seconds = [float(o) * 60.0 / bpm for o in onsets]
    ioi = sum(y - x for x, y in zip(seconds, seconds[1:])) / (len(seconds) - 1)
    phrases, seen, cur = 0, set(), ()
    for s in sets:
        cur = cur + (s,)
        if cur not in seen:
            seen.add(cur)
            phrases += 1
            cur = ()
    if cur:
        phrases += 1
    return [abs(entropy), max(pitches) - min(pitches), sum(pitches) / n, disp, ioi, phrases]


doc = json.load(open("fixture_piece.json"))
bpm = doc.get("tempo_bpm", 100)
right = hand_features(doc["parts"]["right"], bpm)
left = hand_features(doc["parts"]["left"], bpm)
with open("fixture_piece.features.txt", "w") as out:
    for i, name in enumerate(NAMES):
        out.write(f"{name}-R {right[i]!r}\n")
        out.write(f"{name}-L {left[i]!r}\n")
