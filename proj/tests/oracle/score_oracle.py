#!/usr/bin/env python3
"""Standalone re-implementation of the scoring rules, used to freeze the
expected metrics of the hand-scored fixture.

    python3 score_oracle.py tests/data/hand_scored > expected_metrics.json

Responses with a "status" other than 200 are failed requests and score as
empty predictions, like unparseable ones.
"""

import json
import string
import sys
from pathlib import Path

EMOTIONS = ["Joy", "Trust", "Fear", "Surprise", "Sadness", "Disgust", "Anger", "Anticipation", "Neutral"]


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def tokens(text):
    out = []
    for unit in text.lower().split():
        unit = unit.strip(string.punctuation)
        if unit:
            out.append(unit)
    return out


def normalized(text):
    return " ".join(text.lower().split())


def object_blocks(raw):
    """Every balanced {...} substring, in start order."""
    blocks = []
    for start, ch in enumerate(raw):
        if ch != "{":
            continue
        depth, in_str, esc = 0, False, False
        for i in range(start, len(raw)):
            c = raw[i]
            if in_str:
                if esc:
                    esc = False
                elif c == "\\":
                    esc = True
                elif c == '"':
                    in_str = False
                continue
            if c == '"':
                in_str = True
            elif c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    blocks.append(raw[start:i + 1])
                    break
    return blocks


def pick_block(raw):
    parsed = []
    for b in object_blocks(raw):
        try:
            v = json.loads(b)
        except ValueError:
            continue
        if isinstance(v, dict):
            if "emotions" in v:
                return v
            parsed.append(v)
    return parsed[0] if parsed else None


def relaxed_find(review, trigger):
    """Case-insensitive, whitespace-collapsed search; returns the review's
    original characters for the match."""
    folded, origin = [], []
    prev_space = True
    for i, c in enumerate(review):
        if c.isspace():
            if not prev_space:
                folded.append(" ")
                origin.append(i)
            prev_space = True
            continue
        folded.append(c.lower())
        origin.append(i)
        prev_space = False
    if folded and folded[-1] == " ":
        folded.pop()
        origin.pop()
    hay = "".join(folded)
    needle = " ".join(trigger.lower().split())
    if not needle:
        return None
    pos = hay.find(needle)
    if pos < 0:
        return None
    return review[origin[pos]:origin[pos + len(needle) - 1] + 1]


def parse(raw, review):
    """Returns (pairs, status) where pairs maps emotion -> list of trigger texts."""
    doc = pick_block(raw)
    if doc is None or not isinstance(doc.get("emotions"), list):
        return {}, "Unparseable"
    repaired = False
    drafts = {}
    for entry in doc["emotions"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("emotion"), str):
            continue
        label = entry["emotion"].strip().lower()
        match = [e for e in EMOTIONS if e.lower() == label]
        if not match:
            continue
        emotion = match[0]
        kept = drafts.setdefault(emotion, [])
        for t in entry.get("triggers") or []:
            if not isinstance(t, str) or not t.strip() or emotion == "Neutral":
                continue
            if t in review:
                text = t
            else:
                text = relaxed_find(review, t)
                if text is None:
                    continue
                repaired = True
            if text not in kept:
                kept.append(text)
    others = any(e != "Neutral" and ts for e, ts in drafts.items())
    pairs = {}
    for e, ts in drafts.items():
        if e == "Neutral":
            if not others:
                pairs[e] = []
        elif ts:
            pairs[e] = ts
    return pairs, "Repaired" if repaired else "Clean"


def rouge1(p, g):
    if not p and not g:
        return 1.0
    bag = {}
    for t in g:
        bag[t] = bag.get(t, 0) + 1
    hit = 0
    for t in p:
        if bag.get(t, 0) > 0:
            bag[t] -= 1
            hit += 1
    return f1(hit, len(p), len(g))


def lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            table[i][j] = table[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else max(table[i - 1][j], table[i][j - 1])
    return table[-1][-1]


def rougeL(p, g):
    if not p and not g:
        return 1.0
    return f1(lcs(p, g), len(p), len(g))


def f1(hit, n_pred, n_gold):
    prec = hit / n_pred if n_pred else 0.0
    rec = hit / n_gold if n_gold else 0.0
    return 2 * prec * rec / (prec + rec) if prec > 0 and rec > 0 else 0.0


def main(fixture):
    fixture = Path(fixture)
    reviews = {r["review_id"]: r["text"] for r in read_jsonl(fixture / "reviews.jsonl")}
    gold = {g["review_id"]: {e["emotion"]: e["triggers"] for e in g["emotions"]}
            for g in read_jsonl(fixture / "gold.jsonl")}
    responses = {r["review_id"]: r for r in read_jsonl(fixture / "responses.jsonl")}

    stats = {"clean": 0, "repaired": 0, "unparseable": 0, "failed_requests": 0}
    hits = n_pred = n_gold = 0
    n_tpred = n_em = n_pm = n_nomatch = n_tgold = 0
    sum1 = sumL = 0.0

    for rid, text in reviews.items():
        resp = responses[rid]
        if resp.get("status", 200) != 200:
            stats["failed_requests"] += 1
            pred = {}
        else:
            pred, status = parse(resp["content"], text)
            stats[status.lower()] += 1
        g = gold[rid]

        hits += len(set(pred) & set(g))
        n_pred += len(pred)
        n_gold += len(g)

        for emotion, triggers in pred.items():
            gold_triggers = g.get(emotion, [])
            for t in triggers:
                n_tpred += 1
                if any(normalized(t) == normalized(gt) for gt in gold_triggers):
                    n_em += 1
                elif any(set(tokens(t)) & set(tokens(gt)) for gt in gold_triggers):
                    n_pm += 1
                else:
                    n_nomatch += 1

        for emotion, gold_triggers in g.items():
            n_tgold += len(gold_triggers)
            preds = pred.get(emotion, [])
            cands = []
            for gi, gt in enumerate(gold_triggers):
                for pi, pt in enumerate(preds):
                    cands.append((-rougeL(tokens(pt), tokens(gt)), gi, pi))
            cands.sort()
            used_g, used_p = set(), set()
            for neg_l, gi, pi in cands:
                if gi in used_g or pi in used_p:
                    continue
                used_g.add(gi)
                used_p.add(pi)
                sumL += -neg_l
                sum1 += rouge1(tokens(preds[pi]), tokens(gold_triggers[gi]))

    precision = hits / n_pred if n_pred else 0.0
    recall = hits / n_gold if n_gold else 0.0
    out = {
        "P": precision,
        "R": recall,
        "F1": 2 * precision * recall / (precision + recall) if precision > 0 and recall > 0 else 0.0,
        "EM": n_em / n_tpred if n_tpred else 0.0,
        "PM": n_pm / n_tpred if n_tpred else 0.0,
        "R1": sum1 / n_tgold if n_tgold else 0.0,
        "RL": sumL / n_tgold if n_tgold else 0.0,
        "counts": {"hits": hits, "n_pred": n_pred, "n_gold": n_gold, "trigger_pred": n_tpred,
                   "trigger_gold": n_tgold, "em": n_em, "pm": n_pm, "nomatch": n_nomatch},
        "parse": stats,
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "hand_scored")
