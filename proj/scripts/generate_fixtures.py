#!/usr/bin/env python3
"""Regenerates the synthetic bilingual fixtures under fixtures/.

The corpus is fully synthetic: template tweets with class-correlated keyword
sets, plus the usual tweet noise (URLs, mentions, hashtags, zero-width
characters, emoji). Deterministic for a fixed seed; run from the repo root:

    python3 scripts/generate_fixtures.py
"""

import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

EN_WORDS = {
    "positive": ["love", "great", "happy", "amazing", "wonderful", "excellent", "win", "enjoy"],
    "negative": ["hate", "awful", "terrible", "sad", "worst", "annoying", "angry", "broken"],
    "neutral": ["meeting", "schedule", "update", "report", "weather", "news", "agenda", "notes"],
}
AR_WORDS = {
    "positive": ["جيد", "رائع", "سعيد", "ممتاز", "أحب", "جميل", "فوز", "نجاح"],
    "negative": ["سيء", "فظيع", "حزين", "أكره", "مزعج", "غاضب", "خسارة", "فشل"],
    "neutral": ["اجتماع", "جدول", "تقرير", "طقس", "أخبار", "موعد", "قائمة", "ملاحظات"],
}
EN_FILLER = ["today", "really", "so", "about", "the", "this", "just", "very", "much", "now"]
AR_FILLER = ["اليوم", "جدا", "الآن", "حول", "هذا", "فقط", "كثيرا", "هنا", "كل", "بعد"]
MENTIONS = ["@sara", "@omar", "@news_desk", "@team", "@weather_bot"]
HASHTAGS = ["#monday", "#football", "#tech", "#قهوة", "#السعودية"]
URLS = ["http://t.co/abc123", "https://example.com/x?p=1", "www.news.site/story"]
EMOJI = ["😀", "😡", "🙂", "☔", "⚽"]
NOISE_INVISIBLES = ["​", "‏", "﻿"]

LABEL_CYCLE = ["positive", "positive", "negative", "neutral", "positive", "negative",
               "negative", "neutral", "positive", "negative"]  # 40/40/20 mix


def make_tweet(rng, lang, label, uid):
    words = EN_WORDS if lang == "en" else AR_WORDS
    filler = EN_FILLER if lang == "en" else AR_FILLER
    toks = rng.sample(words[label], 3)  # redundant class signal
    toks += rng.sample(filler, rng.randint(2, 4))
    rng.shuffle(toks)
    if rng.random() < 0.35:
        toks.insert(0, rng.choice(MENTIONS))
    if rng.random() < 0.3:
        toks.append(rng.choice(HASHTAGS))
    if rng.random() < 0.25:
        toks.append(rng.choice(URLS))
    if rng.random() < 0.2:
        toks.append(rng.choice(EMOJI))
    if rng.random() < 0.15:
        k = rng.randrange(len(toks))
        toks[k] = toks[k] + rng.choice(NOISE_INVISIBLES)
    toks.append(f"t{uid}")  # keeps every tweet globally unique
    return " ".join(toks)


def semeval_rows(rng, lang, prefix, n, uid_start):
    rows = []
    for i in range(n):
        label = LABEL_CYCLE[(uid_start + i) % len(LABEL_CYCLE)]
        text = make_tweet(rng, lang, label, uid_start + i)
        rows.append((f"{prefix}{uid_start + i}", label, text))
    return rows


def write_semeval(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for rid, label, text in rows:
            f.write(f"{rid}\t{label}\t{text}\n")


def write_astd(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for text, label in rows:
            f.write(f"{text}\t{label}\n")


def main():
    rng = random.Random(20240501)

    # --- English: four train files, two dev files (2013/14 test), 2017 test.
    dev13 = semeval_rows(rng, "en", "en13t-", 12, 10_000)
    dev14 = semeval_rows(rng, "en", "en14t-", 12, 11_000)
    tr13 = semeval_rows(rng, "en", "en13-", 60, 0) + dev13  # the combined
    tr14 = semeval_rows(rng, "en", "en14-", 50, 100) + dev14  # distribution
    tr15 = semeval_rows(rng, "en", "en15-", 45, 200)  # carries the old test
    tr16 = semeval_rows(rng, "en", "en16-", 45, 300)  # rows inside train
    test17 = semeval_rows(rng, "en", "en17t-", 20, 12_000)
    write_semeval(OUT / "en" / "semeval2013-train.tsv", tr13)
    write_semeval(OUT / "en" / "semeval2014-train.tsv", tr14)
    write_semeval(OUT / "en" / "semeval2015-train.tsv", tr15)
    write_semeval(OUT / "en" / "semeval2016-train.tsv", tr16)
    write_semeval(OUT / "en" / "semeval2013-test.tsv", dev13)
    write_semeval(OUT / "en" / "semeval2014-test.tsv", dev14)
    write_semeval(OUT / "en" / "semeval2017-test.tsv", test17)

    # --- Arabic: three SemEval subtask files with overlaps, ASTD with OBJ,
    # and the official task-A test file.
    taskA = semeval_rows(rng, "ar", "arA-", 80, 400)
    taskB = semeval_rows(rng, "ar", "arB-", 60, 500)
    taskD = semeval_rows(rng, "ar", "arD-", 60, 600)
    # deliberate cross-subtask duplicates: same text, different id
    for k in range(12):
        rid, label, text = taskA[k]
        taskB[k] = (f"arB-dup{k}", label, text)
    write_semeval(OUT / "ar" / "semeval17-taskA-train.tsv", taskA)
    write_semeval(OUT / "ar" / "semeval17-taskB-train.tsv", taskB)
    write_semeval(OUT / "ar" / "semeval17-taskD-train.tsv", taskD)

    astd = []
    astd_src = semeval_rows(rng, "ar", "x", 60, 700)
    label_map = {"positive": "POS", "negative": "NEG", "neutral": "NEUTRAL"}
    for _, label, text in astd_src:
        astd.append((text, label_map[label]))
    for k in range(20):  # the fourth class, dropped downstream
        astd.append((make_tweet(rng, "ar", "neutral", 800 + k) + " خبر", "OBJ"))
    rng.shuffle(astd)
    write_astd(OUT / "ar" / "astd.tsv", astd)

    ar_test = semeval_rows(rng, "ar", "arT-", 20, 13_000)
    write_semeval(OUT / "ar" / "semeval17-taskA-test.tsv", ar_test)

    # --- 32-example overfit fixture (+ a small dev split for the loop).
    overfit = semeval_rows(rng, "en", "ov-", 32, 14_000)
    write_semeval(OUT / "overfit" / "train32-en.tsv", overfit)
    write_semeval(OUT / "overfit" / "dev-en.tsv", semeval_rows(rng, "en", "ovd-", 9, 15_000))

    print("fixtures written under", OUT)


if __name__ == "__main__":
    main()
