#!/usr/bin/env python3
"""Generates the synthetic, pre-tagged news corpora bundled under data/.

Each topic has a handful of subtopics, each with a key phrase and its own
vocabulary. Articles are runs of short paragraphs, each paragraph sticking to
one subtopic, so segmentation, label mining and ranking all have real signal.

Usage: tools/gen_fixtures.py [OUT_DIR]   (default: data/)
"""

import json
import random
import sys
from pathlib import Path

GENERIC_NOUNS = ["officials", "fans", "report", "statement", "experts", "media", "organizers", "critics"]
GENERIC_VERBS = ["said", "announced", "confirmed", "added", "noted"]
PREPS = ["in", "at", "with", "for", "after", "before", "during"]
DETS = ["the", "the", "this", "their"]
TIME_WORDS = ["monday", "tuesday", "yesterday", "today", "2018", "last week"]
ADVERBS = ["reportedly", "quickly", "finally", "clearly", "recently"]

TOPICS = {
    "russia world cup": {
        "source": "sports-daily",
        "subtopics": [
            ("draw ceremony", ["pots", "groups", "seeds", "stage", "kremlin", "host"], ["held", "revealed", "placed", "paired"], ["opening", "official"]),
            ("friendly match", ["history", "rivals", "warmup", "spain", "argentina", "goal"], ["played", "scored", "won", "drew"], ["historic", "tight"]),
            ("ticket sales", ["tickets", "buyers", "portal", "demand", "prices", "resale"], ["sold", "bought", "requested", "capped"], ["cheap", "expensive"]),
            ("stadium construction", ["stadium", "workers", "arena", "budget", "cranes", "roof"], ["built", "finished", "delayed", "inspected"], ["new", "huge"]),
            ("video assistant referee", ["replays", "referee", "penalty", "decision", "review", "monitor"], ["overturned", "checked", "reviewed", "awarded"], ["disputed", "controversial"]),
            ("team squad", ["coach", "squad", "players", "injury", "captain", "roster"], ["named", "dropped", "picked", "trained"], ["young", "experienced"]),
            ("security measures", ["police", "checkpoints", "hooligans", "visas", "cameras", "border"], ["deployed", "tightened", "screened", "banned"], ["strict", "heavy"]),
            ("broadcast rights", ["broadcaster", "viewers", "channels", "audience", "rights", "licence"], ["aired", "streamed", "negotiated", "secured"], ["live", "global"]),
        ],
    },
    "self driving car": {
        "source": "tech-wire",
        "subtopics": [
            ("road test", ["highway", "route", "miles", "permit", "city", "lane"], ["tested", "drove", "completed", "logged"], ["public", "long"]),
            ("lidar sensor", ["laser", "sensor", "range", "cost", "chip", "radar"], ["mounted", "detected", "scanned", "measured"], ["cheaper", "precise"]),
            ("traffic accident", ["crash", "pedestrian", "injury", "police", "investigation", "intersection"], ["collided", "injured", "investigated", "blamed"], ["fatal", "serious"]),
            ("mass production", ["factory", "units", "assembly", "supplier", "volume", "plant"], ["produced", "assembled", "shipped", "scaled"], ["first", "large"]),
            ("open platform", ["partners", "developers", "code", "ecosystem", "software", "map"], ["released", "shared", "joined", "licensed"], ["open", "free"]),
            ("safety regulation", ["rules", "regulators", "law", "liability", "standards", "ministry"], ["drafted", "approved", "required", "enforced"], ["federal", "strict"]),
            ("ride hailing service", ["passengers", "fleet", "rides", "app", "drivers", "pilot"], ["launched", "booked", "expanded", "offered"], ["paid", "urban"]),
            ("chip supplier", ["processor", "compute", "partnership", "contract", "nvidia", "power"], ["signed", "supplied", "designed", "upgraded"], ["powerful", "custom"]),
        ],
    },
    "missile defense system": {
        "source": "world-news",
        "subtopics": [
            ("radar deployment", ["radar", "site", "battery", "launchers", "base", "hill"], ["deployed", "installed", "moved", "positioned"], ["mobile", "advanced"]),
            ("diplomatic protest", ["embassy", "envoy", "ministry", "talks", "summit", "objection"], ["protested", "summoned", "rejected", "urged"], ["formal", "sharp"]),
            ("economic retaliation", ["boycott", "shops", "tourism", "exports", "retailer", "losses"], ["closed", "cancelled", "boycotted", "suffered"], ["economic", "heavy"]),
            ("local residents", ["villagers", "farmers", "protesters", "town", "rally", "petition"], ["protested", "blocked", "marched", "signed"], ["angry", "local"]),
            ("military drill", ["exercise", "troops", "navy", "warships", "drill", "jets"], ["conducted", "launched", "joined", "staged"], ["joint", "live"]),
            ("missile test", ["launch", "warhead", "trajectory", "sea", "intercept", "rocket"], ["fired", "tracked", "intercepted", "landed"], ["ballistic", "successful"]),
            ("election debate", ["candidate", "voters", "campaign", "debate", "poll", "parliament"], ["debated", "promised", "voted", "questioned"], ["presidential", "fierce"]),
            ("environmental review", ["assessment", "noise", "study", "environment", "health", "waves"], ["reviewed", "delayed", "completed", "published"], ["full", "official"]),
        ],
    },
    "battle royale game": {
        "source": "game-news",
        "subtopics": [
            ("player count", ["players", "record", "peak", "concurrent", "users", "servers"], ["reached", "broke", "topped", "doubled"], ["concurrent", "daily"]),
            ("cheating software", ["cheaters", "hacks", "accounts", "aimbot", "bans", "plugins"], ["banned", "detected", "sold", "arrested"], ["illegal", "massive"]),
            ("mobile version", ["phones", "downloads", "store", "port", "version", "touch"], ["released", "downloaded", "ported", "ranked"], ["mobile", "free"]),
            ("esports tournament", ["tournament", "teams", "prize", "finals", "league", "arena"], ["hosted", "won", "qualified", "streamed"], ["international", "huge"]),
            ("game update", ["patch", "map", "weapons", "vehicles", "bugs", "mode"], ["added", "fixed", "changed", "released"], ["new", "major"]),
            ("copyright lawsuit", ["lawsuit", "court", "developer", "clone", "copyright", "damages"], ["sued", "filed", "settled", "claimed"], ["legal", "similar"]),
            ("live streaming platform", ["streamers", "viewers", "platform", "channel", "followers", "contract"], ["streamed", "signed", "watched", "gained"], ["popular", "exclusive"]),
            ("server outage", ["servers", "outage", "lag", "maintenance", "region", "queue"], ["crashed", "restored", "delayed", "apologized"], ["long", "unexpected"]),
        ],
    },
}

ARTICLES_PER_TOPIC = 40


def tag_phrase(phrase):
    return [(w, "n") for w in phrase.split()]


def make_sentence(rng, topic_name, sub, force_phrase, focus):
    phrase, nouns, verbs, adjs = sub
    toks = []
    if rng.random() < 0.2:
        tw = rng.choice(TIME_WORDS)
        toks += [(w, "nt") for w in tw.split()]
    subject_uses_phrase = force_phrase or rng.random() < 0.35
    if subject_uses_phrase:
        toks.append((rng.choice(DETS), "r"))
        toks += tag_phrase(phrase)
    else:
        toks.append((rng.choice(DETS), "r"))
        if rng.random() < 0.5:
            toks.append((rng.choice(adjs), "a"))
        toks.append((rng.choice(nouns + GENERIC_NOUNS[:3]), "n"))
    if rng.random() < 0.15:
        toks.append((rng.choice(ADVERBS), "d"))
    toks.append((rng.choice(verbs), "v"))
    toks.append((rng.choice(DETS), "r"))
    if rng.random() < 0.5:
        toks.append((rng.choice(adjs), "a"))
    toks.append((focus if rng.random() < 0.7 else rng.choice(nouns), "n"))
    toks.append((rng.choice(PREPS), "p"))
    if not subject_uses_phrase and rng.random() < 0.3:
        toks.append(("the", "r"))
        toks += tag_phrase(phrase)
    elif rng.random() < 0.25:
        toks.append(("the", "r"))
        toks += tag_phrase(topic_name)
    else:
        toks.append((rng.choice(nouns), "n"))
    if rng.random() < 0.35:
        toks += [(rng.choice(GENERIC_NOUNS), "n"), (rng.choice(GENERIC_VERBS), "v")]
    text = " ".join(w for w, _ in toks)
    return text[0].upper() + text[1:] + ".", toks


def make_article(rng, topic_name, spec, idx, base_time):
    subs = spec["subtopics"]
    weights = [1.0 / (k + 1.5) for k in range(len(subs))]
    body, body_tokens = [], []
    paragraphs = rng.randint(4, 6)
    last = None
    main = None
    for _ in range(paragraphs):
        sub = rng.choices(subs, weights=weights)[0]
        while sub is last:
            sub = rng.choices(subs, weights=weights)[0]
        last = sub
        main = main or sub
        n = rng.choices([1, 2, 3], weights=[0.2, 0.45, 0.35])[0]
        focus = rng.choice(sub[1])
        for k in range(n):
            text, toks = make_sentence(rng, topic_name, sub, force_phrase=(k == 0 and rng.random() < 0.5), focus=focus)
            body.append(text)
            body_tokens.append([[w, p] for w, p in toks])
    title_toks = tag_phrase(main[0]) + [(rng.choice(main[2]), "v")] + tag_phrase(topic_name)
    title_text = " ".join(w for w, _ in title_toks)
    return {
        "id": f"{topic_name.replace(' ', '-')}-{idx:03d}",
        "title": title_text[0].upper() + title_text[1:],
        "title_tokens": [[w, p] for w, p in title_toks],
        "body": body,
        "body_tokens": body_tokens,
        "published_at": base_time + idx * 3600 * 7 + rng.randint(0, 3000),
        "source": spec["source"],
    }


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    (out / "corpora").mkdir(parents=True, exist_ok=True)
    gold = []
    for t, (topic_name, spec) in enumerate(TOPICS.items()):
        rng = random.Random(1000 + t)
        base = 1_512_000_000 + t * 10_000_000
        arts = [make_article(rng, topic_name, spec, i, base) for i in range(ARTICLES_PER_TOPIC)]
        rng.shuffle(arts)  # file order is not chronological
        path = out / "corpora" / f"{topic_name.replace(' ', '_')}.jsonl"
        with path.open("w", encoding="utf-8") as f:
            for a in arts:
                f.write(json.dumps(a, ensure_ascii=False) + "\n")
        if t == 0:
            with (out / "sample20.jsonl").open("w", encoding="utf-8") as f:
                for a in arts[:20]:
                    f.write(json.dumps(a, ensure_ascii=False) + "\n")
        for k, sub in enumerate(spec["subtopics"]):
            gold.append({"topic": topic_name, "label": sub[0], "gold_score": 3 if k < 4 else 2})
            words = sub[0].split()
            if len(words) == 3:
                gold.append({"topic": topic_name, "label": " ".join(words[1:]), "gold_score": 1})
    with (out / "gold.jsonl").open("w", encoding="utf-8") as f:
        for g in gold:
            f.write(json.dumps(g, ensure_ascii=False) + "\n")

    # Planted-signal dataset with explicit features: f1 carries the gold score.
    rng = random.Random(77)
    with (out / "planted.jsonl").open("w", encoding="utf-8") as f:
        for t in range(4):
            for i in range(40):
                gold_score = 3 if i < 6 else (1 if i < 8 else 0)
                feats = [rng.uniform(0, 1) for _ in range(12)]
                feats[0] = gold_score * 2.0 + rng.gauss(0, 0.01)
                f.write(json.dumps({"topic": f"planted-{t}", "label": f"label-{t}-{i:02d}",
                                    "gold_score": gold_score, "features": feats}) + "\n")


if __name__ == "__main__":
    main()
