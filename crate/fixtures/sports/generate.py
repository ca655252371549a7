#!/usr/bin/env python3
"""Generates the 200-page three-domain corpus under corpus/.

Four hosts of 50 pages each. Pages on cricket.test, football.test and
hockey.test are mostly about that sport, with some two- and three-sport
pages and some off-topic ones; news.test mixes everything. Output is
deterministic for a given seed.
"""
import random
import shutil
from pathlib import Path

SEED = 2009
HERE = Path(__file__).resolve().parent
OUT = HERE / "corpus"

SPECIFIC = {
    "cricket": ["wicket", "bat", "crease", "test match", "bowler", "batsman", "innings",
                "off stump", "not out", "one day match", "dismissed", "umpire", "pitch"],
    "football": ["striker", "offside", "goalkeeper", "free kick", "penalty", "centre circle",
                 "club", "association", "crowd", "goal", "pitch"],
    "hockey": ["puck", "face off", "hockey stick", "field hockey", "penalty corner", "dribble",
               "elbow pads", "defender", "protector", "umpire", "goal"],
}
SHARED = ["ball", "ground", "player"]
FILLER = ("the a and of to in on for with from this that season report today local team fans "
          "weather travel city news morning evening coach training schedule review week history "
          "photo gallery contact about after before during long short bright quiet busy road "
          "river station market kitchen garden music film book story people family friends "
          "holiday summer winter spring autumn").split()
HOSTS = ["cricket.test", "football.test", "hockey.test", "news.test"]
PER_HOST = 50


def sentence(rng, terms, k):
    words = [rng.choice(FILLER) for _ in range(rng.randint(6, 12))]
    for _ in range(k):
        words.insert(rng.randrange(len(words) + 1), rng.choice(terms))
    return " ".join(words).capitalize() + "."


def body_for(rng, sports):
    paras = []
    for sport in sports:
        paras += [sentence(rng, SPECIFIC[sport], rng.randint(2, 3)) for _ in range(3)]
    if not sports:
        paras += [sentence(rng, SHARED, rng.randint(0, 1)) for _ in range(3)]
    paras.append(sentence(rng, SHARED, 1))
    rng.shuffle(paras)
    return paras


def kind_for(rng, host, idx):
    main = host.split(".")[0]
    sports = list(SPECIFIC)
    if host == "news.test":
        roll = rng.random()
        if idx == 0 or roll < 0.2:
            return sports
        if roll < 0.4:
            return rng.sample(sports, 2)
        if roll < 0.6:
            return [rng.choice(sports)]
        return []
    roll = rng.random()
    if idx == 0 or roll < 0.6:
        return [main]
    if roll < 0.75:
        return [main, rng.choice([s for s in sports if s != main])]
    if roll < 0.83:
        return sports
    return []


def url_path(idx):
    return "/" if idx == 0 else f"/p{idx:03d}.html"


def file_name(idx):
    return "index.html" if idx == 0 else f"p{idx:03d}.html"


def main():
    rng = random.Random(SEED)
    if OUT.exists():
        shutil.rmtree(OUT)
    pages = [(h, i) for h in HOSTS for i in range(PER_HOST)]
    for host, idx in pages:
        sports = kind_for(rng, host, idx)
        if idx == 0:
            targets = [(host, j) for j in rng.sample(range(1, PER_HOST), 8)]
        else:
            targets = []
            for _ in range(rng.randint(3, 6)):
                other = host if rng.random() < 0.7 else rng.choice(HOSTS)
                targets.append((other, rng.randrange(PER_HOST)))
        links = []
        for th, ti in targets:
            href = url_path(ti) if th == host else f"http://{th}{url_path(ti)}"
            links.append(f'<li><a href="{href}">{th} {ti}</a></li>')
        title = " ".join(sports) + " page" if sports else "notes"
        paras = "\n".join(f"<p>{p}</p>" for p in body_for(rng, sports))
        html = (f"<!DOCTYPE html>\n<html><head><title>{title.title()} {idx}</title>\n"
                f"<script>var trackerBall = 'ball wicket puck';</script></head>\n<body>\n"
                f"{paras}\n<ul>\n" + "\n".join(links) + "\n</ul>\n</body></html>\n")
        d = OUT / host
        d.mkdir(parents=True, exist_ok=True)
        (d / file_name(idx)).write_text(html, encoding="utf-8")


if __name__ == "__main__":
    main()
