#!/usr/bin/env python3
"""Generate the bundled toy corpus and task resources under data/toy/.

Output is deterministic for a given --seed, so the committed files can be
regenerated and diffed.
"""

import argparse
import json
import random
from pathlib import Path

QWH = ["what", "when", "where", "which", "who", "whom", "whose", "why", "how"]
AUX = ["do", "does", "did", "be", "am", "are", "is", "was", "were",
       "shall", "will", "should", "would", "can", "could", "may", "might", "must"]

PEOPLE = ["the student", "the teacher", "the king", "the queen", "the scientist", "the author",
          "the president", "the engineer", "the doctor", "the farmer", "the artist", "the team",
          "the company", "the army", "the church", "the government", "napoleon", "einstein",
          "beyonce", "the pharaoh", "the emperor", "the composer"]
PLURAL_PEOPLE = ["the students", "the people", "the settlers", "the monks", "the workers",
                 "the soldiers", "the scientists", "the farmers", "the children", "the voters"]
PLACES = ["paris", "france", "london", "egypt", "china", "rome", "the city", "the river",
          "the island", "the valley", "the museum", "the university", "the library", "the castle",
          "the temple", "the harbor", "the mountains", "germany", "spain", "india"]
THINGS = ["the book", "the song", "the painting", "the treaty", "the bridge", "the tower",
          "the law", "the theory", "the album", "the machine", "the railway", "the cathedral",
          "the empire", "the war", "the festival", "the film", "the language", "the computer",
          "the engine", "the flag"]
TIMES = ["in 1805", "in 1920", "in 1066", "in the summer", "in the winter", "last year",
         "in the spring", "during the war", "after the war", "before the revolution"]
# verb: (past, present 3sg, base, participle)
VERBS = [("wrote", "writes", "write", "written"), ("built", "builds", "build", "built"),
         ("founded", "founds", "found", "founded"), ("discovered", "discovers", "discover", "discovered"),
         ("painted", "paints", "paint", "painted"), ("signed", "signs", "sign", "signed"),
         ("visited", "visits", "visit", "visited"), ("studied", "studies", "study", "studied"),
         ("designed", "designs", "design", "designed"), ("released", "releases", "release", "released"),
         ("destroyed", "destroys", "destroy", "destroyed"), ("invented", "invents", "invent", "invented"),
         ("described", "describes", "describe", "described"), ("ruled", "rules", "rule", "ruled"),
         ("won", "wins", "win", "won"), ("led", "leads", "lead", "led")]
INTRANSITIVE = [("lived", "lives", "live"), ("worked", "works", "work"), ("died", "dies", "die"),
                ("arrived", "arrives", "arrive"), ("stayed", "stays", "stay"), ("taught", "teaches", "teach")]
ADJ = ["famous", "large", "old", "beautiful", "important", "small", "ancient", "modern", "popular", "rich"]
POS_ADJ = ["good", "great", "wonderful", "excellent", "friendly", "delicious", "amazing", "pleasant"]
NEG_ADJ = ["bad", "terrible", "awful", "rude", "boring", "horrible", "dirty", "disappointing"]
SENT_NOUNS = ["the food", "the service", "the staff", "the room", "the coffee", "the pizza", "the hotel",
              "the waiter", "the price", "the music"]
ADVERBS = ["please", "quickly", "carefully", "always", "never", "gently", "slowly", "now"]
LOCATED = ["located", "situated", "born", "buried", "held"]


def declarative(r):
    kind = r.randrange(7)
    if kind == 0:
        v = r.choice(VERBS)
        return f"{r.choice(PEOPLE)} {v[0]} {r.choice(THINGS)} {r.choice(TIMES)} ."
    if kind == 1:
        v = r.choice(INTRANSITIVE)
        return f"{r.choice(PEOPLE)} {v[0]} in {r.choice(PLACES)} {r.choice(TIMES)} ."
    if kind == 2:
        return f"{r.choice(PLACES)} is located in {r.choice(PLACES)} ."
    if kind == 3:
        return f"{r.choice(THINGS)} was {r.choice(VERBS)[3]} by {r.choice(PEOPLE)} {r.choice(TIMES)} ."
    if kind == 4:
        return f"{r.choice(THINGS)} is {r.choice(ADJ)} and {r.choice(ADJ)} ."
    if kind == 5:
        v = r.choice(VERBS)
        return f"{r.choice(PLURAL_PEOPLE)} {v[0]} {r.choice(THINGS)} in {r.choice(PLACES)} ."
    return f"{r.choice(PEOPLE)} was {r.choice(LOCATED)} in {r.choice(PLACES)} ."


def question(r):
    """Returns (question text, keywords)."""
    kind = r.randrange(8)
    if kind == 0:
        v = r.choice(VERBS)
        thing = r.choice(THINGS)
        return f"who {v[0]} {thing} ?", [v[2], thing.split()[-1]]
    if kind == 1:
        place = r.choice(PLACES)
        return f"where is {place} located ?", [place.split()[-1], "located"]
    if kind == 2:
        v = r.choice(VERBS)
        p = r.choice(PEOPLE)
        return f"what did {p} {v[2]} in {r.choice(PLACES)} ?", [p.split()[-1], v[2]]
    if kind == 3:
        thing = r.choice(THINGS)
        v = r.choice(VERBS)
        return f"when was {thing} {v[3]} ?", [thing.split()[-1], v[3]]
    if kind == 4:
        p = r.choice(PEOPLE)
        v = r.choice(INTRANSITIVE)
        return f"where did {p} {v[2]} ?", [p.split()[-1], v[2]]
    if kind == 5:
        thing = r.choice(THINGS)
        return f"why is {thing} {r.choice(ADJ)} ?", [thing.split()[-1], r.choice(ADJ)]
    if kind == 6:
        p = r.choice(PLURAL_PEOPLE)
        v = r.choice(INTRANSITIVE)
        place = r.choice(PLACES)
        return f"how many {p.split()[-1]} {v[0]} in {place} ?", [p.split()[-1], place.split()[-1]]
    p = r.choice(PEOPLE)
    return f"which {r.choice(THINGS).split()[-1]} did {p} {r.choice(VERBS)[2]} ?", [p.split()[-1]]


def imperative(r):
    adv = r.choice(ADVERBS) + " " if r.random() < 0.4 else ""
    v = r.choice(VERBS)
    return f"{adv}{v[2]} {r.choice(THINGS)} ."


def sentiment(r):
    if r.random() < 0.5:
        return f"{r.choice(SENT_NOUNS)} was {r.choice(POS_ADJ)} ."
    return f"{r.choice(SENT_NOUNS)} was {r.choice(NEG_ADJ)} and {r.choice(SENT_NOUNS)} was {r.choice(NEG_ADJ)} ."


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "toy"))
    ap.add_argument("--seed", type=int, default=20200506)
    ap.add_argument("--sentences", type=int, default=5000)
    ap.add_argument("--inputs", type=int, default=50)
    args = ap.parse_args()

    r = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    corpus = []
    for _ in range(args.sentences):
        u = r.random()
        if u < 0.62:
            corpus.append(declarative(r))
        elif u < 0.80:
            corpus.append(question(r)[0])
        elif u < 0.90:
            corpus.append(imperative(r))
        else:
            corpus.append(sentiment(r))

    inputs = []
    held = random.Random(args.seed + 1)
    while len(inputs) < args.inputs:
        _, kws = question(held)
        kws = list(dict.fromkeys(kws))
        if len(kws) >= 2 and "\t".join(kws) not in inputs:
            inputs.append("\t".join(kws))

    words = []
    seen = set()
    for line in corpus + [i.replace("\t", " ") for i in inputs]:
        for w in line.split():
            if w not in seen:
                seen.add(w)
                words.append(w)
    for w in QWH + AUX:
        if w not in seen:
            seen.add(w)
            words.append(w)

    (out / "vocab.txt").write_text("\n".join(words) + "\n")
    (out / "corpus.txt").write_text("\n".join(corpus) + "\n")
    (out / "keywords.tsv").write_text("\n".join(inputs) + "\n")

    categories = {"categories": [
        {"name": "QWH", "members": QWH},
        {"name": "AUX", "members": AUX},
        {"name": "OTH", "residual": True},
    ]}
    (out / "categories.json").write_text(json.dumps(categories, indent=2) + "\n")

    pos = []
    for v in VERBS:
        pos.append(f"{v[2]}\tVERB")
    for v in INTRANSITIVE:
        pos.append(f"{v[2]}\tVERB")
    for a in ADVERBS:
        pos.append(f"{a}\tADV")
    (out / "pos_lexicon.tsv").write_text("\n".join(pos) + "\n")

    lex = [f"{w}\t1.0" for w in POS_ADJ] + [f"{w}\t-1.0" for w in NEG_ADJ]
    (out / "sentiment_lexicon.tsv").write_text("\n".join(lex) + "\n")

    # Small deterministic embeddings: related words share a random direction.
    emb_rng = random.Random(args.seed + 2)
    dim = 8
    groups = {}
    lines = [f"{len(words)} {dim}"]
    for w in words:
        key = "pos" if w in POS_ADJ else "neg" if w in NEG_ADJ else "place" if w in {p.split()[-1] for p in PLACES} else w
        if key not in groups:
            groups[key] = [emb_rng.gauss(0, 1) for _ in range(dim)]
        vec = [g + emb_rng.gauss(0, 0.3) for g in groups[key]]
        lines.append(w + " " + " ".join(f"{v:.4f}" for v in vec))
    (out / "embeddings.txt").write_text("\n".join(lines) + "\n")

    print(f"{len(corpus)} sentences, {len(words)} words, {len(inputs)} keyword inputs -> {out}")


if __name__ == "__main__":
    main()
