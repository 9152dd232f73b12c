#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled world catalog, triple corpus and embedding tables.

The outputs under data/ are committed; rerunning this script with the same
seed reproduces them byte for byte.

    python3 scripts/make_data.py [--out data] [--seed 20221101]
"""

import argparse
import math
import random
from pathlib import Path

DIM = 32
VOCAB_VERSION = "diffg-vocab v1"

# room -> [(location, category, synonyms)]
ROOMS = [
    ("kitchen", [
        ("dishwasher", "container", ["dish machine", "dishwashing machine"]),
        ("refrigerator", "container", ["fridge", "icebox"]),
        ("kitchen cupboard", "container", ["cupboard", "kitchen cabinet"]),
        ("dining table", "supporter", ["table", "kitchen table"]),
    ]),
    ("bathroom", [
        ("bathroom cabinet", "container", ["medicine cabinet", "cabinet"]),
        ("towel rail", "supporter", ["towel rack", "towel bar"]),
        ("bathtub", "container", ["tub", "bath tub"]),
        ("vanity counter", "supporter", ["counter", "countertop"]),
    ]),
    ("bedroom", [
        ("wardrobe", "container", ["closet", "armoire"]),
        ("bedside table", "supporter", ["nightstand", "night table"]),
        ("dressing table", "supporter", ["dresser", "makeup table"]),
        ("chest of drawers", "container", ["drawers", "chest"]),
    ]),
    ("laundry room", [
        ("washing machine", "container", ["washer", "laundry machine"]),
        ("laundry basket", "container", ["hamper", "clothes basket"]),
        ("clothesline", "supporter", ["washing line", "drying line"]),
        ("suspended shelf", "supporter", ["wall shelf", "shelf"]),
    ]),
    ("living room", [
        ("bookshelf", "supporter", ["bookcase", "shelf"]),
        ("coffee table", "supporter", ["table", "low table"]),
        ("sofa", "supporter", ["couch", "settee"]),
        ("toy box", "container", ["toy chest", "toybox"]),
    ]),
]

# (object, relation, target, synonyms). The first four objects of every room
# form the IN half, the next four the OUT half; the vocabulary file lists the
# IN half first.
OBJECTS = {
    "kitchen": [
        ("dirty fork", "in", "dishwasher", ["fork", "used fork", "cutlery"]),
        ("milk", "in", "refrigerator", ["milk carton", "milk bottle"]),
        ("cereal box", "in", "kitchen cupboard", ["cereal", "cornflakes"]),
        ("salt shaker", "on", "dining table", ["salt", "salt cellar"]),
        ("dirty plate", "in", "dishwasher", ["plate", "used plate", "dish"]),
        ("butter", "in", "refrigerator", ["margarine", "butter block"]),
        ("clean glass", "in", "kitchen cupboard", ["glass", "tumbler"]),
        ("fruit bowl", "on", "dining table", ["bowl", "fruit basket"]),
    ],
    "bathroom": [
        ("toothbrush", "in", "bathroom cabinet", ["tooth brush", "toothbrushes"]),
        ("wet towel", "on", "towel rail", ["towel", "damp towel"]),
        ("shampoo", "in", "bathtub", ["shampoo bottle", "hair wash"]),
        ("hand soap", "on", "vanity counter", ["soap", "soap bar"]),
        ("razor", "in", "bathroom cabinet", ["shaver", "razor blade"]),
        ("bath towel", "on", "towel rail", ["large towel", "bath sheet"]),
        ("bubble bath", "in", "bathtub", ["bath foam", "bubbles"]),
        ("hand cream", "on", "vanity counter", ["lotion", "moisturizer"]),
    ],
    "bedroom": [
        ("clean shirt", "in", "wardrobe", ["shirt", "blouse"]),
        ("alarm clock", "on", "bedside table", ["clock", "alarm"]),
        ("hairbrush", "on", "dressing table", ["hair brush", "comb"]),
        ("clean socks", "in", "chest of drawers", ["socks", "pair of socks"]),
        ("clean dress", "in", "wardrobe", ["dress", "gown"]),
        ("reading lamp", "on", "bedside table", ["lamp", "night light"]),
        ("perfume", "on", "dressing table", ["fragrance", "cologne"]),
        ("pajamas", "in", "chest of drawers", ["pyjamas", "nightwear"]),
    ],
    "laundry room": [
        ("dirty singlet", "in", "washing machine", ["singlet", "undershirt"]),
        ("dirty towel", "in", "laundry basket", ["soiled towel", "used towel"]),
        ("wet shirt", "on", "clothesline", ["damp shirt", "washed shirt"]),
        ("detergent", "on", "suspended shelf", ["laundry detergent", "washing powder"]),
        ("dirty socks", "in", "washing machine", ["smelly socks", "used socks"]),
        ("dirty jeans", "in", "laundry basket", ["jeans", "denim"]),
        ("wet sheet", "on", "clothesline", ["bedsheet", "damp sheet"]),
        ("fabric softener", "on", "suspended shelf", ["softener", "conditioner"]),
    ],
    "living room": [
        ("novel", "on", "bookshelf", ["book", "paperback"]),
        ("remote control", "on", "coffee table", ["remote", "tv remote"]),
        ("cushion", "on", "sofa", ["pillow", "seat cushion"]),
        ("teddy bear", "in", "toy box", ["teddy", "stuffed bear"]),
        ("magazine", "on", "bookshelf", ["journal", "newspaper"]),
        ("coaster", "on", "coffee table", ["drink coaster", "mat"]),
        ("throw pillow", "on", "sofa", ["throw", "decorative pillow"]),
        ("toy car", "in", "toy box", ["toy truck", "car toy"]),
    ],
}

COMMAND_WORDS = ["take", "from", "put", "on", "insert", "into", "go",
                 "east", "west", "north", "south", "you", "floor"]

NOISE_WORDS = [
    "man", "woman", "boy", "girl", "tree", "sky", "cloud", "street", "car",
    "building", "window", "door", "wall", "sign", "pole", "grass", "dog",
    "cat", "horse", "bus", "train", "road", "sidewalk", "fence", "light",
    "hat", "jacket", "pants", "shoe", "hair", "hand", "head", "face", "arm",
    "leg", "water", "beach", "wave", "snow", "mountain", "rock", "bird",
    "umbrella", "bench", "kite", "plane", "boat", "bike", "flower", "leaf",
    "branch", "roof", "tile", "letter", "number", "clock tower", "traffic light",
    "tennis racket", "baseball", "player", "helmet", "glove", "bag", "phone",
    "screen", "keyboard", "mouse", "laptop", "pizza", "sandwich", "cake",
    "banana", "orange", "tire", "wheel", "motorcycle", "giraffe", "zebra",
    "elephant", "sheep", "cow", "field", "ocean",
]
NOISE_RELATIONS = ["on", "in", "has", "wearing", "near", "holding", "behind",
                   "of", "under", "next to", "above", "with"]


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def rand_unit(rng, dim=DIM):
    return unit([rng.gauss(0.0, 1.0) for _ in range(dim)])


def mean(vs):
    return [sum(c) / len(vs) for c in zip(*vs)]


def cos(a, b):
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def orth_unit(rng, ref):
    r = rand_unit(rng)
    ref = unit(ref)
    d = sum(x * y for x, y in zip(r, ref))
    return unit([x - d * y for x, y in zip(r, ref)])


def build_embeddings(rng):
    table = {}
    room_dir = {room: rand_unit(rng) for room, _ in ROOMS}

    def define_base(token, room):
        if token in table:
            return
        own = rand_unit(rng)
        if room is None:
            table[token] = own
        else:
            table[token] = unit([0.45 * r + o for r, o in zip(room_dir[room], own)])

    # shared modifiers carry no room signal
    shared = {"dirty", "wet", "clean", "table", "box", "bath", "hand", "shelf",
              "towel", "shirt", "socks", "toy", "of"}
    for tok in sorted(shared):
        define_base(tok, None)
    for tok in COMMAND_WORDS:
        define_base(tok, None)
    for room, locs in ROOMS:
        for tok in room.split():
            define_base(tok, None)
        for name, _, _ in locs:
            for tok in name.split():
                define_base(tok, room)
    for room, objs in OBJECTS.items():
        for name, _, _, _ in objs:
            for tok in name.split():
                define_base(tok, room)

    # synonym tokens lean towards the entity they describe with a spread of
    # strengths so the similarity threshold has something to cut
    def attach(entity, phrase):
        target = mean([table[t] for t in entity.split()])
        for tok in phrase.split():
            if tok in table:
                continue
            c = rng.uniform(0.15, 0.95)
            o = orth_unit(rng, target)
            t = unit(target)
            table[tok] = unit([c * a + math.sqrt(1 - c * c) * b for a, b in zip(t, o)])

    for _, locs in ROOMS:
        for name, _, syns in locs:
            for s in syns:
                attach(name, s)
    for objs in OBJECTS.values():
        for name, _, _, syns in objs:
            for s in syns:
                attach(name, s)
    attach("floor", "ground")
    for phrase in NOISE_WORDS:
        for tok in phrase.split():
            define_base(tok, None)
    for rel in NOISE_RELATIONS + ["beside", "inside"]:
        for tok in rel.split():
            define_base(tok, None)
    for room, _ in ROOMS:
        for tok in room.split():
            define_base(tok, None)
    return table


def fmt_vec(v):
    return " ".join(f"{x:.6f}" for x in v)


def write_embeddings(path, table):
    with open(path, "w") as f:
        for tok in sorted(table):
            f.write(f"{tok} {fmt_vec(table[tok])}\n")


def write_vocab(path):
    objs_in, objs_out = [], []
    for room, _ in ROOMS:
        objs = OBJECTS[room]
        objs_in += objs[:4]
        objs_out += objs[4:]
    with open(path, "w") as f:
        f.write(f"# {VOCAB_VERSION}\n")
        f.write("# name\tcategory\tsynonyms\n")
        f.write("You\tplayer\t\n")
        for room, locs in ROOMS:
            f.write(f"{room}\troom\t\n")
        f.write("floor\tsupporter\tground\n")
        for _, locs in ROOMS:
            for name, cat, syns in locs:
                f.write(f"{name}\t{cat}\t{','.join(syns)}\n")
        for name, _, _, syns in objs_in + objs_out:
            f.write(f"{name}\tportable-object\t{','.join(syns)}\n")


def write_rooms(path):
    with open(path, "w") as f:
        f.write("# room\tlocations\n")
        for room, locs in ROOMS:
            f.write(f"{room}\t{','.join(n for n, _, _ in locs)}\n")


def write_goals(path):
    with open(path, "w") as f:
        f.write("# object\trelation\ttarget\n")
        for room, _ in ROOMS:
            for name, rel, target, _ in OBJECTS[room]:
                f.write(f"{name}\t{rel}\t{target}\n")


def build_corpus(rng):
    loc_cat = {}
    loc_forms = {}
    for room, locs in ROOMS:
        for name, cat, syns in locs:
            loc_cat[name] = cat
            loc_forms[name] = syns + [name]
    all_locs = sorted(loc_cat)
    triples = []

    def emit(s, r, o, sc, oc, tagged):
        if tagged:
            triples.append((s, r, o, sc, oc))
        else:
            triples.append((s, r, o))

    all_objs = []
    for room, _ in ROOMS:
        for name, rel, target, syns in OBJECTS[room]:
            all_objs.append((name, rel, target, syns))

    for name, rel, target, syns in all_objs:
        # exact surface forms only for a minority of objects
        subj_forms = list(syns)
        if rng.random() < 0.25:
            subj_forms.append(name)
        tgt_forms = [f for f in loc_forms[target] if f != target]
        if rng.random() < 0.3:
            tgt_forms.append(target)
        for _ in range(rng.randint(3, 7)):
            emit(rng.choice(subj_forms), rel, rng.choice(tgt_forms),
                 "portable-object", loc_cat[target], rng.random() < 0.7)
        # same pair under a non-goal relation
        for _ in range(rng.randint(0, 2)):
            wrong = rng.choice(["near", "next to", "beside", "on" if rel == "in" else "in"])
            emit(rng.choice(subj_forms), wrong, rng.choice(tgt_forms),
                 "portable-object", loc_cat[target], rng.random() < 0.7)
        # plausible but wrong destination
        for _ in range(rng.randint(0, 2)):
            other = rng.choice([l for l in all_locs if l != target])
            orel = "in" if loc_cat[other] == "container" else "on"
            emit(rng.choice(subj_forms), orel, rng.choice(loc_forms[other]),
                 "portable-object", loc_cat[other], rng.random() < 0.7)

    # location -> location / room
    for _ in range(160):
        a = rng.choice(all_locs)
        if rng.random() < 0.5:
            room = [r for r, locs in ROOMS if any(n == a for n, _, _ in locs)][0]
            emit(rng.choice(loc_forms[a]), "in", room, loc_cat[a], "room", rng.random() < 0.7)
        else:
            b = rng.choice([l for l in all_locs if l != a])
            emit(rng.choice(loc_forms[a]), rng.choice(["next to", "near", "beside", "in", "on"]),
                 rng.choice(loc_forms[b]), loc_cat[a], loc_cat[b], rng.random() < 0.7)

    # object -> object
    for _ in range(160):
        a, b = rng.sample(all_objs, 2)
        emit(rng.choice(a[3] + [a[0]]), rng.choice(["next to", "near", "beside", "with", "on"]),
             rng.choice(b[3] + [b[0]]), "portable-object", "portable-object", rng.random() < 0.7)

    # generic scene-graph noise
    objs_forms = [f for o in all_objs for f in o[3]]
    while len(triples) < 2000:
        roll = rng.random()
        if roll < 0.8:
            s, o = rng.sample(NOISE_WORDS, 2)
            emit(s, rng.choice(NOISE_RELATIONS), o, "other", "other", rng.random() < 0.6)
        elif roll < 0.9:
            emit(rng.choice(NOISE_WORDS), rng.choice(NOISE_RELATIONS), rng.choice(objs_forms),
                 "other", "portable-object", True)
        else:
            emit(rng.choice(objs_forms), rng.choice(NOISE_RELATIONS), rng.choice(NOISE_WORDS),
                 "portable-object", "other", True)
    rng.shuffle(triples)
    return triples


def write_corpus(path, triples):
    with open(path, "w") as f:
        f.write("# subject\trelation\tobject[\tsubject-category\tobject-category]\n")
        for t in triples:
            f.write("\t".join(t) + "\n")


# D=8 table for unit tests. Axes: 0 kitchenware, 1 drinkware, 2 furniture,
# 3 appliance, 4 clothing, 5 bathroom, 6 stationery, 7 misc.
SMALL = {
    "cup": [1, 0, 0, 0, 0, 0, 0, 0],
    "mug": [0.9, 0.43589, 0, 0, 0, 0, 0, 0],
    "glass": [0.6, 0.8, 0, 0, 0, 0, 0, 0],
    "tumbler": [0.5, 0.8, 0, 0, 0, 0, 0.331662, 0],
    "shelf": [0, 0, 1, 0, 0, 0, 0, 0],
    "bookshelf": [0, 0, 0.95, 0, 0, 0, 0.31225, 0],
    "rack": [0, 0, 0.7, 0.3, 0, 0, 0, 0.648074],
    "table": [0, 0, 0.8, 0, 0, 0, 0, 0.6],
    "desk": [0, 0, 0.7, 0, 0, 0, 0.714143, 0],
    "fork": [0.8, 0, 0, 0, 0, 0, 0, 0.6],
    "spoon": [0.85, 0, 0, 0, 0, 0, 0, 0.526783],
    "knife": [0.7, 0, 0, 0, 0, 0, 0, 0.714143],
    "cutlery": [0.9, 0, 0, 0, 0, 0, 0, 0.43589],
    "plate": [0.7, 0.2, 0, 0, 0, 0, 0, 0.685565],
    "dish": [0.75, 0.3, 0, 0, 0, 0, 0, 0.589491],
    "bowl": [0.8, 0.4, 0, 0, 0, 0, 0, 0.447214],
    "dirty": [0, 0, 0, 0, 0.3, 0.3, 0, 0.905539],
    "clean": [0, 0, 0, 0, 0.3, 0.3, 0, -0.905539],
    "wet": [0, 0.5, 0, 0, 0.2, 0.5, 0, 0.678233],
    "dishwasher": [0.3, 0, 0, 0.953939, 0, 0, 0, 0],
    "sink": [0.4, 0, 0, 0.6, 0, 0.69282, 0, 0],
    "fridge": [0.2, 0.2, 0, 0.959166, 0, 0, 0, 0],
    "refrigerator": [0.25, 0.2, 0, 0.947365, 0, 0, 0, 0],
    "oven": [0.3, 0, 0, 0.9, 0, 0, 0, 0.316228],
    "cupboard": [0.3, 0, 0.9, 0, 0, 0, 0, 0.316228],
    "cabinet": [0.2, 0, 0.9, 0, 0, 0.2, 0, 0.331662],
    "wardrobe": [0, 0, 0.7, 0, 0.714143, 0, 0, 0],
    "closet": [0, 0, 0.65, 0, 0.759934, 0, 0, 0],
    "drawer": [0, 0, 0.8, 0, 0.4, 0, 0.447214, 0],
    "shirt": [0, 0, 0, 0, 1, 0, 0, 0],
    "blouse": [0, 0, 0, 0, 0.95, 0, 0, 0.31225],
    "sock": [0, 0, 0, 0, 0.9, 0, 0, 0.43589],
    "socks": [0, 0, 0, 0, 0.92, 0, 0, 0.391918],
    "jeans": [0, 0, 0, 0, 0.85, 0, 0, 0.526783],
    "towel": [0, 0, 0, 0, 0.4, 0.916515, 0, 0],
    "soap": [0, 0, 0, 0, 0, 0.9, 0, 0.43589],
    "toothbrush": [0, 0, 0, 0, 0, 0.95, 0, 0.31225],
    "bathtub": [0, 0, 0, 0.3, 0, 0.953939, 0, 0],
    "tub": [0, 0.2, 0, 0.3, 0, 0.932738, 0, 0],
    "washer": [0, 0, 0, 0.8, 0.6, 0, 0, 0],
    "washing": [0, 0.3, 0, 0.6, 0.5, 0.3, 0, 0.458258],
    "machine": [0, 0, 0, 1, 0, 0, 0, 0],
    "basket": [0, 0, 0.5, 0, 0.5, 0, 0, 0.707107],
    "hamper": [0, 0, 0.4, 0, 0.6, 0, 0, 0.69282],
    "book": [0, 0, 0, 0, 0, 0, 1, 0],
    "novel": [0, 0, 0, 0, 0, 0, 0.95, 0.31225],
    "magazine": [0, 0, 0, 0, 0, 0, 0.9, 0.43589],
    "pen": [0, 0, 0, 0, 0, 0, 0.8, 0.6],
    "kitchen": [0.7, 0, 0.3, 0.3, 0, 0, 0, 0.574456],
    "bathroom": [0, 0, 0.3, 0, 0, 0.8, 0, 0.519615],
    "bedroom": [0, 0, 0.6, 0, 0.6, 0, 0, 0.52915],
    "floor": [0, 0, 0.5, 0, 0, 0, 0, 0.866025],
    "you": [0, 0, 0, 0, 0, 0, 0, 1],
    "on": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
    "in": [-0.1, 0.1, -0.1, 0.1, -0.1, 0.1, -0.1, 0.1],
    "take": [0.2, -0.2, 0.2, -0.2, 0.2, -0.2, 0.2, -0.2],
    "put": [0.2, 0.2, -0.2, -0.2, 0.2, 0.2, -0.2, -0.2],
    "insert": [-0.2, 0.2, 0.2, -0.2, -0.2, 0.2, 0.2, -0.2],
    "into": [0.2, 0.2, 0.2, 0.2, -0.2, -0.2, -0.2, -0.2],
    "from": [-0.2, -0.2, 0.2, 0.2, 0.2, 0.2, -0.2, -0.2],
    "go": [0.3, -0.3, -0.3, 0.3, 0.3, -0.3, -0.3, 0.3],
    "east": [0.3, 0.3, -0.3, -0.3, -0.3, -0.3, 0.3, 0.3],
    "tree": [-0.5, 0, 0, 0, 0, 0, 0, 0.866025],
    "man": [0, -0.6, 0, 0, 0.3, 0, 0, -0.741620],
}


def write_small(path):
    with open(path, "w") as f:
        for tok in sorted(SMALL):
            f.write(tok + " " + " ".join(f"{x:g}" for x in SMALL[tok]) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=20221101)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    table = build_embeddings(rng)
    write_embeddings(out / "embeddings.txt", table)
    write_small(out / "embeddings_d8.txt")
    write_vocab(out / "vocab.tsv")
    write_rooms(out / "rooms.tsv")
    write_goals(out / "goals.tsv")
    triples = build_corpus(rng)
    write_corpus(out / "corpus.tsv", triples)
    print(f"{len(table)} tokens, {len(triples)} triples")


if __name__ == "__main__":
    main()
