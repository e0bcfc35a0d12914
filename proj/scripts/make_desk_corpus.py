#!/usr/bin/env python3
# Copyright 2026 The subicap Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the small caption corpora under data/.

Output is a pure function of --seed. Every image gets five captions built
from shared scene slots so that stems recur with different inflections.
"""

import argparse
import pathlib
import random

SUBJECT_STEMS = (
    "man:men woman:women child:children boy girl dog cat horse bird player "
    "skier surfer cook rider teenager puppy kitten giraffe elephant zebra "
    "farmer tourist student worker soldier dancer singer baker painter "
    "fisherman:fishermen policeman:policemen officer athlete runner swimmer "
    "climber hiker driver pilot waiter waitress:waitresses clown musician "
    "couple family:families crowd vendor shopper toddler baby:babies goat "
    "sheep:sheep cow bear monkey squirrel duck goose:geese pigeon seagull "
    "parrot lamb pony:ponies calf:calves rabbit fox:foxes wolf:wolves deer:deer "
    "tiger lion chef nurse doctor gardener mechanic referee coach goalie "
    "skateboarder snowboarder batter pitcher catcher umpire jockey cyclist"
)

# Regular verbs; inflections are derived below, irregular past in the table.
VERB_STEMS = (
    "climb jump walk ride hold carry play watch cross chase throw catch paint "
    "push pull eat cut wash fly kick look sit stand run swim drive wave lift "
    "drag fix clean cook bake slice pour fill open close kiss hug feed pet "
    "brush comb dry fold sort stack pack load carve grill fry stir mix taste "
    "smell touch point reach lean rest sleep nap dig plant water rake mow "
    "sweep mop dust polish repair build pile roll toss bounce hit swing "
    "serve block shoot pass dribble skate ski surf sail row paddle dive"
)
IRREGULAR_PAST = {
    "ride": "rode", "hold": "held", "throw": "threw", "catch": "caught",
    "eat": "ate", "cut": "cut", "fly": "flew", "sit": "sat", "stand": "stood",
    "run": "ran", "swim": "swam", "drive": "drove", "feed": "fed",
    "sleep": "slept", "dig": "dug", "build": "built", "hit": "hit",
    "swing": "swung", "shoot": "shot", "sweep": "swept",
}

OBJECT_STEMS = (
    "tree ball frisbee kite bicycle skateboard surfboard umbrella pizza "
    "sandwich:sandwiches fence wave hill street bench:benches window table "
    "carrot banana bus:buses bag basket box:boxes bottle cup plate bowl "
    "fork knife:knives spoon glass:glasses chair couch:couches bed pillow "
    "blanket towel rope ladder bucket shovel rake broom mop hat shoe sock "
    "glove scarf:scarves jacket shirt dress:dresses book newspaper phone "
    "laptop camera clock vase flower plant bush:bushes log rock stone "
    "wall door gate truck train car boat bridge tent flag sign cake donut "
    "apple orange lemon tomato:tomatoes potato:potatoes onion pepper "
    "cookie muffin bagel cone racket bat helmet net goal tire wheel"
)

ADJECTIVES = (
    "small large young old happy brown white black red wooden tall little "
    "colorful sunny snowy busy grassy sandy striped spotted green blue "
    "yellow purple pink orange shiny dirty clean wet dry empty crowded "
    "quiet noisy bright dark fluffy furry hairy muddy dusty rusty broken "
    "tiny huge long short round square plastic metal leather frozen "
    "sleepy hungry curious friendly"
).split()

PLACES = [
    "in a park", "on the beach", "near the river", "in the kitchen",
    "on a snowy slope", "along the street", "in a field", "at the zoo",
    "next to a building", "under a bridge", "by the lake", "in the yard",
    "on a sidewalk", "in a parking lot", "inside a restaurant",
    "at the market", "behind a fence", "on a dirt road", "in the garden",
    "near the harbor", "on a tennis court", "in a classroom",
    "outside a station", "across the plaza", "beside the fountain",
]

ADVERBS = [
    "quickly", "slowly", "carefully", "happily", "playfully", "eagerly",
    "calmly", "gently", "proudly", "quietly", "loudly", "together",
]


def nouns(spec):
    out = []
    for item in spec.split():
        if ":" in item:
            sg, pl = item.split(":")
        elif item.endswith("y") and item[-2] not in "aeiou":
            sg, pl = item, item[:-1] + "ies"
        elif item.endswith(("s", "x", "ch", "sh")):
            sg, pl = item, item + "es"
        else:
            sg, pl = item, item + "s"
        out.append((sg, pl))
    return out


def double_final(v):
    return (len(v) >= 3 and v[-1] not in "aeiouwxy" and v[-2] in "aeiou"
            and v[-3] not in "aeiou" and v not in ("open", "visit"))


def verb_forms(v):
    if v.endswith("y") and v[-2] not in "aeiou":
        third = v[:-1] + "ies"
    elif v.endswith(("s", "x", "ch", "sh", "o")):
        third = v + "es"
    else:
        third = v + "s"
    if v.endswith("ie"):
        prog = v[:-2] + "ying"
    elif v.endswith("e") and not v.endswith("ee"):
        prog = v[:-1] + "ing"
    elif double_final(v):
        prog = v + v[-1] + "ing"
    else:
        prog = v + "ing"
    if v in IRREGULAR_PAST:
        past = IRREGULAR_PAST[v]
    elif v.endswith("e"):
        past = v + "d"
    elif v.endswith("y") and v[-2] not in "aeiou":
        past = v[:-1] + "ied"
    elif double_final(v):
        past = v + v[-1] + "ed"
    else:
        past = v + "ed"
    return (v, third, prog, past)


SUBJECTS = nouns(SUBJECT_STEMS)
OBJECTS = nouns(OBJECT_STEMS)
VERBS = [verb_forms(v) for v in VERB_STEMS.split()]

# Words the training side never uses; they exercise the word baseline's
# unknown token and the subword fallback.
RARE = [
    "a woman crochets a colorful scarf in the kitchen",
    "an old man crochets near the window",
    "a girl plays a xylophone in the yard",
    "two kittens tumble playfully over a quilt",
    "a zookeeper feeds the giraffes at the zoo",
    "a chef flambes a pan of bananas",
    "a boy juggles oranges on the beach",
    "a skier somersaults down a snowy slope",
    "a puppy nibbles a shoelace on the bench",
    "children are unwrapping presents under a tree",
]


def article(word):
    return "an" if word[0] in "aeiou" else "a"


def scene(rng):
    return {
        "subj": rng.choice(SUBJECTS),
        "verb": rng.choice(VERBS),
        "obj": rng.choice(OBJECTS),
        "adj": rng.choice(ADJECTIVES),
        "adj2": rng.choice(ADJECTIVES),
        "place": rng.choice(PLACES),
        "adv": rng.choice(ADVERBS),
    }


def captions_for(s, rng):
    subj, subjs = s["subj"]
    base, third, prog, past = s["verb"]
    obj, objs = s["obj"]
    adj, adj2, place, adv = s["adj"], s["adj2"], s["place"], s["adv"]
    templates = [
        f"{article(adj)} {adj} {subj} is {prog} {article(obj)} {obj} {place}",
        f"{article(subj)} {subj} {third} {article(adj2)} {adj2} {obj}",
        f"two {subjs} are {prog} {objs} {place}",
        f"{article(subj)} {subj} {past} the {obj} {adv}",
        f"the {subj} {third} {objs} {adv} {place}",
        f"some {adj} {subjs} {base} {article(obj)} {obj}",
        f"{article(adj)} {adj} {obj} and {article(subj)} {subj} {place}",
        f"there is {article(subj)} {subj} {prog} {place}",
    ]
    return rng.sample(templates, 5)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20260101)
    parser.add_argument("--images", type=int, default=300)
    parser.add_argument("--out-dir", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    header = "# image_id<TAB>caption; generated by scripts/make_desk_corpus.py\n"
    with open(args.out_dir / "desk_corpus.tsv", "w", encoding="utf-8") as f:
        f.write(header)
        for i in range(args.images):
            for cap in captions_for(scene(rng), rng):
                f.write(f"img{i:04d}\t{cap}\n")
    with open(args.out_dir / "desk_heldout.tsv", "w", encoding="utf-8") as f:
        f.write(header)
        for i, cap in enumerate(RARE):
            f.write(f"held{i:03d}\t{cap}\n")
        for i in range(20):
            cap = captions_for(scene(rng), rng)[0]
            f.write(f"held{len(RARE) + i:03d}\t{cap}\n")


if __name__ == "__main__":
    main()
