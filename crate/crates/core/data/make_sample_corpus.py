#!/usr/bin/env python3
"""Generate the bundled synthetic sample corpus.

The corpus is produced from a small topic model so that it carries real
co-occurrence structure (topical clusters, paired topics that tend to appear
together) while staying free of any licensing restrictions. Output is fully
determined by SEED.

    python3 make_sample_corpus.py > sample_corpus.txt
"""

import random
import sys

SEED = 20241016
TARGET_BYTES = 1_000_000

FUNCTION_WORDS = """
the of and to a in that it was he for on is with as his at by had i not be
this but from or have an they which one you were her all she there would their
we him been has when who will more no if out so said what up its about into
than them can only other new some could time these two may then do first any
my now such like our over man me even most made after also did many before must
through back years where much your way well down should because each just those
people how too little state good very make world still own see men work long get
here between both life being under never day same another know while last might
us great old year off come since against go came right used take three
""".split()

TOPICS = {
    "flowers": "rose tulip daisy lily orchid violet poppy iris lilac peony marigold "
               "petal blossom bloom garden bouquet fragrance stem meadow nectar",
    "insects": "wasp hornet mosquito beetle cockroach locust flea tick moth gnat "
               "sting swarm larva hive crawl buzz pest infestation bite spider",
    "pleasant": "joy love peace friend heaven gentle honest lucky rainbow diploma "
                "gift honor miracle sunrise family happy laughter paradise vacation loyal",
    "unpleasant": "abuse crash filth murder sickness accident death grief poison stink "
                  "assault disaster hatred pollute tragedy divorce jail poverty ugly rotten",
    "instruments": "guitar violin piano trumpet flute drum cello harp banjo clarinet "
                   "melody chord orchestra concert symphony tune rhythm song music band",
    "weapons": "sword rifle pistol cannon dagger spear bomb grenade arrow musket "
               "bullet blade ammunition armory battle soldier trigger shot gunpowder war",
    "sea": "ocean wave ship sailor harbor tide shore anchor voyage island "
           "fisherman boat deck storm coast beach salt whale current mast",
    "farm": "wheat barn tractor cattle harvest plow field farmer corn hay "
            "orchard sheep goat pasture fence crop soil seed silo dairy",
    "city": "street avenue building traffic subway taxi office tower bridge market "
            "crowd apartment downtown neighborhood shop corner alley district plaza block",
    "medicine": "doctor nurse hospital patient surgeon clinic medicine disease fever "
                "cure treatment diagnosis physician illness symptom therapy ward injury pill health",
    "law": "court judge jury lawyer trial verdict law attorney statute appeal "
           "justice prosecutor defendant witness testimony evidence sentence ruling crime legal",
    "school": "teacher student school lesson class homework exam university professor lecture "
              "library book study college grade pupil chalk classroom essay learning",
    "kitchen": "bread butter cheese soup oven kettle spoon bowl dinner recipe "
               "flour sugar salt pepper onion garlic bake roast stew pie",
    "weather": "rain snow wind cloud thunder lightning frost fog sunshine storm "
               "breeze hail drizzle forecast temperature cold warm humid gale mist",
    "family": "mother father daughter son sister brother uncle aunt cousin grandmother "
              "grandfather baby child wife husband wedding marriage parent niece nephew",
    "money": "bank money dollar price loan credit debt interest investor stock "
             "profit trade cash wage salary budget tax payment coin wealth",
    "travel": "train station ticket journey passenger luggage railway platform hotel travel "
              "road map tourist border trip highway route carriage inn arrival",
    "church": "church priest prayer sermon bishop chapel choir altar faith pastor "
              "congregation hymn bible cathedral monk saint worship blessing parish holy",
    "names_north": "larsen nilsen berg lund holm strand dahl vik moen lie "
                   "hansen olsen bakke aas hauge rud foss haugen lien solberg",
    "names_south": "rossi russo bruno ricci marino greco conti costa rizzo lombardi "
                   "moretti barbieri fontana caruso mariani ferri serra vitale longo gallo",
    "outsider": "strange foreign alien odd bizarre devious sinister exotic mysterious "
                "weird peculiar suspicious barbaric savage uncivilized monstrous cunning sly crude wild",
    "science": "atom molecule experiment laboratory theory energy physics chemistry electron "
               "scientist research data measure formula element particle gravity orbit telescope planet",
}

# Topics that tend to share a paragraph with one another.
PARTNERS = {
    "flowers": "pleasant", "insects": "unpleasant", "instruments": "pleasant",
    "weapons": "unpleasant", "sea": "weather", "farm": "weather", "city": "money",
    "medicine": "family", "law": "city", "school": "science", "kitchen": "family",
    "weather": "farm", "family": "church", "money": "law", "travel": "city",
    "church": "family", "names_north": "sea", "names_south": "kitchen",
    "outsider": "names_south", "science": "medicine", "pleasant": "family",
    "unpleasant": "law",
}

SYLLABLES = ("ka ri mo len ta vo sel dru pim na bor ceth lun ga fi ros tel "
             "mar quin dov sha pel tor ve zan").split()


def pseudo_word(rng, used):
    while True:
        w = "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3)))
        if w not in used:
            used.add(w)
            return w


def zipf_weights(n, s):
    return [1.0 / (k + 1) ** s for k in range(n)]


def main():
    rng = random.Random(SEED)
    used = set(FUNCTION_WORDS)
    for words in TOPICS.values():
        used.update(words.split())

    topic_words = {}
    for name, words in TOPICS.items():
        ws = words.split()
        # long tail of rare topic-specific words
        ws += [pseudo_word(rng, used) for _ in range(rng.randint(30, 60))]
        topic_words[name] = (ws, zipf_weights(len(ws), 1.05))
    # names get a flatter distribution so that most of them are reasonably frequent
    for name in ("names_north", "names_south"):
        ws, _ = topic_words[name]
        topic_words[name] = (ws, zipf_weights(len(ws), 0.6))

    fw_weights = zipf_weights(len(FUNCTION_WORDS), 1.0)
    topic_names = list(TOPICS)
    topic_weights = zipf_weights(len(topic_names), 0.3)

    out = []
    size = 0
    while size < TARGET_BYTES:
        main_topic = rng.choices(topic_names, topic_weights)[0]
        partner = PARTNERS.get(main_topic)
        length = rng.randint(30, 110)
        tokens = []
        for _ in range(length):
            r = rng.random()
            if r < 0.45:
                tokens.append(rng.choices(FUNCTION_WORDS, fw_weights)[0])
            else:
                t = main_topic
                if partner is not None and r > 0.85:
                    t = partner
                elif r > 0.97:
                    t = rng.choice(topic_names)
                ws, wts = topic_words[t]
                tokens.append(rng.choices(ws, wts)[0])
        line = " ".join(tokens)
        out.append(line)
        size += len(line) + 1
    sys.stdout.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
