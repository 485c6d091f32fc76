"""Regenerate the bundled template corpus of labelled utterances.

Each class draws from its own templates; slots are filled at random and
duplicates are dropped until 50 distinct utterances per class exist.
"""

import csv
import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "earedge" / "data" / "intent_corpus.csv"
PER_CLASS = 50

SLOTS = {
    "please": ["", "please ", "can you ", "could you "],
    "shot": ["photo", "picture", "snapshot", "pic", "shot"],
    "level": ["volume", "sound", "speaker volume"],
    "updown": ["up", "down"],
    "mode": ["recording", "listening", "the camera", "capture"],
    "onoff": ["on", "off"],
    "thing": ["this", "that", "this thing", "that thing", "this object"],
    "place": ["this table", "the table", "my desk", "this shelf", "the counter", "this plate"],
    "read": ["sign", "label", "menu", "page", "screen", "note"],
    "who": ["who wrote", "who invented", "who discovered", "who painted"],
    "work": ["hamlet", "the telephone", "penicillin", "the mona lisa", "relativity", "the light bulb"],
    "fact": ["capital of", "population of", "currency of", "largest city in", "official language of"],
    "country": ["france", "japan", "brazil", "kenya", "canada", "norway", "india"],
    "howbig": ["how tall is", "how old is", "how far away is", "how deep is", "how long is"],
    "landmark": ["mount everest", "the moon", "the eiffel tower", "the pacific ocean", "the nile"],
    "feel": ["tired", "happy", "bored", "a bit sad", "great", "stressed"],
    "greet": ["hi", "hello", "hey there", "good morning", "good evening"],
    "topic": ["music", "movies", "your day", "the weekend", "books", "cooking"],
}

TEMPLATES = {
    "device_control": [
        "{please}take a {shot}",
        "{please}snap a {shot}",
        "{please}capture a {shot}",
        "take a {shot} now",
        "{please}turn the {level} {updown}",
        "{level} {updown}",
        "{please}turn {mode} {onoff}",
        "{please}stop {mode}",
        "{please}start {mode}",
        "{please}mute the speaker",
        "{please}pause playback",
        "{please}resume playback",
        "what is the battery level",
        "{please}check the battery",
        "{please}go to sleep",
        "{please}power off",
    ],
    "visual_query": [
        "what's on {place}?",
        "what is on {place}?",
        "what am i looking at?",
        "what is {thing}?",
        "{please}describe what you see",
        "{please}describe {place}",
        "what color is {thing}?",
        "{please}read this {read}",
        "what does this {read} say?",
        "how many items are on {place}?",
        "is there anything on {place}?",
        "what is in front of me?",
        "{please}tell me what {thing} is",
        "{please}identify {thing}",
        "can you see {thing}?",
    ],
    "general_question": [
        "what is the {fact} {country}?",
        "{please}tell me the {fact} {country}",
        "{who} {work}?",
        "{howbig} {landmark}?",
        "when was {work} invented?",
        "why is the sky blue?",
        "how many days are in a leap year?",
        "what is the boiling point of water?",
        "how does photosynthesis work?",
        "what year did the war end in {country}?",
        "who is the president of {country}?",
    ],
    "conversational": [
        "{greet}",
        "{greet}, how are you?",
        "how are you doing today?",
        "i'm feeling {feel}",
        "i feel {feel} today",
        "tell me a joke",
        "{please}tell me a story",
        "let's talk about {topic}",
        "what do you think about {topic}?",
        "thanks a lot",
        "thank you",
        "that's funny",
        "good night",
        "you're awesome",
        "i had a long day",
        "do you like {topic}?",
    ],
}


def fill(template: str, rng: random.Random) -> str:
    out = template
    while "{" in out:
        a = out.index("{")
        b = out.index("}", a)
        out = out[:a] + rng.choice(SLOTS[out[a + 1:b]]) + out[b + 1:]
    return out.strip()


def generate(seed: int = 7) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    rows = []
    for label, templates in TEMPLATES.items():
        seen: list[str] = []
        # cycle through templates so every one is represented
        i = 0
        while len(seen) < PER_CLASS:
            text = fill(templates[i % len(templates)], rng)
            i += 1
            if text not in seen:
                seen.append(text)
            if i > 100_000:
                sys.exit(f"could not find {PER_CLASS} distinct utterances for {label}")
        rows += [(text, label) for text in seen]
    return rows


def main():
    rows = generate()
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["text", "intent"])
        w.writerows(rows)
    print(f"wrote {len(rows)} utterances to {OUT}")


if __name__ == "__main__":
    main()
