#!/usr/bin/env python3
"""Regenerate tests/fixtures/sentiment_golden.json.

Standalone transcription of the classic rule-based social-media sentiment
scorer (Hutto & Gilbert's published algorithm), kept independent of the
sentigan package so it can serve as the oracle for the engine tests. This
copy carries the full rule set (distance-decayed boosters, never-so /
without-doubt / least special cases, question-mark amplification, 4-cap
exclamation count); the corpus below deliberately stays inside the subset
where the package engine implements identical behaviour.

Run from the repository root:  python3 scripts/make_sentiment_golden.py
"""

import json
import math
import re
import string
from pathlib import Path

B_INCR = 0.293
B_DECR = -0.293
C_INCR = 0.733
N_SCALAR = -0.74

NEGATE = set(
    """aint arent cannot cant couldnt darent didnt doesnt ain't aren't can't
    couldn't daren't didn't doesn't dont hadnt hasnt havent isnt mightnt
    mustnt neither don't hadn't hasn't haven't isn't mightn't mustn't neednt
    needn't never none nope nor not nothing nowhere oughtnt shant shouldnt
    uhuh wasnt werent oughtn't shan't shouldn't uh-uh wasn't weren't without
    wont wouldnt won't wouldn't rarely seldom despite""".split()
)

BOOSTER = {
    w: B_INCR
    for w in """absolutely amazingly awfully completely considerable considerably
    decidedly deeply enormous enormously entirely especially exceptional
    exceptionally extreme extremely fabulously fully greatly hella highly
    hugely incredible incredibly intensely major majorly more most
    particularly purely quite really remarkably so substantially thoroughly
    total totally tremendous tremendously uber unbelievably unusually utter
    utterly very""".split()
}
BOOSTER.update(
    {
        w: B_DECR
        for w in """almost barely hardly kinda kindof less little marginal
        marginally occasional occasionally partly scarce scarcely slight
        slightly somewhat sorta sortof""".split()
    }
)

URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)")
HANDLE_RE = re.compile(r"@\w+")
CASHTAG_RE = re.compile(r"\$[A-Za-z]+\b")


def load_lexicon(path):
    lex = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            continue
        try:
            lex[parts[0].strip().lower()] = float(parts[1])
        except ValueError:
            continue
    return lex


def clean(raw):
    text = URL_RE.sub(" ", raw)
    text = HANDLE_RE.sub(" ", text)
    text = CASHTAG_RE.sub(" ", text)
    return " ".join(text.split())


def words_and_emoticons(text):
    out = []
    for token in text.split():
        stripped = token.strip(string.punctuation)
        out.append(token if len(stripped) <= 2 else stripped)
    return out


def allcap_differential(words):
    n_caps = sum(1 for w in words if w.isupper())
    return 0 < n_caps < len(words)


def negated(word):
    w = word.lower()
    return w in NEGATE or "n't" in w


def scalar_inc_dec(word, valence, is_cap_diff):
    scalar = 0.0
    wl = word.lower()
    if wl in BOOSTER:
        scalar = BOOSTER[wl]
        if valence < 0:
            scalar *= -1
        if word.isupper() and is_cap_diff:
            scalar += C_INCR if valence > 0 else -C_INCR
    return scalar


def negation_check(valence, words, start_i, i):
    wl = [w.lower() for w in words]
    if start_i == 0:
        if negated(wl[i - 1]):
            valence *= N_SCALAR
    if start_i == 1:
        if wl[i - 2] == "never" and wl[i - 1] in ("so", "this"):
            valence *= 1.25
        elif wl[i - 2] == "without" and wl[i - 1] == "doubt":
            pass
        elif negated(wl[i - 2]):
            valence *= N_SCALAR
    if start_i == 2:
        if wl[i - 3] == "never" and (
            wl[i - 2] in ("so", "this") or wl[i - 1] in ("so", "this")
        ):
            valence *= 1.25
        elif wl[i - 3] == "without" and (wl[i - 2] == "doubt" or wl[i - 1] == "doubt"):
            pass
        elif negated(wl[i - 3]):
            valence *= N_SCALAR
    return valence


def least_check(valence, words, i, lexicon):
    wl = [w.lower() for w in words]
    if i > 1 and wl[i - 1] not in lexicon and wl[i - 1] == "least":
        if wl[i - 2] not in ("at", "very"):
            valence *= N_SCALAR
    elif i > 0 and wl[i - 1] not in lexicon and wl[i - 1] == "least":
        valence *= N_SCALAR
    return valence


def sentiment_valence(lexicon, words, item, i, is_cap_diff):
    il = item.lower()
    if il not in lexicon:
        return 0.0
    valence = lexicon[il]
    if item.isupper() and is_cap_diff:
        valence += C_INCR if valence > 0 else -C_INCR
    for start_i in range(3):
        if i > start_i and words[i - (start_i + 1)].lower() not in lexicon:
            s = scalar_inc_dec(words[i - (start_i + 1)], valence, is_cap_diff)
            if start_i == 1 and s != 0:
                s *= 0.95
            if start_i == 2 and s != 0:
                s *= 0.9
            valence += s
            valence = negation_check(valence, words, start_i, i)
    valence = least_check(valence, words, i, lexicon)
    return valence


def but_check(words, sentiments):
    wl = [w.lower() for w in words]
    if "but" in wl:
        bi = wl.index("but")
        sentiments = [
            s * 0.5 if i < bi else (s * 1.5 if i > bi else s)
            for i, s in enumerate(sentiments)
        ]
    return sentiments


def punctuation_emphasis(text):
    ep_count = min(text.count("!"), 4)
    ep = ep_count * 0.292
    qm_count = text.count("?")
    qm = 0.0
    if qm_count > 1:
        qm = qm_count * 0.18 if qm_count <= 3 else 0.96
    return ep + qm


def normalize(score, alpha=15.0):
    norm = score / math.sqrt(score * score + alpha)
    return max(-1.0, min(1.0, norm))


def compound(lexicon, raw):
    text = clean(raw)
    words = words_and_emoticons(text)
    is_cap_diff = allcap_differential(words)
    sentiments = []
    for i, item in enumerate(words):
        if item.lower() in BOOSTER:
            sentiments.append(0.0)
            continue
        sentiments.append(sentiment_valence(lexicon, words, item, i, is_cap_diff))
    sentiments = but_check(words, sentiments)
    total = float(sum(sentiments))
    if total == 0.0:
        return 0.0
    punct = punctuation_emphasis(text)
    total += punct if total > 0 else -punct
    return normalize(total)


CORPUS = [
    "good earnings today",
    "really good earnings today",
    "the market looks great",
    "the market looks GREAT",
    "this stock is terrible",
    "this stock is not terrible",
    "extremely bad guidance from management",
    "slightly bad guidance from management",
    "love this company",
    "don't love this company",
    "absolutely love this company!",
    "the selloff was horrible",
    "results were good but guidance was terrible",
    "results were terrible but guidance was good",
    "very strong quarter with solid margins",
    "weak demand and losses piling up",
    "never buying again, total disaster",
    "what a disaster!!!",
    "huge gains today! so happy",
    "portfolio tanked today, very sad",
    "bullish on tech for the rest of the year",
    "bearish sentiment everywhere",
    "cautiously optimistic about the merger",
    "deeply pessimistic about retail",
    "the rally continues",
    "the rally won't continue",
    "earnings beat, shares soaring",
    "missed estimates again, shares plunge",
    "this is the worst quarter in years",
    "this is the best quarter in years!",
    "hardly a great outcome",
    "quite a great outcome",
    "not a bad result",
    "really not a bad result",
    "AAPL to the moon https://t.co/abc123",
    "@analyst thinks the upgrade is promising",
    "$TSLA looks risky here",
    "feeling confident about the breakout",
    "feeling worried about the breakout",
    "totally safe play with strong momentum",
    "utterly horrible execution by the team",
    "shares crashed on the downgrade",
    "an amazing opportunity at these prices",
    "garbage company with ugly fundamentals",
    "beautiful chart and excellent volume",
    "trouble ahead for the sector",
    "despite the profits, the outlook is bad",
    "the stock is overvalued and the danger is real",
    "undervalued gem with promising growth",
    "happy with my gains, great trade!",
]


def main():
    root = Path(__file__).resolve().parent.parent
    lexicon = load_lexicon(root / "tests" / "fixtures" / "sample_lexicon.txt")
    golden = [{"text": t, "compound": round(compound(lexicon, t), 6)} for t in CORPUS]
    out = root / "tests" / "fixtures" / "sentiment_golden.json"
    out.write_text(json.dumps(golden, indent=1) + "\n")
    print(f"wrote {len(golden)} entries to {out}")


if __name__ == "__main__":
    main()
