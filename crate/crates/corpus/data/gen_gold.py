#!/usr/bin/env python3
"""Generate the labeled gold mini-corpus for sentence/triple matching.

Each record holds a webpage instance (table, title, subject, summary) and,
for every sentence of the summary, the triples that sentence was written
from. Labels come from construction: a sentence is rendered from a chosen
triple with a phrasing that carries that triple's value, name and one
indicator word, and avoids the indicator words of every other type.
Negative sentences drop exactly one of the three ingredients.

Run: python3 gen_gold.py > gold_matching.jsonl
"""

import json
import random

SEED = 20240611
N_INSTANCES = 40

TS_COLUMNS = ["Revenue", "Market cap", "Net income", "Shipments", "Subscribers",
              "Exports", "Visitors", "Deliveries", "Tax receipts", "Bookings"]
CAT_COLUMNS = ["Revenue", "Market share", "Units sold", "Employees", "Stores",
               "Exports", "Installations", "Patents"]
CATEGORIES = {
    "Country": ["Germany", "France", "Japan", "Brazil", "Canada", "Italy", "Spain", "Mexico"],
    "Brand": ["Acme", "Globex", "Initech", "Umbrella", "Hooli", "Vandelay", "Stark"],
    "Region": ["Europe", "Asia", "Africa", "Oceania", "North America", "South America"],
}
SUBJECTS = ["economy", "retail", "technology", "energy", "travel", "finance", "media"]
FILLER = [
    "Demand remains robust across segments.",
    "Analysts expect further changes.",
    "Figures cover the U.S. Market and its territories.",
    "Data are approx. Estimates based on company reports.",
    "The data come from annual company filings.",
    "Methodology changed slightly during the period.",
]


def canonical(v):
    s = format(v, ".2f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def fsum(values):
    s = 0.0
    for v in values:
        s += v
    return s


def trend_direction(values):
    n = len(values)
    mean_i = (n - 1) / 2.0
    mean_v = fsum(values) / n
    num = den = 0.0
    for i, v in enumerate(values):
        di = i - mean_i
        num += di * (v - mean_v)
        den += di * di
    change = (num / den) * (n - 1) / max(abs(mean_v), 1e-9)
    if change >= 0.1:
        return "UP"
    if change <= -0.1:
        return "DOWN"
    return "NONE"


def make_table(rng):
    time_series = rng.random() < 0.6
    n_cols = 1 if rng.random() < 0.6 else 2
    if time_series:
        x_name = "Year"
        n = rng.randint(4, 8)
        start = rng.randint(1990, 2012)
        xs = [str(start + i) for i in range(n)]
        names = rng.sample(TS_COLUMNS, n_cols)
    else:
        x_name = rng.choice(sorted(CATEGORIES))
        n = rng.randint(3, 6)
        xs = rng.sample(CATEGORIES[x_name], n)
        names = rng.sample(CAT_COLUMNS, n_cols)
    while True:
        cols = []
        for ci in range(n_cols):
            base = rng.uniform(20, 400) + 450 * ci
            shape = rng.choice(["up", "down", "flat"]) if time_series else "flat"
            vals = []
            for i in range(n):
                drift = {"up": 0.12, "down": -0.1, "flat": 0.0}[shape] * base * i
                noise = rng.uniform(-0.03, 0.03) * base if shape != "flat" else rng.uniform(-0.4, 0.4) * base
                vals.append(round(max(1.0, base + drift + noise), 1))
            cols.append(vals)
        # every cell and aggregate must be distinct after rounding to integers
        ints = [round(v) for c in cols for v in c]
        ints += [round(fsum(c)) for c in cols] + [round(fsum(c) / n) for c in cols]
        if len(set(ints)) == len(ints):
            break
    return time_series, x_name, xs, [{"name": nm, "values": v} for nm, v in zip(names, cols)]


def descending(values):
    return sorted(range(len(values)), key=lambda i: -values[i])


def plural(word):
    if word.endswith("y"):
        return word[:-1] + "ies"
    return word if word.endswith("s") else word + "s"


def positives(rng, ts, x_name, xs, col):
    """(sentence, [triples]) candidates for one column."""
    name, vals = col["name"], col["values"]
    low = name.lower()
    n = len(vals)
    rng_label = f"{xs[0]}-{xs[-1]}" if ts else f"ALL {x_name}"
    imax = descending(vals)[0]
    imin = min(range(n), key=lambda i: vals[i])
    total = fsum(vals)
    mean = total / n
    out = []

    t_max = [xs[imax], f"MAX {name}", canonical(vals[imax])]
    out.append((rng.choice([
        f"{name} peaked at {canonical(vals[imax])} in {xs[imax]}.",
        f"At {canonical(vals[imax])}, {xs[imax]} posted the largest {low} figure.",
        f"The highest {low} level, {canonical(vals[imax])}, came in {xs[imax]}.",
    ]), [t_max]))

    t_min = [xs[imin], f"MIN {name}", canonical(vals[imin])]
    out.append((rng.choice([
        f"{name} hit its lowest level of {canonical(vals[imin])} in {xs[imin]}.",
        f"With {canonical(vals[imin])}, {xs[imin]} recorded the smallest {low} figure.",
    ]), [t_min]))

    t_sum = [rng_label, f"SUM {name}", canonical(total)]
    span = f"over {rng_label}" if ts else f"across all {plural(x_name.lower())}"
    out.append((rng.choice([
        f"The total {low} {span} is {canonical(total)}.",
        f"Combined, {low} {span} amounts to {canonical(total)}.",
    ]), [t_sum]))

    t_avg = [rng_label, f"AVERAGE {name}", canonical(mean)]
    out.append((rng.choice([
        f"The average {low} {span} is {canonical(mean)}.",
        f"On average, {low} {span} sits at {canonical(mean)}.",
    ]), [t_avg]))

    t_last = [xs[-1], name, canonical(vals[-1])]
    out.append((rng.choice([
        f"In {xs[-1]}, {low} was {canonical(vals[-1])}.",
        f"{name} stood at {canonical(vals[-1])} in {xs[-1]}.",
    ]), [t_last]))

    if imax == n - 1:
        out.append((f"In {xs[-1]}, {low} was {canonical(vals[-1])}, the highest on record.", [t_last, t_max]))

    if ts:
        a, b = n - 2, n - 1
    else:
        d = descending(vals)
        a, b = min(d[0], d[1]), max(d[0], d[1])
    lo, hi = (b, a) if vals[b] < vals[a] else (a, b)
    t_cmp = [xs[lo], f"COMPARE {name}", xs[hi]]
    out.append((
        f"{name} in {xs[hi]} ({canonical(vals[hi])}) came in higher than in {xs[lo]} ({canonical(vals[lo])}).",
        [t_cmp],
    ))
    if ts:
        # the earlier row's cell triple exists through the COMPARE set
        t_prev = [xs[n - 2], name, canonical(vals[n - 2])]
        out.append((f"In {xs[n - 2]}, {low} was {canonical(vals[n - 2])}.", [t_prev]))

    if ts and n >= 3:
        direction = trend_direction(vals)
        t_trend = [rng_label, f"TREND {name}", direction]
        approx = str(round(vals[-1]))
        sentence = {
            "UP": f"{name} grew steadily, ending at roughly {approx} in {xs[-1]}.",
            "DOWN": f"{name} declined over the years to about {approx} in {xs[-1]}.",
            "NONE": f"{name} showed no clear trend, hovering near {approx} in {xs[-1]}.",
        }[direction]
        out.append((sentence, [t_trend]))

    if not ts and n >= 3:
        d = descending(vals)
        r1 = [xs[d[0]], f"RANK_1 {name}", canonical(vals[d[0]])]
        r2 = [xs[d[1]], f"RANK_2 {name}", canonical(vals[d[1]])]
        out.append((
            f"Ranked by {low}, {xs[d[0]]} leads with {canonical(vals[d[0]])}, "
            f"followed by {xs[d[1]]} with {canonical(vals[d[1]])}.",
            [r1, r2],
        ))
    return out


def negatives(rng, xs, col, used):
    name, vals = col["name"], col["values"]
    low = name.lower()
    imax = descending(vals)[0]
    fake = vals[imax]
    while round(fake) in used:
        fake = round(fake + rng.uniform(3, 40), 1)
    return [
        # indicator and name, value absent from the table
        f"{name} peaked at {canonical(fake)} during the boom.",
        # value and name, no indicator word
        f"{name} in {xs[imax]}: {canonical(vals[imax])}.",
        # value and indicator, neither column nor row name
        f"The index peaked at {canonical(vals[imax])} overall.",
    ]


def main():
    rng = random.Random(SEED)
    for k in range(N_INSTANCES):
        ts, x_name, xs, cols = make_table(rng)
        used = {round(v) for c in cols for v in c["values"]}
        used |= {round(fsum(c["values"])) for c in cols}
        used |= {round(fsum(c["values"]) / len(xs)) for c in cols}
        cands = []
        for col in cols:
            cands.extend(positives(rng, ts, x_name, xs, col))
        pos = rng.sample(cands, min(len(cands), 4))
        neg = [(s, []) for s in rng.sample(negatives(rng, xs, rng.choice(cols), used), 1)]
        fill = [(rng.choice(FILLER), [])] if rng.random() < 0.5 else []
        labels = pos + neg + fill
        rng.shuffle(labels)
        subject = rng.choice(SUBJECTS)
        title = f"{cols[0]['name']} by {x_name.lower()}, dataset {k + 1}"
        record = {
            "instance": {
                "table": {"x_name": x_name, "x_values": xs, "y_columns": cols},
                "title": title,
                "subject": subject,
                "summary": " ".join(s for s, _ in labels),
            },
            "labels": [{"sentence": s, "triples": t} for s, t in labels],
        }
        print(json.dumps(record, ensure_ascii=False))


if __name__ == "__main__":
    main()
