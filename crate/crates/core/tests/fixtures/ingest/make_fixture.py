"""Writes the 1000-row events fixture and its mentions tables.

Every retained event gets its own day, so no sequence has same-day ties and
the expected output does not depend on the tie-shuffling generator.
"""

import datetime
import gzip
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
N_ROWS = 1000
START = datetime.date(2018, 6, 19)
COUNTRIES = ["USA", "RUS", "CHN", "FRA", "GBR", "IRN", "ISR", "TUR"]

rng = random.Random(20180619)
days = list(range(N_ROWS + 50))
rng.shuffle(days)


def day(i):
    return (START + datetime.timedelta(days=days[i])).strftime("%Y%m%d")


def event_code():
    root = rng.randint(1, 20)
    width = rng.choice([0, 1, 2])
    return f"{root:02d}" + "".join(str(rng.randint(0, 9)) for _ in range(width))


def event_row(gid, d, a1, t1, a2, t2, code):
    cols = [""] * 61
    cols[0] = str(gid)
    cols[1] = d
    cols[2] = d[:6]
    cols[3] = d[:4]
    cols[5] = a1 and f"{a1}{t1}"
    cols[7] = a1
    cols[12] = t1
    cols[15] = a2 and f"{a2}{t2}"
    cols[17] = a2
    cols[22] = t2
    cols[25] = "1"
    cols[26] = code
    cols[27] = code[:3]
    cols[28] = code[:2]
    cols[29] = "1"
    cols[30] = "3.0"
    cols[31] = "2"
    cols[60] = f"http://example.org/{gid}"
    return "\t".join(cols)


def mention_row(gid, doc):
    cols = [""] * 16
    cols[0] = str(gid)
    cols[1] = "20180701000000"
    cols[2] = "20180701000000"
    cols[3] = "1"
    cols[4] = doc.split("/")[2] if doc.count("/") >= 2 else "unknown"
    cols[5] = doc
    cols[6] = "1"
    cols[11] = "100"
    return "\t".join(cols)


events = []      # text rows
retained = []    # ids of rows that should survive filtering
ids = iter(range(700000000, 800000000, 7))


def gov_pair(pool=COUNTRIES):
    a, b = rng.sample(pool, 2)
    return a, b


# Hub events: one far above the clone threshold, one that only exceeds it
# before source filtering.
hub, near_hub = next(ids), next(ids)
for gid in (hub, near_hub):
    a, b = gov_pair()
    events.append(event_row(gid, day(len(events)), a, "GOV", b, "GOV", event_code()))
    retained.append(gid)

# Three-country group.
tri = []
for a, b in [("USA", "RUS"), ("RUS", "CHN"), ("CHN", "USA"), ("RUS", "USA"), ("USA", "CHN")]:
    gid = next(ids)
    events.append(event_row(gid, day(len(events)), a, "GOV", b, "GOV", event_code()))
    retained.append(gid)
    tri.append(gid)

non_retained = []
malformed = 0
while len(events) < N_ROWS - 30:
    gid = next(ids)
    d = day(len(events))
    kind = rng.random()
    if kind < 0.08:
        a = rng.choice(COUNTRIES)
        events.append(event_row(gid, d, a, "GOV", a, "GOV", event_code()))
        non_retained.append(gid)
    elif kind < 0.16:
        a, b = gov_pair()
        t1, t2 = rng.choice([("MIL", "GOV"), ("GOV", "BUS"), ("", "GOV"), ("GOV", "COP")])
        events.append(event_row(gid, d, a, t1, b, t2, event_code()))
        non_retained.append(gid)
    elif kind < 0.19:
        a = rng.choice(COUNTRIES)
        events.append(event_row(gid, d, a, "GOV", "", "GOV", event_code()))
        non_retained.append(gid)
    else:
        # Uneven country mix so groups split into several pairs.
        a, b = gov_pair(COUNTRIES[:4] if rng.random() < 0.7 else COUNTRIES)
        events.append(event_row(gid, d, a, "GOV", b, "GOV", event_code()))
        retained.append(gid)

# Malformed rows.
bad_rows = []
for i in range(24):
    gid = next(ids)
    a, b = gov_pair()
    good = event_row(gid, day(len(events) + len(bad_rows)), a, "GOV", b, "GOV", "04")
    cols = good.split("\t")
    k = i % 6
    if k == 0:
        cols = cols[:20]
    elif k == 1:
        cols[1] = "2018-07-01"
    elif k == 2:
        cols[26] = "X4"
    elif k == 3:
        cols[26] = "21"
    elif k == 4:
        cols[0] = f"abc{gid}"
    else:
        cols[26] = "04215"
    bad_rows.append("\t".join(cols))
    malformed += 1

# Duplicate global ids: the first occurrence wins.
dups = []
for gid in rng.sample(retained[10:], 6):
    a, b = gov_pair()
    dups.append(event_row(gid, day(len(events) + len(bad_rows) + len(dups)), a, "GOV", b, "GOV", event_code()))

rows = events + bad_rows + dups
assert len(rows) == N_ROWS, len(rows)

# Mentions.
mentions = []
doc_ids = iter(range(1, 10**6))


def doc(source="example"):
    n = next(doc_ids)
    if source == "bbc":
        # Monitoring citations are not unique: many reports share one.
        return "BBC Monitoring " + BBC_DESKS[n % len(BBC_DESKS)]
    return f"https://www.{source}.com/article/{n}"


BBC_DESKS = ["Former Soviet Union", "Asia Pacific", "Middle East", "European"]

sources = ["reuters", "aljazeera", "nytimes", "tass", "xinhua", "lemonde"]

# Hub: 300 distinct documents, 20 more from the filtered source, duplicates.
hub_docs = [doc(rng.choice(sources)) for _ in range(300)]
for d in hub_docs:
    mentions.append((hub, d))
for _ in range(20):
    mentions.append((hub, doc("bbc")))
for d in rng.sample(hub_docs, 10):
    mentions.append((hub, d))

# Near hub: 250 surviving documents plus 15 filtered ones, not cloned.
near_docs = [doc(rng.choice(sources)) for _ in range(250)]
for d in near_docs:
    mentions.append((near_hub, d))
for _ in range(15):
    mentions.append((near_hub, doc("bbc")))

# Three-country chain.
for x, y in zip(tri, tri[1:]):
    d = doc("reuters")
    mentions += [(x, d), (y, d)]

pool = [g for g in retained if g not in (hub, near_hub) and g not in tri]
rng.shuffle(pool)

# A few hub documents shared with one otherwise unmentioned event each, so
# those clones join distinct two-event groups.
hub_partners = pool[:5]
pool = pool[5:]
for d, partner in zip(rng.sample(hub_docs, 5), hub_partners):
    mentions.append((partner, d))
# One near-hub document pulls in an event; the near hub stays whole.
near_partner = pool[0]
pool = pool[1:]
mentions.append((near_partner, near_docs[17]))

clusters = []
while pool:
    size = min(len(pool), rng.choice([1, 1, 2, 2, 3, 3, 4, 5, 6, 8, 12]))
    clusters.append(pool[:size])
    pool = pool[size:]

for members in clusters:
    for x, y in zip(members, members[1:]):
        d = doc(rng.choice(sources))
        mentions += [(x, d), (y, d)]
    if len(members) > 2 and rng.random() < 0.5:
        d = doc(rng.choice(sources))
        for m in rng.sample(members, 3):
            mentions.append((m, d))
    if rng.random() < 0.6:
        mentions.append((members[0], doc(rng.choice(sources))))

# Filtered-source documents that would otherwise merge clusters.
for _ in range(25):
    a, b = rng.sample(clusters, 2)
    d = doc("bbc")
    mentions += [(rng.choice(a), d), (rng.choice(b), d)]

# Documents mentioning a dropped event and a retained one.
for gid in rng.sample(non_retained, 20):
    c = rng.choice(clusters)
    d = doc(rng.choice(sources))
    mentions += [(gid, d), (rng.choice(c), d)]
    c2 = rng.choice(clusters)
    mentions.append((gid, doc(rng.choice(sources))))
    mentions.append((rng.choice(c2), d))

# Mentions of events absent from the events table.
for _ in range(15):
    mentions.append((next(ids) + 3, doc(rng.choice(sources))))

# Duplicate mention rows.
for m in rng.sample(mentions, 30):
    mentions.append(m)

rng.shuffle(mentions)
mention_rows = [mention_row(g, d) for g, d in mentions]
for i in range(8):
    if i % 3 == 0:
        mention_rows.append("123\t20180701000000\t20180701000000")
    elif i % 3 == 1:
        mention_rows.append(mention_row(hub, " "))
    else:
        mention_rows.append(mention_row(hub, "https://x.com/a").replace(str(hub), "notanumber", 1))
rng.shuffle(mention_rows)

os.makedirs(os.path.join(HERE, "events"), exist_ok=True)
os.makedirs(os.path.join(HERE, "mentions"), exist_ok=True)
half = len(rows) // 2
with open(os.path.join(HERE, "events", "20180619.export.CSV"), "w") as f:
    f.write("\n".join(rows[:half]) + "\n")
with gzip.GzipFile(os.path.join(HERE, "events", "20180620.export.CSV.gz"), "wb", mtime=0) as f:
    f.write(("\n".join(rows[half:]) + "\n").encode())
third = len(mention_rows) // 3
with open(os.path.join(HERE, "mentions", "20180619.mentions.CSV"), "w") as f:
    f.write("\n".join(mention_rows[:third]) + "\n")
with gzip.GzipFile(os.path.join(HERE, "mentions", "20180620.mentions.CSV.gz"), "wb", mtime=0) as f:
    f.write(("\n".join(mention_rows[third:]) + "\n").encode())
print(f"{len(rows)} event rows, {len(mention_rows)} mention rows")
