"""Regenerate the bundled demo fact pool.

Writes a tab-separated file of synthetic declarative sentences built from a
fixed subject and predicate grid. The output is deterministic, so the
committed data file can be reproduced exactly:

    python3 tools/make_fact_pool.py src/reasonkit/data/facts_demo.tsv
"""

from __future__ import annotations

import sys

SUBJECTS = [
    "the village library", "the night train", "the harbor master",
    "the copper kettle", "the lighthouse keeper", "the orchard gate",
    "the museum archive", "the city fountain", "the mountain trail",
    "the corner bakery", "the river ferry", "the observatory dome",
    "the botanical garden", "the printing press", "the weather station",
    "the concert hall", "the pottery studio", "the railway bridge",
    "the market square", "the glass workshop", "the town clock",
    "the fishing pier", "the radio tower", "the stone archway",
    "the paper mill", "the climbing club", "the chess pavilion",
    "the tram depot", "the herbal pharmacy", "the opera house",
    "the skating rink", "the brass band", "the courier office",
    "the old watermill", "the tailor shop", "the beekeeping society",
    "the planetarium", "the ski lodge", "the ferry terminal",
    "the candle factory",
]

PREDICATES = [
    "stays open after midnight", "was repainted last spring",
    "appears on the oldest town map", "hosts a festival every autumn",
    "is mentioned in the founding charter", "keeps a logbook of visitors",
    "was restored by volunteers", "sits beside the old canal",
    "displays a bronze plaque", "attracts photographers at dawn",
    "closes during the winter months", "survived the great flood",
    "is featured in the guidebook", "holds a weekly open house",
    "uses solar panels for power", "is older than the cathedral",
    "has a red tiled roof", "lends tools to neighbors",
    "serves tea on Sundays", "is guarded by a stone lion",
    "archives the local newspapers", "trains new apprentices each year",
    "overlooks the northern valley", "is lit by gas lamps",
    "welcomes school excursions", "is run by two families",
    "stores grain for the market", "rings a bell at noon",
    "offers guided evening tours", "was built without nails",
    "keeps its original floorboards", "is surrounded by lime trees",
    "publishes a monthly newsletter", "is home to a colony of swifts",
    "repairs antique instruments", "sells maps of the region",
    "was founded by a retired captain", "hides a small courtyard",
    "is painted in pale blue", "borrows chairs from the school",
]


def main(out_path: str) -> None:
    lines = []
    idx = 0
    for subject in SUBJECTS:
        for predicate in PREDICATES:
            lines.append(f"f{idx:04d}\t{subject} {predicate}")
            idx += 1
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
    print(f"wrote {idx} facts to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/reasonkit/data/facts_demo.tsv")
