#!/usr/bin/env python3
#
# Copyright 2026 The CRAG Harness Authors
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
"""Regenerates data/fixture: the 20-question dataset and the mock web pages."""

import json
import pathlib
import re

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixture"

# (question, gold answers, relevant docs, page slug, page answer sentence)
ITEMS = [
    ("What is the capital of France?", ["Paris"],
     ["The capital of France is Paris. Paris lies on the Seine river. It hosts many museums. The city has a long history.",
      "Paris is the capital and largest city of France."],
     "Paris", "Paris is the capital of France."),
    ("What is Henry Feilden's occupation?", ["politician"],
     ["Henry Feilden's occupation is politician, and he sat in the House of Commons."],
     "Henry_Feilden", "Henry Feilden was a Conservative politician."),
    ("Who wrote the novel Dracula?", ["Bram Stoker"],
     ["Bram Stoker wrote the novel Dracula in 1897."],
     "Dracula", "The novel Dracula was written by Bram Stoker."),
    ("What is the largest planet in the Solar System?", ["Jupiter"],
     ["Jupiter is the largest planet in the Solar System."],
     "Jupiter", "Jupiter is the largest planet in the Solar System."),
    ("Who painted the Mona Lisa?", ["Leonardo da Vinci"],
     ["Leonardo da Vinci painted the Mona Lisa. He worked on it for years. It now hangs in the Louvre.",
      "The Mona Lisa was painted by Leonardo da Vinci."],
     "Mona_Lisa", "The Mona Lisa was painted by Leonardo da Vinci."),
    ("Which element has atomic number one?", ["hydrogen"],
     ["Hydrogen is the element which has atomic number one."],
     "Hydrogen", "Hydrogen is the element with atomic number one."),
    ("What is the tallest mountain on Earth?", ["Everest"],
     ["Mount Everest is the tallest mountain on Earth."],
     "Mount_Everest", "Mount Everest is the tallest mountain on Earth."),
    ("Who developed the theory of general relativity?", ["Einstein"],
     ["Albert Einstein developed the theory of general relativity."],
     "General_relativity", "Albert Einstein developed the theory of general relativity."),
    ("What is the longest river in Africa?", ["Nile"],
     ["The Nile is the longest river in Africa. It flows north. It ends in the Mediterranean Sea.",
      "The longest river in Africa is the Nile."],
     "Nile", "The Nile is the longest river in Africa."),
    ("In what year did the Berlin Wall fall?", ["1989"],
     ["The Berlin Wall did fall in the year 1989."],
     "Berlin_Wall", "The Berlin Wall fell in the year 1989."),
    ("What language is spoken in Brazil?", ["Portuguese"],
     ["Portuguese is the language spoken in Brazil."],
     "Brazilian_Portuguese", "Portuguese is the language spoken in Brazil."),
    ("Who was the first person to walk on the Moon?", ["Armstrong"],
     ["Neil Armstrong was the first person to walk on the Moon."],
     "Neil_Armstrong", "Neil Armstrong was the first person to walk on the Moon."),
    ("What is the currency of Japan?", ["yen"],
     ["The yen is the currency of Japan. Coins and notes are issued. The Bank of Japan manages it.",
      "The currency of Japan is the yen."],
     "Japanese_yen", "The yen is the currency of Japan."),
    ("Which planet is known as the Red Planet?", ["Mars"],
     ["Mars is the planet known as the Red Planet."],
     "Mars", "Mars is known as the Red Planet."),
    ("What is the hardest natural mineral?", ["diamond"],
     ["Diamond is the hardest natural mineral."],
     "Diamond", "Diamond is the hardest natural mineral."),
    ("Who composed the Fifth Symphony in C minor?", ["Beethoven"],
     ["Ludwig van Beethoven composed the Fifth Symphony in C minor."],
     "Symphony_No._5_(Beethoven)", "Ludwig van Beethoven composed the Fifth Symphony in C minor."),
    ("What is the largest ocean on Earth?", ["Pacific"],
     ["The Pacific is the largest ocean on Earth. It covers a third of the surface. Its deepest point is the Mariana Trench.",
      "The largest ocean on Earth is the Pacific."],
     "Pacific_Ocean", "The Pacific is the largest ocean on Earth."),
    ("What gas do plants absorb from the air?", ["carbon dioxide"],
     ["What plants do absorb from the air is the gas carbon dioxide."],
     "Photosynthesis", "Plants absorb the gas carbon dioxide from the air."),
    ("Who is credited with inventing the telephone?", ["Bell"],
     ["Alexander Graham Bell is credited with inventing the telephone."],
     "Telephone", "Alexander Graham Bell is credited with inventing the telephone."),
    ("Which country has the largest population in South America?", ["Brazil"],
     ["Brazil is the country which has the largest population in South America."],
     "South_America", "Brazil has the largest population in South America."),
]

DISTRACTORS = [
    "Bananas grow best near warm tropical coasts.",
    "Penguins huddle together during long Antarctic winters.",
    "Honeybees communicate by dancing inside their hives.",
    "Sourdough bread needs patience plus wild yeast.",
    "Volcanic soil can support very fertile vineyards.",
    "Owls hunt silently at night using keen hearing.",
    "Marathon runners carefully pace each mile.",
    "Glaciers slowly carve deep valleys over millennia.",
    "Origami artists fold paper into delicate cranes.",
    "Lighthouses guided sailors past rocky shores.",
    "Jazz musicians often improvise lively solos.",
]

PLACEHOLDER = "no information available"


def tokens(s):
    return [t for t in re.split(r"[^0-9a-z\x80-\U0010ffff]+", s.lower()) if t]


def lexical(q, d):
    u = set(tokens(q))
    return 2 * len(u & set(tokens(d))) / len(u) - 1


def main():
    lines = []
    pages = []
    page_paths = []
    for i, (q, golds, rel, slug, sentence) in enumerate(ITEMS, 1):
        distract = [d for d in DISTRACTORS if not set(tokens(q)) & set(tokens(d))]
        distract = [distract[(i + k) % len(distract)] for k in range(2)]
        for d in rel:
            assert lexical(q, d) > 0.59, (q, d, lexical(q, d))
            assert any(g.lower() in d.lower() for g in golds), (q, d)
        for d in distract + [PLACEHOLDER]:
            assert lexical(q, d) < -0.99, (q, d)
            assert not any(g.lower() in d.lower() for g in golds), (q, d)
        docs = [{"id": f"r{k + 1}", "title": slug.replace("_", " "), "text": t} for k, t in enumerate(rel)]
        docs += [{"id": f"n{k + 1}", "text": t} for k, t in enumerate(distract)]
        lines.append(json.dumps({
            "id": f"q{i:02d}", "question": q, "answers": golds, "docs": docs,
            "relevant_doc_ids": [d["id"] for d in docs if d["id"].startswith("r")],
        }, ensure_ascii=False))

        fname = f"pages/{slug.replace('(', '').replace(')', '').replace('.', '')}.html"
        title = slug.replace("_", " ")
        html = (f"<!DOCTYPE html>\n<html><head><title>{title}</title>\n"
                f"<style>p {{ margin: 0 }}</style></head>\n<body>\n"
                f"<nav><a href=\"/\">Main page</a></nav>\n<h1>{title}</h1>\n"
                f"<p>{q} {sentence}</p>\n"
                f"<p>This article is part of the offline reference collection.</p>\n"
                f"<script>var x = '<p>not content</p>';</script>\n</body></html>\n")
        (ROOT / "mock" / fname).write_text(html)
        path = "/wiki/" + slug
        page_paths.append(path)
        pages.append({"path": path, "title": title, "file": fname})

    (ROOT / "dataset.jsonl").write_text("\n".join(lines) + "\n")
    (ROOT / "mock" / "pages.json").write_text(json.dumps(pages, indent=2) + "\n")
    (ROOT / "config.json").write_text(json.dumps({
        "thresholds": {"preset": "popqa"},
        "search": {"endpoint": "http://127.0.0.1:8089/search", "cache_dir": ""},
        "offline": True,
    }, indent=2) + "\n")


if __name__ == "__main__":
    main()
