#!/usr/bin/env python3
"""Standalone counter for SQuAD-schema JSON files.

Walks the raw JSON with no project imports and prints article, paragraph,
and question totals. Used as the independent cardinality oracle for the
acceptance suite and handy for eyeballing any corpus you feed the toolkit.

Usage: python tools/count_squad.py path/to/train-v1.1.json
"""

import json
import sys


def count(path):
    with open(path, "rb") as f:
        doc = json.load(f)
    articles = doc["data"]
    n_paragraphs = 0
    n_questions = 0
    n_answers = 0
    for article in articles:
        for para in article["paragraphs"]:
            n_paragraphs += 1
            n_questions += len(para["qas"])
            for qa in para["qas"]:
                n_answers += len(qa["answers"])
    return {
        "articles": len(articles),
        "paragraphs": n_paragraphs,
        "questions": n_questions,
        "answers": n_answers,
    }


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__.strip())
    totals = count(sys.argv[1])
    for key, value in totals.items():
        print(f"{key}: {value}")
