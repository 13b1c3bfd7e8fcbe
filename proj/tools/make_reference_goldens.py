#!/usr/bin/env python3
"""Emits tokenizer and forward golden files for a real checkpoint directory.

Point it at a directory holding config.json, model.safetensors, vocab.json,
and merges.txt (for example a downloaded 124M GPT-2 checkpoint). It writes

  <dir>/tokenizer_goldens.json   50-string id-parity corpus
  <dir>/forward_goldens.json     final-position logits for 5 short prompts

using the HuggingFace reference tokenizer and GPT2LMHeadModel over the same
corpus and prompts as the bundled fixture goldens. The acceptance gate picks
both files up automatically when PICL_GPT2_DIR names the directory.

Usage: python3 tools/make_reference_goldens.py /path/to/checkpoint
"""

import json
import os
import sys

import torch
from tokenizers import Tokenizer, decoders, models, pre_tokenizers
from transformers import GPT2LMHeadModel

GOLDEN_TEXTS = [
    "Hello world",
    "Hello, my",
    " Label:",
    "Label:",
    "Label: ",
    "Input: good movie, Label: positive",
    "Input: bad film, Label: ",
    "",
    " ",
    "   ",
    "a  b",
    "it's fine",
    "they'll arrive, I'm sure",
    "isn't it?",
    "don't stop",
    "I'd rather you'd've gone",
    "we're HERE'S ODD 'S",
    "tabs\tand\nnewlines\r\n",
    "  leading and trailing  ",
    "3.14159",
    "version 2.0.1 beta",
    "1,000,000 dollars",
    "café naïve résumé",
    "Zürich über alles",
    "ελληνικά γράμματα",
    "русский текст",
    "日本語のテキスト",
    "中文文本",
    "한국어 텍스트",
    "2026年8月14日",
    "emoji 👍 test 🎉",
    "mixed: English, 中文, русский!",
    "!@#$%^&*()",
    "?!?!?!",
    "...ellipsis...",
    "quote \"inside\" quote",
    "'single quoted'",
    "dash-separated-words",
    "under_score_names",
    "CamelCaseIdentifier",
    "ALLCAPS WORDS",
    "the quick brown fox",
    "Input: the film was wonderful, Label: positive",
    "Input: the plot was dreadful, Label: negative",
    "Input: , Label: ",
    "Input: the battery is weak, Aspect: battery, Label: negative",
    "Input: good story, Text 2: fine ending, Label: true",
    "repeated repeated repeated",
    "xqzj vwkp unseen tokens",
    " nbsp and  line sep",
]

FORWARD_PROMPTS = [
    "Hello, my",
    "Input: the film was wonderful, Label: positive\nInput: the plot was dreadful, Label: ",
    "the quick brown fox",
    " ",
    "Label: ",
]


def make_tokenizer(ckpt_dir):
    tk = Tokenizer(models.BPE.from_file(
        os.path.join(ckpt_dir, "vocab.json"),
        os.path.join(ckpt_dir, "merges.txt"),
    ))
    tk.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tk.decoder = decoders.ByteLevel()
    return tk


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__.strip())
    ckpt_dir = sys.argv[1]
    for required in ("config.json", "model.safetensors", "vocab.json", "merges.txt"):
        if not os.path.exists(os.path.join(ckpt_dir, required)):
            sys.exit(f"{ckpt_dir} is missing {required}")

    tok = make_tokenizer(ckpt_dir)
    goldens = []
    for text in GOLDEN_TEXTS:
        ids = tok.encode(text).ids if text else []
        decoded = tok.decode(ids) if ids else ""
        assert decoded == text, f"round trip failed for {text!r}"
        goldens.append({"text": text, "ids": ids})
    with open(os.path.join(ckpt_dir, "tokenizer_goldens.json"), "w") as f:
        json.dump(goldens, f, ensure_ascii=False, indent=1)
    print(f"wrote {len(goldens)} tokenizer goldens")

    model = GPT2LMHeadModel.from_pretrained(ckpt_dir)
    model.eval()
    forward = []
    with torch.no_grad():
        for prompt in FORWARD_PROMPTS:
            ids = tok.encode(prompt).ids
            logits = model(input_ids=torch.tensor([ids])).logits[0, -1, :]
            forward.append({"text": prompt, "ids": ids,
                            "logits": [float(v) for v in logits.tolist()]})
    with open(os.path.join(ckpt_dir, "forward_goldens.json"), "w") as f:
        json.dump(forward, f, indent=1)
    print(f"wrote {len(forward)} forward goldens")


if __name__ == "__main__":
    main()
