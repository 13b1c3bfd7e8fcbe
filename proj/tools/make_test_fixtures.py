#!/usr/bin/env python3
"""Regenerates everything under tests/fixtures/ and data/demo/.

Produces:
  tests/fixtures/tiny_model/   -- a small GPT-2-architecture checkpoint
      config.json, model.safetensors, vocab.json, merges.txt
  tests/fixtures/goldens/      -- frozen expected values
      tokenizer_goldens.json   ids from the HuggingFace GPT-2 tokenizer
      forward_goldens.json     final-position logits from HF GPT2LMHeadModel
      split_goldens.json       seed-42 shuffle splits (independent Python
                               implementation of the documented PRNG)
  data/demo/                   -- small synthetic classification datasets

The tiny checkpoint is a 2-layer model trained briefly on a synthetic
corpus so that its next-token distribution carries genuine token bias
(needed for the entropy-trend tests). All randomness is seeded; reruns
are bit-identical except for float nondeterminism in torch training,
which is why the generated artifacts are committed.
"""

import json
import math
import os
import random

import regex
import torch

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIX = os.path.join(ROOT, "tests", "fixtures")
TINY = os.path.join(FIX, "tiny_model")
GOLD = os.path.join(FIX, "goldens")
DEMO = os.path.join(ROOT, "data", "demo")

GPT2_SPLIT_PATTERN = (
    r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""
)

N_MERGES = 340
SEED = 1234


# ---------------------------------------------------------------- byte level
def bytes_to_unicode():
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, [chr(c) for c in cs]))


# ---------------------------------------------------------------- corpus
POS_SUBJ = ["the film", "this movie", "the story", "the show", "this album",
            "the novel", "the play", "this series", "the soundtrack", "the cast"]
POS_PRED = ["was wonderful", "felt truly alive", "is a delight", "kept me smiling",
            "was a joy to watch", "shines from start to finish", "deserves every award",
            "is warm and clever", "left me happy", "works beautifully"]
NEG_SUBJ = ["the film", "this movie", "the plot", "the show", "this album",
            "the novel", "the script", "this series", "the pacing", "the acting"]
NEG_PRED = ["was dreadful", "felt flat and dull", "is a mess", "bored me to tears",
            "was a waste of time", "falls apart quickly", "deserves to be forgotten",
            "is cold and clumsy", "left me annoyed", "never works"]
EXTRA = ["I think", "honestly,", "in the end,", "to be fair,", "overall,"]

PLAIN_LINES = [
    "the quick brown fox jumps over the lazy dog",
    "a small model can still learn simple patterns",
    "she sells sea shells by the sea shore",
    "we watched the show and then walked home",
    "numbers like 12 and 345 appear in text",
    "it's a fine day, isn't it?",
    "they'll arrive before noon, I'm sure of it",
    "music and film reviews fill the page",
    "the input and the label form one line",
    "good stories deserve good endings",
]


def make_sentence(rng, positive):
    subj = rng.choice(POS_SUBJ if positive else NEG_SUBJ)
    pred = rng.choice(POS_PRED if positive else NEG_PRED)
    if rng.random() < 0.3:
        return f"{rng.choice(EXTRA)} {subj} {pred}"
    return f"{subj} {pred}"


def build_corpus(rng):
    lines = []
    for _ in range(40):
        lines.extend(PLAIN_LINES)
    # prompt-format lines, label distribution deliberately imbalanced so the
    # unperturbed model carries measurable label bias
    for _ in range(1500):
        positive = rng.random() < 0.7
        label = "positive" if positive else "negative"
        lines.append(f"Input: {make_sentence(rng, positive)}, Label: {label}")
    rng.shuffle(lines)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- bpe trainer
def train_bpe(corpus, n_merges):
    encoder = bytes_to_unicode()
    pieces = {}
    for piece in regex.findall(GPT2_SPLIT_PATTERN, corpus):
        sym = tuple(encoder[b] for b in piece.encode("utf-8"))
        pieces[sym] = pieces.get(sym, 0) + 1

    merges = []
    for _ in range(n_merges):
        pair_counts = {}
        for sym, freq in pieces.items():
            for a, b in zip(sym, sym[1:]):
                pair_counts[(a, b)] = pair_counts.get((a, b), 0) + freq
        if not pair_counts:
            break
        best = max(pair_counts.items(), key=lambda kv: (kv[1], tuple(map(ord, "".join(kv[0])))))
        if best[1] < 2:
            break
        first, second = best[0]
        merges.append((first, second))
        merged = first + second
        new_pieces = {}
        for sym, freq in pieces.items():
            out = []
            i = 0
            while i < len(sym):
                if i < len(sym) - 1 and sym[i] == first and sym[i + 1] == second:
                    out.append(merged)
                    i += 2
                else:
                    out.append(sym[i])
                    i += 1
            key = tuple(out)
            new_pieces[key] = new_pieces.get(key, 0) + freq
        pieces = new_pieces

    byte_tokens = sorted(bytes_to_unicode().values(), key=lambda c: ord(c))
    vocab = {tok: i for i, tok in enumerate(byte_tokens)}
    for first, second in merges:
        vocab[first + second] = len(vocab)
    vocab["<|endoftext|>"] = len(vocab)
    return vocab, merges


# ---------------------------------------------------------------- split prng
M64 = (1 << 64) - 1


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def fisher_yates(n, seed):
    idx = list(range(n))
    st = seed
    for i in range(n - 1, 0, -1):
        st, z = splitmix64(st)
        j = (z * (i + 1)) >> 64
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def split_indices(n, seed=42):
    order = fisher_yates(n, seed)
    test = order[n - 512:]
    val = order[:512] if n >= 1024 else order[: n - 512]
    return val, test


# ---------------------------------------------------------------- datasets
def write_demo_datasets():
    rng = random.Random(777)
    os.makedirs(DEMO, exist_ok=True)

    records = []
    for _ in range(800):
        positive = rng.random() < 0.5
        records.append({"sentence": make_sentence(rng, positive),
                        "label": 1 if positive else 0})
    with open(os.path.join(DEMO, "demo_sentiment.jsonl"), "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    with open(os.path.join(DEMO, "demo_sentiment.csv"), "w", newline="") as f:
        f.write("sentence,label\r\n")
        for r in records[:200]:
            s = r["sentence"]
            if "," in s or '"' in s:
                s = '"' + s.replace('"', '""') + '"'
            f.write(f"{s},{r['label']}\r\n")
    with open(os.path.join(DEMO, "demo_sentiment.toml"), "w") as f:
        f.write(
            'name = "demo_sentiment"\n'
            'path = "demo_sentiment.jsonl"\n'
            'format = "jsonl"\n'
            'category = "single"\n'
            'text_field = "sentence"\n'
            'label_field = "label"\n'
            'labels = ["negative", "positive"]\n'
            'has_neutral = false\n'
        )

    aspects = ["battery", "screen", "keyboard", "camera", "speaker", "case"]
    verdicts = [("negative", "is a constant disappointment"),
                ("neutral", "is about what you would expect"),
                ("positive", "is genuinely excellent")]
    arecords = []
    for _ in range(600):
        a = rng.choice(aspects)
        b = rng.choice(aspects)
        li, phrase = verdicts[rng.randrange(3)]
        text = f"the {a} {phrase} while the {b} varies"
        arecords.append({"text": text, "aspect": a,
                         "label": ["negative", "neutral", "positive"].index(li)})
    with open(os.path.join(DEMO, "demo_aspect.jsonl"), "w") as f:
        for r in arecords:
            f.write(json.dumps(r) + "\n")
    with open(os.path.join(DEMO, "demo_aspect.toml"), "w") as f:
        f.write(
            'name = "demo_aspect"\n'
            'path = "demo_aspect.jsonl"\n'
            'format = "jsonl"\n'
            'category = "aspect"\n'
            'text_field = "text"\n'
            'aspect_field = "aspect"\n'
            'label_field = "label"\n'
            'labels = ["negative", "neutral", "positive"]\n'
            'has_neutral = true\n'
        )

    prects = []
    for _ in range(600):
        positive = rng.random() < 0.5
        s1 = make_sentence(rng, positive)
        if rng.random() < 0.5:
            s2 = make_sentence(rng, positive)
            label = 1
        else:
            s2 = make_sentence(rng, not positive)
            label = 0
        prects.append({"premise": s1, "hypothesis": s2, "label": label})
    with open(os.path.join(DEMO, "demo_pair.jsonl"), "w") as f:
        for r in prects:
            f.write(json.dumps(r) + "\n")
    with open(os.path.join(DEMO, "demo_pair.toml"), "w") as f:
        f.write(
            'name = "demo_pair"\n'
            'path = "demo_pair.jsonl"\n'
            'format = "jsonl"\n'
            'category = "pair"\n'
            'text_field = "premise"\n'
            'text2_field = "hypothesis"\n'
            'label_field = "label"\n'
            'labels = ["false", "true"]\n'
            'has_neutral = false\n'
        )


# ---------------------------------------------------------------- main
def main():
    os.makedirs(TINY, exist_ok=True)
    os.makedirs(GOLD, exist_ok=True)
    torch.manual_seed(SEED)
    rng = random.Random(SEED)

    corpus = build_corpus(rng)
    vocab, merges = train_bpe(corpus, N_MERGES)
    vocab_size = len(vocab)
    print(f"vocab_size={vocab_size} merges={len(merges)}")

    with open(os.path.join(TINY, "vocab.json"), "w") as f:
        json.dump(vocab, f, ensure_ascii=False)
    with open(os.path.join(TINY, "merges.txt"), "w") as f:
        f.write("#version: 0.2\n")
        for a, b in merges:
            f.write(f"{a} {b}\n")

    from transformers import GPT2Config, GPT2LMHeadModel
    from tokenizers import Tokenizer, models, pre_tokenizers, decoders

    class RefTokenizer:
        """GPT-2 byte-level BPE via the HuggingFace tokenizers backend."""

        def __init__(self, vocab, merges):
            self.tk = Tokenizer(models.BPE(vocab=vocab, merges=list(merges)))
            self.tk.pre_tokenizer = pre_tokenizers.ByteLevel(
                add_prefix_space=False, use_regex=True
            )
            self.tk.decoder = decoders.ByteLevel()

        def encode(self, text, add_special_tokens=False):
            return self.tk.encode(text).ids if text else []

        def decode(self, ids):
            return self.tk.decode(ids) if ids else ""

    tok = RefTokenizer(vocab, merges)

    # tokenizer goldens
    golden_texts = [
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
        " nbsp and  line sep",
    ]
    tok_goldens = []
    for t in golden_texts:
        ids = tok.encode(t)
        assert tok.decode(ids) == t, f"round trip failed for {t!r}"
        tok_goldens.append({"text": t, "ids": ids})
    with open(os.path.join(GOLD, "tokenizer_goldens.json"), "w") as f:
        json.dump(tok_goldens, f, ensure_ascii=False, indent=1)

    # tiny model
    config = GPT2Config(
        vocab_size=vocab_size,
        n_positions=512,
        n_embd=64,
        n_layer=2,
        n_head=4,
        activation_function="gelu_new",
        resid_pdrop=0.0,
        embd_pdrop=0.0,
        attn_pdrop=0.0,
        layer_norm_epsilon=1e-5,
        initializer_range=0.02,
    )
    model = GPT2LMHeadModel(config)

    token_stream = tok.encode(corpus)
    print(f"corpus tokens: {len(token_stream)}")
    data = torch.tensor(token_stream, dtype=torch.long)

    model.train()
    opt = torch.optim.AdamW(model.parameters(), lr=3e-3)
    g = torch.Generator().manual_seed(SEED)
    seq, bs = 64, 16
    steps = 600
    for step in range(steps):
        starts = torch.randint(0, len(data) - seq - 1, (bs,), generator=g)
        x = torch.stack([data[s : s + seq] for s in starts])
        y = torch.stack([data[s + 1 : s + seq + 1] for s in starts])
        out = model(input_ids=x, labels=y)
        opt.zero_grad()
        out.loss.backward()
        opt.step()
        if step % 100 == 0 or step == steps - 1:
            print(f"step {step} loss {out.loss.item():.4f}")

    model.eval()
    model = model.float()

    from safetensors.torch import save_file

    params = dict(model.transformer.named_parameters())
    save_file({k: v.detach().clone().contiguous() for k, v in params.items()},
              os.path.join(TINY, "model.safetensors"))
    with open(os.path.join(TINY, "config.json"), "w") as f:
        json.dump(
            {
                "model_type": "gpt2",
                "vocab_size": vocab_size,
                "n_positions": 512,
                "n_embd": 64,
                "n_layer": 2,
                "n_head": 4,
                "layer_norm_epsilon": 1e-5,
                "activation_function": "gelu_new",
            },
            f,
            indent=1,
        )

    # forward goldens: final-position logits
    prompts = [
        "Hello, my",
        "Input: the film was wonderful, Label: positive\nInput: the plot was dreadful, Label: ",
        "the quick brown fox",
        " ",
        "Label: ",
    ]
    fwd = []
    with torch.no_grad():
        for p in prompts:
            ids = tok.encode(p)
            logits = model(input_ids=torch.tensor([ids])).logits[0, -1, :]
            fwd.append({"text": p, "ids": ids,
                        "logits": [float(v) for v in logits.tolist()]})
    with open(os.path.join(GOLD, "forward_goldens.json"), "w") as f:
        json.dump(fwd, f, indent=1)

    # entropy trend sanity at fixture time: mean normalized token entropy over
    # noise seeds must rise strictly with lambda for both probe inputs
    sigma = 0.02
    base = {k: v.detach().clone() for k, v in model.state_dict().items()}
    param_names = set(params.keys())

    def entropy_at(lam, seed, text):
        gg = torch.Generator().manual_seed(seed)
        noised = {}
        for k, v in base.items():
            stripped = k.removeprefix("transformer.")
            if stripped in param_names or k in param_names:
                noise = torch.randn(v.shape, generator=gg) * sigma
                noised[k] = (1 - lam) * v + lam * noise
            else:
                noised[k] = v
        model.load_state_dict(noised)
        ids = tok.encode(text)
        with torch.no_grad():
            logits = model(input_ids=torch.tensor([ids])).logits[0, -1, :].double()
        p = torch.softmax(logits, dim=-1)
        h = -(p * p.log()).sum().item()
        return h / math.log(vocab_size)

    for text in [" ", "Label: "]:
        means = []
        for lam in [0.0, 0.2, 0.5, 1.0]:
            vals = [entropy_at(lam, s, text) for s in range(10)]
            means.append(sum(vals) / len(vals))
        print(f"entropy trend {text!r}: {[round(m, 4) for m in means]}")
        assert all(b > a + 0.005 for a, b in zip(means, means[1:])), \
            f"entropy trend not strictly increasing for {text!r}: {means}"
    model.load_state_dict(base)

    # split goldens
    splits = {}
    for n in (800, 1024, 2000):
        val, test = split_indices(n)
        splits[str(n)] = {"validation": val, "test": test}
    with open(os.path.join(GOLD, "split_goldens.json"), "w") as f:
        json.dump(splits, f)

    write_demo_datasets()
    print("fixtures written")


if __name__ == "__main__":
    main()
