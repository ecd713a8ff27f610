#!/usr/bin/env python3
"""Export a masked-LM candidate cache for the `real` adapter.

For every utterance in the given datasets, each word is masked in turn and
the top-k whole-word fillers are stored under the same key the C++ side
computes (FNV-1a 64 of the space-joined tokens with the masked word replaced
by "[MASK]", as 16 hex digits, then ":" and the position). The input
embedding table is written alongside so embed_token() needs no model.

    export_lm_cache.py --model bert-base-uncased --k 50 --out cache/ data/*.jsonl
    SWRM_LM_CACHE=cache/ swrm train --adapter real ...
"""

import argparse
import json
import pathlib
import string
import sys

FNV_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
SPECIAL = {"[CLS]", "[SEP]", "[PAD]", "[MASK]", "[UNK]",
           "<s>", "</s>", "<pad>", "<unk>", "<mask>"}


def fnv1a64(data: bytes) -> int:
    h = FNV_BASIS
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def context_key(tokens, position):
    joined = " ".join("[MASK]" if i == position else t for i, t in enumerate(tokens))
    return "%016x:%d" % (fnv1a64(joined.encode("utf-8")), position)


def skipped(token):
    return token in SPECIAL or all(c in string.punctuation for c in token)


def whole_word_ids(tokenizer):
    ids = []
    for tok, idx in tokenizer.get_vocab().items():
        if tok.startswith("##") or tok in tokenizer.all_special_tokens:
            continue
        if not any(c.isalpha() for c in tok):
            continue
        ids.append(idx)
    return sorted(ids)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("datasets", nargs="+", type=pathlib.Path)
    ap.add_argument("--model", default="bert-base-uncased")
    ap.add_argument("--k", type=int, default=50)
    ap.add_argument("--out", type=pathlib.Path, required=True)
    args = ap.parse_args(argv)

    import torch
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    tok = AutoTokenizer.from_pretrained(args.model)
    model = AutoModelForMaskedLM.from_pretrained(args.model).eval()
    args.out.mkdir(parents=True, exist_ok=True)

    vocab = [None] * len(tok.get_vocab())
    for t, i in tok.get_vocab().items():
        vocab[i] = t
    emb = model.get_input_embeddings().weight.detach().cpu().numpy().astype("<f4")
    (args.out / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    emb.tofile(args.out / "embeddings.f32")
    meta = {"dim": int(emb.shape[1]), "max_k": args.k, "mask_token": tok.mask_token,
            "unk_token": tok.unk_token, "model": args.model}
    (args.out / "meta.json").write_text(json.dumps(meta) + "\n")

    allowed = torch.tensor(whole_word_ids(tok))
    seen = set()
    with open(args.out / "candidates.jsonl", "w", encoding="utf-8") as out:
        for path in args.datasets:
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                tokens = json.loads(line)["tokens"]
                for pos, word in enumerate(tokens):
                    if skipped(word):
                        continue
                    key = context_key(tokens, pos)
                    if key in seen:
                        continue
                    seen.add(key)
                    words = list(tokens)
                    words[pos] = tok.mask_token
                    enc = tok(" ".join(words), return_tensors="pt", truncation=True)
                    mask_at = (enc["input_ids"][0] == tok.mask_token_id).nonzero()
                    if len(mask_at) == 0:
                        continue
                    with torch.no_grad():
                        logits = model(**enc).logits[0, mask_at[0, 0]]
                    probs = torch.softmax(logits, dim=-1)[allowed]
                    top = torch.topk(probs, min(args.k, len(allowed)))
                    cands = [[vocab[int(allowed[i])], max(float(p), 1e-30)]
                             for p, i in zip(top.values.tolist(), top.indices.tolist())]
                    out.write(json.dumps({"key": key, "candidates": cands}) + "\n")
    print("wrote %d contexts to %s" % (len(seen), args.out), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
