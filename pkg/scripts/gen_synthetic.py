#!/usr/bin/env python3
"""Generate the shipped 50-instance synthetic evaluation set.

Writes dataset.jsonl, style_dists.jsonl, tokens.jsonl, external_scores.jsonl,
parses.conllu, amr.penman, style_lexicon.txt and config.json under
data/synthetic/. Fully deterministic (fixed seed, content-hashed token
vectors); regenerating produces byte-identical files.

The three latent qualities (style, content, fluency) drive both the
constructed sentences and the human ratings, so metric-vs-human
correlations on this set are meaningfully non-zero.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

SEED = 20240917
DIM = 16
MASK = "⟨MASK⟩"

OUT = Path(__file__).resolve().parents[1] / "data" / "synthetic"

VOCAB = {
    "en": {
        "det": ["the", "this", "that", "my"],
        "noun": ["movie", "meal", "hotel", "staff", "story", "coffee", "room", "plot"],
        "verb": ["was", "seemed", "felt", "looked"],
        "adv": ["really", "quite", "honestly", "truly"],
        "pos": ["great", "lovely", "excellent", "wonderful"],
        "neg": ["awful", "terrible", "horrible", "dreadful"],
        "toxic": ["idiot", "moron", "trash", "stupid"],
        "clean": ["person", "fellow", "colleague", "friend"],
    },
    "hi": {
        "det": ["यह", "वह", "मेरा"],
        "noun": ["खाना", "कमरा", "सेवा", "कहानी", "होटल"],
        "verb": ["था", "लगा", "रहा"],
        "adv": ["बहुत", "काफ़ी", "सच में"],
        "pos": ["अच्छा", "शानदार", "बेहतरीन"],
        "neg": ["खराब", "बेकार", "घटिया"],
        "toxic": ["बेवकूफ", "गधा", "नालायक"],
        "clean": ["व्यक्ति", "इंसान", "साथी"],
    },
    "bn": {
        "det": ["এই", "সেই", "আমার"],
        "noun": ["খাবার", "ঘর", "গল্প", "পরিষেবা", "হোটেল"],
        "verb": ["ছিল", "লাগল"],
        "adv": ["খুব", "বেশ", "সত্যিই"],
        "pos": ["ভালো", "চমৎকার", "দারুণ"],
        "neg": ["খারাপ", "বাজে", "জঘন্য"],
        "toxic": ["বোকা", "গাধা", "অপদার্থ"],
        "clean": ["মানুষ", "বন্ধু", "সহকর্মী"],
    },
}

GROUPS = [
    ("sentiment_transfer", "en", 15),
    ("sentiment_transfer", "hi", 10),
    ("sentiment_transfer", "bn", 5),
    ("detoxification", "en", 12),
    ("detoxification", "hi", 8),
]

SYSTEMS = ["sys_alpha", "sys_beta", "sys_gamma", "sys_delta"]

CLASS_LABELS = ["negative_or_toxic", "positive_or_clean"]


def token_vector(token: str) -> np.ndarray:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "big")
    rng = np.random.default_rng(seed)
    return rng.normal(size=DIM) / np.sqrt(DIM)


def r(x, nd=6):
    if isinstance(x, (list, tuple)):
        return [r(v, nd) for v in x]
    return round(float(x), nd)


def build_sentence(rng, lang, style_word):
    v = VOCAB[lang]
    det = v["det"][rng.integers(len(v["det"]))]
    noun = v["noun"][rng.integers(len(v["noun"]))]
    verb = v["verb"][rng.integers(len(v["verb"]))]
    adv = v["adv"][rng.integers(len(v["adv"]))].split()[0]
    return [det, noun, verb, adv, style_word, "."]


def perturb(rng, tokens, lang, target_word, style_q, content_q, fluency_q):
    """Generated sentence: style success, content drift and disfluencies
    scale with the latent qualities."""
    v = VOCAB[lang]
    out = list(tokens)
    if rng.random() < style_q:
        out[4] = target_word
    if rng.random() > content_q:
        out[1] = v["noun"][rng.integers(len(v["noun"]))]
    if rng.random() > (content_q + 1) / 2:
        out[3] = v["adv"][rng.integers(len(v["adv"]))].split()[0]
    if rng.random() > fluency_q:
        out.insert(3, out[2])  # stutter
    if rng.random() > (fluency_q + 1) / 2 and len(out) > 4:
        i = int(rng.integers(1, len(out) - 2))
        out[i], out[i + 1] = out[i + 1], out[i]
    return out


def upos_of(token, lang, style_words):
    v = VOCAB[lang]
    if token == ".":
        return "PUNCT"
    if token in v["det"]:
        return "DET"
    if token in v["verb"]:
        return "VERB"
    if token in [a.split()[0] for a in v["adv"]]:
        return "ADV"
    if token in style_words:
        return "ADJ"
    return "NOUN"


def make_parse(tokens, lang, style_words):
    """Deterministic small dependency tree over the token list."""
    upos = [upos_of(t, lang, style_words) for t in tokens]
    n = len(tokens)
    root = upos.index("VERB") + 1 if "VERB" in upos else 1
    heads = [0] * n
    deprels = ["dep"] * n
    for i in range(n):
        idx = i + 1
        if idx == root:
            heads[i] = 0
            deprels[i] = "root"
        elif upos[i] == "DET":
            nxt = next((j + 1 for j in range(i + 1, n) if upos[j] == "NOUN"), root)
            heads[i] = nxt
            deprels[i] = "det"
        elif upos[i] == "NOUN":
            heads[i] = root
            deprels[i] = "nsubj" if idx < root else "obj"
        elif upos[i] == "ADV":
            nxt = next((j + 1 for j in range(i + 1, n) if upos[j] == "ADJ"), root)
            heads[i] = nxt
            deprels[i] = "advmod"
        elif upos[i] == "ADJ":
            heads[i] = root
            deprels[i] = "xcomp"
        elif upos[i] == "PUNCT":
            heads[i] = root
            deprels[i] = "punct"
        else:
            heads[i] = root
    lines = []
    for i, tok in enumerate(tokens):
        lemma = tok.lower().rstrip("s") if lang == "en" and upos[i] == "NOUN" else tok.lower()
        lines.append(
            "\t".join(
                [
                    str(i + 1), tok, lemma, upos[i], "_", "_",
                    str(heads[i]), deprels[i], "_", "_",
                ]
            )
        )
    return lines, heads, upos


def make_amr(tokens, lang, style_words, rng):
    """Small AMR-style expression; drops determiners and punctuation."""
    _, heads, upos = make_parse(tokens, lang, style_words)
    verb_idx = upos.index("VERB") if "VERB" in upos else 0
    parts = {"verb": None, "noun": None, "adj": None, "adv": None}
    for i, tok in enumerate(tokens):
        if upos[i] == "VERB" and parts["verb"] is None:
            parts["verb"] = tok.lower()
        elif upos[i] == "NOUN" and parts["noun"] is None:
            parts["noun"] = tok.lower()
        elif upos[i] == "ADJ" and parts["adj"] is None:
            parts["adj"] = tok.lower()
        elif upos[i] == "ADV" and parts["adv"] is None:
            parts["adv"] = tok.lower()
    concept = parts["verb"] or parts["noun"] or tokens[0].lower()
    expr = f"(v0 / {concept}"
    if parts["noun"]:
        expr += f" :ARG0 (v1 / {parts['noun']})"
    if parts["adj"]:
        expr += f" :ARG1 (v2 / {parts['adj']}"
        if parts["adv"]:
            expr += f" :degree (v3 / {parts['adv']})"
        if rng.random() < 0.25 and parts["noun"]:
            expr += " :topic v1"  # re-entrant reference
        if rng.random() < 0.2:
            expr += " :polarity -"
        expr += ")"
    expr += ")"
    return expr


def main() -> None:
    rng = np.random.default_rng(SEED)
    OUT.mkdir(parents=True, exist_ok=True)

    dataset_lines = [json.dumps({"rating_scale": [1.0, 5.0]})]
    dist_lines = []
    token_lines = []
    ext_lines = []
    conllu_blocks = []
    amr_blocks = []
    lexicon = set()
    for lang in VOCAB:
        for key in ("pos", "neg", "toxic", "clean"):
            lexicon.update(w.lower() for w in VOCAB[lang][key])

    counter = 0
    for task, lang, count in GROUPS:
        v = VOCAB[lang]
        for k in range(count):
            counter += 1
            iid = f"{task.split('_')[0][:4]}-{lang}-{counter:04d}"
            if task == "sentiment_transfer":
                direction = "pos→neg" if k % 2 == 0 else "neg→pos"
                src_kind, tgt_kind = (
                    ("pos", "neg") if direction == "pos→neg" else ("neg", "pos")
                )
                target_label = 0 if direction == "pos→neg" else 1
            else:
                direction = "toxic→clean"
                src_kind, tgt_kind = "toxic", "clean"
                target_label = 1
            style_words = set(v["pos"]) | set(v["neg"]) | set(v["toxic"]) | set(v["clean"])

            style_q = float(rng.beta(2.2, 1.6))
            content_q = float(rng.beta(2.5, 1.4))
            fluency_q = float(rng.beta(3.0, 1.3))

            src_word = v[src_kind][rng.integers(len(v[src_kind]))]
            tgt_word = v[tgt_kind][rng.integers(len(v[tgt_kind]))]
            source = build_sentence(rng, lang, src_word)
            generated = perturb(
                rng, source, lang, tgt_word, style_q, content_q, fluency_q
            )
            has_ref = rng.random() < 0.72
            reference = None
            if has_ref:
                reference = list(source)
                reference[4] = v[tgt_kind][rng.integers(len(v[tgt_kind]))]
                if rng.random() < 0.3:
                    reference[3] = v["adv"][rng.integers(len(v["adv"]))].split()[0]

            def rating(q):
                return float(np.clip(round(1 + 4 * q + rng.normal(0, 0.35), 2), 1, 5))

            human = {
                "style_accuracy": rating(style_q),
                "content_preservation": rating(content_q),
                "fluency": rating(fluency_q),
                "overall": rating((style_q + content_q + fluency_q) / 3),
            }
            rec = {
                "instance_id": iid,
                "language": lang,
                "task": task,
                "direction": direction,
                "system_id": SYSTEMS[counter % len(SYSTEMS)],
                "source_text": " ".join(source),
                "generated_text": " ".join(generated),
                "target_style_label": target_label,
                "human": human,
            }
            if reference:
                rec["reference_text"] = " ".join(reference)
            dataset_lines.append(json.dumps(rec, ensure_ascii=False))

            # style distributions: sources sit on the source style; the
            # generated one moves toward the target with style quality
            src_target_mass = float(np.clip(0.08 + 0.1 * rng.random(), 0, 1))
            gen_target_mass = float(
                np.clip(style_q * 0.9 + rng.normal(0, 0.06), 0.01, 0.99)
            )
            slots = {"source": src_target_mass, "generated": gen_target_mass}
            if reference:
                slots["reference"] = float(np.clip(0.85 + 0.1 * rng.random(), 0, 0.99))
            for slot, mass in slots.items():
                p_target = r(mass)
                probs = [0.0, 0.0]
                probs[target_label] = p_target
                probs[1 - target_label] = r(1 - p_target)
                dist_lines.append(
                    json.dumps(
                        {
                            "instance_id": iid,
                            "slot": slot,
                            "class_labels": CLASS_LABELS,
                            "probs": probs,
                        },
                        ensure_ascii=False,
                    )
                )

            # token annotations (plain + masked variants)
            sent_slots = {"source": source, "generated": generated}
            if reference:
                sent_slots["reference"] = reference
            for slot, toks in list(sent_slots.items()):
                masked = [MASK if t.lower() in lexicon else t for t in toks]
                sent_slots[slot + "_masked"] = masked
            for slot, toks in sent_slots.items():
                vectors = np.stack([token_vector(t) for t in toks])
                token_lines.append(
                    json.dumps(
                        {
                            "instance_id": iid,
                            "slot": slot,
                            "tokens": toks,
                            "embeddings": r(vectors.tolist(), 5),
                            "sentence_embedding": r(vectors.mean(axis=0).tolist(), 5),
                            "idf": None,  # filled in a second pass
                            "mask_flags": [t.lower() in lexicon for t in toks],
                        },
                        ensure_ascii=False,
                    )
                )

            # externally computed neural scores
            ext = {
                "bleurt": float(np.clip(content_q + rng.normal(0, 0.08), 0, 1)),
                "s3bert": float(np.clip(content_q * 0.8 + 0.1 + rng.normal(0, 0.1), 0, 1)),
                "ppl_gpt2": float(np.exp(2.6 - 1.6 * fluency_q + rng.normal(0, 0.25))),
                "ppl_mgpt": float(np.exp(2.9 - 1.8 * fluency_q + rng.normal(0, 0.25))),
                "ppl_gpt2_ft": float(np.exp(2.2 - 1.9 * fluency_q + rng.normal(0, 0.15))),
                "ppl_mgpt_ft": float(np.exp(2.4 - 2.0 * fluency_q + rng.normal(0, 0.15))),
            }
            if counter % 23 == 0:
                ext.pop("bleurt")  # exercise null handling downstream
            for metric, value in ext.items():
                ext_lines.append(
                    json.dumps(
                        {"instance_id": iid, "metric_id": metric, "value": r(value)}
                    )
                )

            # parses + AMR for the three plain slots
            for slot in ("source", "generated", "reference"):
                toks = sent_slots.get(slot)
                if toks is None:
                    continue
                lines, _, _ = make_parse(toks, lang, style_words)
                conllu_blocks.append(
                    f"# instance_id = {iid}\n# slot = {slot}\n" + "\n".join(lines)
                )
                amr_blocks.append(
                    f"# instance_id = {iid}\n# slot = {slot}\n"
                    + make_amr(toks, lang, style_words, rng)
                )

    # corpus IDF over all plain-slot sentences, patched into token lines
    parsed = [json.loads(line) for line in token_lines]
    doc_tokens = [set(rec["tokens"]) for rec in parsed]
    n_docs = len(doc_tokens)
    df: dict[str, int] = {}
    for toks in doc_tokens:
        for tok in toks:
            df[tok] = df.get(tok, 0) + 1
    token_lines = []
    for rec in parsed:
        rec["idf"] = [r(np.log(n_docs / df[t]), 5) for t in rec["tokens"]]
        token_lines.append(json.dumps(rec, ensure_ascii=False))

    (OUT / "dataset.jsonl").write_text("\n".join(dataset_lines) + "\n", encoding="utf-8")
    (OUT / "style_dists.jsonl").write_text("\n".join(dist_lines) + "\n", encoding="utf-8")
    (OUT / "tokens.jsonl").write_text("\n".join(token_lines) + "\n", encoding="utf-8")
    (OUT / "external_scores.jsonl").write_text("\n".join(ext_lines) + "\n", encoding="utf-8")
    (OUT / "parses.conllu").write_text("\n\n".join(conllu_blocks) + "\n", encoding="utf-8")
    (OUT / "amr.penman").write_text("\n\n".join(amr_blocks) + "\n", encoding="utf-8")
    (OUT / "style_lexicon.txt").write_text(
        "\n".join(sorted(lexicon)) + "\n", encoding="utf-8"
    )

    config = {
        "dataset": "dataset.jsonl",
        "style_dists": "style_dists.jsonl",
        "tokens": "tokens.jsonl",
        "external_scores": "external_scores.jsonl",
        "parses": "parses.conllu",
        "amrs": "amr.penman",
        "lexicon": "style_lexicon.txt",
        "mode": "reference_free",
        "seed": 7,
        "workers": 1,
        "out_dir": "out",
        "metrics": [
            "sentence_accuracy", "classifier_confidence", "emd", "kl", "js",
            "style_cosine", "bleu", "masked_bleu", "rouge2", "rouge_l",
            "meteor", "ter", "pinc", "cosine", "masked_cosine", "wmd",
            "bertscore", "bertscore_idf", "ted", "smatch_dep", "smatch_amr",
            "bleurt", "s3bert", "ppl_gpt2", "ppl_mgpt", "ppl_gpt2_ft",
            "ppl_mgpt_ft",
        ],
    }
    (OUT / "config.json").write_text(
        json.dumps(config, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote synthetic set ({counter} instances) to {OUT}")


if __name__ == "__main__":
    main()
