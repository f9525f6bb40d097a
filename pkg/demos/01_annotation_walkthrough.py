"""
From standoff files to model inputs
===================================

Read the bundled ten-essay sample, print its tag distribution, look at how
each task turns an essay into token ids and targets, and write one essay
out as highlighted HTML.
"""

import pathlib
import tempfile

from argmine.codecs import encode_aae_relation, encode_document, render_example
from argmine.corpus import corpus_stats, format_stats, read_brat_dir
from argmine.correspondence import collapse_to_words
from argmine.render import export_html
from argmine.schemes import AAE_COMPONENT
from argmine.tokenizer import train_vocab

data = pathlib.Path(__file__).resolve().parents[1] / "src" / "argmine" / "data" / "aae_fixture"
docs = read_brat_dir(data)
print(f"{len(docs)} essays")

# distribution per split, in the same layout the ingest command prints
for split in ("train", "test"):
    part = [d for d in docs if d.meta["split"] == split]
    print(f"\n[{split}]")
    print(format_stats(corpus_stats(part), AAE_COMPONENT))

# a small subword vocabulary trained on the training texts
vocab = train_vocab([d.text for d in docs if d.meta["split"] == "train"], 300)
essay = docs[0]

# word-level BIO targets sit on the first piece of every word
bio = encode_document(essay, vocab, "aae_bio")[0]
print("\nBIO encoding (first 60 tokens)")
print("\n".join(line[:200] for line in render_example(bio.truncated(60), vocab).splitlines()))

# a relation example marks both components and carries one label at <cls>
spans = [s.span_id for s in essay.spans]
pair = next((a, b) for a in spans for b in spans if a != b and
            essay.paragraph_of_char(essay.span(a).start) == essay.paragraph_of_char(essay.span(b).start))
rel = encode_aae_relation(essay, pair[0], pair[1], vocab)
print(f"\nrelation {pair}: {len(rel.input_ids)} tokens, label {rel.scheme.labels[rel.labels()[0]]}")
print(" ".join(vocab.piece(i) for i in rel.input_ids))

# highlighted HTML, one color per component type
out = pathlib.Path(tempfile.mkdtemp()) / f"{essay.doc_id}.html"
out.write_text(export_html(essay, collapse_to_words(essay, AAE_COMPONENT), AAE_COMPONENT))
print(f"\nwrote {out}")
