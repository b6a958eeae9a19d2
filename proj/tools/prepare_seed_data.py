#!/usr/bin/env python3
"""Rebuild the seed text under data/ from public package registries.

Sources (all fetched from PyPI / npm / crates.io):
  tmtoolkit 0.12.0 (PyPI)        ParlSpeech V2 samples: eng, deu, spa training text;
                                 NewsArticles: English sentences for the simulator
  quran-json 3.1.2 (npm)         verse-aligned translations, CC-BY-4.0: rus, ind, ara
                                 training text; rus/eng/spa aligned exam pools
  lingua-*-language-model 1.2.0  Leipzig-corpora sentences (held out, never trained on)
  udhr 6.0.0 (npm)               Nigerian Fulfulde (fuv) declaration text
  Babel (PyPI)                   CLDR locale strings for ce/ff/ru/en/es/de/fr

Requires network access to the registries and the `babel` package.
"""
import csv
import html
import io
import json
import os
import random
import re
import sys
import tarfile
import urllib.parse
import urllib.request
import zipfile

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
CACHE = os.environ.get("SEED_CACHE", "/tmp/corpusforge-seed-cache")
TRAIN_CAP = 1_300_000  # bytes; every large language stays above 1 MiB

URLS = {
    "tmtoolkit.whl": "pypi:tmtoolkit-0.12.0-py3-none-any.whl",
    "quran.tgz": "https://registry.npmjs.org/quran-json/-/quran-json-3.1.2.tgz",
    "udhr.tgz": "https://registry.npmjs.org/udhr/-/udhr-6.0.0.tgz",
}
LINGUA = {"eng": "english", "deu": "german", "spa": "spanish", "rus": "russian",
          "ind": "indonesian", "ara": "arabic"}


def fetch(name, url):
    os.makedirs(CACHE, exist_ok=True)
    path = os.path.join(CACHE, name)
    if url.startswith("pypi:"):
        url = pypi_url(url[len("pypi:"):])
    if not os.path.exists(path):
        with urllib.request.urlopen(url) as r, open(path, "wb") as out:
            out.write(r.read())
    return path


def pypi_url(filename):
    project = filename.split("-")[0]
    with urllib.request.urlopen(f"https://pypi.org/simple/{project}/") as r:
        index = r.read().decode()
    m = re.search(r'href="([^"#]*/' + re.escape(filename) + r')', index)
    return urllib.parse.urljoin(f"https://pypi.org/simple/{project}/", m.group(1))


def write_lines(rel, lines):
    path = os.path.join(ROOT, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def clean(s):
    return re.sub(r"\s+", " ", s).strip()


def cap(lines, limit=TRAIN_CAP):
    out, size = [], 0
    for line in lines:
        if size >= limit:
            break
        out.append(line)
        size += len(line.encode()) + 1
    return out


def split_sentences(text):
    parts = re.split(r"(?<=[.!?])\s+(?=[A-ZÀ-ÖØ-ÞА-ЯЁ¿¡\"«])", text)
    return [clean(p) for p in parts if clean(p)]


def tmtoolkit_texts(member):
    whl = zipfile.ZipFile(fetch("tmtoolkit.whl", URLS["tmtoolkit.whl"]))
    inner = zipfile.ZipFile(io.BytesIO(whl.read(member)))
    csv.field_size_limit(10**9)
    data = inner.read(inner.namelist()[0]).decode("utf-8")
    return [clean(r["text"]) for r in csv.DictReader(io.StringIO(data)) if clean(r["text"])]


def quran():
    tf = tarfile.open(fetch("quran.tgz", URLS["quran.tgz"]))
    out = {}
    for lang, suffix in (("ara", ""), ("rus", "_ru"), ("eng", "_en"), ("spa", "_es"), ("ind", "_id")):
        d = json.load(tf.extractfile(f"package/dist/quran{suffix}.json"))
        key = "text" if lang == "ara" else "translation"
        out[lang] = [clean(v[key]) for c in d for v in c["verses"]]
    return out


def lingua_sentences(lang):
    crate = LINGUA[lang]
    url = f"https://static.crates.io/crates/lingua-{crate}-language-model/lingua-{crate}-language-model-1.2.0.crate"
    tf = tarfile.open(fetch(f"lingua-{crate}.crate", url))
    member = f"lingua-{crate}-language-model-1.2.0/testdata/sentences.txt"
    return [clean(l) for l in tf.extractfile(member).read().decode("utf-8").splitlines() if clean(l)]


def udhr_paragraphs(code):
    tf = tarfile.open(fetch("udhr.tgz", URLS["udhr.tgz"]))
    raw = tf.extractfile(f"package/declaration/{code}.html").read().decode("utf-8")
    paras = re.findall(r"<(?:p|li|h[1-4])[^>]*>(.*?)</(?:p|li|h[1-4])>", raw, re.S)
    return [clean(html.unescape(re.sub(r"<[^>]+>", " ", p))) for p in paras]


def cldr_strings(locale):
    import babel.localedata as ld
    out = {}

    def walk(x, path):
        if isinstance(x, str):
            if (any(c.isalpha() for c in x) and "{" not in x and "%" not in x
                    and not re.fullmatch(r"[\W\dGyMLdEeHhmsaQqUuwWkKzZvVxXOBc]+", x)):
                out[path] = clean(x)
        elif isinstance(x, (list, tuple)):
            for i, v in enumerate(x):
                walk(v, path + (i,))
        elif hasattr(x, "items"):
            for k, v in x.items():
                walk(v, path + (str(k),))

    walk(ld.load(locale), ())
    return out


def aligned(a, b):
    return [(a[k], b[k]) for k in sorted(a, key=str) if k in b and a[k] != b[k]]


def main():
    rng = random.Random(20231018)
    q = quran()

    # Training corpora, one document per line.
    train = {
        "eng": tmtoolkit_texts("tmtoolkit/data/en/parlspeech-v2-sample-houseofcommons.zip"),
        "deu": tmtoolkit_texts("tmtoolkit/data/de/parlspeech-v2-sample-bundestag.zip"),
        "spa": tmtoolkit_texts("tmtoolkit/data/es/parlspeech-v2-sample-congreso.zip"),
        "rus": q["rus"],
        "ind": q["ind"],
        "ara": q["ara"],
    }
    for lang, lines in train.items():
        lines = cap(lines)
        size = sum(len(l.encode()) + 1 for l in lines)
        assert size >= 1 << 20, (lang, size)
        write_lines(f"langid/train/{lang}.txt", lines)

    ce, ff = cldr_strings("ce"), cldr_strings("ff")
    ru, en, es = cldr_strings("ru"), cldr_strings("en"), cldr_strings("es")
    fr, de = cldr_strings("fr"), cldr_strings("de")
    che_lines = sorted(set(ce.values()) - set(ru.values()) - set(en.values()))
    write_lines("langid/train/che.txt", che_lines)
    fuv_paras = [p for p in udhr_paragraphs("fuv") + udhr_paragraphs("fuv2") if p]
    fuv_lines = fuv_paras + sorted(set(ff.values()) - set(en.values()) - set(fr.values()))
    write_lines("langid/train/fuv.txt", fuv_lines)

    for lang in LINGUA:
        write_lines(f"langid/heldout/{lang}.txt", lingua_sentences(lang))

    # Simulator sentence pools: English news (never used for training),
    # Russian verses, Spanish parliamentary sentences.
    news = tmtoolkit_texts("tmtoolkit/data/en/NewsArticles.zip")
    eng_sents = [s for doc in news for s in split_sentences(doc) if 40 <= len(s) <= 240]
    eng_sents = sorted(set(eng_sents))
    rng.shuffle(eng_sents)
    write_lines("sim/eng.txt", eng_sents[:16000])
    rus_sents = sorted({s for s in q["rus"] if 40 <= len(s) <= 240})
    write_lines("sim/rus.txt", rus_sents)
    spa_sents = sorted({s for doc in train["spa"] for s in split_sentences(doc) if 40 <= len(s) <= 240})
    write_lines("sim/spa.txt", spa_sents)
    deu_all = tmtoolkit_texts("tmtoolkit/data/de/parlspeech-v2-sample-bundestag.zip")
    deu_sents = sorted({s for doc in deu_all for s in split_sentences(doc) if 40 <= len(s) <= 240})
    write_lines("sim/deu.txt", deu_sents)

    # Exam pools.
    def pool(direction, pairs, glossary, other, n_pairs=40):
        pairs = [(s, t) for s, t in pairs if "\t" not in s + t]
        rng.shuffle(pairs)
        write_lines(f"exam/{direction}/correct.tsv", [f"{s}\t{t}" for s, t in pairs[:n_pairs]])
        gl = {}
        for s, t in glossary:
            if " " not in s and " " not in t and "\t" not in s + t:
                gl.setdefault(s.lower(), t.lower())
        write_lines(f"exam/{direction}/glossary.tsv", [f"{k}\t{v}" for k, v in sorted(gl.items())])
        write_lines(f"exam/{direction}/otherlang.txt", other[:20])

    def phrases(pairs):
        return [(s, t) for s, t in pairs if " " in s and " " in t]

    de_other = [s for s in split_sentences(" ".join(train["deu"][:50])) if 40 <= len(s) <= 200]
    fr_other = [s for s in fr.values() if " " in s][:20]
    ce_ru, ff_en = aligned(ce, ru), aligned(ff, en)
    pool("che-rus", phrases(ce_ru), ce_ru, eng_sents[-20:])
    pool("rus-che", phrases([(t, s) for s, t in ce_ru]), [(t, s) for s, t in ce_ru], eng_sents[-20:])
    pool("fuv-eng", phrases(ff_en), ff_en, fr_other)
    pool("eng-fuv", phrases([(t, s) for s, t in ff_en]), [(t, s) for s, t in ff_en], fr_other)
    ru_en = [(r, e) for r, e in zip(q["rus"], q["eng"]) if 30 <= len(r) <= 160]
    es_en = [(s, e) for s, e in zip(q["spa"], q["eng"]) if 30 <= len(s) <= 160]
    pool("rus-eng", ru_en, aligned(ru, en), de_other)
    pool("spa-eng", es_en, aligned(es, en), de_other)
    ru_other = [s for s in q["rus"] if 40 <= len(s) <= 200][:20]
    de_en = aligned(de, en)
    pool("deu-eng", phrases(de_en), de_en, ru_other)


if __name__ == "__main__":
    sys.exit(main())
