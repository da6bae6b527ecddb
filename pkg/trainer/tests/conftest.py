import json
import random
import string

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast


def build_tiny_encoder(directory, extra_words=(), hidden_size=64, layers=2, heads=4, seed=0):
    """A from-scratch BERT small enough to train in seconds.

    The wordpiece vocabulary holds single characters (with ## continuations)
    so any ascii text tokenizes, plus whole-word entries for the test corpus.
    """
    directory.mkdir(parents=True, exist_ok=True)
    chars = string.ascii_lowercase + string.digits + "_?"
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list(chars)
    vocab += [f"##{c}" for c in chars]
    vocab += [w for w in dict.fromkeys(extra_words) if w not in vocab]

    wordpiece = Tokenizer(
        models.WordPiece({t: i for i, t in enumerate(vocab)}, unk_token="[UNK]",
                         max_input_chars_per_word=64)
    )
    wordpiece.normalizer = normalizers.BertNormalizer(lowercase=True)
    wordpiece.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    wordpiece.post_processor = processors.BertProcessing(
        sep=("[SEP]", vocab.index("[SEP]")), cls=("[CLS]", vocab.index("[CLS]"))
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=wordpiece,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=192,
    )
    model = BertModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


TOY_WORDS = ["located", "country", "zone", "capital", "border", "river", "mayor", "area"]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("tiny-encoder")
    corpus = TOY_WORDS + ["find", "the", "of"] + [f"place{i}" for i in range(32)]
    return str(build_tiny_encoder(directory, extra_words=corpus))


@pytest.fixture(scope="session")
def toy_train_file(tmp_path_factory):
    """32 samples whose positives appear verbatim in their queries."""
    rng = random.Random(4)
    path = tmp_path_factory.mktemp("toy") / "train.jsonl"
    with path.open("w") as fh:
        for i in range(32):
            positive = TOY_WORDS[i % len(TOY_WORDS)]
            negatives = rng.sample([w for w in TOY_WORDS if w != positive], 3)
            fh.write(json.dumps({
                "query": f"find the {positive} of place{i} [SEP]",
                "positive": positive,
                "negatives": negatives,
            }) + "\n")
    return str(path)
