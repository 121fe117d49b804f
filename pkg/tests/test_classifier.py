import random

import pytest

from macrostate import ConfigurationError, Corpus, EstimatorConfig, SymbolString, classify, evaluate_loocv
from macrostate.classifier import class_distance
from macrostate.fixtures import random_bytes

LZ = EstimatorConfig.default("identity")


def blob(seed, n=300):
    return SymbolString.from_bytes(random_bytes(n, seed))


@pytest.fixture
def twins():
    classes = {}
    for label, seeds in (("a", (1, 2, 3)), ("b", (4, 5, 6))):
        ex = []
        for s in seeds:
            ex.append((f"{label}/{s}-1", blob(s)))
            ex.append((f"{label}/{s}-2", blob(s)))
        classes[label] = ex
    return Corpus(classes)


def test_twins_loocv_perfect(twins):
    rep = evaluate_loocv(twins, LZ, "max")
    assert rep["accuracy"] == 1.0
    assert rep["n"] == 12


def test_confusion_rows(twins):
    rep = evaluate_loocv(twins, LZ)
    for label, row in rep["confusion"].items():
        assert sum(row.values()) == len(twins.classes[label])


def test_loocv_parallel_same(twins):
    assert evaluate_loocv(twins, LZ, workers=2) == evaluate_loocv(twins, LZ)


def test_single_exemplar_rejected():
    c = Corpus({"a": [("a/1", blob(1)), ("a/2", blob(2))], "lonely": [("lonely/1", blob(3))]})
    with pytest.raises(ConfigurationError, match="lonely"):
        evaluate_loocv(c, LZ)


def test_corpus_validation():
    with pytest.raises(ConfigurationError):
        Corpus({})
    with pytest.raises(ConfigurationError):
        Corpus({"a": []})
    with pytest.raises(ConfigurationError):
        Corpus({"a": [("x", blob(1))], "b": [("x", blob(2))]})


def test_classify_nearest(twins):
    res = classify(blob(5), twins, LZ)
    assert res.winner == "b" and not res.tie
    assert res.witness.startswith("b/5")
    assert set(res.distances) == {"a", "b"}


def test_tie_goes_to_smallest_label():
    x = blob(7)
    c = Corpus({"zeta": [("zeta/1", x)], "alpha": [("alpha/1", x)]})
    res = classify(x, c, LZ)
    assert res.winner == "alpha" and res.tie


def test_class_distance_tie_smallest_id():
    x = blob(7)
    c = Corpus({"k": [("k/b", x), ("k/a", x)]})
    assert class_distance(x, "k", c, LZ)[1] == "k/a"


def test_permutation_invariance(twins):
    r = random.Random(0)
    x = blob(2, 280)
    base = classify(x, twins, LZ).to_dict()
    for _ in range(3):
        labels = list(twins.classes)
        r.shuffle(labels)
        shuffled = {}
        for label in labels:
            ex = list(twins.classes[label])
            r.shuffle(ex)
            shuffled[label] = ex
        assert classify(x, Corpus(shuffled), LZ).to_dict() == base
