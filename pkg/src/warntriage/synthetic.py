"""Synthetic labeled-corpus generator with planted token-level signal.

Real mined corpora are large and slow to rebuild, so experiments run on a
generated stand-in whose difficulty is controlled here. The signal design:

* every class owns a small vocabulary (below); a warning's identifiers,
  procedure, and file path are assembled from its class's words plus shared
  neutral words, so the text channel carries class evidence;
* the stored code-context lines call functions named after the class's
  vocabulary, so the code channel carries the same evidence independently;
* each vocabulary draw is corrupted with some probability (a draw from the
  wrong pool instead), which keeps the task learnable but not trivial.

The corruption rates differ on purpose: the actionable/false axis is clean
(`coarse_confusion`) while the VTB/LTB/UTB axis is noisy (`fine_confusion`),
mirroring the coarse-then-fine structure the two-stage model expects.
"""

from __future__ import annotations

import numpy as np

from warntriage.core import Warning, WarningType, WeakLabel, WeakLabelClass
from warntriage.weaklabel import LabeledCorpus, LabeledWarning

NEUTRAL_WORDS = (
    "frame", "packet", "buffer", "record", "stream", "entry", "chunk",
    "field", "table", "node", "batch", "queue", "slot", "page",
)

FALSE_WORDS = (
    "layout", "style", "theme", "widget", "render", "padding", "margin",
    "cache", "tooltip", "banner", "palette", "icon", "grid", "panel",
    "menu", "toolbar", "spacing", "canvas", "cursor", "legend",
)

# shared by all actionable classes: the coarse actionable-vs-false signal
FAULT_WORDS = (
    "corrupt", "overflow", "dangling", "unchecked", "stale", "truncated",
    "clobbered", "orphaned", "races", "leaky", "wild", "tainted",
)

CLASS_WORDS = {
    WeakLabelClass.VTB: ("segfault", "nullread", "smashed", "overrun", "useafter", "doublefree"),
    WeakLabelClass.LTB: ("misuse", "offbyone", "racy", "staleref", "wrapped", "shadowed"),
    WeakLabelClass.UTB: ("cosmetic", "refactor", "cleanup", "nit", "benign", "harmless"),
    WeakLabelClass.FALSE_WARNING: FALSE_WORDS,
}

# (cm, cc) pairs whose aggregate lands in each class
SCORE_PAIRS = {
    WeakLabelClass.VTB: ((3, 3), (3, 1), (2, 3), (1, 3)),
    WeakLabelClass.LTB: ((2, 0), (3, 0), (2, 1), (1, 1), (0, 3)),
    WeakLabelClass.UTB: ((0, 0), (1, 0), (0, 1)),
}

_QUALIFIER_TEMPLATES = {
    WarningType.UNINITIALIZED_VARIABLE: "The value read from `{var}` was never initialized.",
    WarningType.NULL_DEREFERENCE: (
        "`{var}` last assigned on line {line_a} could be null and is dereferenced at line {line}"
    ),
    WarningType.RESOURCE_LEAK: (
        "Resource acquired to `{var}` by call to `{fn}` at line {line_a} "
        "is not released after line {line}"
    ),
    WarningType.DEAD_STORE: "The value written to `{var}` is never used.",
}

DEFAULT_COUNTS = {
    WeakLabelClass.VTB: 30,
    WeakLabelClass.LTB: 40,
    WeakLabelClass.UTB: 130,
    WeakLabelClass.FALSE_WARNING: 2000,
}


def _draw(rng: np.random.Generator, words: tuple[str, ...]) -> str:
    return words[int(rng.integers(0, len(words)))]


def _signal_word(
    rng: np.random.Generator, cls: WeakLabelClass, confusion: float
) -> str:
    pool_cls = cls
    if rng.random() < confusion:
        others = [c for c in CLASS_WORDS if c is not cls]
        pool_cls = others[int(rng.integers(0, len(others)))]
    return _draw(rng, CLASS_WORDS[pool_cls])


def _fault_or_false_word(
    rng: np.random.Generator, cls: WeakLabelClass, confusion: float
) -> str:
    actionable = cls is not WeakLabelClass.FALSE_WARNING
    if rng.random() < confusion:
        actionable = not actionable
    return _draw(rng, FAULT_WORDS if actionable else FALSE_WORDS)


def generate_warning(
    rng: np.random.Generator,
    index: int,
    cls: WeakLabelClass,
    fine_confusion: float,
    coarse_confusion: float,
) -> LabeledWarning:
    wtype = list(WarningType)[int(rng.integers(0, 4))]
    fine = _signal_word(rng, cls, fine_confusion)
    fine2 = _signal_word(rng, cls, fine_confusion)
    coarse = _fault_or_false_word(rng, cls, coarse_confusion)
    coarse2 = _fault_or_false_word(rng, cls, coarse_confusion)
    neutral = _draw(rng, NEUTRAL_WORDS)
    neutral2 = _draw(rng, NEUTRAL_WORDS)

    var = f"{coarse}_{fine}_{neutral}"
    fn = f"acquire_{neutral2}"
    line = int(rng.integers(4, 80))
    qualifier = _QUALIFIER_TEMPLATES[wtype].format(
        var=var, fn=fn, line=line, line_a=max(1, line - 2)
    )
    warning = Warning(
        id=f"syn-{index:05d}",
        warning_type=wtype,
        qualifier=qualifier,
        file=f"src/{neutral}_{fine2}.c",
        line=line,
        procedure=f"{coarse2}_{neutral2}",
    )

    code_context = (
        f"int {var} = {_fault_or_false_word(rng, cls, coarse_confusion)}_impl({neutral2});",
        f"if ({_signal_word(rng, cls, fine_confusion)}_check({var})) {{",
        f"    return {_signal_word(rng, cls, fine_confusion)}_{neutral}({var});",
    )

    if cls is WeakLabelClass.FALSE_WARNING:
        return LabeledWarning(
            warning=warning, status="false_warning", code_context=code_context
        )
    pairs = SCORE_PAIRS[cls]
    cm, cc = pairs[int(rng.integers(0, len(pairs)))]
    return LabeledWarning(
        warning=warning,
        status="actionable",
        label=WeakLabel.from_scores(cm, cc),
        code_context=code_context,
    )


def generate_labeled_corpus(
    counts: dict[WeakLabelClass, int] | None = None,
    seed: int = 0,
    fine_confusion: float = 0.30,
    coarse_confusion: float = 0.08,
) -> LabeledCorpus:
    """Class-count-exact corpus, shuffled, deterministic given the seed."""
    counts = DEFAULT_COUNTS if counts is None else counts
    rng = np.random.default_rng([seed, 0x5EED])
    rows = []
    index = 0
    for cls, n in counts.items():
        for _ in range(n):
            rows.append(generate_warning(rng, index, cls, fine_confusion, coarse_confusion))
            index += 1
    order = rng.permutation(len(rows))
    return LabeledCorpus(rows=[rows[i] for i in order])
