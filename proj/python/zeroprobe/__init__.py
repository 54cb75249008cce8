"""Surprisal minimal-pair analysis: corpus, scoring, mixed models, reports."""

from ._core import (
    ZeroprobeError,
    bh_adjust,
    builtin_corpus_csv,
    fit_lmm,
    likelihood_ratio_test,
    load_stimuli,
    main_clause_surprisal,
    render,
    run,
    satterthwaite_anova,
    toy_scores,
)

__all__ = [
    "ZeroprobeError",
    "bh_adjust",
    "builtin_corpus_csv",
    "fit_lmm",
    "likelihood_ratio_test",
    "load_stimuli",
    "main_clause_surprisal",
    "render",
    "run",
    "satterthwaite_anova",
    "toy_scores",
]
