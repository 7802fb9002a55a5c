"""Personalized artwork selection: synthetic corpus, prompts, extraction, metrics and policy training."""

from ._artrec import (
    ArtrecError,
    BackendError,
    ConfigError,
    Example,
    ExampleSet,
    ExtractionResult,
    ParseError,
    PredictionRow,
    TrainingError,
    ValidationError,
    accuracy,
    bayes_optimal_accuracy,
    cli,
    distill_reasoning,
    dpo_loss,
    evaluate,
    export_jsonl,
    extract_prediction,
    feature_dim,
    generate_corpus,
    heuristic_weights,
    ips,
    load_examples,
    ngram_score,
    normalize,
    option_features,
    oracle_choice,
    parse_prompt,
    random_baseline,
    render_prompt,
    run_inference,
    score_policy,
    sft_loss,
    split,
    train,
)

__version__ = "0.1.0"
