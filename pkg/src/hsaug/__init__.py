"""Hidden-space data augmentation for imbalanced vector classification."""

from .baselines import (
    BASELINE_METHODS,
    BaselineConfig,
    augment_with_baseline,
    gaussian_noise,
    ge3,
    linear_delta,
    mixup_h,
    nearest_same_class,
    smote,
    upsample,
    within_extrapolate,
)
from .classifier import (
    MlpConfig,
    MlpModel,
    evaluate,
    load_model,
    predict,
    predict_proba,
    save_model,
    train,
)
from .errors import (
    BenchmarkCellError,
    DataError,
    DegenerateVarianceError,
    DimError,
    DivergenceError,
    EmptyClassError,
    EmptyTestError,
    FormatError,
    IoError,
    PoolError,
    ToolkitError,
    VocabError,
)
from .geometry import (
    ClassGeometry,
    RankPolicy,
    center,
    eigenvalues,
    explained_variance,
    explained_variance_ratios,
    fit_all_geometries,
    fit_class_geometry,
    fixed_rank,
    project,
    residual,
)
from .harness import (
    BenchRow,
    MethodSpec,
    ScenarioSpec,
    SummaryRow,
    SynthSpec,
    export_2d,
    load_config,
    make_scenario,
    run_benchmark,
    summarize,
    synth_dataset,
    write_projection_csv,
    write_rows_csv,
    write_summary_csv,
)
from .reprint import (
    LABEL_STRATEGIES,
    AugmentedExample,
    ReprintConfig,
    augment_dataset,
    augment_examples,
    extrapolate,
    pair_rng,
    refine_label,
    sample_candidate,
)
from .store import (
    ClassVocabulary,
    LabeledEmbeddingSet,
    SoftLabeledSet,
    merge_soft,
    read_any_binary,
    read_embeddings,
    read_hard_binary,
    read_hard_jsonl,
    read_soft_binary,
    write_embeddings,
    write_hard_binary,
    write_hard_jsonl,
    write_soft_binary,
)

__version__ = "0.1.0"
