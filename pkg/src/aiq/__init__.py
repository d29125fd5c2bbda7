"""aiq: test battery administration, weighted IQ scoring, and intelligence
grading for AI systems and human baselines."""

from .adapters import (
    AdapterConfig,
    AdapterKind,
    HealthReport,
    ResponseOutcome,
    ResponseRecord,
    administer_item,
    probe_subject,
)
from .administration import (
    BatteryRef,
    Session,
    SessionStore,
    SessionStatus,
    Subject,
    SubjectCategory,
    abort_session,
    load_session,
    record_manual_score,
    run_session,
    save_session,
    start_session,
)
from .battery import (
    Ability,
    Battery,
    ExactMatch,
    HumanRubric,
    KeywordRubric,
    Modality,
    NumericAnswer,
    Prompt,
    Subtest,
    TestItem,
    Violation,
    WeightVector,
    load_battery,
    load_reference_battery,
    save_battery,
    validate_battery,
)
from .grading import (
    CapabilityProfile,
    GradeResult,
    StorageObservation,
    StorageTrend,
    classify_grade,
    load_profile,
    storage_trend,
)
from .reporting import (
    RankRow,
    RankTable,
    TrendAssessment,
    TrendScenario,
    export_csv,
    rank_report,
    trend_report,
)
from .scoring import (
    AbilityScores,
    IQResult,
    ItemScore,
    PendingHumanGrade,
    ScoreMethod,
    ability_scores,
    compute_iq,
    format_q,
    score_item,
    session_iq,
)

__version__ = "0.1.0"

__all__ = [
    "Ability",
    "AbilityScores",
    "AdapterConfig",
    "AdapterKind",
    "Battery",
    "BatteryRef",
    "CapabilityProfile",
    "ExactMatch",
    "GradeResult",
    "HealthReport",
    "HumanRubric",
    "IQResult",
    "ItemScore",
    "KeywordRubric",
    "Modality",
    "NumericAnswer",
    "PendingHumanGrade",
    "Prompt",
    "RankRow",
    "RankTable",
    "ResponseOutcome",
    "ResponseRecord",
    "ScoreMethod",
    "Session",
    "SessionStatus",
    "SessionStore",
    "StorageObservation",
    "StorageTrend",
    "Subject",
    "SubjectCategory",
    "Subtest",
    "TestItem",
    "TrendAssessment",
    "TrendScenario",
    "Violation",
    "WeightVector",
    "abort_session",
    "ability_scores",
    "administer_item",
    "classify_grade",
    "compute_iq",
    "export_csv",
    "format_q",
    "load_battery",
    "load_profile",
    "load_reference_battery",
    "load_session",
    "probe_subject",
    "rank_report",
    "record_manual_score",
    "run_session",
    "save_battery",
    "save_session",
    "score_item",
    "session_iq",
    "start_session",
    "storage_trend",
    "trend_report",
    "validate_battery",
]
