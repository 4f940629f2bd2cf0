"""Streaming hierarchical activity recognition over 9-channel IMU streams.

Frames are windowed into 36-dim statistical feature vectors; a diagonal
Gaussian mixture scores each window's density for novelty detection while a
random forest names its unit pattern; vote-smoothed pattern sequences are
reduced to bag-of-words histograms that a second forest maps to activities.
"""

from .activity import (
    ActivityEvent,
    BowHistogram,
    TimelineEntry,
    bow,
    classify_activity,
    record_timeline,
    run_activity_pipeline,
    write_timeline_csv,
)
from .errors import (
    DataError,
    HarstreamError,
    SnapshotCompatibilityError,
    SnapshotFormatError,
    StateError,
    TrainingError,
)
from .features import (
    FeatureVector,
    Window,
    WindowConfig,
    extract_features,
    mean_crossings,
    project_density,
    windows,
)
from .forest import ForestConfig, LabeledSet, RandomForest, cross_validate, fit_forest, fit_tree
from .gmm import EmConfig, GaussianComponent, GmmModel, add_component, em_fit, kmeans
from .ingest import (
    ImuFrame,
    PatternProfile,
    live_frames,
    parse_csv_record,
    replay,
    synth_stream,
    write_csv,
)
from .novelty import (
    NoveltyConfig,
    NoveltyEvent,
    NoveltyState,
    calibrate_thresholds,
    cancel_collection,
    collect_step,
    resolve_candidate,
    step,
)
from .recognizer import (
    UnitPatternEvent,
    VoteBuffer,
    VoteConfig,
    classify_window,
    majority_vote,
    run_unit_pipeline,
)
from .registry import (
    ModelSnapshot,
    PatternRegistry,
    TrainerConfig,
    load_snapshot,
    save_snapshot,
)
from .service import SessionEngine, Subscriber, serve, start_session

__version__ = "0.1.0"
